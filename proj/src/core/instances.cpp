#include "instances.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <vector>

namespace ilab {

std::string to_string(Family family) {
    switch (family) {
    case Family::lb_no_interaction: return "lb_no_interaction";
    case Family::lb_known_transition: return "lb_known_transition";
    case Family::random: return "random";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "lb_no_interaction") return Family::lb_no_interaction;
    if (name == "lb_known_transition") return Family::lb_known_transition;
    if (name == "random") return Family::random;
    throw ParseError("unknown family '" + name +
                     "' (expected lb_no_interaction, lb_known_transition or random)");
}

namespace {

std::vector<int> uniform_expert(int S, int A, int H, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<int> actions(static_cast<std::size_t>(H) * S);
    for (auto& a : actions) a = static_cast<int>(rng.below(static_cast<std::uint64_t>(A)));
    return actions;
}

std::size_t tsa(int t, int s, int a, int S, int A) {
    return (static_cast<std::size_t>(t) * S + s) * A + a;
}

} // namespace

InstanceBundle make_lb_no_interaction(int S, int A, int H, int N, std::uint64_t seed) {
    if (S < 3 || A < 2 || H < 1 || N < 1)
        throw DomainError("make_lb_no_interaction: requires S >= 3, A >= 2, H >= 1, N >= 1");
    if (S - 2 > N + 1)
        throw DomainError("make_lb_no_interaction: rho needs S - 2 <= N + 1 to stay nonnegative");
    const int b = bad_state(S);
    const double zeta = 1.0 / (N + 1.0);
    std::vector<double> rho(S, zeta);
    rho[S - 2] = 1.0 - (S - 2) * zeta;
    rho[b] = 0.0;

    const auto expert = uniform_expert(S, A, H, child_seed(seed, 0));
    std::vector<double> trans(static_cast<std::size_t>(H - 1) * S * A * S, 0.0);
    for (int t = 0; t + 1 < H; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double* row = trans.data() + tsa(t, s, a, S, A) * S;
                if (s != b && a == expert[static_cast<std::size_t>(t) * S + s])
                    std::copy(rho.begin(), rho.end(), row);
                else
                    row[b] = 1.0;
            }
    std::vector<double> rewards(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s)
            if (s != b) rewards[tsa(t, s, expert[static_cast<std::size_t>(t) * S + s], S, A)] = 1.0;

    return {TabularMdp(S, A, H, rho, std::move(trans), std::move(rewards)),
            Policy::deterministic(S, A, H, expert),
            Family::lb_no_interaction,
            seed,
            {S, A, H, N},
            ExpertKind::deterministic()};
}

InstanceBundle make_lb_known_transition(int S, int A, int H, int N, std::uint64_t seed) {
    if (S < 2 || A < 2 || H < 1 || N < 1)
        throw DomainError("make_lb_known_transition: requires S >= 2, A >= 2, H >= 1, N >= 1");
    if (S - 1 > N + 1)
        throw DomainError("make_lb_known_transition: rho needs S - 1 <= N + 1 to stay nonnegative");
    const double zeta = 1.0 / (N + 1.0);
    std::vector<double> rho(S, zeta);
    rho[S - 1] = 1.0 - (S - 1) * zeta;

    const auto expert = uniform_expert(S, A, H, child_seed(seed, 0));
    std::vector<double> trans(static_cast<std::size_t>(H - 1) * S * A * S, 0.0);
    for (int t = 0; t + 1 < H; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) trans[tsa(t, s, a, S, A) * S + s] = 1.0;
    std::vector<double> rewards(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s)
            rewards[tsa(t, s, expert[static_cast<std::size_t>(t) * S + s], S, A)] = 1.0;

    return {TabularMdp(S, A, H, std::move(rho), std::move(trans), std::move(rewards)),
            Policy::deterministic(S, A, H, expert),
            Family::lb_known_transition,
            seed,
            {S, A, H, N},
            ExpertKind::deterministic()};
}

InstanceBundle make_random(int S, int A, int H, std::uint64_t seed, ExpertKind expert_kind) {
    if (S < 1 || A < 1 || H < 1) throw DomainError("make_random: dimensions must be positive");
    if (expert_kind.kind == ExpertKind::Kind::stochastic && !(expert_kind.concentration > 0.0))
        throw DomainError("make_random: concentration must be positive");

    CounterRng dyn_rng(child_seed(seed, 1));
    auto simplex = [&](double* out, int n) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += (out[i] = dyn_rng.exponential());
        for (int i = 0; i < n; ++i) out[i] /= sum;
    };
    std::vector<double> rho(S);
    simplex(rho.data(), S);
    std::vector<double> trans(static_cast<std::size_t>(H - 1) * S * A * S);
    for (std::size_t row = 0; row < trans.size(); row += S) simplex(trans.data() + row, S);

    CounterRng reward_rng(child_seed(seed, 2));
    std::vector<double> rewards(static_cast<std::size_t>(H) * S * A);
    for (auto& r : rewards) r = reward_rng.uniform();

    Policy expert = [&] {
        if (expert_kind.kind == ExpertKind::Kind::deterministic)
            return Policy::deterministic(S, A, H, uniform_expert(S, A, H, child_seed(seed, 0)));
        CounterRng rng(child_seed(seed, 0));
        std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
        for (std::size_t row = 0; row < probs.size(); row += A) {
            double sum = 0.0;
            for (int a = 0; a < A; ++a) sum += (probs[row + a] = rng.gamma(expert_kind.concentration));
            if (sum > 0.0) {
                for (int a = 0; a < A; ++a) probs[row + a] /= sum;
            } else {
                // Every gamma draw underflowed (tiny alpha): fall back to one vertex.
                probs[row + rng.below(static_cast<std::uint64_t>(A))] = 1.0;
            }
        }
        return Policy(S, A, H, std::move(probs));
    }();

    return {TabularMdp(S, A, H, std::move(rho), std::move(trans), std::move(rewards)),
            std::move(expert),
            Family::random,
            seed,
            {S, A, H, 0},
            expert_kind};
}

InstanceBundle make_instance(Family family, const InstanceParams& p, std::uint64_t seed,
                             ExpertKind expert_kind) {
    switch (family) {
    case Family::lb_no_interaction:
        return make_lb_no_interaction(p.num_states, p.num_actions, p.horizon, p.dataset_size, seed);
    case Family::lb_known_transition:
        return make_lb_known_transition(p.num_states, p.num_actions, p.horizon, p.dataset_size,
                                        seed);
    case Family::random: {
        auto bundle = make_random(p.num_states, p.num_actions, p.horizon, seed, expert_kind);
        bundle.params.dataset_size = p.dataset_size;
        return bundle;
    }
    }
    throw DomainError("make_instance: unknown family");
}

} // namespace ilab
