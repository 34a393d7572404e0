#include "learners.hpp"

#include "errors.hpp"

namespace ilab {

Policy behavior_cloning(const VisitIndex& index, Completion completion) {
    index.require_deterministic("behavior_cloning");
    const int S = index.num_states();
    const int A = index.num_actions();
    const int H = index.horizon();
    if (completion.kind == Completion::Kind::fixed_action &&
        (completion.action < 0 || completion.action >= A))
        throw DomainError("behavior_cloning: completion action out of range");

    std::vector<double> probs(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s) {
            double* row = probs.data() + (static_cast<std::size_t>(t) * S + s) * A;
            const auto ea = index.expert_action(t, s);
            if (ea.kind == ExpertAction::Kind::unique) {
                row[ea.action] = 1.0;
            } else if (completion.kind == Completion::Kind::fixed_action) {
                row[completion.action] = 1.0;
            } else {
                for (int a = 0; a < A; ++a) row[a] = 1.0 / A;
            }
        }
    return Policy(S, A, H, std::move(probs));
}

Policy mimic_emp(const VisitIndex& index) {
    const int S = index.num_states();
    const int A = index.num_actions();
    const int H = index.horizon();
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s) {
            double* row = probs.data() + (static_cast<std::size_t>(t) * S + s) * A;
            const int n = index.visits(t, s);
            for (int a = 0; a < A; ++a)
                row[a] = n > 0 ? static_cast<double>(index.count(t, s, a)) / n : 1.0 / A;
        }
    return Policy(S, A, H, std::move(probs));
}

bool is_in_pi_mimic(const Policy& policy, const VisitIndex& index) {
    index.require_deterministic("is_in_pi_mimic");
    if (policy.num_states() != index.num_states() || policy.num_actions() != index.num_actions() ||
        policy.horizon() != index.horizon())
        throw DimensionError("is_in_pi_mimic: policy does not match the index");
    for (int t = 0; t < index.horizon(); ++t)
        for (int s = 0; s < index.num_states(); ++s) {
            const auto ea = index.expert_action(t, s);
            if (ea.kind != ExpertAction::Kind::unique) continue;
            if (policy.point_mass(t, s) != ea.action) return false;
        }
    return true;
}

Policy active_bc(const Dynamics& dynamics, ActiveOracle& oracle, std::size_t n_episodes,
                 std::uint64_t seed, Completion completion) {
    auto collected = active_collect(dynamics, follow_oracle_strategy(), oracle, n_episodes, seed);
    VisitIndex index(collected.dataset, dynamics.num_states(), dynamics.num_actions(),
                     dynamics.horizon());
    return behavior_cloning(index, completion);
}

} // namespace ilab
