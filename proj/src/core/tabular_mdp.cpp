#include "tabular_mdp.hpp"

#include "errors.hpp"
#include "format.hpp"
#include "rng.hpp"

#include <cmath>
#include <string>

namespace ilab {

namespace {

std::size_t checked_size(int S, int A, int H, const char* what) {
    if (S <= 0 || A <= 0 || H <= 0)
        throw DimensionError(std::string(what) + ": dimensions must be positive");
    return static_cast<std::size_t>(S);
}

std::string idx(const char* name, std::initializer_list<int> ids) {
    std::string out = name;
    for (int i : ids) out += "[" + std::to_string(i) + "]";
    return out;
}

void check_simplex(std::span<const double> row, const std::string& where,
                   std::vector<Violation>& out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
            out.push_back({where + "[" + std::to_string(i) + "]", row[i],
                           where + "[" + std::to_string(i) + "] = " + shortest(row[i]) +
                               " is negative or not finite"});
        }
        sum += row[i];
    }
    if (!(std::abs(sum - 1.0) <= kProbTolerance))
        out.push_back({where, sum, where + " sum = " + shortest(sum)});
}

} // namespace

Dynamics::Dynamics(int num_states, int num_actions, int horizon, std::vector<double> rho,
                   std::vector<double> transitions)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon),
      rho_(std::move(rho)), transitions_(std::move(transitions)) {
    const auto S = checked_size(num_states, num_actions, horizon, "Dynamics");
    if (rho_.size() != S) throw DimensionError("Dynamics: rho must have num_states entries");
    const auto expected =
        static_cast<std::size_t>(horizon - 1) * S * static_cast<std::size_t>(num_actions) * S;
    if (transitions_.size() != expected)
        throw DimensionError("Dynamics: transitions must have (H-1)*S*A*S entries, got " +
                             std::to_string(transitions_.size()) + ", expected " +
                             std::to_string(expected));
}

TabularMdp::TabularMdp(Dynamics dynamics, std::vector<double> rewards)
    : dynamics_(std::move(dynamics)), rewards_(std::move(rewards)) {
    const auto expected = static_cast<std::size_t>(horizon()) * num_states() * num_actions();
    if (rewards_.size() != expected)
        throw DimensionError("TabularMdp: rewards must have H*S*A entries");
}

TabularMdp::TabularMdp(int num_states, int num_actions, int horizon, std::vector<double> rho,
                       std::vector<double> transitions, std::vector<double> rewards)
    : TabularMdp(Dynamics(num_states, num_actions, horizon, std::move(rho),
                          std::move(transitions)),
                 std::move(rewards)) {}

Policy::Policy(int num_states, int num_actions, int horizon, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon),
      probs_(std::move(probs)) {
    checked_size(num_states, num_actions, horizon, "Policy");
    const auto expected = static_cast<std::size_t>(horizon) * num_states * num_actions;
    if (probs_.size() != expected) throw DimensionError("Policy: expected H*S*A probabilities");
}

Policy Policy::uniform(int num_states, int num_actions, int horizon) {
    checked_size(num_states, num_actions, horizon, "Policy::uniform");
    return Policy(num_states, num_actions, horizon,
                  std::vector<double>(static_cast<std::size_t>(horizon) * num_states * num_actions,
                                      1.0 / num_actions));
}

Policy Policy::deterministic(int num_states, int num_actions, int horizon,
                             std::span<const int> actions) {
    checked_size(num_states, num_actions, horizon, "Policy::deterministic");
    if (actions.size() != static_cast<std::size_t>(horizon) * num_states)
        throw DimensionError("Policy::deterministic: expected H*S actions");
    std::vector<double> probs(actions.size() * num_actions, 0.0);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (actions[i] < 0 || actions[i] >= num_actions)
            throw DomainError("Policy::deterministic: action out of range");
        probs[i * num_actions + actions[i]] = 1.0;
    }
    return Policy(num_states, num_actions, horizon, std::move(probs));
}

std::optional<int> Policy::point_mass(int t, int s) const noexcept {
    auto row = dist(t, s);
    std::optional<int> hit;
    for (int a = 0; a < num_actions_; ++a) {
        if (row[a] == 1.0) {
            if (hit) return std::nullopt;
            hit = a;
        } else if (row[a] != 0.0) {
            return std::nullopt;
        }
    }
    return hit;
}

bool Policy::is_deterministic() const noexcept {
    for (int t = 0; t < horizon_; ++t)
        for (int s = 0; s < num_states_; ++s)
            if (!point_mass(t, s)) return false;
    return true;
}

std::optional<std::vector<int>> Policy::deterministic_actions() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(horizon_) * num_states_);
    for (int t = 0; t < horizon_; ++t)
        for (int s = 0; s < num_states_; ++s) {
            auto a = point_mass(t, s);
            if (!a) return std::nullopt;
            out.push_back(*a);
        }
    return out;
}

std::vector<Violation> validate_dynamics(const Dynamics& d) {
    std::vector<Violation> out;
    check_simplex(d.rho(), "rho", out);
    for (int t = 0; t + 1 < d.horizon(); ++t)
        for (int s = 0; s < d.num_states(); ++s)
            for (int a = 0; a < d.num_actions(); ++a)
                check_simplex(d.next(t, s, a), idx("transitions", {t, s, a}), out);
    return out;
}

std::vector<Violation> validate_mdp(const TabularMdp& mdp) {
    auto out = validate_dynamics(mdp.dynamics());
    for (int t = 0; t < mdp.horizon(); ++t)
        for (int s = 0; s < mdp.num_states(); ++s)
            for (int a = 0; a < mdp.num_actions(); ++a) {
                const double r = mdp.reward(t, s, a);
                if (!(r >= 0.0 && r <= 1.0)) {
                    auto where = idx("rewards", {t, s, a});
                    out.push_back({where, r, where + " = " + shortest(r) + " outside [0,1]"});
                }
            }
    return out;
}

std::vector<Violation> validate_policy(const Policy& policy) {
    std::vector<Violation> out;
    for (int t = 0; t < policy.horizon(); ++t)
        for (int s = 0; s < policy.num_states(); ++s)
            check_simplex(policy.dist(t, s), idx("dists", {t, s}), out);
    return out;
}

Policy renormalized(const Policy& policy) {
    std::vector<double> probs(policy.data().begin(), policy.data().end());
    const int A = policy.num_actions();
    for (std::size_t row = 0; row < probs.size(); row += A) {
        double sum = 0.0;
        for (int a = 0; a < A; ++a) sum += std::max(0.0, probs[row + a]);
        for (int a = 0; a < A; ++a)
            probs[row + a] = sum > 0.0 ? std::max(0.0, probs[row + a]) / sum : 1.0 / A;
    }
    return Policy(policy.num_states(), A, policy.horizon(), std::move(probs));
}

void check_dimensions(const Dynamics& d, const Policy& p) {
    if (d.num_states() != p.num_states() || d.num_actions() != p.num_actions() ||
        d.horizon() != p.horizon())
        throw DimensionError("policy dimensions (S=" + std::to_string(p.num_states()) +
                             ", A=" + std::to_string(p.num_actions()) +
                             ", H=" + std::to_string(p.horizon()) +
                             ") do not match the MDP (S=" + std::to_string(d.num_states()) +
                             ", A=" + std::to_string(d.num_actions()) +
                             ", H=" + std::to_string(d.horizon()) + ")");
}

double value(const TabularMdp& mdp, const Policy& policy) {
    const auto& d = mdp.dynamics();
    check_dimensions(d, policy);
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();

    // v holds V_{t+1}; start from the terminal zero function.
    std::vector<double> v(S, 0.0);
    std::vector<double> next_v(S, 0.0);
    for (int t = H - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (int a = 0; a < A; ++a) {
                const double p = policy.prob(t, s, a);
                if (p == 0.0) continue;
                double q = mdp.reward(t, s, a);
                if (t + 1 < H) {
                    auto row = d.next(t, s, a);
                    for (int s2 = 0; s2 < S; ++s2) q += row[s2] * v[s2];
                }
                acc += p * q;
            }
            next_v[s] = acc;
        }
        std::swap(v, next_v);
    }
    double j = 0.0;
    for (int s = 0; s < S; ++s) j += d.rho()[s] * v[s];
    return j;
}

OccupancyTable occupancy(const Dynamics& d, const Policy& policy) {
    check_dimensions(d, policy);
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();
    OccupancyTable occ{S, A, H,
                       std::vector<double>(static_cast<std::size_t>(H) * S, 0.0),
                       std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0)};
    std::copy(d.rho().begin(), d.rho().end(), occ.state_occ.begin());
    for (int t = 0; t < H; ++t) {
        for (int s = 0; s < S; ++s) {
            const double f = occ.state_occ[static_cast<std::size_t>(t) * S + s];
            for (int a = 0; a < A; ++a)
                occ.state_action_occ[(static_cast<std::size_t>(t) * S + s) * A + a] =
                    f * policy.prob(t, s, a);
        }
        if (t + 1 == H) break;
        double* next = occ.state_occ.data() + static_cast<std::size_t>(t + 1) * S;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const double m = occ.state_action(t, s, a);
                if (m == 0.0) continue;
                auto row = d.next(t, s, a);
                for (int s2 = 0; s2 < S; ++s2) next[s2] += m * row[s2];
            }
    }
    return occ;
}

double value_from_occupancy(const TabularMdp& mdp, const OccupancyTable& occ) {
    if (occ.num_states != mdp.num_states() || occ.num_actions != mdp.num_actions() ||
        occ.horizon != mdp.horizon())
        throw DimensionError("value_from_occupancy: table does not match MDP");
    double j = 0.0;
    for (std::size_t i = 0; i < occ.state_action_occ.size(); ++i)
        j += occ.state_action_occ[i] * mdp.rewards()[i];
    return j;
}

Trajectory rollout(const Dynamics& d, const Policy& policy, std::uint64_t seed) {
    check_dimensions(d, policy);
    CounterRng rng(seed);
    Trajectory tr;
    tr.reserve(d.horizon());
    int s = rng.categorical(d.rho());
    for (int t = 0; t < d.horizon(); ++t) {
        const int a = rng.categorical(policy.dist(t, s));
        tr.push_back({s, a});
        if (t + 1 < d.horizon()) s = rng.categorical(d.next(t, s, a));
    }
    return tr;
}

} // namespace ilab
