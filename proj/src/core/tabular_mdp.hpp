#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ilab {

/// Absolute tolerance for "sums to one" checks on probability vectors.
inline constexpr double kProbTolerance = 1e-9;

struct Step {
    int state = 0;
    int action = 0;
    friend bool operator==(const Step&, const Step&) = default;
};

/// One episode: exactly H (state, action) pairs, time-ordered.
using Trajectory = std::vector<Step>;

/**
 * Reward-free part of an episodic MDP: initial distribution and the
 * time-indexed transition kernels P_t(.|s,a) for t = 0..H-2 (no transition
 * follows the last action). Learners only ever see this view.
 *
 * Storage is dense, row-major [t][s][a][s'].
 */
class Dynamics {
public:
    Dynamics(int num_states, int num_actions, int horizon, std::vector<double> rho,
             std::vector<double> transitions);

    int num_states() const noexcept { return num_states_; }
    int num_actions() const noexcept { return num_actions_; }
    int horizon() const noexcept { return horizon_; }

    std::span<const double> rho() const noexcept { return rho_; }
    std::span<const double> transitions() const noexcept { return transitions_; }

    /// P_t(.|s,a); requires t < horizon - 1.
    std::span<const double> next(int t, int s, int a) const noexcept {
        const auto S = static_cast<std::size_t>(num_states_);
        const auto off = ((static_cast<std::size_t>(t) * S + s) * num_actions_ + a) * S;
        return {transitions_.data() + off, S};
    }

private:
    int num_states_;
    int num_actions_;
    int horizon_;
    std::vector<double> rho_;
    std::vector<double> transitions_;
};

/// Dynamics plus rewards r_t(s,a) for t = 0..H-1, stored [t][s][a].
class TabularMdp {
public:
    TabularMdp(Dynamics dynamics, std::vector<double> rewards);
    TabularMdp(int num_states, int num_actions, int horizon, std::vector<double> rho,
               std::vector<double> transitions, std::vector<double> rewards);

    const Dynamics& dynamics() const noexcept { return dynamics_; }
    int num_states() const noexcept { return dynamics_.num_states(); }
    int num_actions() const noexcept { return dynamics_.num_actions(); }
    int horizon() const noexcept { return dynamics_.horizon(); }

    std::span<const double> rewards() const noexcept { return rewards_; }
    double reward(int t, int s, int a) const noexcept {
        return rewards_[(static_cast<std::size_t>(t) * num_states() + s) * num_actions() + a];
    }

private:
    Dynamics dynamics_;
    std::vector<double> rewards_;
};

/// Non-stationary stochastic policy, pi_t(.|s) stored [t][s][a].
class Policy {
public:
    Policy(int num_states, int num_actions, int horizon, std::vector<double> probs);

    static Policy uniform(int num_states, int num_actions, int horizon);
    /// `actions` holds one action per (t, s), row-major [t][s].
    static Policy deterministic(int num_states, int num_actions, int horizon,
                                std::span<const int> actions);

    int num_states() const noexcept { return num_states_; }
    int num_actions() const noexcept { return num_actions_; }
    int horizon() const noexcept { return horizon_; }

    std::span<const double> data() const noexcept { return probs_; }
    std::span<const double> dist(int t, int s) const noexcept {
        return {probs_.data() + (static_cast<std::size_t>(t) * num_states_ + s) * num_actions_,
                static_cast<std::size_t>(num_actions_)};
    }
    double prob(int t, int s, int a) const noexcept { return dist(t, s)[a]; }

    /// The action carrying all the mass at (t, s), if the row is a point mass.
    std::optional<int> point_mass(int t, int s) const noexcept;
    bool is_deterministic() const noexcept;
    /// Row-major [t][s] action table when every row is a point mass.
    std::optional<std::vector<int>> deterministic_actions() const;

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    int num_states_;
    int num_actions_;
    int horizon_;
    std::vector<double> probs_;
};

struct OccupancyTable {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> state_occ;         // [t][s]
    std::vector<double> state_action_occ;  // [t][s][a]

    double state(int t, int s) const noexcept {
        return state_occ[static_cast<std::size_t>(t) * num_states + s];
    }
    double state_action(int t, int s, int a) const noexcept {
        return state_action_occ[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
    }
};

struct Violation {
    std::string location;  // e.g. "rho", "transitions[2][0][1]"
    double residual = 0.0; // offending sum or value
    std::string message;
};

std::vector<Violation> validate_dynamics(const Dynamics& dynamics);
std::vector<Violation> validate_mdp(const TabularMdp& mdp);
std::vector<Violation> validate_policy(const Policy& policy);

/// Explicit renormalization of every row; rows with zero mass become uniform.
Policy renormalized(const Policy& policy);

/// Throws DimensionError unless the policy matches the MDP's (S, A, H).
void check_dimensions(const Dynamics& dynamics, const Policy& policy);

/// J(pi) by backward dynamic programming.
double value(const TabularMdp& mdp, const Policy& policy);

/// J(pi) as sum_t <state_action_occ[t], r_t>; the second route to value().
double value_from_occupancy(const TabularMdp& mdp, const OccupancyTable& occ);

/// Forward recursion f^1 = rho, f^{t+1}(s') = sum f^t(s) pi_t(a|s) P_t(s'|s,a).
OccupancyTable occupancy(const Dynamics& dynamics, const Policy& policy);

/// Samples one episode; the trajectory is a pure function of `seed`.
Trajectory rollout(const Dynamics& dynamics, const Policy& policy, std::uint64_t seed);

} // namespace ilab
