#pragma once

#include "tabular_mdp.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ilab {

struct Dataset {
    int horizon = 0;
    std::vector<Trajectory> trajectories;

    std::size_t size() const noexcept { return trajectories.size(); }
    bool empty() const noexcept { return trajectories.empty(); }
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// N independent expert rollouts; trajectory i uses child_seed(seed, i).
Dataset sample_dataset(const Dynamics& dynamics, const Policy& expert, std::size_t n,
                       std::uint64_t seed);

struct ExpertAction {
    enum class Kind { unvisited, unique, multiple };
    Kind kind = Kind::unvisited;
    int action = -1; // meaningful only for Kind::unique
};

/**
 * Per-time visitation summary of a dataset: the visited sets S_t(D), the
 * (t, s, a) counts and, where exactly one action was observed at (t, s), that
 * action.
 */
class VisitIndex {
public:
    VisitIndex(const Dataset& dataset, int num_states, int num_actions, int horizon);

    int num_states() const noexcept { return num_states_; }
    int num_actions() const noexcept { return num_actions_; }
    int horizon() const noexcept { return horizon_; }
    std::size_t num_trajectories() const noexcept { return num_trajectories_; }

    int count(int t, int s, int a) const noexcept { return counts_[cell(t, s) * num_actions_ + a]; }
    int visits(int t, int s) const noexcept { return visits_[cell(t, s)]; }
    bool visited(int t, int s) const noexcept { return visits_[cell(t, s)] > 0; }
    ExpertAction expert_action(int t, int s) const noexcept { return expert_[cell(t, s)]; }

    /// True when some visited (t, s) shows more than one action.
    bool has_multi_action() const noexcept { return multi_action_; }

    /// Throws StochasticExpertError naming the first multi-action cell.
    void require_deterministic(const char* who) const;

private:
    std::size_t cell(int t, int s) const noexcept {
        return static_cast<std::size_t>(t) * num_states_ + s;
    }

    int num_states_;
    int num_actions_;
    int horizon_;
    std::size_t num_trajectories_ = 0;
    std::vector<int> counts_;
    std::vector<int> visits_;
    std::vector<ExpertAction> expert_;
    bool multi_action_ = false;
};

inline VisitIndex build_visit_index(const Dataset& dataset, int num_states, int num_actions,
                                    int horizon) {
    return VisitIndex(dataset, num_states, num_actions, horizon);
}

struct SplitPair {
    Dataset d1;
    Dataset d2;
    std::vector<std::size_t> permutation; // permuted order of input indices
};

/// Seeded Fisher-Yates permutation; d1 takes the first floor(N/2).
SplitPair split_dataset(const Dataset& dataset, std::uint64_t seed);

/// Answers pi*_t(.|s) at the learner's current state and logs every query.
class ActiveOracle {
public:
    struct Query {
        int t = 0;
        int state = 0;
    };

    explicit ActiveOracle(Policy expert) : expert_(std::move(expert)) {}

    std::span<const double> query(int t, int state);
    const std::vector<Query>& log() const noexcept { return log_; }
    std::size_t num_queries() const noexcept { return log_.size(); }
    int num_states() const noexcept { return expert_.num_states(); }
    int num_actions() const noexcept { return expert_.num_actions(); }
    int horizon() const noexcept { return expert_.horizon(); }

private:
    Policy expert_;
    std::vector<Query> log_;
};

struct ActiveHistory {
    const std::vector<Trajectory>& completed;
    const Trajectory& current;
};

/// Maps (history, t, current state, oracle answer) to the action distribution
/// the learner plays at this step.
using ActiveStrategy = std::function<std::vector<double>(
    const ActiveHistory&, int t, int state, std::span<const double> oracle_answer)>;

struct ActiveCollection {
    Dataset dataset;
    /// Oracle answer at every step, in episode-major order, [step][a].
    std::vector<std::vector<double>> answers;
};

/// Runs `n_episodes` learner-driven episodes; episode i uses child_seed(seed, i)
/// and consumes random draws in the same order as rollout().
ActiveCollection active_collect(const Dynamics& dynamics, const ActiveStrategy& strategy,
                                ActiveOracle& oracle, std::size_t n_episodes,
                                std::uint64_t seed);

/// Strategy that plays the oracle's answer verbatim.
ActiveStrategy follow_oracle_strategy();

} // namespace ilab
