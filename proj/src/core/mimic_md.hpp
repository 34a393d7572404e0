#pragma once

#include "datasets.hpp"
#include "tabular_mdp.hpp"

#include <cstdint>
#include <vector>

namespace ilab {

/// Pr_pi[T_t(s,a)]: probability of being at (s, a) at time t after having
/// visited, at some tau <= t, a state outside S_tau(D1). Stored [t][s][a].
struct EventTable {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> probs;

    double at(int t, int s, int a) const noexcept {
        return probs[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
    }
    /// Sum over (s, a) at time t.
    double layer_mass(int t) const noexcept;
};

/// g[t][s][flag] with flag = 1 iff some tau <= t had s_tau outside S_tau(D1).
struct AugmentedOccupancy {
    int num_states = 0;
    int horizon = 0;
    std::vector<double> g;

    double at(int t, int s, int flag) const noexcept {
        return g[(static_cast<std::size_t>(t) * num_states + s) * 2 + flag];
    }
};

AugmentedOccupancy augmented_occupancy(const Dynamics& dynamics, const Policy& policy,
                                       const VisitIndex& index_d1);

EventTable event_probabilities(const Dynamics& dynamics, const Policy& policy,
                               const VisitIndex& index_d1);

/// Fraction of D2 trajectories in T_t(s,a); one forward scan per trajectory.
EventTable empirical_event_fractions(const Dataset& d2, const VisitIndex& index_d1);

double l1_distance(const EventTable& a, const EventTable& b);

/// OPT objective; throws DomainError unless `candidate` mimics the expert on D1.
double md_objective(const Dynamics& dynamics, const Policy& candidate,
                    const VisitIndex& index_d1, const EventTable& target);

/// Objective and its subgradient with respect to every pi_t(a|s), computed by
/// an adjoint pass through the flagged forward recursion. `grad` is resized
/// to H*S*A. Membership in Pi_mimic is not checked.
double md_objective_and_subgradient(const Dynamics& dynamics, const Policy& candidate,
                                    const VisitIndex& index_d1, const EventTable& target,
                                    std::vector<double>& grad);

/// Free (t, s) cells (s outside S_t(D1)) in lexicographic order; all other
/// cells are pinned to the observed expert action.
class FreeParameterization {
public:
    struct Cell {
        int t = 0;
        int s = 0;
    };

    explicit FreeParameterization(const VisitIndex& index_d1);

    const std::vector<Cell>& cells() const noexcept { return cells_; }
    int num_actions() const noexcept { return num_actions_; }

    /// `values` holds one simplex vector per free cell, [cell][a].
    Policy to_policy(std::span<const double> values) const;
    /// One action per free cell.
    Policy deterministic_completion(std::span<const int> choices) const;

private:
    int num_states_;
    int num_actions_;
    int horizon_;
    std::vector<int> pinned_;  // [t][s], -1 for free cells
    std::vector<Cell> cells_;
};

/// log2 of the number of deterministic completions: #free * log2|A|.
double completion_bits(const VisitIndex& index_d1);

struct OptSolution {
    Policy policy;
    double objective = 0.0;
    /// Certified additive gap to the optimum over deterministic completions
    /// (0 for the exact solver, objective minus a lower bound otherwise).
    double epsilon = 0.0;
    std::uint64_t nodes = 0;
};

struct ExactSolverOptions {
    /// Search nodes (candidate actions tried) before GuardExceededError.
    std::uint64_t max_nodes = std::uint64_t{1} << 24;
};

/// Global minimizer of OPT over deterministic completions of the free cells,
/// lexicographically first among ties. Depth-first branch and bound in
/// (t, s, a) order; a subtree is pruned only when its lower bound cannot beat
/// the incumbent, so the result equals exhaustive enumeration.
OptSolution solve_opt_exact(const Dynamics& dynamics, const VisitIndex& index_d1,
                            const EventTable& target, ExactSolverOptions options = {});

/// Valid lower bound on OPT over all of Pi_mimic(D1), deterministic or not.
double opt_lower_bound(const Dynamics& dynamics, const VisitIndex& index_d1,
                       const EventTable& target);

struct SubgradientOptions {
    int restarts = 8;
    int steps = 500;
    double step_scale = 0.5; // step = step_scale / sqrt(k)
    std::uint64_t seed = 0;
};

OptSolution solve_opt_subgradient(const Dynamics& dynamics, const VisitIndex& index_d1,
                                  const EventTable& target, SubgradientOptions options = {});

/// Euclidean projection onto the probability simplex, in place.
void project_to_simplex(std::span<double> v);

struct MdSolverConfig {
    enum class Kind { exact, subgradient };
    Kind kind = Kind::exact;
    ExactSolverOptions exact;
    SubgradientOptions subgradient;
};

struct MimicMdResult {
    Policy policy;
    double objective = 0.0;
    double epsilon = 0.0;
    SplitPair split;
};

/// Split -> index D1 -> empirical targets from D2 -> solve OPT. The split uses
/// child_seed(seed, 0) and the subgradient solver child_seed(seed, 1).
MimicMdResult mimic_md(const Dynamics& dynamics, const Dataset& dataset, std::uint64_t seed,
                       const MdSolverConfig& solver = {});

} // namespace ilab
