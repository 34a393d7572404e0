#pragma once

#include "datasets.hpp"
#include "tabular_mdp.hpp"

namespace ilab {

/// What a mimicking learner plays at (t, s) pairs absent from the dataset.
struct Completion {
    enum class Kind { uniform, fixed_action };
    Kind kind = Kind::uniform;
    int action = 0;

    static Completion uniform() { return {}; }
    static Completion fixed(int a) { return {Kind::fixed_action, a}; }
};

/// Point mass on the observed expert action at every visited (t, s); the
/// completion elsewhere. Throws StochasticExpertError on multi-action cells.
Policy behavior_cloning(const VisitIndex& index, Completion completion = Completion::uniform());

/// Empirical action frequencies at visited (t, s), uniform elsewhere.
Policy mimic_emp(const VisitIndex& index);

/// True iff the policy is the point mass on the expert action at every
/// visited (t, s).
bool is_in_pi_mimic(const Policy& policy, const VisitIndex& index);

/// Follow-the-oracle data collection followed by behavior cloning.
Policy active_bc(const Dynamics& dynamics, ActiveOracle& oracle, std::size_t n_episodes,
                 std::uint64_t seed, Completion completion = Completion::uniform());

} // namespace ilab
