#pragma once

#include "tabular_mdp.hpp"

#include <cstdint>
#include <string>

namespace ilab {

enum class Family { lb_no_interaction, lb_known_transition, random };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

struct ExpertKind {
    enum class Kind { deterministic, stochastic };
    Kind kind = Kind::deterministic;
    double concentration = 1.0; // symmetric Dirichlet alpha, stochastic only

    static ExpertKind deterministic() { return {}; }
    static ExpertKind stochastic(double alpha) { return {Kind::stochastic, alpha}; }
};

struct InstanceParams {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int dataset_size = 0; // N; fixes zeta = 1/(N+1) in the lower-bound families
};

struct InstanceBundle {
    TabularMdp mdp;
    Policy expert;
    Family family;
    std::uint64_t seed = 0;
    InstanceParams params;
    ExpertKind expert_kind;
};

/// Index of the absorbing zero-reward state in the no-interaction family.
inline int bad_state(int num_states) { return num_states - 1; }

/**
 * Lower-bound family without interaction. A deterministic expert is drawn
 * uniformly per (t, s); playing it at any s != b pays 1 and renews the state
 * from rho = (zeta, ..., zeta, 1 - (S-2) zeta, 0), zeta = 1/(N+1); any other
 * action moves to the bad state b = S-1, which is absorbing and pays 0.
 * Requires S >= 3, A >= 2, N >= 1 and S - 2 <= N + 1.
 */
InstanceBundle make_lb_no_interaction(int S, int A, int H, int N, std::uint64_t seed);

/**
 * Lower-bound family with known transitions: every state is absorbing,
 * rho = (zeta, ..., zeta, 1 - (S-1) zeta), reward 1 iff the expert action is
 * played. Requires S >= 2, A >= 2, N >= 1 and S - 1 <= N + 1.
 */
InstanceBundle make_lb_known_transition(int S, int A, int H, int N, std::uint64_t seed);

/// Dense random instance: Dirichlet(1) rho and kernels, U[0,1] rewards.
InstanceBundle make_random(int S, int A, int H, std::uint64_t seed,
                           ExpertKind expert_kind = ExpertKind::deterministic());

/// Dispatches on `family`; N is ignored by the random family.
InstanceBundle make_instance(Family family, const InstanceParams& params, std::uint64_t seed,
                             ExpertKind expert_kind = ExpertKind::deterministic());

} // namespace ilab
