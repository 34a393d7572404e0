#pragma once

#include "datasets.hpp"
#include "mimic_md.hpp"
#include "tabular_mdp.hpp"

#include <functional>

namespace ilab::enumeration {

// Brute-force reference computations by explicit enumeration of every
// positive-probability trajectory. Exponential in H; meant for instances with
// a few hundred trajectories at most. None of these reuse the DP code paths.

using Visitor = std::function<void(const Trajectory&, double probability)>;

/// Calls `visit` once per trajectory with positive probability.
void for_each_trajectory(const Dynamics& dynamics, const Policy& policy, const Visitor& visit);

std::size_t count_trajectories(const Dynamics& dynamics, const Policy& policy);

double value(const TabularMdp& mdp, const Policy& policy);
OccupancyTable occupancy(const Dynamics& dynamics, const Policy& policy);
double pop_01_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner);
double pop_tv_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner);
EventTable event_probabilities(const Dynamics& dynamics, const Policy& policy,
                               const VisitIndex& index_d1);

} // namespace ilab::enumeration
