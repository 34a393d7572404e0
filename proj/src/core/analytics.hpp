#pragma once

#include "datasets.hpp"
#include "tabular_mdp.hpp"

#include <cstdint>
#include <span>

namespace ilab {

// Risk functionals -----------------------------------------------------------

/// (1/H) sum_t E_{s ~ f^t_expert}[1 - learner_t(expert_t(s)|s)].
/// Throws StochasticExpertError unless the expert is deterministic.
double pop_01_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner);

/// Same functional under the empirical state distribution of the dataset.
double emp_01_risk(const VisitIndex& index, const Policy& learner);

/// (1/H) sum_t E_{s ~ f^t_expert}[TV(learner_t(.|s), expert_t(.|s))].
double pop_tv_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner);

/// Half L1 distance, summed in ascending index order.
double tv_distance(std::span<const double> p, std::span<const double> q);

struct ReductionGap {
    double lhs = 0.0; // J(expert) - J(learner)
    double rhs = 0.0; // min{H, H^2 * pop_tv_risk}
};

ReductionGap reduction_gap(const TabularMdp& mdp, const Policy& expert, const Policy& learner);

/// Probability that a rollout of `policy` visits some s_t outside S_t(D).
double unobserved_visit_probability(const Dynamics& dynamics, const Policy& policy,
                                    const VisitIndex& index);

// Missing mass -----------------------------------------------------------------

/// E[m_0] = sum_x nu(x) (1 - nu(x))^n.
double expected_missing_mass(std::span<const double> dist, std::uint64_t n);

/// Realized missing mass of n i.i.d. draws from `dist`.
double missing_mass_sample(std::span<const double> dist, std::uint64_t n, std::uint64_t seed);

/// Deviation threshold 3 sqrt(|X|) log(1/delta) / n of the sub-Gaussian tail.
double missing_mass_deviation(std::size_t support, std::uint64_t n, double delta);

struct TailCheck {
    double coverage = 0.0;  // fraction of replicates with m_0 - E[m_0] >= threshold
    double threshold = 0.0;
    double mean = 0.0;      // Monte Carlo mean of m_0
    double stderr_mean = 0.0;
    double expected = 0.0;  // exact E[m_0]
};

/// Replicate r uses child_seed(seed, r). Requires delta in (0, 1/10].
TailCheck tail_check(std::span<const double> dist, std::uint64_t n, double delta,
                     std::size_t replicates, std::uint64_t seed);

// Closed-form bounds ---------------------------------------------------------

/// ln(n)/n; requires n > 1.
double min2_bound(std::uint64_t n);

struct GridCheck {
    std::size_t violations = 0;
    double max_slack_deficit = 0.0; // max over grid of min{x,(1-x)^n} - bound, clipped at 0
    double worst_x = 0.0;
};

/// Checks min{x, (1-x)^n} <= ln(n)/n on `points` equispaced x in [0, 1].
GridCheck min2_grid_check(std::uint64_t n, std::size_t points = 10000);

/// min{H, (4/9) S H^2 / N}: population 0-1 risk of a mimicking policy is at
/// most (4/9) S / N in expectation, and suboptimality is at most H^2 times it.
double bound_bc_expected(double S, double H, double N);

/// H^2 (4S/(9N) + 3 sqrt(S) log(H/delta)/N), for delta in (0, min{1, H/10}].
double bound_bc_highprob(double S, double H, double N, double delta);

/// min{H, S H^2 ln(N) / N}, N > 1. Constant 1: H times the union bound
/// S H ln(N)/N on reaching a state missing from the dataset.
double bound_mimic_emp(double S, double H, double N);

/// 2 min{sqrt(8 S H^2 / N), (8/3) S H^{3/2} / N}; the factor 2 carries the
/// L1 estimation error through the minimum-distance triangle inequality.
double bound_mimic_md_expected(double S, double H, double N);

/// 2 (S H^{3/2} / N) (1 + 3 L / sqrt(S))^{1/2} sqrt(L) with L = log(2 S H / delta),
/// for delta in (0, min{1, H/5}). Hidden constant taken as 1.
double bound_mimic_md_highprob(double S, double H, double N, double delta);

} // namespace ilab
