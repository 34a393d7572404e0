#include "analytics.hpp"

#include "errors.hpp"
#include "mimic_md.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ilab {

namespace {

void require_positive(double x, const char* who, const char* what) {
    if (!(x > 0.0)) throw DomainError(std::string(who) + ": " + what + " must be positive");
}

void check_pair(const TabularMdp& mdp, const Policy& expert, const Policy& learner) {
    check_dimensions(mdp.dynamics(), expert);
    check_dimensions(mdp.dynamics(), learner);
}

} // namespace

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DimensionError("tv_distance: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
}

double pop_01_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner) {
    check_pair(mdp, expert, learner);
    const auto actions = expert.deterministic_actions();
    if (!actions) throw StochasticExpertError("pop_01_risk: expert must be deterministic");
    const auto occ = occupancy(mdp.dynamics(), expert);
    const int S = mdp.num_states();
    const int H = mdp.horizon();
    double acc = 0.0;
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s) {
            const int a = (*actions)[static_cast<std::size_t>(t) * S + s];
            acc += occ.state(t, s) * (1.0 - learner.prob(t, s, a));
        }
    return acc / H;
}

double emp_01_risk(const VisitIndex& index, const Policy& learner) {
    index.require_deterministic("emp_01_risk");
    if (learner.num_states() != index.num_states() ||
        learner.num_actions() != index.num_actions() || learner.horizon() != index.horizon())
        throw DimensionError("emp_01_risk: learner does not match the index");
    if (index.num_trajectories() == 0) return 0.0;
    const double n = static_cast<double>(index.num_trajectories());
    double acc = 0.0;
    for (int t = 0; t < index.horizon(); ++t)
        for (int s = 0; s < index.num_states(); ++s) {
            const auto ea = index.expert_action(t, s);
            if (ea.kind != ExpertAction::Kind::unique) continue;
            acc += (index.visits(t, s) / n) * (1.0 - learner.prob(t, s, ea.action));
        }
    return acc / index.horizon();
}

double pop_tv_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner) {
    check_pair(mdp, expert, learner);
    const auto occ = occupancy(mdp.dynamics(), expert);
    double acc = 0.0;
    for (int t = 0; t < mdp.horizon(); ++t)
        for (int s = 0; s < mdp.num_states(); ++s)
            acc += occ.state(t, s) * tv_distance(learner.dist(t, s), expert.dist(t, s));
    return acc / mdp.horizon();
}

ReductionGap reduction_gap(const TabularMdp& mdp, const Policy& expert, const Policy& learner) {
    const double H = mdp.horizon();
    const double lhs = value(mdp, expert) - value(mdp, learner);
    const double rhs = std::min(H, H * H * pop_tv_risk(mdp, expert, learner));
    return {lhs, rhs};
}

double unobserved_visit_probability(const Dynamics& dynamics, const Policy& policy,
                                    const VisitIndex& index) {
    const auto aug = augmented_occupancy(dynamics, policy, index);
    double acc = 0.0;
    for (int s = 0; s < dynamics.num_states(); ++s) acc += aug.at(dynamics.horizon() - 1, s, 1);
    return acc;
}

double expected_missing_mass(std::span<const double> dist, std::uint64_t n) {
    double acc = 0.0;
    for (double p : dist) acc += p * std::pow(1.0 - p, static_cast<double>(n));
    return acc;
}

double missing_mass_sample(std::span<const double> dist, std::uint64_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<char> seen(dist.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) seen[rng.categorical(dist)] = 1;
    double acc = 0.0;
    for (std::size_t x = 0; x < dist.size(); ++x)
        if (!seen[x]) acc += dist[x];
    return acc;
}

double missing_mass_deviation(std::size_t support, std::uint64_t n, double delta) {
    return 3.0 * std::sqrt(static_cast<double>(support)) * std::log(1.0 / delta) /
           static_cast<double>(n);
}

TailCheck tail_check(std::span<const double> dist, std::uint64_t n, double delta,
                     std::size_t replicates, std::uint64_t seed) {
    if (!(delta > 0.0 && delta <= 0.1)) throw DomainError("tail_check: delta must be in (0, 1/10]");
    if (n == 0) throw DomainError("tail_check: n must be positive");
    if (replicates == 0) throw DomainError("tail_check: need at least one replicate");
    TailCheck out;
    out.expected = expected_missing_mass(dist, n);
    out.threshold = missing_mass_deviation(dist.size(), n, delta);
    std::size_t exceed = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        const double m = missing_mass_sample(dist, n, child_seed(seed, r));
        sum += m;
        sum_sq += m * m;
        if (m - out.expected >= out.threshold) ++exceed;
    }
    const double R = static_cast<double>(replicates);
    out.coverage = static_cast<double>(exceed) / R;
    out.mean = sum / R;
    const double var = replicates > 1 ? std::max(0.0, (sum_sq - R * out.mean * out.mean) / (R - 1))
                                      : 0.0;
    out.stderr_mean = std::sqrt(var / R);
    return out;
}

double min2_bound(std::uint64_t n) {
    if (n <= 1) throw DomainError("min2_bound: n must exceed 1");
    return std::log(static_cast<double>(n)) / static_cast<double>(n);
}

GridCheck min2_grid_check(std::uint64_t n, std::size_t points) {
    const double bound = min2_bound(n);
    if (points < 2) throw DomainError("min2_grid_check: need at least two grid points");
    GridCheck out;
    for (std::size_t i = 0; i < points; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(points - 1);
        const double lhs = std::min(x, std::pow(1.0 - x, static_cast<double>(n)));
        if (lhs > bound) {
            ++out.violations;
            if (lhs - bound > out.max_slack_deficit) {
                out.max_slack_deficit = lhs - bound;
                out.worst_x = x;
            }
        }
    }
    return out;
}

double bound_bc_expected(double S, double H, double N) {
    require_positive(S, "bound_bc_expected", "S");
    require_positive(H, "bound_bc_expected", "H");
    require_positive(N, "bound_bc_expected", "N");
    return std::min(H, (4.0 / 9.0) * S * H * H / N);
}

double bound_bc_highprob(double S, double H, double N, double delta) {
    require_positive(S, "bound_bc_highprob", "S");
    require_positive(H, "bound_bc_highprob", "H");
    require_positive(N, "bound_bc_highprob", "N");
    if (!(delta > 0.0 && delta <= std::min(1.0, H / 10.0)))
        throw DomainError("bound_bc_highprob: delta must be in (0, min{1, H/10}]");
    return H * H * (4.0 * S / (9.0 * N) + 3.0 * std::sqrt(S) * std::log(H / delta) / N);
}

double bound_mimic_emp(double S, double H, double N) {
    require_positive(S, "bound_mimic_emp", "S");
    require_positive(H, "bound_mimic_emp", "H");
    if (!(N > 1.0)) throw DomainError("bound_mimic_emp: N must exceed 1");
    return std::min(H, S * H * H * std::log(N) / N);
}

double bound_mimic_md_expected(double S, double H, double N) {
    require_positive(S, "bound_mimic_md_expected", "S");
    require_positive(H, "bound_mimic_md_expected", "H");
    require_positive(N, "bound_mimic_md_expected", "N");
    return 2.0 * std::min(std::sqrt(8.0 * S * H * H / N), (8.0 / 3.0) * S * std::pow(H, 1.5) / N);
}

double bound_mimic_md_highprob(double S, double H, double N, double delta) {
    require_positive(S, "bound_mimic_md_highprob", "S");
    require_positive(H, "bound_mimic_md_highprob", "H");
    require_positive(N, "bound_mimic_md_highprob", "N");
    if (!(delta > 0.0 && delta < std::min(1.0, H / 5.0)))
        throw DomainError("bound_mimic_md_highprob: delta must be in (0, min{1, H/5})");
    const double L = std::log(2.0 * S * H / delta);
    return 2.0 * (S * std::pow(H, 1.5) / N) * std::sqrt(1.0 + 3.0 * L / std::sqrt(S)) *
           std::sqrt(L);
}

} // namespace ilab
