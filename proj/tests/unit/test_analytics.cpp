#include <doctest.h>

#include "analytics.hpp"
#include "enumeration.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "instances.hpp"
#include "learners.hpp"

#include <cmath>

using namespace ilab;

TEST_CASE("0-1 risk: expert, adversarial learner, enumeration") {
    const auto b = make_random(3, 3, 4, 1);
    CHECK(pop_01_risk(b.mdp, b.expert, b.expert) == 0.0);

    std::vector<int> other(12);
    for (int t = 0; t < 4; ++t)
        for (int s = 0; s < 3; ++s) other[t * 3 + s] = (*b.expert.point_mass(t, s) + 1) % 3;
    CHECK(pop_01_risk(b.mdp, b.expert, Policy::deterministic(3, 3, 4, other)) == doctest::Approx(1.0).epsilon(1e-12));

    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto small = make_random(3, 2, 3, child_seed(2, i));
        const auto pi = test::random_policy(3, 2, 3, child_seed(3, i));
        CHECK(std::abs(pop_01_risk(small.mdp, small.expert, pi) -
                       enumeration::pop_01_risk(small.mdp, small.expert, pi)) < 1e-9);
        CHECK(std::abs(pop_tv_risk(small.mdp, small.expert, pi) - pop_01_risk(small.mdp, small.expert, pi)) < 1e-12);
    }
    CHECK_THROWS_AS(pop_01_risk(b.mdp, Policy::uniform(3, 3, 4), b.expert), StochasticExpertError);
}

TEST_CASE("TV risk of a stochastic expert against a point mass") {
    // One state, H = 1: (0.5, 0.5) vs (1, 0).
    const TabularMdp mdp(1, 2, 1, {1.0}, {}, {0.3, 0.7});
    const Policy expert(1, 2, 1, {0.5, 0.5});
    const Policy learner(1, 2, 1, {1.0, 0.0});
    CHECK(pop_tv_risk(mdp, expert, learner) == 0.5);
    CHECK(pop_tv_risk(mdp, expert, expert) == 0.0);
    CHECK(tv_distance(expert.dist(0, 0), learner.dist(0, 0)) == 0.5);
}

TEST_CASE("TV risk matches enumeration for stochastic experts") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto b = make_random(3, 2, 3, child_seed(4, i), ExpertKind::stochastic(1.0));
        const auto pi = test::random_policy(3, 2, 3, child_seed(5, i));
        CHECK(std::abs(pop_tv_risk(b.mdp, b.expert, pi) - enumeration::pop_tv_risk(b.mdp, b.expert, pi)) < 1e-9);
    }
}

TEST_CASE("empirical 0-1 risk") {
    const auto b = make_random(4, 4, 5, 6);
    const auto d = sample_dataset(b.mdp.dynamics(), b.expert, 7, 7);
    const VisitIndex idx(d, 4, 4, 5);
    CHECK(emp_01_risk(idx, behavior_cloning(idx)) == 0.0);
    CHECK(emp_01_risk(idx, Policy::uniform(4, 4, 5)) == doctest::Approx(0.75).epsilon(1e-12));

    // Two trajectories, H = 2; learner plays action 0 everywhere.
    // Visits: t=0 s=0 (a=0), t=0 s=1 (a=1), t=1 s=1 (a=1) twice. Errors: 1 of 2 at t=0, 2 of 2 at t=1.
    const VisitIndex hand(Dataset{2, {{{0, 0}, {1, 1}}, {{1, 1}, {1, 1}}}}, 2, 2, 2);
    std::vector<int> zeros(4, 0);
    CHECK(emp_01_risk(hand, Policy::deterministic(2, 2, 2, zeros)) == 0.75);
}

TEST_CASE("reduction gap") {
    const auto b = make_random(4, 3, 5, 8, ExpertKind::stochastic(0.5));
    const auto self = reduction_gap(b.mdp, b.expert, b.expert);
    CHECK(self.lhs == 0.0);
    CHECK(self.rhs == 0.0);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto inst = make_random(3, 3, 4, child_seed(9, i), ExpertKind::stochastic(1.0));
        const auto g = reduction_gap(inst.mdp, inst.expert, test::random_policy(3, 3, 4, child_seed(10, i), i % 2));
        CHECK(g.lhs <= g.rhs + 1e-9);
        CHECK(g.rhs <= 4.0);
    }
    const auto lb = make_lb_no_interaction(6, 4, 10, 20, 11);
    const auto g = reduction_gap(lb.mdp, lb.expert, Policy::uniform(6, 4, 10));
    CHECK(g.lhs > 0.0);
    CHECK(g.lhs <= g.rhs + 1e-9);
}

TEST_CASE("unobserved visit probability") {
    const auto b = make_random(3, 2, 4, 12);
    const VisitIndex empty(Dataset{4, {}}, 3, 2, 4);
    CHECK(unobserved_visit_probability(b.mdp.dynamics(), b.expert, empty) == 1.0);
    std::vector<Trajectory> cover;
    for (int s = 0; s < 3; ++s) cover.push_back(Trajectory(4, {s, 0}));
    const VisitIndex full(Dataset{4, cover}, 3, 2, 4);
    CHECK(unobserved_visit_probability(b.mdp.dynamics(), b.expert, full) == 0.0);
}

TEST_CASE("Mimic-Emp suboptimality is bounded by H times the unobserved-visit probability") {
    const auto b = make_random(4, 3, 4, 13, ExpertKind::stochastic(1.0));
    const auto& dyn = b.mdp.dynamics();
    const double j = value(b.mdp, b.expert);
    double gap = 0.0;
    double bound = 0.0;
    for (std::uint64_t r = 0; r < 500; ++r) {
        const VisitIndex idx(sample_dataset(dyn, b.expert, 10, child_seed(14, r)), 4, 3, 4);
        gap += j - value(b.mdp, mimic_emp(idx));
        bound += 4.0 * unobserved_visit_probability(dyn, b.expert, idx);
    }
    CHECK(gap / 500 <= bound / 500);
}

TEST_CASE("expected missing mass") {
    const std::vector<double> two{0.5, 0.5};
    CHECK(expected_missing_mass(two, 1) == 0.5);
    CHECK(expected_missing_mass(two, 0) == 1.0);
    const std::vector<double> point{0.0, 1.0, 0.0};
    CHECK(expected_missing_mass(point, 5) == 0.0);
    const std::vector<double> geo{0.5, 0.25, 0.125, 0.0625, 0.0625};
    double prev = 1.0;
    for (std::uint64_t n = 0; n < 50; ++n) {
        const double m = expected_missing_mass(geo, n);
        CHECK(m <= prev);
        CHECK(m >= 0.0);
        prev = m;
    }
}

TEST_CASE("missing mass: Monte Carlo mean within 3 standard errors of the exact value") {
    const std::vector<double> dist(8, 0.125);
    const auto tc = tail_check(dist, 16, 0.1, 20000, 15);
    CHECK(std::abs(tc.mean - tc.expected) <= 3.0 * tc.stderr_mean);
    CHECK(tc.coverage <= 0.1);
    CHECK(tc.threshold == missing_mass_deviation(8, 16, 0.1));
    CHECK_THROWS_AS(tail_check(dist, 16, 0.2, 10, 1), DomainError);
    CHECK_THROWS_AS(tail_check(dist, 0, 0.1, 10, 1), DomainError);
}

TEST_CASE("missing mass sample is a pure function of the seed") {
    const std::vector<double> dist{0.4, 0.3, 0.2, 0.1};
    CHECK(missing_mass_sample(dist, 3, 7) == missing_mass_sample(dist, 3, 7));
    CHECK(missing_mass_sample(dist, 0, 7) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("min2 bound and grid check") {
    CHECK(min2_bound(2) == doctest::Approx(std::log(2.0) / 2.0));
    CHECK_THROWS_AS(min2_bound(1), DomainError);
    CHECK_THROWS_AS(min2_bound(0), DomainError);
    // At n = 2 the inequality fails near x = 0.38, where x = (1 - x)^2.
    const auto two = min2_grid_check(2);
    CHECK(two.violations > 0);
    CHECK(two.worst_x == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-3));
    for (std::uint64_t n : {3, 10, 100, 10000}) CHECK(min2_grid_check(n).violations == 0);
    const double x = std::log(100.0) / 100.0;
    CHECK(std::min(x, std::pow(1.0 - x, 100.0)) < min2_bound(100));
}

TEST_CASE("bound calculators: values, limits and domains") {
    CHECK(bound_bc_expected(6, 10, 10) == 10.0);
    CHECK(bound_bc_expected(6, 10, 1000) == doctest::Approx(4.0 * 6 * 100 / (9.0 * 1000)));
    CHECK(bound_bc_highprob(4, 10, 100, 1) == doctest::Approx(15.593288335742054).epsilon(1e-12));
    CHECK(bound_mimic_emp(4, 4, 1e9) < 1e-5);
    CHECK(bound_mimic_emp(4, 4, 2) == 4.0);
    CHECK(bound_mimic_md_expected(2, 100, 50) == doctest::Approx(113.13708498984761).epsilon(1e-12));
    CHECK(bound_mimic_md_highprob(4, 4, 64, 0.5) == doctest::Approx(5.4866516050267435).epsilon(1e-12));
    CHECK(missing_mass_deviation(4, 100, 0.1) == doctest::Approx(0.13815510557964275).epsilon(1e-12));

    CHECK_THROWS_AS(bound_bc_expected(0, 1, 1), DomainError);
    CHECK_THROWS_AS(bound_bc_highprob(2, 5, 10, 0.6), DomainError);
    CHECK_THROWS_AS(bound_mimic_emp(2, 2, 1), DomainError);
    CHECK_THROWS_AS(bound_mimic_md_expected(2, 2, -1), DomainError);
    CHECK_THROWS_AS(bound_mimic_md_highprob(2, 4, 10, 0.8), DomainError);
}

TEST_CASE("no-interaction rho has expected missing mass above (S - 2) / (e (N + 1))") {
    for (int S : {3, 4, 6}) {
        for (int N : {std::max(1, S - 3), 10, 100, 1000}) {
            const auto b = make_lb_no_interaction(S, 2, 2, N, 1);
            const auto rho = b.mdp.dynamics().rho();
            const double m = expected_missing_mass(rho, static_cast<std::uint64_t>(N));
            CHECK(m >= (S - 2) / (std::exp(1.0) * (N + 1)));
        }
    }
}
