#include <doctest.h>

#include "analytics.hpp"
#include "enumeration.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "instances.hpp"
#include "learners.hpp"
#include "mimic_md.hpp"

#include <cmath>
#include <limits>

using namespace ilab;

namespace {

struct Setup {
    InstanceBundle bundle;
    VisitIndex index;
    EventTable target;
};

Setup make_setup(const InstanceBundle& b, std::size_t n, std::uint64_t seed) {
    const int S = b.mdp.num_states();
    const int A = b.mdp.num_actions();
    const int H = b.mdp.horizon();
    const auto data = sample_dataset(b.mdp.dynamics(), b.expert, n, seed);
    const auto split = split_dataset(data, child_seed(seed, 7));
    VisitIndex index(split.d1, S, A, H);
    auto target = empirical_event_fractions(split.d2, index);
    return {b, std::move(index), std::move(target)};
}

// Every deterministic completion in lexicographic order; returns the first one
// within 1e-9 of the minimum.
struct Brute {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<int> choices;
};

Brute brute_force(const Dynamics& d, const VisitIndex& index, const EventTable& target) {
    const FreeParameterization free(index);
    const std::size_t k = free.cells().size();
    const int A = index.num_actions();
    std::vector<std::vector<int>> all;
    std::vector<double> objs;
    std::vector<int> choice(k, 0);
    while (true) {
        all.push_back(choice);
        objs.push_back(md_objective(d, free.deterministic_completion(choice), index, target));
        std::size_t i = k;
        while (i > 0 && ++choice[i - 1] == A) choice[--i] = 0;
        if (i == 0) break;
    }
    Brute out;
    for (double o : objs) out.objective = std::min(out.objective, o);
    for (std::size_t i = 0; i < all.size(); ++i)
        if (objs[i] <= out.objective + 1e-9) {
            out.choices = all[i];
            break;
        }
    return out;
}

std::vector<int> choices_of(const Policy& p, const VisitIndex& index) {
    const FreeParameterization free(index);
    std::vector<int> out;
    for (const auto& c : free.cells()) out.push_back(p.point_mass(c.t, c.s).value());
    return out;
}

Policy random_feasible(const VisitIndex& index, std::uint64_t seed) {
    const FreeParameterization free(index);
    const int A = index.num_actions();
    CounterRng rng(seed);
    std::vector<double> values(free.cells().size() * static_cast<std::size_t>(A));
    for (std::size_t c = 0; c < free.cells().size(); ++c) {
        double sum = 0.0;
        for (int a = 0; a < A; ++a) sum += (values[c * A + a] = rng.exponential());
        for (int a = 0; a < A; ++a) values[c * A + a] /= sum;
    }
    return free.to_policy(values);
}

double reward_weighted(const TabularMdp& mdp, const EventTable& e) {
    double acc = 0.0;
    for (int t = 0; t < e.horizon; ++t)
        for (int s = 0; s < e.num_states; ++s)
            for (int a = 0; a < e.num_actions; ++a) acc += e.at(t, s, a) * mdp.reward(t, s, a);
    return acc;
}

} // namespace

TEST_CASE("event table is zero under full coverage and equals occupancy with empty D1") {
    const auto b = make_random(3, 2, 4, 3);
    const auto pi = test::random_policy(3, 2, 4, 5);

    std::vector<Trajectory> cover;
    for (int s = 0; s < 3; ++s) cover.push_back(Trajectory(4, {s, 0}));
    const VisitIndex full(Dataset{4, cover}, 3, 2, 4);
    for (double p : event_probabilities(b.mdp.dynamics(), pi, full).probs) CHECK(p == 0.0);

    const VisitIndex none(Dataset{4, {}}, 3, 2, 4);
    const auto e = event_probabilities(b.mdp.dynamics(), pi, none);
    const auto occ = occupancy(b.mdp.dynamics(), pi);
    for (int t = 0; t < 4; ++t)
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) CHECK(std::abs(e.at(t, s, a) - occ.state_action(t, s, a)) < 1e-12);
}

TEST_CASE("event table matches trajectory enumeration") {
    for (std::uint64_t i = 0; i < 40; ++i) {
        const auto b = make_random(3, 2, 3, child_seed(41, i));
        const auto pi = test::random_policy(3, 2, 3, child_seed(42, i), i % 3 == 0);
        const auto data = sample_dataset(b.mdp.dynamics(), b.expert, 2, child_seed(43, i));
        const VisitIndex index(data, 3, 2, 3);
        const auto dp = event_probabilities(b.mdp.dynamics(), pi, index);
        const auto en = enumeration::event_probabilities(b.mdp.dynamics(), pi, index);
        CHECK(l1_distance(dp, en) < 1e-9);
    }
}

TEST_CASE("flagged mass is nondecreasing in t") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto b = make_random(5, 3, 8, child_seed(51, i));
        const auto data = sample_dataset(b.mdp.dynamics(), b.expert, 3, i);
        const VisitIndex index(data, 5, 3, 8);
        const auto e = event_probabilities(b.mdp.dynamics(), test::random_policy(5, 3, 8, i), index);
        for (int t = 0; t + 1 < 8; ++t) CHECK(e.layer_mass(t + 1) >= e.layer_mass(t) - 1e-9);
    }
}

TEST_CASE("empirical event fractions: hand cases") {
    Dataset d{3, {{{0, 1}, {1, 0}, {0, 0}}, {{1, 0}, {1, 1}, {1, 0}}}};
    const VisitIndex same(d, 2, 2, 3);
    for (double p : empirical_event_fractions(d, same).probs) CHECK(p == 0.0);

    const VisitIndex only_first(Dataset{3, {d.trajectories[0]}}, 2, 2, 3);
    const auto e = empirical_event_fractions(Dataset{3, {d.trajectories[1]}}, only_first);
    CHECK(e.at(0, 1, 0) == 1.0);
    CHECK(e.at(1, 1, 1) == 1.0);
    CHECK(e.at(2, 1, 0) == 1.0);
    CHECK(l1_distance(e, EventTable{2, 2, 3, std::vector<double>(12, 0.0)}) == 3.0);

    CHECK_THROWS_AS(empirical_event_fractions(Dataset{3, {}}, same), DomainError);
}

TEST_CASE("empirical event fractions converge to the expert's event probabilities") {
    const auto b = make_random(4, 2, 4, 61);
    const auto d1 = sample_dataset(b.mdp.dynamics(), b.expert, 2, 62);
    const VisitIndex index(d1, 4, 2, 4);
    constexpr std::size_t n = 10000;
    const auto e = empirical_event_fractions(sample_dataset(b.mdp.dynamics(), b.expert, n, 63), index);
    const auto exact = event_probabilities(b.mdp.dynamics(), b.expert, index);
    for (std::size_t i = 0; i < e.probs.size(); ++i) {
        const double p = exact.probs[i];
        CHECK(std::abs(e.probs[i] - p) <= 4.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
    }
}

TEST_CASE("OPT objective: zero at its own target, bounded by 2H, guarded by membership") {
    const auto s = make_setup(make_random(4, 3, 5, 71), 6, 72);
    const auto& d = s.bundle.mdp.dynamics();
    const auto pi = random_feasible(s.index, 73);
    CHECK(md_objective(d, pi, s.index, event_probabilities(d, pi, s.index)) == 0.0);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const double obj = md_objective(d, random_feasible(s.index, i), s.index, s.target);
        CHECK(obj >= 0.0);
        CHECK(obj <= 2.0 * 5);
    }
    CHECK_THROWS_AS(md_objective(d, Policy::uniform(4, 3, 5), s.index, s.target), DomainError);
}

TEST_CASE("adjoint subgradient matches central finite differences") {
    int points = 0;
    for (std::uint64_t i = 0; points < 20; ++i) {
        REQUIRE(i < 200);
        const auto b = make_random(3, 3, 4, child_seed(81, i));
        const auto pi = test::random_policy(3, 3, 4, child_seed(82, i));
        const auto data = sample_dataset(b.mdp.dynamics(), b.expert, 2, child_seed(83, i));
        const VisitIndex index(data, 3, 3, 4);
        const auto& d = b.mdp.dynamics();
        // Random target with every residual well away from zero.
        auto target = event_probabilities(d, test::random_policy(3, 3, 4, child_seed(84, i)), index);
        const auto here = event_probabilities(d, pi, index);
        bool smooth = true;
        for (std::size_t k = 0; k < target.probs.size(); ++k)
            smooth = smooth && (here.probs[k] == 0.0 || std::abs(here.probs[k] - target.probs[k]) > 1e-4);
        if (!smooth) continue;
        ++points;

        std::vector<double> grad;
        md_objective_and_subgradient(d, pi, index, target, grad);
        const double h = 1e-6;
        std::vector<double> probs(pi.data().begin(), pi.data().end());
        for (std::size_t k = 0; k < probs.size(); ++k) {
            std::vector<double> up = probs;
            std::vector<double> down = probs;
            up[k] += h;
            down[k] -= h;
            std::vector<double> unused;
            const double fu = md_objective_and_subgradient(d, Policy(3, 3, 4, up), index, target, unused);
            const double fd = md_objective_and_subgradient(d, Policy(3, 3, 4, down), index, target, unused);
            const double numeric = (fu - fd) / (2 * h);
            CHECK(std::abs(grad[k] - numeric) <= 1e-4 * std::max(1.0, std::abs(numeric)));
        }
    }
}

TEST_CASE("exact solver matches brute force over every deterministic completion") {
    int compared = 0;
    for (std::uint64_t i = 0; i < 60; ++i) {
        const bool known = i % 2 == 0;
        const auto b = known ? make_lb_known_transition(3 + static_cast<int>(i % 3), 2, 3, 3, child_seed(91, i))
                             : make_random(3, 2, 2 + static_cast<int>(i % 3), child_seed(91, i));
        const auto s = make_setup(b, 3, child_seed(92, i));
        const auto& d = b.mdp.dynamics();
        if (completion_bits(s.index) > 12) continue;
        const auto brute = brute_force(d, s.index, s.target);
        const auto sol = solve_opt_exact(d, s.index, s.target);
        CHECK(std::abs(sol.objective - brute.objective) < 1e-9);
        CHECK(sol.epsilon == 0.0);
        CHECK(is_in_pi_mimic(sol.policy, s.index));
        CHECK(choices_of(sol.policy, s.index) == brute.choices);
        CHECK(opt_lower_bound(d, s.index, s.target) <= sol.objective + 1e-12);
        ++compared;
    }
    CHECK(compared >= 40);
}

TEST_CASE("exact solver on S = 3, A = 2, H = 2 with two free cells") {
    // D1 visits state 0 at both times, leaving states 1 and 2 free at t = 1 (via rho).
    const auto b = make_random(3, 2, 2, 101);
    const VisitIndex index(Dataset{2, {{{0, 0}, {0, 1}}}}, 3, 2, 2);
    const Dataset d2{2, {{{1, 1}, {2, 0}}, {{0, 0}, {1, 1}}}};
    const auto target = empirical_event_fractions(d2, index);
    REQUIRE(FreeParameterization(index).cells().size() == 4);
    const auto brute = brute_force(b.mdp.dynamics(), index, target);
    const auto sol = solve_opt_exact(b.mdp.dynamics(), index, target);
    CHECK(std::abs(sol.objective - brute.objective) < 1e-12);
    CHECK(choices_of(sol.policy, index) == brute.choices);
}

TEST_CASE("exact solver under full coverage returns objective 0 and the first completion") {
    const auto b = make_lb_known_transition(3, 3, 3, 2, 4);
    const auto data = sample_dataset(b.mdp.dynamics(), b.expert, 200, 5);
    const VisitIndex index(data, 3, 3, 3);
    REQUIRE(FreeParameterization(index).cells().empty());
    const auto target = empirical_event_fractions(data, index);
    const auto sol = solve_opt_exact(b.mdp.dynamics(), index, target);
    CHECK(sol.objective == 0.0);
    CHECK(sol.policy == b.expert);
}

TEST_CASE("exact solver beats the expert on the expert's own target") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = make_setup(make_lb_known_transition(5, 3, 4, 6, i), 8, child_seed(111, i));
        const auto& d = s.bundle.mdp.dynamics();
        const auto sol = solve_opt_exact(d, s.index, s.target);
        CHECK(sol.objective <= md_objective(d, s.bundle.expert, s.index, s.target) + 1e-12);
    }
}

TEST_CASE("exact solver throws when the node budget is exhausted") {
    const auto s = make_setup(make_random(5, 3, 5, 121), 2, 122);
    REQUIRE(completion_bits(s.index) > 4);
    CHECK_THROWS_AS(solve_opt_exact(s.bundle.mdp.dynamics(), s.index, s.target, {4}), GuardExceededError);
}

TEST_CASE("subgradient solver finds a planted zero-objective target") {
    int hits = 0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto s = make_setup(make_lb_known_transition(4, 3, 4, 4, child_seed(131, i)), 4, i);
        const auto& d = s.bundle.mdp.dynamics();
        const auto planted = random_feasible(s.index, child_seed(132, i));
        const auto target = event_probabilities(d, planted, s.index);
        SubgradientOptions opts;
        opts.seed = i;
        opts.steps = 2000;
        const auto sol = solve_opt_subgradient(d, s.index, target, opts);
        CHECK(is_in_pi_mimic(sol.policy, s.index));
        CHECK(std::abs(md_objective(d, sol.policy, s.index, target) - sol.objective) < 1e-12);
        CHECK(sol.epsilon >= 0.0);
        if (sol.objective <= 1e-3) ++hits;
    }
    CHECK(hits == 10);
}

TEST_CASE("lower bound never exceeds the subgradient solver's objective") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = make_setup(make_random(4, 3, 5, child_seed(141, i)), 6, i);
        const auto& d = s.bundle.mdp.dynamics();
        SubgradientOptions opts;
        opts.restarts = 2;
        opts.steps = 100;
        const auto sol = solve_opt_subgradient(d, s.index, s.target, opts);
        const double lb = opt_lower_bound(d, s.index, s.target);
        CHECK(lb <= sol.objective + 1e-12);
        CHECK(std::abs(sol.epsilon - (sol.objective - lb)) < 1e-12);
    }
}

TEST_CASE("simplex projection") {
    std::vector<double> a{0.5, 0.5};
    project_to_simplex(a);
    CHECK(a == std::vector<double>{0.5, 0.5});
    std::vector<double> b{2.0, 0.0};
    project_to_simplex(b);
    CHECK(b == std::vector<double>{1.0, 0.0});
    std::vector<double> c{-1.0, 0.5};
    project_to_simplex(c);
    CHECK(c == std::vector<double>{0.0, 1.0});
    std::vector<double> e{1.0, 1.0, 1.0};
    project_to_simplex(e);
    for (double x : e) CHECK(x == doctest::Approx(1.0 / 3.0));

    CounterRng rng(151);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(5);
        for (auto& x : v) x = 4.0 * rng.uniform() - 2.0;
        auto p = v;
        project_to_simplex(p);
        double sum = 0.0;
        for (double x : p) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        auto dist = [&](const std::vector<double>& q) {
            double acc = 0.0;
            for (std::size_t k = 0; k < q.size(); ++k) acc += (q[k] - v[k]) * (q[k] - v[k]);
            return acc;
        };
        const auto q = test::random_policy(1, 5, 1, child_seed(152, trial));
        const std::vector<double> other(q.data().begin(), q.data().end());
        CHECK(dist(p) <= dist(other) + 1e-12);
    }
}

TEST_CASE("suboptimality equals the reward-weighted event gap for mimicking policies") {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto s = make_setup(make_random(4, 3, 5, child_seed(161, i)), 6, i);
        const auto& mdp = s.bundle.mdp;
        const auto pi = random_feasible(s.index, child_seed(162, i));
        const double lhs = value(mdp, s.bundle.expert) - value(mdp, pi);
        const double rhs = reward_weighted(mdp, event_probabilities(mdp.dynamics(), s.bundle.expert, s.index)) -
                           reward_weighted(mdp, event_probabilities(mdp.dynamics(), pi, s.index));
        CHECK(std::abs(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("mimic_md output satisfies the decomposition inequality") {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto b = make_lb_known_transition(5, 3, 4, 8, child_seed(171, i));
        const auto& d = b.mdp.dynamics();
        const auto data = sample_dataset(d, b.expert, 8, child_seed(172, i));
        const auto res = mimic_md(d, data, child_seed(173, i));
        const VisitIndex index(res.split.d1, 5, 3, 4);
        const auto target = empirical_event_fractions(res.split.d2, index);
        const double gap = value(b.mdp, b.expert) - value(b.mdp, res.policy);
        const double l1 = l1_distance(event_probabilities(d, b.expert, index), target);
        CHECK(gap <= 2.0 * l1 + res.epsilon + 1e-9);
        CHECK(is_in_pi_mimic(res.policy, index));
    }
}

TEST_CASE("mimic_md is deterministic and exact under full coverage") {
    const auto b = make_random(2, 2, 3, 181);
    const auto data = sample_dataset(b.mdp.dynamics(), b.expert, 2, 182);
    CHECK(mimic_md(b.mdp.dynamics(), data, 9).policy == mimic_md(b.mdp.dynamics(), data, 9).policy);

    const auto kt = make_lb_known_transition(3, 2, 3, 2, 183);
    const auto big = sample_dataset(kt.mdp.dynamics(), kt.expert, 400, 184);
    const auto res = mimic_md(kt.mdp.dynamics(), big, 185);
    CHECK(value(kt.mdp, res.policy) == value(kt.mdp, kt.expert));

    CHECK_THROWS_AS(mimic_md(b.mdp.dynamics(), Dataset{3, {}}, 1), DomainError);
}
