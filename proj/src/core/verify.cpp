#include "verify.hpp"

#include "analytics.hpp"
#include "enumeration.hpp"
#include "errors.hpp"
#include "instances.hpp"
#include "learners.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace ilab {

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"dp-oracle", "bounds", "reduction",
                                                "concentration"};
    return names;
}

namespace {

Check at_most(std::string name, double measured, double threshold) {
    return {std::move(name), measured, threshold, measured <= threshold};
}

Check at_least(std::string name, double measured, double threshold) {
    return {std::move(name), measured, threshold, measured >= threshold};
}

Check close_to(std::string name, double measured, double expected, double tol = 1e-12) {
    const double err = std::abs(measured - expected) / std::max(1.0, std::abs(expected));
    return {std::move(name), measured, expected, err <= tol};
}

Policy random_policy(int S, int A, int H, std::uint64_t seed, bool deterministic) {
    CounterRng rng(seed);
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A, 0.0);
    for (std::size_t row = 0; row < probs.size(); row += A) {
        if (deterministic) {
            probs[row + rng.below(static_cast<std::uint64_t>(A))] = 1.0;
            continue;
        }
        double sum = 0.0;
        for (int a = 0; a < A; ++a) sum += (probs[row + a] = rng.exponential());
        for (int a = 0; a < A; ++a) probs[row + a] /= sum;
    }
    return Policy(S, A, H, std::move(probs));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return INFINITY;
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

bool throws(const std::function<void()>& f) {
    try {
        f();
    } catch (const DomainError&) {
        return true;
    }
    return false;
}

VerifyReport dp_oracle() {
    constexpr double tol = 1e-9;
    double value_err = 0.0;
    double occ_err = 0.0;
    double occ_value_err = 0.0;
    double pop01_err = 0.0;
    double tv_err = 0.0;
    double event_err = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto seed = child_seed(0xd9, i);
        CounterRng rng(seed);
        const int S = 1 + static_cast<int>(rng.below(3));
        const int A = 1 + static_cast<int>(rng.below(2));
        const int H = 1 + static_cast<int>(rng.below(3));
        const auto bundle = make_random(S, A, H, child_seed(seed, 0));
        const auto& mdp = bundle.mdp;
        const auto& dyn = mdp.dynamics();
        const auto learner = random_policy(S, A, H, child_seed(seed, 1), i % 3 == 0);
        const auto data = sample_dataset(dyn, bundle.expert, 1 + rng.below(3), child_seed(seed, 2));
        const VisitIndex index(data, S, A, H);

        for (const Policy* pi : {&bundle.expert, &learner}) {
            const double exact = enumeration::value(mdp, *pi);
            value_err = std::max(value_err, std::abs(value(mdp, *pi) - exact));
            const auto occ = occupancy(dyn, *pi);
            const auto ref = enumeration::occupancy(dyn, *pi);
            occ_err = std::max({occ_err, max_abs_diff(occ.state_occ, ref.state_occ),
                                max_abs_diff(occ.state_action_occ, ref.state_action_occ)});
            occ_value_err = std::max(occ_value_err, std::abs(value_from_occupancy(mdp, occ) - exact));
            event_err = std::max(event_err,
                                 max_abs_diff(event_probabilities(dyn, *pi, index).probs,
                                              enumeration::event_probabilities(dyn, *pi, index).probs));
        }
        pop01_err = std::max(pop01_err, std::abs(pop_01_risk(mdp, bundle.expert, learner) -
                                                 enumeration::pop_01_risk(mdp, bundle.expert, learner)));
        tv_err = std::max(tv_err, std::abs(pop_tv_risk(mdp, bundle.expert, learner) -
                                           enumeration::pop_tv_risk(mdp, bundle.expert, learner)));
    }
    return {"dp-oracle",
            {at_most("value vs enumeration, max abs error", value_err, tol),
             at_most("occupancy vs enumeration, max abs error", occ_err, tol),
             at_most("value from occupancy vs enumeration, max abs error", occ_value_err, tol),
             at_most("pop_01_risk vs enumeration, max abs error", pop01_err, tol),
             at_most("pop_tv_risk vs enumeration, max abs error", tv_err, tol),
             at_most("event_probabilities vs enumeration, max abs error", event_err, tol)}};
}

VerifyReport bounds() {
    const double uniform2[] = {0.5, 0.5};
    const double point[] = {0.0, 1.0, 0.0};
    VerifyReport r{"bounds", {}};
    auto& c = r.checks;
    c.push_back(close_to("bc_expected(S=4,H=5,N=10) = 40/9", bound_bc_expected(4, 5, 10), 40.0 / 9.0));
    c.push_back(close_to("bc_expected(S=10,H=10,N=10) capped at H", bound_bc_expected(10, 10, 10), 10.0));
    c.push_back(close_to("bc_highprob(S=4,H=10,N=100,delta=1)", bound_bc_highprob(4, 10, 100, 1.0),
                         15.593288335742054));
    c.push_back(close_to("mimic_emp(S=1,H=1,N=3) = ln3/3", bound_mimic_emp(1, 1, 3), 0.3662040962227033));
    c.push_back(close_to("mimic_emp(S=10,H=10,N=10) capped at H", bound_mimic_emp(10, 10, 10), 10.0));
    c.push_back(close_to("mimic_md_expected(S=4,H=4,N=64) = 8/3", bound_mimic_md_expected(4, 4, 64),
                         8.0 / 3.0));
    c.push_back(close_to("mimic_md_expected(S=2,H=100,N=50) = 2 sqrt(3200)",
                         bound_mimic_md_expected(2, 100, 50), 113.13708498984761));
    c.push_back(close_to("mimic_md_highprob(S=4,H=4,N=64,delta=0.5)",
                         bound_mimic_md_highprob(4, 4, 64, 0.5), 5.4866516050267435));
    c.push_back(close_to("min2_bound(2) = ln2/2", min2_bound(2), 0.34657359027997264));
    c.push_back(close_to("missing_mass_deviation(|X|=4,n=100,delta=0.1)",
                         missing_mass_deviation(4, 100, 0.1), 0.13815510557964275));
    c.push_back(close_to("expected_missing_mass(uniform 2, n=1) = 1/2",
                         expected_missing_mass(uniform2, 1), 0.5));
    c.push_back(close_to("expected_missing_mass(point mass, n=5) = 0",
                         expected_missing_mass(point, 5), 0.0));
    c.push_back(close_to("expected_missing_mass(uniform 2, n=0) = 1",
                         expected_missing_mass(uniform2, 0), 1.0));
    const double rejected =
        static_cast<double>(throws([] { bound_mimic_emp(2, 2, 1); })) +
        static_cast<double>(throws([] { bound_bc_highprob(2, 5, 10, 0.0); })) +
        static_cast<double>(throws([] { bound_bc_highprob(2, 5, 10, 0.6); })) +
        static_cast<double>(throws([] { bound_mimic_md_highprob(2, 5, 10, 1.0); })) +
        static_cast<double>(throws([] { min2_bound(1); }));
    c.push_back(at_least("out-of-domain arguments rejected (of 5)", rejected, 5.0));
    return r;
}

VerifyReport reduction() {
    std::size_t violations = 0;
    std::size_t bc_violations = 0;
    double worst = -INFINITY;
    double det_identity_err = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const auto seed = child_seed(0x4ed, i);
        CounterRng rng(seed);
        const int S = 1 + static_cast<int>(rng.below(5));
        const int A = 1 + static_cast<int>(rng.below(5));
        const int H = 1 + static_cast<int>(rng.below(6));
        const bool det = i % 2 == 0;
        const auto bundle = make_random(S, A, H, child_seed(seed, 0),
                                        det ? ExpertKind::deterministic() : ExpertKind::stochastic(0.5));
        const auto& mdp = bundle.mdp;
        const Policy learner = [&] {
            if (det && i % 4 == 0) {
                const auto data =
                    sample_dataset(mdp.dynamics(), bundle.expert, 1 + rng.below(10), child_seed(seed, 1));
                return behavior_cloning(VisitIndex(data, S, A, H));
            }
            return random_policy(S, A, H, child_seed(seed, 1), i % 3 == 0);
        }();
        const auto gap = reduction_gap(mdp, bundle.expert, learner);
        worst = std::max(worst, gap.lhs - gap.rhs);
        if (gap.lhs > gap.rhs + 1e-9) ++violations;
        if (det) {
            const double p01 = pop_01_risk(mdp, bundle.expert, learner);
            det_identity_err = std::max(det_identity_err,
                                        std::abs(p01 - pop_tv_risk(mdp, bundle.expert, learner)));
            if (gap.lhs > static_cast<double>(H) * H * p01 + 1e-9) ++bc_violations;
        }
    }
    // No-interaction instance with the uniform learner.
    const auto fig1 = make_lb_no_interaction(6, 4, 10, 50, 7);
    const auto uni = Policy::uniform(6, 4, 10);
    const auto g = reduction_gap(fig1.mdp, fig1.expert, uni);

    return {"reduction",
            {at_most("violations of J(expert) - J(learner) <= min{H, H^2 tv} over 1000 triples",
                     static_cast<double>(violations), 0.0),
             at_most("max of lhs - rhs over 1000 triples", worst, 1e-9),
             at_most("deterministic experts: violations of gap <= H^2 pop01",
                     static_cast<double>(bc_violations), 0.0),
             at_most("deterministic experts: |pop01 - tv| max", det_identity_err, 1e-12),
             at_most("lb_no_interaction, uniform learner: lhs - rhs", g.lhs - g.rhs, 1e-9)}};
}

VerifyReport concentration() {
    VerifyReport r{"concentration", {}};
    auto& c = r.checks;

    auto mc_check = [&](const std::string& label, const std::vector<double>& dist, std::uint64_t n,
                        std::uint64_t seed) {
        const auto tc = tail_check(dist, n, 0.1, 10000, seed);
        const double z = std::abs(tc.mean - tc.expected) / tc.stderr_mean;
        c.push_back(at_most(label + ": |MC mean - exact| / stderr", z, 3.0));
    };
    mc_check("uniform-8, n=16", std::vector<double>(8, 0.125), 16, 0x3c1);
    std::vector<double> geometric(10);
    double total = 0.0;
    for (int k = 0; k < 10; ++k) total += (geometric[k] = std::pow(0.6, k));
    for (auto& p : geometric) p /= total;
    mc_check("geometric(0.6) on 10 symbols, n=8", geometric, 8, 0x3c2);

    const auto tail = tail_check(std::vector<double>(8, 0.125), 32, 0.1, 10000, 0x3c3);
    c.push_back(at_most("tail coverage, uniform-8, n=32, delta=0.1", tail.coverage, 0.1));

    for (std::uint64_t n : {3ULL, 10ULL, 100ULL, 10000ULL}) {
        const auto gc = min2_grid_check(n);
        c.push_back(at_most("min{x,(1-x)^n} <= ln(n)/n on 10^4-point grid, n=" + std::to_string(n) +
                                ": violations",
                            static_cast<double>(gc.violations), 0.0));
    }

    // Missing mass of the lower-bound initial distributions.
    for (int S : {3, 4, 6}) {
        double worst = INFINITY;
        for (int N = std::max(1, S - 3); N <= 10000; ++N) {
            const auto b = make_lb_no_interaction(S, 2, 1, N, 0);
            const double m = expected_missing_mass(b.mdp.dynamics().rho(), static_cast<std::uint64_t>(N));
            worst = std::min(worst, m * std::numbers::e * (N + 1.0) / (S - 2.0));
        }
        c.push_back(at_least("lb_no_interaction rho, S=" + std::to_string(S) +
                                 ": min over N of E[m0] e (N+1) / (S-2)",
                             worst, 1.0));
    }
    for (int S : {2, 6}) {
        double worst = INFINITY;
        for (int N = std::max(1, S - 2); N <= 10000; ++N) {
            const auto b = make_lb_known_transition(S, 2, 1, N, 0);
            const double m = expected_missing_mass(b.mdp.dynamics().rho(), static_cast<std::uint64_t>(N));
            worst = std::min(worst, m * std::numbers::e * (N + 1.0) / (S - 1.0));
        }
        c.push_back(at_least("lb_known_transition rho, S=" + std::to_string(S) +
                                 ": min over N of E[m0] e (N+1) / (S-1)",
                             worst, 1.0));
    }
    return r;
}

} // namespace

VerifyReport verify(const std::string& suite) {
    if (suite == "dp-oracle") return dp_oracle();
    if (suite == "bounds") return bounds();
    if (suite == "reduction") return reduction();
    if (suite == "concentration") return concentration();
    throw ParseError("unknown verify suite '" + suite +
                     "' (expected dp-oracle, bounds, reduction or concentration)");
}

Json to_json(const VerifyReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"measured", c.measured},
                          {"threshold", c.threshold},
                          {"passed", c.passed}});
    return Json{{"suite", report.suite}, {"checks", std::move(checks)}, {"passed", report.passed()}};
}

} // namespace ilab
