#include <doctest.h>

#include "errors.hpp"
#include "harness.hpp"
#include "json_io.hpp"
#include "rng.hpp"

#include <cmath>

using namespace ilab;

namespace {

ExperimentConfig small_config(const char* algo, const char* family = "lb_known_transition") {
    return config_from_json(Json{{"family", family},
                                 {"S", 4},
                                 {"A", 3},
                                 {"H", 4},
                                 {"N", 8},
                                 {"algorithm", algo},
                                 {"sweep", {{"axis", "N"}, {"grid", {4, 8, 16}}}},
                                 {"replicates", 5},
                                 {"seed", 17},
                                 {"threads", 1}});
}

std::vector<ExperimentRow> synthetic(const char* axis, double power, int replicates) {
    std::vector<ExperimentRow> rows;
    for (int x : {10, 20, 40, 80, 160})
        for (int r = 0; r < replicates; ++r) {
            ExperimentRow row;
            row.family = "lb_no_interaction";
            row.algo = "bc";
            row.S = 6;
            row.A = 4;
            row.H = std::string(axis) == "H" ? x : 10;
            row.N = std::string(axis) == "N" ? x : 1000000;
            row.replicate = r;
            row.suboptimality = 3.0 * std::pow(x, power) * (1.0 + 0.1 * (r % 3 - 1));
            rows.push_back(row);
        }
    return rows;
}

} // namespace

TEST_CASE("a single BC replicate yields one row with suboptimality in [0, H]") {
    auto c = small_config("bc");
    c.grid = {8};
    c.replicates = 1;
    const auto rows = run_experiment(c);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "ok");
    CHECK(*rows[0].suboptimality >= 0.0);
    CHECK(*rows[0].suboptimality <= 4.0);
    CHECK_FALSE(rows[0].wall_ms.has_value());
    CHECK(rows[0].seed == child_seed(17, 0, 0));
}

TEST_CASE("CSV output is byte-identical across repeats and thread counts") {
    for (const char* algo : {"bc", "mimic_emp", "mimic_md", "active_bc"}) {
        auto c = small_config(algo);
        const auto first = to_csv(run_experiment(c));
        CHECK(to_csv(run_experiment(c)) == first);
        c.threads = 4;
        CHECK(to_csv(run_experiment(c)) == first);
        CHECK(first.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    }
}

TEST_CASE("CSV round trip preserves every field") {
    auto c = small_config("mimic_md");
    c.timing = true;
    const auto rows = run_experiment(c);
    CHECK(rows[0].wall_ms.has_value());
    const auto text = to_csv(rows);
    const auto back = rows_from_csv(text);
    REQUIRE(back.size() == rows.size());
    CHECK(to_csv(back) == text);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].suboptimality == rows[i].suboptimality);
        CHECK(back[i].objective == rows[i].objective);
        CHECK(back[i].seed == rows[i].seed);
    }
    CHECK_THROWS_AS(rows_from_csv("family,algo\n"), ParseError);
    CHECK_THROWS_AS(rows_from_csv(std::string(kCsvHeader) + "\nbc,1,2\n"), ParseError);
}

TEST_CASE("failed replicates are recorded as statuses") {
    auto c = small_config("bc", "random");
    c.expert_kind = ExpertKind::stochastic(1.0);
    const auto rows = run_experiment(c);
    for (const auto& r : rows) {
        CHECK(r.status == "stochastic_expert");
        CHECK_FALSE(r.suboptimality.has_value());
    }
    auto md = small_config("mimic_md", "random");
    md.solver.exact.max_nodes = 1;
    md.params.num_states = 6;
    for (const auto& r : run_experiment(md)) CHECK(r.status == "guard_exceeded");
}

TEST_CASE("active BC and offline BC produce the same rows under the same seed") {
    auto offline = small_config("bc", "lb_no_interaction");
    auto active = small_config("active_bc", "lb_no_interaction");
    const auto a = run_experiment(offline);
    const auto b = run_experiment(active);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].suboptimality == b[i].suboptimality);
}

TEST_CASE("fit_rate recovers synthetic power laws") {
    const auto inv = fit_rate(synthetic("N", -1.0, 30), SweepAxis::N);
    CHECK(std::abs(inv.slope + 1.0) < 1e-9);
    CHECK(inv.ci_low <= inv.slope);
    CHECK(inv.ci_high >= inv.slope);
    CHECK(inv.points.size() == 5);
    CHECK(inv.points[0].n == 30);
    const auto root = fit_rate(synthetic("N", -0.5, 30), SweepAxis::N);
    CHECK(std::abs(root.slope + 0.5) < 1e-9);
    const auto sq = fit_rate(synthetic("H", 2.0, 30), SweepAxis::H);
    CHECK(std::abs(sq.slope - 2.0) < 1e-9);
    CHECK(sq.warnings.empty());
}

TEST_CASE("fit_rate excludes nonpositive means and capped H points") {
    auto rows = synthetic("N", -1.0, 4);
    for (auto& r : rows)
        if (r.N == 10) r.suboptimality = -1.0;
    const auto fit = fit_rate(rows, SweepAxis::N);
    CHECK(fit.points[0].excluded);
    CHECK(fit.warnings.size() == 1);
    CHECK(std::abs(fit.slope + 1.0) < 1e-9);

    auto h = synthetic("H", 2.0, 4);
    for (auto& r : h) r.N = 10; // (4/9) 6 H^2 / 10 >= H for every H >= 4
    CHECK_THROWS_AS(fit_rate(h, SweepAxis::H), DomainError);
    FitOptions keep;
    keep.exclude_binding = false;
    CHECK(std::abs(fit_rate(h, SweepAxis::H, keep).slope - 2.0) < 1e-9);

    FitOptions other;
    other.algo = "mimic_md";
    CHECK_THROWS_AS(fit_rate(rows, SweepAxis::N, other), DomainError);
}

TEST_CASE("ols on exact lines") {
    const auto [slope, intercept] = ols({1, 2, 3}, {5, 7, 9});
    CHECK(slope == doctest::Approx(2.0));
    CHECK(intercept == doctest::Approx(3.0));
}

TEST_CASE("config parsing and validation") {
    const auto c = small_config("mimic_md");
    CHECK(c.algorithm == Algorithm::mimic_md);
    CHECK(c.grid == std::vector<int>{4, 8, 16});
    const auto again = config_from_json(to_json(c));
    CHECK(to_json(again) == to_json(c));

    CHECK_THROWS_AS(config_from_json(Json{{"S", 3}}), ParseError);
    CHECK_THROWS_AS(config_from_json(Json{{"algorithm", "dagger"}, {"sweep", {{"grid", {1}}}}}), ParseError);
    auto bad = c;
    bad.grid = {8, 4};
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = c;
    bad.replicates = 0;
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = c;
    bad.completion = Completion::fixed(3);
    CHECK_THROWS_AS(validate(bad), DomainError);
    CHECK(algorithm_from_string(to_string(Algorithm::active_bc)) == Algorithm::active_bc);
    CHECK(axis_from_string("H") == SweepAxis::H);
    CHECK_THROWS_AS(axis_from_string("T"), ParseError);
}
