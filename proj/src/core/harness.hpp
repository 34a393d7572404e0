#pragma once

#include "instances.hpp"
#include "json_io.hpp"
#include "learners.hpp"
#include "mimic_md.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ilab {

enum class Algorithm { bc, mimic_emp, mimic_md, active_bc };
enum class SweepAxis { N, H, S };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);
std::string to_string(SweepAxis axis);
SweepAxis axis_from_string(const std::string& name);

struct ExperimentConfig {
    Family family = Family::lb_no_interaction;
    InstanceParams params;       // values on the swept axis are overridden per grid point
    ExpertKind expert_kind;      // random family only
    Algorithm algorithm = Algorithm::bc;
    Completion completion;       // bc / active_bc
    MdSolverConfig solver;       // mimic_md
    SweepAxis axis = SweepAxis::N;
    std::vector<int> grid;
    int replicates = 1;
    std::uint64_t seed = 0;
    std::string output;          // CSV path; empty means stdout
    int threads = 0;             // 0: hardware concurrency
    bool timing = false;         // wall_ms column is left empty unless set
};

/**
 * Config JSON:
 *   {"family": "lb_no_interaction", "S": 6, "A": 4, "H": 10, "N": 100,
 *    "expert": {"kind": "stochastic", "alpha": 1.0},
 *    "algorithm": "bc", "completion": "uniform" | {"fixed_action": 2},
 *    "solver": {"kind": "exact" | "subgradient", "restarts": 8, "steps": 500,
 *               "max_nodes": 16777216},
 *    "sweep": {"axis": "N", "grid": [10, 20, 40]},
 *    "replicates": 400, "seed": 1, "output": "out.csv", "threads": 0, "timing": false}
 */
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& config);
/// Throws DomainError on a non-increasing grid, R < 1, or bad parameters.
void validate(const ExperimentConfig& config);

struct ExperimentRow {
    std::string family;
    std::string algo;
    int S = 0;
    int A = 0;
    int H = 0;
    int N = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    std::optional<double> suboptimality;
    std::optional<double> pop01;
    std::optional<double> tv;
    std::optional<double> objective;
    std::optional<double> epsilon;
    std::string status = "ok";
    std::optional<double> wall_ms;
};

inline constexpr const char* kCsvHeader =
    "family,algo,S,A,H,N,replicate,seed,suboptimality,pop01,tv,objective,epsilon,status,wall_ms";

/// Per-replicate seed: child_seed(config.seed, grid_index, replicate).
ExperimentRow run_replicate(const ExperimentConfig& config, std::size_t grid_index,
                            int replicate);

/// Rows ordered by (grid index, replicate), independent of worker scheduling.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

std::string to_csv(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> rows_from_csv(const std::string& text);

// Rate fitting --------------------------------------------------------------

struct RatePoint {
    double x = 0.0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t n = 0;
    bool excluded = false;
    std::string reason;
};

struct RateFit {
    SweepAxis x_axis = SweepAxis::N;
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<RatePoint> points;
    std::vector<std::string> warnings;
};

struct FitOptions {
    std::string family; // empty: no filter
    std::string algo;
    int bootstrap = 1000;
    std::uint64_t seed = 0x5eed;
    /// Drop grid points where the algorithm's bound is capped at H. Applies
    /// only to H-axis fits.
    bool exclude_binding = true;
};

/// OLS of log(mean suboptimality) on log(x) with a percentile bootstrap CI
/// over replicates. Requires at least three usable grid points.
RateFit fit_rate(const std::vector<ExperimentRow>& rows, SweepAxis x_axis,
                 const FitOptions& options = {});

Json to_json(const RateFit& fit);

/// Ordinary least squares slope and intercept of y on x.
std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y);

} // namespace ilab
