#include "harness.hpp"

#include "analytics.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace ilab {

std::string to_string(Algorithm algo) {
    switch (algo) {
    case Algorithm::bc: return "bc";
    case Algorithm::mimic_emp: return "mimic_emp";
    case Algorithm::mimic_md: return "mimic_md";
    case Algorithm::active_bc: return "active_bc";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "bc") return Algorithm::bc;
    if (name == "mimic_emp") return Algorithm::mimic_emp;
    if (name == "mimic_md") return Algorithm::mimic_md;
    if (name == "active_bc") return Algorithm::active_bc;
    throw ParseError("unknown algorithm '" + name +
                     "' (expected bc, mimic_emp, mimic_md or active_bc)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::N: return "N";
    case SweepAxis::H: return "H";
    case SweepAxis::S: return "S";
    }
    return "?";
}

SweepAxis axis_from_string(const std::string& name) {
    if (name == "N") return SweepAxis::N;
    if (name == "H") return SweepAxis::H;
    if (name == "S") return SweepAxis::S;
    throw ParseError("unknown sweep axis '" + name + "' (expected N, H or S)");
}

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    ExperimentConfig c;
    c.family = family_from_string(get_or<std::string>(j, "family", "lb_no_interaction"));
    c.params.num_states = get_or<int>(j, "S", 0);
    c.params.num_actions = get_or<int>(j, "A", 0);
    c.params.horizon = get_or<int>(j, "H", 0);
    c.params.dataset_size = get_or<int>(j, "N", 0);
    if (j.contains("expert")) {
        const auto& e = j.at("expert");
        const auto kind = get_or<std::string>(e, "kind", "deterministic");
        if (kind == "stochastic")
            c.expert_kind = ExpertKind::stochastic(get_or<double>(e, "alpha", 1.0));
        else if (kind != "deterministic")
            throw ParseError("expert.kind must be 'deterministic' or 'stochastic'");
    }
    c.algorithm = algorithm_from_string(get_or<std::string>(j, "algorithm", "bc"));
    if (j.contains("completion")) {
        const auto& comp = j.at("completion");
        if (comp.is_string() && comp.get<std::string>() == "uniform")
            c.completion = Completion::uniform();
        else if (comp.is_object() && comp.contains("fixed_action"))
            c.completion = Completion::fixed(comp.at("fixed_action").get<int>());
        else
            throw ParseError("completion must be \"uniform\" or {\"fixed_action\": a}");
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        const auto kind = get_or<std::string>(s, "kind", "exact");
        if (kind == "exact")
            c.solver.kind = MdSolverConfig::Kind::exact;
        else if (kind == "subgradient")
            c.solver.kind = MdSolverConfig::Kind::subgradient;
        else
            throw ParseError("solver.kind must be 'exact' or 'subgradient'");
        c.solver.subgradient.restarts = get_or<int>(s, "restarts", c.solver.subgradient.restarts);
        c.solver.subgradient.steps = get_or<int>(s, "steps", c.solver.subgradient.steps);
        c.solver.exact.max_nodes = get_or<std::uint64_t>(s, "max_nodes", c.solver.exact.max_nodes);
    }
    if (!j.contains("sweep")) throw ParseError("config needs a 'sweep' object");
    const auto& sweep = j.at("sweep");
    c.axis = axis_from_string(get_or<std::string>(sweep, "axis", "N"));
    c.grid = get_or<std::vector<int>>(sweep, "grid", {});
    c.replicates = get_or<int>(j, "replicates", 1);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.output = get_or<std::string>(j, "output", "");
    c.threads = get_or<int>(j, "threads", 0);
    c.timing = get_or<bool>(j, "timing", false);
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["family"] = to_string(c.family);
    j["S"] = c.params.num_states;
    j["A"] = c.params.num_actions;
    j["H"] = c.params.horizon;
    j["N"] = c.params.dataset_size;
    if (c.expert_kind.kind == ExpertKind::Kind::stochastic)
        j["expert"] = {{"kind", "stochastic"}, {"alpha", c.expert_kind.concentration}};
    else
        j["expert"] = {{"kind", "deterministic"}};
    j["algorithm"] = to_string(c.algorithm);
    if (c.completion.kind == Completion::Kind::fixed_action)
        j["completion"] = {{"fixed_action", c.completion.action}};
    else
        j["completion"] = "uniform";
    j["solver"] = {{"kind", c.solver.kind == MdSolverConfig::Kind::exact ? "exact" : "subgradient"},
                   {"restarts", c.solver.subgradient.restarts},
                   {"steps", c.solver.subgradient.steps},
                   {"max_nodes", c.solver.exact.max_nodes}};
    j["sweep"] = {{"axis", to_string(c.axis)}, {"grid", c.grid}};
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["threads"] = c.threads;
    j["timing"] = c.timing;
    return j;
}

void validate(const ExperimentConfig& c) {
    if (c.grid.empty()) throw DomainError("config: sweep grid is empty");
    for (std::size_t i = 1; i < c.grid.size(); ++i)
        if (c.grid[i] <= c.grid[i - 1]) throw DomainError("config: grid must be strictly increasing");
    if (c.replicates < 1) throw DomainError("config: replicates must be >= 1");
    auto p = c.params;
    for (int g : c.grid) {
        if (g <= 0) throw DomainError("config: grid values must be positive");
        if (c.axis == SweepAxis::N) p.dataset_size = g;
        if (c.axis == SweepAxis::H) p.horizon = g;
        if (c.axis == SweepAxis::S) p.num_states = g;
        if (p.num_states <= 0 || p.num_actions <= 0 || p.horizon <= 0)
            throw DomainError("config: S, A and H must be positive");
        if (p.dataset_size < 0) throw DomainError("config: N must be non-negative");
    }
    if (c.completion.kind == Completion::Kind::fixed_action &&
        (c.completion.action < 0 || c.completion.action >= c.params.num_actions))
        throw DomainError("config: completion action out of range");
}

ExperimentRow run_replicate(const ExperimentConfig& c, std::size_t grid_index, int replicate) {
    const auto start = std::chrono::steady_clock::now();
    InstanceParams p = c.params;
    const int g = c.grid.at(grid_index);
    if (c.axis == SweepAxis::N) p.dataset_size = g;
    if (c.axis == SweepAxis::H) p.horizon = g;
    if (c.axis == SweepAxis::S) p.num_states = g;

    ExperimentRow row;
    row.family = to_string(c.family);
    row.algo = to_string(c.algorithm);
    row.S = p.num_states;
    row.A = p.num_actions;
    row.H = p.horizon;
    row.N = p.dataset_size;
    row.replicate = replicate;
    row.seed = child_seed(c.seed, grid_index, static_cast<std::uint64_t>(replicate));

    try {
        const auto bundle = make_instance(c.family, p, child_seed(row.seed, 0), c.expert_kind);
        const auto& dyn = bundle.mdp.dynamics();
        const auto n = static_cast<std::size_t>(p.dataset_size);
        const auto data_seed = child_seed(row.seed, 1);

        std::optional<Policy> learner;
        switch (c.algorithm) {
        case Algorithm::bc:
        case Algorithm::mimic_emp: {
            const auto data = sample_dataset(dyn, bundle.expert, n, data_seed);
            const VisitIndex index(data, p.num_states, p.num_actions, p.horizon);
            learner = c.algorithm == Algorithm::bc ? behavior_cloning(index, c.completion)
                                                   : mimic_emp(index);
            break;
        }
        case Algorithm::active_bc: {
            ActiveOracle oracle(bundle.expert);
            learner = active_bc(dyn, oracle, n, data_seed, c.completion);
            break;
        }
        case Algorithm::mimic_md: {
            const auto data = sample_dataset(dyn, bundle.expert, n, data_seed);
            auto res = mimic_md(dyn, data, child_seed(row.seed, 2), c.solver);
            row.objective = res.objective;
            row.epsilon = res.epsilon;
            learner = std::move(res.policy);
            break;
        }
        }
        row.suboptimality = value(bundle.mdp, bundle.expert) - value(bundle.mdp, *learner);
        if (bundle.expert.is_deterministic())
            row.pop01 = pop_01_risk(bundle.mdp, bundle.expert, *learner);
        row.tv = pop_tv_risk(bundle.mdp, bundle.expert, *learner);
    } catch (const GuardExceededError&) {
        row.status = "guard_exceeded";
    } catch (const StochasticExpertError&) {
        row.status = "stochastic_expert";
    } catch (const DomainError&) {
        row.status = "domain_error";
    }
    if (c.timing)
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                start)
                          .count();
    return row;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& c) {
    validate(c);
    const std::size_t R = static_cast<std::size_t>(c.replicates);
    const std::size_t total = c.grid.size() * R;
    std::vector<ExperimentRow> rows(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= total) return;
            try {
                rows[k] = run_replicate(c, k / R, static_cast<int>(k % R));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
            }
        }
    };
    unsigned threads = c.threads > 0 ? static_cast<unsigned>(c.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? shortest(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ParseError("bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("bad number '" + s + "'");
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::string to_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.family + ',' + r.algo + ',' + std::to_string(r.S) + ',' + std::to_string(r.A) +
               ',' + std::to_string(r.H) + ',' + std::to_string(r.N) + ',' +
               std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ',' +
               opt(r.suboptimality) + ',' + opt(r.pop01) + ',' + opt(r.tv) + ',' +
               opt(r.objective) + ',' + opt(r.epsilon) + ',' + r.status + ',' + opt(r.wall_ms) +
               '\n';
    }
    return out;
}

std::vector<ExperimentRow> rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ParseError("CSV header mismatch: '" + line + "'");
    std::vector<ExperimentRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 15)
            throw ParseError("CSV line " + std::to_string(lineno) + ": expected 15 fields");
        ExperimentRow r;
        try {
            r.family = f[0];
            r.algo = f[1];
            r.S = std::stoi(f[2]);
            r.A = std::stoi(f[3]);
            r.H = std::stoi(f[4]);
            r.N = std::stoi(f[5]);
            r.replicate = std::stoi(f[6]);
            r.seed = std::stoull(f[7]);
        } catch (const std::logic_error&) {
            throw ParseError("CSV line " + std::to_string(lineno) + ": bad integer field");
        }
        r.suboptimality = parse_opt(f[8]);
        r.pop01 = parse_opt(f[9]);
        r.tv = parse_opt(f[10]);
        r.objective = parse_opt(f[11]);
        r.epsilon = parse_opt(f[12]);
        r.status = f[13];
        r.wall_ms = parse_opt(f[14]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

namespace {

double binding_bound(const std::string& algo, double S, double H, double N) {
    if (algo == "bc" || algo == "active_bc") return bound_bc_expected(S, H, N);
    if (algo == "mimic_emp") return N > 1 ? bound_mimic_emp(S, H, N) : H;
    if (algo == "mimic_md") return bound_mimic_md_expected(S, H, N);
    return 0.0;
}

} // namespace

RateFit fit_rate(const std::vector<ExperimentRow>& rows, SweepAxis x_axis,
                 const FitOptions& options) {
    struct Group {
        std::vector<double> values;
        const ExperimentRow* first = nullptr;
    };
    std::map<int, Group> groups;
    for (const auto& r : rows) {
        if (!options.family.empty() && r.family != options.family) continue;
        if (!options.algo.empty() && r.algo != options.algo) continue;
        if (r.status != "ok" || !r.suboptimality) continue;
        const int x = x_axis == SweepAxis::N ? r.N : (x_axis == SweepAxis::H ? r.H : r.S);
        auto& g = groups[x];
        if (!g.first) g.first = &r;
        g.values.push_back(*r.suboptimality);
    }

    RateFit fit;
    fit.x_axis = x_axis;
    std::vector<const Group*> usable;
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& [x, g] : groups) {
        RatePoint pt;
        pt.x = x;
        pt.n = g.values.size();
        double sum = 0.0;
        for (double v : g.values) sum += v;
        pt.mean = sum / static_cast<double>(pt.n);
        double ss = 0.0;
        for (double v : g.values) ss += (v - pt.mean) * (v - pt.mean);
        pt.stderr_mean = pt.n > 1 ? std::sqrt(ss / static_cast<double>(pt.n - 1) /
                                              static_cast<double>(pt.n))
                                  : 0.0;
        if (!(pt.mean > 0.0)) {
            pt.excluded = true;
            pt.reason = "nonpositive mean";
        } else if (x_axis == SweepAxis::H && options.exclude_binding) {
            const auto& r = *g.first;
            if (binding_bound(r.algo, r.S, r.H, r.N) >= r.H) {
                pt.excluded = true;
                pt.reason = "bound capped at H";
            }
        }
        if (pt.excluded) {
            fit.warnings.push_back("excluded x=" + shortest(pt.x) + " (" + pt.reason + ")");
        } else {
            usable.push_back(&g);
            lx.push_back(std::log(pt.x));
            ly.push_back(std::log(pt.mean));
        }
        fit.points.push_back(pt);
    }
    if (usable.size() < 3)
        throw DomainError("fit_rate: need at least 3 grid points with positive means, have " +
                          std::to_string(usable.size()));
    std::tie(fit.slope, fit.intercept) = ols(lx, ly);

    CounterRng rng(options.seed);
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(std::max(0, options.bootstrap)));
    std::vector<double> by(ly.size());
    for (int b = 0; b < options.bootstrap; ++b) {
        bool ok = true;
        for (std::size_t k = 0; k < usable.size(); ++k) {
            const auto& vals = usable[k]->values;
            double sum = 0.0;
            for (std::size_t i = 0; i < vals.size(); ++i) sum += vals[rng.below(vals.size())];
            const double mean = sum / static_cast<double>(vals.size());
            if (!(mean > 0.0)) ok = false;
            by[k] = ok ? std::log(mean) : 0.0;
        }
        if (ok) slopes.push_back(ols(lx, by).first);
    }
    if (slopes.empty()) {
        fit.ci_low = fit.ci_high = fit.slope;
        fit.warnings.emplace_back("no usable bootstrap resamples; CI collapsed to the estimate");
    } else {
        std::sort(slopes.begin(), slopes.end());
        auto quantile = [&](double q) {
            const auto idx = static_cast<std::size_t>(
                std::clamp(std::floor(q * static_cast<double>(slopes.size() - 1) + 0.5), 0.0,
                           static_cast<double>(slopes.size() - 1)));
            return slopes[idx];
        };
        fit.ci_low = std::min(quantile(0.025), fit.slope);
        fit.ci_high = std::max(quantile(0.975), fit.slope);
    }
    return fit;
}

Json to_json(const RateFit& fit) {
    Json points = Json::array();
    for (const auto& p : fit.points) {
        Json jp{{"x", p.x}, {"mean", p.mean}, {"stderr", p.stderr_mean}, {"n", p.n}};
        if (p.excluded) jp["excluded"] = p.reason;
        points.push_back(std::move(jp));
    }
    return Json{{"x_axis", to_string(fit.x_axis)}, {"slope", fit.slope},
                {"intercept", fit.intercept},     {"ci_low", fit.ci_low},
                {"ci_high", fit.ci_high},         {"points", std::move(points)},
                {"warnings", fit.warnings}};
}

} // namespace ilab
