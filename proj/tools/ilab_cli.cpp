// Command-line front end. Everything goes through the C API in libilab.

#include "ilab/ilab.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using Json = nlohmann::json;

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(int status, const char* what) {
    if (status != ILAB_OK)
        throw CliError(std::string(what) + " failed (" + std::to_string(status) +
                       "): " + ilab_last_error());
}

std::string take(char* s) {
    std::string out = s ? s : "";
    ilab_string_free(s);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError("cannot write '" + path + "'");
    out << text;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

template <typename T>
void set_if(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

struct InstanceFlags {
    std::optional<std::string> family;
    std::optional<int> S, A, H, N;
    std::optional<std::string> expert;
    std::optional<double> alpha;

    void add(CLI::App* app) {
        app->add_option("--family", family, "lb_no_interaction | lb_known_transition | random");
        app->add_option("-S,--states", S, "Number of states");
        app->add_option("-A,--actions", A, "Number of actions");
        app->add_option("-H,--horizon", H, "Horizon");
        app->add_option("-N,--dataset-size", N, "Dataset size (sets zeta = 1/(N+1))");
        app->add_option("--expert", expert, "deterministic | stochastic (random family)");
        app->add_option("--alpha", alpha, "Dirichlet concentration of a stochastic expert");
    }

    void apply(Json& j) const {
        set_if(j, "family", family);
        set_if(j, "S", S);
        set_if(j, "A", A);
        set_if(j, "H", H);
        set_if(j, "N", N);
        if (expert || alpha) {
            Json e = j.value("expert", Json::object());
            if (expert) e["kind"] = *expert;
            if (alpha) e["alpha"] = *alpha;
            j["expert"] = e;
        }
    }
};

int cmd_gen_instance(const InstanceFlags& flags, std::uint64_t seed, const std::string& out_dir,
                     std::optional<std::size_t> samples, std::uint64_t sample_seed) {
    Json params = Json::object();
    flags.apply(params);
    params["seed"] = seed;
    ilab_mdp_t mdp = nullptr;
    ilab_policy_t expert = nullptr;
    char* manifest = nullptr;
    check(ilab_gen_instance(params.dump().c_str(), &mdp, &expert, &manifest), "gen-instance");
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    char* text = nullptr;
    check(ilab_mdp_to_json(mdp, &text), "mdp_to_json");
    write_file((dir / "mdp.json").string(), take(text) + "\n");
    check(ilab_policy_to_json(expert, &text), "policy_to_json");
    write_file((dir / "expert.json").string(), take(text) + "\n");
    write_file((dir / "manifest.json").string(), take(manifest) + "\n");
    if (samples) {
        ilab_dataset_t data = nullptr;
        check(ilab_sample_dataset(mdp, expert, *samples, sample_seed, &data), "sample_dataset");
        check(ilab_dataset_to_json(data, &text), "dataset_to_json");
        write_file((dir / "dataset.json").string(), take(text) + "\n");
        ilab_dataset_destroy(data);
    }
    ilab_mdp_destroy(mdp);
    ilab_policy_destroy(expert);
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular episodic imitation-learning lab"};
    app.require_subcommand(1);

    // gen-instance
    auto* gen = app.add_subcommand("gen-instance", "Write mdp.json, expert.json and manifest.json");
    InstanceFlags gen_flags;
    gen_flags.add(gen);
    std::uint64_t gen_seed = 0;
    std::string gen_out = ".";
    std::optional<std::size_t> gen_samples;
    std::uint64_t gen_sample_seed = 1;
    gen->add_option("--seed", gen_seed, "Instance seed");
    gen->add_option("-o,--out-dir", gen_out, "Output directory");
    gen->add_option("--samples", gen_samples, "Also write dataset.json with this many expert rollouts");
    gen->add_option("--sample-seed", gen_sample_seed, "Seed for --samples");

    // run
    auto* run = app.add_subcommand("run", "Run a sweep and write one CSV row per replicate");
    std::string run_config;
    InstanceFlags run_flags;
    run_flags.add(run);
    std::optional<std::string> algorithm, axis, output, solver;
    std::optional<std::vector<int>> grid;
    std::optional<int> replicates, threads, fixed_action;
    std::optional<std::uint64_t> run_seed;
    bool timing = false;
    run->add_option("-c,--config", run_config, "Config JSON file")->check(CLI::ExistingFile);
    run->add_option("--algorithm", algorithm, "bc | mimic_emp | mimic_md | active_bc");
    run->add_option("--axis", axis, "Sweep axis: N | H | S");
    run->add_option("--grid", grid, "Grid values for the sweep axis")->delimiter(',');
    run->add_option("-R,--replicates", replicates, "Replicates per grid point");
    run->add_option("--seed", run_seed, "Base seed");
    run->add_option("-o,--output", output, "CSV path (default: stdout)");
    run->add_option("-j,--threads", threads, "Worker threads (0: hardware concurrency)");
    run->add_option("--solver", solver, "exact | subgradient (mimic_md)");
    run->add_option("--fixed-action", fixed_action, "Complete unvisited states with this action");
    run->add_flag("--timing", timing, "Fill the wall_ms column (makes output non-reproducible)");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit log-log rate of mean suboptimality");
    std::string fit_input;
    std::string fit_axis = "N";
    std::string fit_output;
    std::optional<std::string> fit_family, fit_algo;
    std::optional<int> fit_bootstrap;
    std::optional<std::uint64_t> fit_seed;
    bool keep_binding = false;
    fit->add_option("-i,--input", fit_input, "CSV produced by run")->required()->check(CLI::ExistingFile);
    fit->add_option("--x-axis", fit_axis, "N | H | S");
    fit->add_option("--family", fit_family, "Filter rows by family");
    fit->add_option("--algo", fit_algo, "Filter rows by algorithm");
    fit->add_option("--bootstrap", fit_bootstrap, "Bootstrap resamples");
    fit->add_option("--seed", fit_seed, "Bootstrap seed");
    fit->add_flag("--keep-binding", keep_binding, "Keep H-axis points where the bound is capped at H");
    fit->add_option("-o,--output", fit_output, "JSON path (default: stdout)");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Evaluate closed-form bounds");
    double b_S = 0, b_H = 0, b_N = 0;
    std::optional<double> b_delta;
    std::vector<std::string> b_names;
    bounds->add_option("-S,--states", b_S)->required();
    bounds->add_option("-H,--horizon", b_H)->required();
    bounds->add_option("-N,--dataset-size", b_N)->required();
    bounds->add_option("--delta", b_delta, "Failure probability for high-probability bounds");
    bounds->add_option("--name", b_names, "Restrict to these bounds");

    // verify
    auto* ver = app.add_subcommand("verify", "Run a verification suite; exit 0 iff all checks pass");
    std::string suite = "all";
    std::string ver_output;
    ver->add_option("suite", suite, "dp-oracle | bounds | reduction | concentration | all");
    ver->add_option("-o,--output", ver_output, "JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return cmd_gen_instance(gen_flags, gen_seed, gen_out, gen_samples, gen_sample_seed);

        if (*run) {
            Json cfg = run_config.empty() ? Json::object() : Json::parse(read_file(run_config));
            run_flags.apply(cfg);
            set_if(cfg, "algorithm", algorithm);
            set_if(cfg, "replicates", replicates);
            set_if(cfg, "seed", run_seed);
            set_if(cfg, "output", output);
            set_if(cfg, "threads", threads);
            if (timing) cfg["timing"] = true;
            if (fixed_action) cfg["completion"] = {{"fixed_action", *fixed_action}};
            if (solver) {
                Json s = cfg.value("solver", Json::object());
                s["kind"] = *solver;
                cfg["solver"] = s;
            }
            if (axis || grid) {
                Json s = cfg.value("sweep", Json::object());
                if (axis) s["axis"] = *axis;
                if (grid) s["grid"] = *grid;
                cfg["sweep"] = s;
            }
            char* csv = nullptr;
            check(ilab_run_experiment(cfg.dump().c_str(), &csv), "run");
            emit(cfg.value("output", std::string()), take(csv));
            return 0;
        }

        if (*fit) {
            Json opts{{"x_axis", fit_axis}, {"exclude_binding", !keep_binding}};
            set_if(opts, "family", fit_family);
            set_if(opts, "algo", fit_algo);
            set_if(opts, "bootstrap", fit_bootstrap);
            set_if(opts, "seed", fit_seed);
            char* out = nullptr;
            check(ilab_fit_rate(read_file(fit_input).c_str(), opts.dump().c_str(), &out), "fit");
            const std::string text = take(out);
            emit(fit_output, text + "\n");
            for (const auto& w : Json::parse(text).value("warnings", Json::array()))
                std::cerr << "warning: " << w.get<std::string>() << "\n";
            return 0;
        }

        if (*bounds) {
            Json req{{"S", b_S}, {"H", b_H}, {"N", b_N}};
            set_if(req, "delta", b_delta);
            if (!b_names.empty()) req["names"] = b_names;
            char* out = nullptr;
            check(ilab_bounds(req.dump().c_str(), &out), "bounds");
            std::cout << take(out) << "\n";
            return 0;
        }

        if (*ver) {
            std::vector<std::string> suites;
            if (suite == "all")
                suites = {"dp-oracle", "bounds", "reduction", "concentration"};
            else
                suites = {suite};
            Json reports = Json::array();
            bool all_passed = true;
            for (const auto& s : suites) {
                char* out = nullptr;
                int passed = 0;
                check(ilab_verify(s.c_str(), &out, &passed), "verify");
                reports.push_back(Json::parse(take(out)));
                all_passed = all_passed && passed == 1;
            }
            const Json doc = suites.size() == 1 ? reports[0] : Json{{"suites", reports}, {"passed", all_passed}};
            emit(ver_output, doc.dump(2) + "\n");
            return all_passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
