#include "ilab/ilab.h"

#include "analytics.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>

struct ilab_mdp_s {
    ilab::TabularMdp value;
};
struct ilab_policy_s {
    ilab::Policy value;
};
struct ilab_dataset_s {
    ilab::Dataset value;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
    g_last_error = what;
    return code;
}

template <typename F>
int guard(F&& body) {
    try {
        g_last_error.clear();
        body();
        return ILAB_OK;
    } catch (const ilab::DimensionError& e) {
        return fail(ILAB_ERR_DIMENSION, e.what());
    } catch (const ilab::StochasticExpertError& e) {
        return fail(ILAB_ERR_STOCHASTIC_EXPERT, e.what());
    } catch (const ilab::GuardExceededError& e) {
        return fail(ILAB_ERR_GUARD, e.what());
    } catch (const ilab::ParseError& e) {
        return fail(ILAB_ERR_PARSE, e.what());
    } catch (const ilab::DomainError& e) {
        return fail(ILAB_ERR_DOMAIN, e.what());
    } catch (const ilab::Json::exception& e) {
        return fail(ILAB_ERR_PARSE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(ILAB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(ILAB_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(ILAB_ERR_INTERNAL, "unknown exception");
    }
}

struct NullArgument : std::invalid_argument {
    explicit NullArgument(const char* name)
        : std::invalid_argument(std::string("argument '") + name + "' is null") {}
};

#define ILAB_REQUIRE(p)                        \
    do {                                       \
        if (!(p)) throw NullArgument(#p);      \
    } while (0)

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ilab::Json parse(const char* text, const char* what) {
    return ilab::parse_json_text(text, what);
}

} // namespace

extern "C" {

const char* ilab_version(void) { return "0.1.0"; }

const char* ilab_last_error(void) { return g_last_error.c_str(); }

void ilab_string_free(char* str) { std::free(str); }

int ilab_mdp_from_json(ilab_mdp_t* out, const char* json) {
    return guard([&] {
        ILAB_REQUIRE(out);
        ILAB_REQUIRE(json);
        *out = new ilab_mdp_s{ilab::mdp_from_json(parse(json, "MDP JSON"))};
    });
}

int ilab_mdp_to_json(ilab_mdp_t mdp, char** out_json) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(out_json);
        *out_json = dup_string(ilab::to_json(mdp->value).dump());
    });
}

int ilab_mdp_dims(ilab_mdp_t mdp, int* num_states, int* num_actions, int* horizon) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        if (num_states) *num_states = mdp->value.num_states();
        if (num_actions) *num_actions = mdp->value.num_actions();
        if (horizon) *horizon = mdp->value.horizon();
    });
}

int ilab_mdp_destroy(ilab_mdp_t mdp) {
    delete mdp;
    return ILAB_OK;
}

int ilab_policy_from_json(ilab_policy_t* out, const char* json) {
    return guard([&] {
        ILAB_REQUIRE(out);
        ILAB_REQUIRE(json);
        *out = new ilab_policy_s{ilab::policy_from_json(parse(json, "policy JSON"))};
    });
}

int ilab_policy_to_json(ilab_policy_t policy, char** out_json) {
    return guard([&] {
        ILAB_REQUIRE(policy);
        ILAB_REQUIRE(out_json);
        *out_json = dup_string(ilab::to_json(policy->value).dump());
    });
}

int ilab_policy_destroy(ilab_policy_t policy) {
    delete policy;
    return ILAB_OK;
}

int ilab_dataset_from_json(ilab_dataset_t* out, const char* json) {
    return guard([&] {
        ILAB_REQUIRE(out);
        ILAB_REQUIRE(json);
        *out = new ilab_dataset_s{ilab::dataset_from_json(parse(json, "dataset JSON"))};
    });
}

int ilab_dataset_to_json(ilab_dataset_t dataset, char** out_json) {
    return guard([&] {
        ILAB_REQUIRE(dataset);
        ILAB_REQUIRE(out_json);
        *out_json = dup_string(ilab::to_json(dataset->value).dump());
    });
}

int ilab_dataset_size(ilab_dataset_t dataset, size_t* out) {
    return guard([&] {
        ILAB_REQUIRE(dataset);
        ILAB_REQUIRE(out);
        *out = dataset->value.size();
    });
}

int ilab_dataset_destroy(ilab_dataset_t dataset) {
    delete dataset;
    return ILAB_OK;
}

int ilab_gen_instance(const char* params_json, ilab_mdp_t* out_mdp, ilab_policy_t* out_expert,
                      char** out_manifest_json) {
    return guard([&] {
        ILAB_REQUIRE(params_json);
        auto j = parse(params_json, "instance parameters");
        // Reuse the run-config reader for family, dimensions and expert kind.
        j["sweep"] = {{"axis", "N"}, {"grid", {1}}};
        const auto config = ilab::config_from_json(j);
        const auto seed = j.value("seed", std::uint64_t{0});
        auto bundle = ilab::make_instance(config.family, config.params, seed, config.expert_kind);
        std::string manifest = ilab::manifest_json(bundle).dump(2);
        std::unique_ptr<ilab_mdp_s> mdp;
        std::unique_ptr<ilab_policy_s> expert;
        if (out_mdp) mdp.reset(new ilab_mdp_s{std::move(bundle.mdp)});
        if (out_expert) expert.reset(new ilab_policy_s{std::move(bundle.expert)});
        if (out_manifest_json) *out_manifest_json = dup_string(manifest);
        if (out_mdp) *out_mdp = mdp.release();
        if (out_expert) *out_expert = expert.release();
    });
}

int ilab_value(ilab_mdp_t mdp, ilab_policy_t policy, double* out) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(policy);
        ILAB_REQUIRE(out);
        *out = ilab::value(mdp->value, policy->value);
    });
}

int ilab_occupancy_json(ilab_mdp_t mdp, ilab_policy_t policy, char** out_json) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(policy);
        ILAB_REQUIRE(out_json);
        const auto occ = ilab::occupancy(mdp->value.dynamics(), policy->value);
        const ilab::Json j{{"state", occ.state_occ}, {"state_action", occ.state_action_occ}};
        *out_json = dup_string(j.dump());
    });
}

int ilab_sample_dataset(ilab_mdp_t mdp, ilab_policy_t expert, size_t n, uint64_t seed,
                        ilab_dataset_t* out) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(expert);
        ILAB_REQUIRE(out);
        *out = new ilab_dataset_s{
            ilab::sample_dataset(mdp->value.dynamics(), expert->value, n, seed)};
    });
}

int ilab_learn(ilab_mdp_t mdp, ilab_dataset_t dataset, const char* learner_json, uint64_t seed,
               ilab_policy_t* out_policy, char** out_info_json) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(dataset);
        ILAB_REQUIRE(learner_json);
        ILAB_REQUIRE(out_policy);
        auto j = parse(learner_json, "learner JSON");
        j["sweep"] = {{"axis", "N"}, {"grid", {1}}};
        const auto config = ilab::config_from_json(j);
        const auto& dyn = mdp->value.dynamics();
        const auto& data = dataset->value;
        ilab::Json info = ilab::Json::object();
        std::unique_ptr<ilab_policy_s> result;
        switch (config.algorithm) {
        case ilab::Algorithm::bc:
        case ilab::Algorithm::mimic_emp: {
            const ilab::VisitIndex index(data, dyn.num_states(), dyn.num_actions(), dyn.horizon());
            result.reset(new ilab_policy_s{config.algorithm == ilab::Algorithm::bc
                                               ? ilab::behavior_cloning(index, config.completion)
                                               : ilab::mimic_emp(index)});
            break;
        }
        case ilab::Algorithm::mimic_md: {
            auto res = ilab::mimic_md(dyn, data, seed, config.solver);
            info = {{"objective", res.objective}, {"epsilon", res.epsilon}};
            result.reset(new ilab_policy_s{std::move(res.policy)});
            break;
        }
        case ilab::Algorithm::active_bc:
            throw std::invalid_argument("active_bc needs an expert oracle, not a dataset");
        }
        if (out_info_json) *out_info_json = dup_string(info.dump());
        *out_policy = result.release();
    });
}

int ilab_risks(ilab_mdp_t mdp, ilab_policy_t expert, ilab_policy_t learner, double* out_pop01,
               double* out_tv) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(expert);
        ILAB_REQUIRE(learner);
        if (out_pop01)
            *out_pop01 = expert->value.is_deterministic()
                             ? ilab::pop_01_risk(mdp->value, expert->value, learner->value)
                             : std::numeric_limits<double>::quiet_NaN();
        if (out_tv) *out_tv = ilab::pop_tv_risk(mdp->value, expert->value, learner->value);
    });
}

int ilab_event_probabilities_json(ilab_mdp_t mdp, ilab_policy_t policy, ilab_dataset_t d1,
                                  char** out_json) {
    return guard([&] {
        ILAB_REQUIRE(mdp);
        ILAB_REQUIRE(policy);
        ILAB_REQUIRE(d1);
        ILAB_REQUIRE(out_json);
        const auto& dyn = mdp->value.dynamics();
        const ilab::VisitIndex index(d1->value, dyn.num_states(), dyn.num_actions(), dyn.horizon());
        *out_json =
            dup_string(ilab::to_json(ilab::event_probabilities(dyn, policy->value, index)).dump());
    });
}

int ilab_run_experiment(const char* config_json, char** out_csv) {
    return guard([&] {
        ILAB_REQUIRE(config_json);
        ILAB_REQUIRE(out_csv);
        const auto config = ilab::config_from_json(parse(config_json, "experiment config"));
        *out_csv = dup_string(ilab::to_csv(ilab::run_experiment(config)));
    });
}

int ilab_fit_rate(const char* csv, const char* options_json, char** out_fit_json) {
    return guard([&] {
        ILAB_REQUIRE(csv);
        ILAB_REQUIRE(out_fit_json);
        ilab::FitOptions options;
        auto axis = ilab::SweepAxis::N;
        if (options_json) {
            const auto j = parse(options_json, "fit options");
            axis = ilab::axis_from_string(j.value("x_axis", std::string("N")));
            options.family = j.value("family", options.family);
            options.algo = j.value("algo", options.algo);
            options.bootstrap = j.value("bootstrap", options.bootstrap);
            options.seed = j.value("seed", options.seed);
            options.exclude_binding = j.value("exclude_binding", options.exclude_binding);
        }
        const auto fit = ilab::fit_rate(ilab::rows_from_csv(csv), axis, options);
        *out_fit_json = dup_string(ilab::to_json(fit).dump(2));
    });
}

int ilab_bounds(const char* request_json, char** out_json) {
    return guard([&] {
        ILAB_REQUIRE(request_json);
        ILAB_REQUIRE(out_json);
        const auto j = parse(request_json, "bounds request");
        for (const char* key : {"S", "H", "N"})
            if (!j.contains(key) || !j.at(key).is_number())
                throw ilab::ParseError(std::string("bounds request needs numeric '") + key + "'");
        const double S = j.at("S").get<double>();
        const double H = j.at("H").get<double>();
        const double N = j.at("N").get<double>();
        const bool has_delta = j.contains("delta");
        const double delta = has_delta ? j.at("delta").get<double>() : 0.0;
        std::vector<std::string> wanted;
        if (j.contains("names")) wanted = j.at("names").get<std::vector<std::string>>();

        struct Entry {
            const char* name;
            bool needs_delta;
            std::function<double()> eval;
            ilab::Json inputs;
        };
        const std::vector<Entry> entries{
            {"bc_expected", false, [&] { return ilab::bound_bc_expected(S, H, N); },
             {{"S", S}, {"H", H}, {"N", N}}},
            {"bc_highprob", true, [&] { return ilab::bound_bc_highprob(S, H, N, delta); },
             {{"S", S}, {"H", H}, {"N", N}, {"delta", delta}}},
            {"mimic_emp", false, [&] { return ilab::bound_mimic_emp(S, H, N); },
             {{"S", S}, {"H", H}, {"N", N}}},
            {"mimic_md_expected", false, [&] { return ilab::bound_mimic_md_expected(S, H, N); },
             {{"S", S}, {"H", H}, {"N", N}}},
            {"mimic_md_highprob", true,
             [&] { return ilab::bound_mimic_md_highprob(S, H, N, delta); },
             {{"S", S}, {"H", H}, {"N", N}, {"delta", delta}}},
            {"missing_mass_deviation", true,
             [&] {
                 return ilab::missing_mass_deviation(static_cast<std::size_t>(S),
                                                     static_cast<std::uint64_t>(N), delta);
             },
             {{"support", S}, {"n", N}, {"delta", delta}}},
            {"min2", false, [&] { return ilab::min2_bound(static_cast<std::uint64_t>(N)); },
             {{"n", N}}},
        };
        for (const auto& w : wanted)
            if (std::none_of(entries.begin(), entries.end(),
                             [&](const Entry& e) { return w == e.name; }))
                throw ilab::ParseError("unknown bound '" + w + "'");

        ilab::Json out = ilab::Json::array();
        for (const auto& e : entries) {
            if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), e.name) == wanted.end())
                continue;
            if (e.needs_delta && !has_delta) {
                if (wanted.empty()) continue;
                throw ilab::ParseError(std::string("bound '") + e.name + "' needs 'delta'");
            }
            ilab::Json rec{{"name", e.name}, {"inputs", e.inputs}};
            try {
                rec["value"] = e.eval();
            } catch (const ilab::DomainError& err) {
                rec["error"] = err.what();
            }
            out.push_back(std::move(rec));
        }
        *out_json = dup_string(out.dump(2));
    });
}

int ilab_verify(const char* suite, char** out_report_json, int* out_passed) {
    return guard([&] {
        ILAB_REQUIRE(suite);
        const auto report = ilab::verify(suite);
        if (out_report_json) *out_report_json = dup_string(ilab::to_json(report).dump(2));
        if (out_passed) *out_passed = report.passed() ? 1 : 0;
    });
}

} // extern "C"
