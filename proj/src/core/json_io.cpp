#include "json_io.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <fstream>
#include <sstream>

namespace ilab {

namespace {

int get_positive_int(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw ParseError(std::string("missing or non-integer key '") + key + "'");
    const auto v = j.at(key).get<long long>();
    if (v <= 0) throw ParseError(std::string("key '") + key + "' must be positive");
    return static_cast<int>(v);
}

/// Flattens a nested numeric array whose shape must equal `shape`.
void flatten(const Json& j, std::span<const int> shape, std::vector<double>& out,
             const std::string& where) {
    if (shape.empty()) {
        if (!j.is_number()) throw ParseError(where + ": expected a number");
        out.push_back(j.get<double>());
        return;
    }
    if (!j.is_array() || j.size() != static_cast<std::size_t>(shape[0]))
        throw ParseError(where + ": expected an array of length " + std::to_string(shape[0]));
    for (std::size_t i = 0; i < j.size(); ++i)
        flatten(j[i], shape.subspan(1), out, where + "[" + std::to_string(i) + "]");
}

Json nest(std::span<const double> flat, std::span<const int> shape) {
    if (shape.empty()) return flat.front();
    Json arr = Json::array();
    std::size_t stride = 1;
    for (std::size_t k = 1; k < shape.size(); ++k) stride *= static_cast<std::size_t>(shape[k]);
    for (int i = 0; i < shape[0]; ++i)
        arr.push_back(nest(flat.subspan(i * stride, stride), shape.subspan(1)));
    return arr;
}

} // namespace

Json to_json(const TabularMdp& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    const int tshape[] = {H - 1, S, A, S};
    const int rshape[] = {H, S, A};
    Json j;
    j["num_states"] = S;
    j["num_actions"] = A;
    j["horizon"] = H;
    j["rho"] = std::vector<double>(mdp.dynamics().rho().begin(), mdp.dynamics().rho().end());
    j["transitions"] = H > 1 ? nest(mdp.dynamics().transitions(), tshape) : Json::array();
    j["rewards"] = nest(mdp.rewards(), rshape);
    return j;
}

TabularMdp mdp_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("MDP JSON must be an object");
    const int S = get_positive_int(j, "num_states");
    const int A = get_positive_int(j, "num_actions");
    const int H = get_positive_int(j, "horizon");
    for (const char* key : {"rho", "transitions", "rewards"})
        if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    std::vector<double> rho;
    std::vector<double> trans;
    std::vector<double> rewards;
    const int rho_shape[] = {S};
    const int tshape[] = {H - 1, S, A, S};
    const int rshape[] = {H, S, A};
    flatten(j.at("rho"), rho_shape, rho, "rho");
    flatten(j.at("transitions"), tshape, trans, "transitions");
    flatten(j.at("rewards"), rshape, rewards, "rewards");
    TabularMdp mdp(S, A, H, std::move(rho), std::move(trans), std::move(rewards));
    const auto report = validate_mdp(mdp);
    if (!report.empty()) {
        std::string msg = "invalid MDP:";
        for (const auto& v : report) msg += "\n  " + v.message;
        throw ParseError(msg);
    }
    return mdp;
}

Json to_json(const Policy& policy) {
    const int shape[] = {policy.horizon(), policy.num_states(), policy.num_actions()};
    return Json{{"dists", nest(policy.data(), shape)}};
}

Policy policy_from_json(const Json& j) {
    const Json& d = j.is_object() ? j.at("dists") : j;
    if (!d.is_array() || d.empty() || !d[0].is_array() || d[0].empty() || !d[0][0].is_array() ||
        d[0][0].empty())
        throw ParseError("policy dists must be a non-empty [H][S][A] array");
    const int shape[] = {static_cast<int>(d.size()), static_cast<int>(d[0].size()),
                         static_cast<int>(d[0][0].size())};
    std::vector<double> flat;
    flatten(d, shape, flat, "dists");
    Policy policy(shape[1], shape[2], shape[0], std::move(flat));
    const auto report = validate_policy(policy);
    if (!report.empty()) {
        std::string msg = "invalid policy:";
        for (const auto& v : report) msg += "\n  " + v.message;
        throw ParseError(msg);
    }
    return policy;
}

Json to_json(const Dataset& dataset) {
    Json trajs = Json::array();
    for (const auto& tr : dataset.trajectories) {
        Json steps = Json::array();
        for (const auto& st : tr) steps.push_back(Json::array({st.state, st.action}));
        trajs.push_back(std::move(steps));
    }
    return Json{{"horizon", dataset.horizon}, {"trajectories", std::move(trajs)}};
}

Dataset dataset_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("dataset JSON must be an object");
    Dataset out;
    out.horizon = get_positive_int(j, "horizon");
    if (!j.contains("trajectories") || !j.at("trajectories").is_array())
        throw ParseError("dataset JSON needs a 'trajectories' array");
    for (const auto& tr : j.at("trajectories")) {
        if (!tr.is_array() || tr.size() != static_cast<std::size_t>(out.horizon))
            throw ParseError("every trajectory must have exactly 'horizon' steps");
        Trajectory steps;
        for (const auto& st : tr) {
            if (!st.is_array() || st.size() != 2 || !st[0].is_number_integer() ||
                !st[1].is_number_integer())
                throw ParseError("trajectory steps must be [state, action] integer pairs");
            steps.push_back({st[0].get<int>(), st[1].get<int>()});
        }
        out.trajectories.push_back(std::move(steps));
    }
    return out;
}

Json to_json(const EventTable& table) {
    const int shape[] = {table.horizon, table.num_states, table.num_actions};
    return nest(table.probs, shape);
}

Json manifest_json(const InstanceBundle& b) {
    Json j;
    j["family"] = to_string(b.family);
    j["seed"] = b.seed;
    j["params"] = {{"S", b.params.num_states},
                   {"A", b.params.num_actions},
                   {"H", b.params.horizon},
                   {"N", b.params.dataset_size}};
    if (b.expert_kind.kind == ExpertKind::Kind::stochastic) {
        j["expert_kind"] = "stochastic";
        j["concentration"] = b.expert_kind.concentration;
    } else {
        j["expert_kind"] = "deterministic";
    }
    if (b.family == Family::lb_no_interaction) j["bad_state"] = bad_state(b.params.num_states);
    return j;
}

Json parse_json_text(const std::string& text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << text;
}

} // namespace ilab
