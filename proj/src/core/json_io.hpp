#pragma once

#include "datasets.hpp"
#include "instances.hpp"
#include "mimic_md.hpp"
#include "tabular_mdp.hpp"

#include <json.hpp>

#include <string>

namespace ilab {

using Json = nlohmann::json;

// MDP: {num_states, num_actions, horizon, rho[S], transitions[H-1][S][A][S], rewards[H][S][A]}
Json to_json(const TabularMdp& mdp);
/// Parses and validates; throws ParseError listing every violation.
TabularMdp mdp_from_json(const Json& j);

// Policy: {"dists": [H][S][A]} (a bare [H][S][A] array is also accepted).
Json to_json(const Policy& policy);
Policy policy_from_json(const Json& j);

// Dataset: {"horizon": H, "trajectories": [[[s, a], ...], ...]}
Json to_json(const Dataset& dataset);
Dataset dataset_from_json(const Json& j);

/// [H][S][A] array.
Json to_json(const EventTable& table);

/// {"family", "seed", "params": {S, A, H, N}, "expert_kind", ...}
Json manifest_json(const InstanceBundle& bundle);

Json parse_json_text(const std::string& text, const char* what);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace ilab
