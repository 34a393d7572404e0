#include <doctest.h>

#include "errors.hpp"
#include "helpers.hpp"
#include "instances.hpp"
#include "json_io.hpp"

#include <algorithm>

using namespace ilab;

namespace {

bool same_mdp(const TabularMdp& a, const TabularMdp& b) {
    const auto& da = a.dynamics();
    const auto& db = b.dynamics();
    return a.num_states() == b.num_states() && a.num_actions() == b.num_actions() &&
           a.horizon() == b.horizon() && std::ranges::equal(da.rho(), db.rho()) &&
           std::ranges::equal(da.transitions(), db.transitions()) &&
           std::ranges::equal(a.rewards(), b.rewards());
}

} // namespace

TEST_CASE("MDP, policy and dataset survive a text round trip bit for bit") {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto b = make_random(1 + static_cast<int>(i % 4), 1 + static_cast<int>(i % 3),
                                   1 + static_cast<int>(i % 5), i, ExpertKind::stochastic(0.3));
        const auto mdp = mdp_from_json(parse_json_text(to_json(b.mdp).dump(), "mdp"));
        CHECK(same_mdp(mdp, b.mdp));
        CHECK(policy_from_json(parse_json_text(to_json(b.expert).dump(), "policy")) == b.expert);
        const auto d = sample_dataset(b.mdp.dynamics(), b.expert, i % 4, i);
        CHECK(dataset_from_json(parse_json_text(to_json(d).dump(), "dataset")) == d);
    }
}

TEST_CASE("policy JSON accepts a bare array") {
    const auto pi = test::random_policy(2, 3, 2, 5);
    CHECK(policy_from_json(to_json(pi).at("dists")) == pi);
}

TEST_CASE("event table JSON is [H][S][A]") {
    const EventTable e{2, 3, 4, std::vector<double>(24, 0.25)};
    const auto j = to_json(e);
    CHECK(j.size() == 4);
    CHECK(j[0].size() == 2);
    CHECK(j[0][0].size() == 3);
}

TEST_CASE("manifest names the family, seed and parameters") {
    const auto b = make_lb_known_transition(4, 2, 3, 5, 11);
    const auto m = manifest_json(b);
    CHECK(m.at("family") == "lb_known_transition");
    CHECK(m.at("seed") == 11);
    CHECK(m.at("params").at("S") == 4);
    CHECK(m.at("params").at("N") == 5);
}

TEST_CASE("malformed inputs raise ParseError") {
    CHECK_THROWS_AS(parse_json_text("{\"a\": ", "test"), ParseError);

    auto mdp = to_json(make_random(2, 2, 3, 1).mdp);
    auto missing = mdp;
    missing.erase("rewards");
    CHECK_THROWS_AS(mdp_from_json(missing), ParseError);
    auto bad_shape = mdp;
    bad_shape["rho"] = {1.0};
    CHECK_THROWS_AS(mdp_from_json(bad_shape), ParseError);
    auto bad_rho = mdp;
    bad_rho["rho"] = {0.7, 0.7};
    CHECK_THROWS_AS(mdp_from_json(bad_rho), ParseError);
    auto bad_h = mdp;
    bad_h["horizon"] = 0;
    CHECK_THROWS_AS(mdp_from_json(bad_h), ParseError);

    CHECK_THROWS_AS(policy_from_json(Json{{"dists", {{{0.5, 0.6}}}}}), ParseError);
    CHECK_THROWS_AS(policy_from_json(Json{{"dists", Json::array()}}), ParseError);
    CHECK_THROWS_AS(policy_from_json(Json{{"dists", {{{0.5, 0.5}, {1.0}}}}}), ParseError);

    CHECK_THROWS_AS(dataset_from_json(Json{{"horizon", 2}, {"trajectories", {{{0, 0}}}}}), ParseError);
    CHECK_THROWS_AS(dataset_from_json(Json{{"horizon", 1}, {"trajectories", {{{0, 0.5}}}}}), ParseError);
    CHECK_THROWS_AS(dataset_from_json(Json{{"trajectories", Json::array()}}), ParseError);
}
