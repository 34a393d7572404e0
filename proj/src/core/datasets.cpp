#include "datasets.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <numeric>
#include <string>

namespace ilab {

Dataset sample_dataset(const Dynamics& dynamics, const Policy& expert, std::size_t n,
                       std::uint64_t seed) {
    check_dimensions(dynamics, expert);
    Dataset out{dynamics.horizon(), {}};
    out.trajectories.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.trajectories.push_back(rollout(dynamics, expert, child_seed(seed, i)));
    return out;
}

VisitIndex::VisitIndex(const Dataset& dataset, int num_states, int num_actions, int horizon)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon),
      num_trajectories_(dataset.size()) {
    if (num_states <= 0 || num_actions <= 0 || horizon <= 0)
        throw DimensionError("VisitIndex: dimensions must be positive");
    if (!dataset.empty() && dataset.horizon != horizon)
        throw DimensionError("VisitIndex: dataset horizon " + std::to_string(dataset.horizon) +
                             " differs from " + std::to_string(horizon));
    const auto cells = static_cast<std::size_t>(horizon) * num_states;
    counts_.assign(cells * num_actions, 0);
    visits_.assign(cells, 0);
    expert_.assign(cells, ExpertAction{});

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& tr = dataset.trajectories[i];
        if (tr.size() != static_cast<std::size_t>(horizon))
            throw DimensionError("VisitIndex: trajectory " + std::to_string(i) + " has length " +
                                 std::to_string(tr.size()));
        for (int t = 0; t < horizon; ++t) {
            const auto [s, a] = tr[t];
            if (s < 0 || s >= num_states || a < 0 || a >= num_actions)
                throw DimensionError("VisitIndex: trajectory " + std::to_string(i) +
                                     " step " + std::to_string(t) + " index out of range");
            ++counts_[cell(t, s) * num_actions + a];
            ++visits_[cell(t, s)];
            auto& ea = expert_[cell(t, s)];
            if (ea.kind == ExpertAction::Kind::unvisited) {
                ea = {ExpertAction::Kind::unique, a};
            } else if (ea.kind == ExpertAction::Kind::unique && ea.action != a) {
                ea = {ExpertAction::Kind::multiple, -1};
                multi_action_ = true;
            }
        }
    }
}

void VisitIndex::require_deterministic(const char* who) const {
    if (!multi_action_) return;
    for (int t = 0; t < horizon_; ++t)
        for (int s = 0; s < num_states_; ++s)
            if (expert_[cell(t, s)].kind == ExpertAction::Kind::multiple)
                throw StochasticExpertError(std::string(who) +
                                            ": stochastic expert; use mimic_emp (multiple "
                                            "actions observed at t=" +
                                            std::to_string(t) + ", s=" + std::to_string(s) + ")");
}

SplitPair split_dataset(const Dataset& dataset, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    CounterRng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    SplitPair out{{dataset.horizon, {}}, {dataset.horizon, {}}, perm};
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < n; ++k)
        (k < half ? out.d1 : out.d2).trajectories.push_back(dataset.trajectories[perm[k]]);
    return out;
}

std::span<const double> ActiveOracle::query(int t, int state) {
    if (t < 0 || t >= expert_.horizon() || state < 0 || state >= expert_.num_states())
        throw DimensionError("ActiveOracle::query: (t, s) out of range");
    log_.push_back({t, state});
    return expert_.dist(t, state);
}

ActiveCollection active_collect(const Dynamics& dynamics, const ActiveStrategy& strategy,
                                ActiveOracle& oracle, std::size_t n_episodes,
                                std::uint64_t seed) {
    if (oracle.num_states() != dynamics.num_states() ||
        oracle.num_actions() != dynamics.num_actions() || oracle.horizon() != dynamics.horizon())
        throw DimensionError("active_collect: oracle does not match the MDP");
    const int H = dynamics.horizon();
    const int A = dynamics.num_actions();
    ActiveCollection out{{H, {}}, {}};
    out.dataset.trajectories.reserve(n_episodes);
    for (std::size_t i = 0; i < n_episodes; ++i) {
        CounterRng rng(child_seed(seed, i));
        Trajectory tr;
        tr.reserve(H);
        int s = rng.categorical(dynamics.rho());
        for (int t = 0; t < H; ++t) {
            auto answer = oracle.query(t, s);
            out.answers.emplace_back(answer.begin(), answer.end());
            const auto play = strategy(ActiveHistory{out.dataset.trajectories, tr}, t, s, answer);
            if (play.size() != static_cast<std::size_t>(A))
                throw DimensionError("active_collect: strategy returned a distribution of size " +
                                     std::to_string(play.size()));
            const int a = rng.categorical(play);
            tr.push_back({s, a});
            if (t + 1 < H) s = rng.categorical(dynamics.next(t, s, a));
        }
        out.dataset.trajectories.push_back(std::move(tr));
    }
    return out;
}

ActiveStrategy follow_oracle_strategy() {
    return [](const ActiveHistory&, int, int, std::span<const double> answer) {
        return std::vector<double>(answer.begin(), answer.end());
    };
}

} // namespace ilab
