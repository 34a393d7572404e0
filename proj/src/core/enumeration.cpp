#include "enumeration.hpp"

#include <cmath>

namespace ilab::enumeration {

namespace {

void expand(const Dynamics& d, const Policy& policy, Trajectory& prefix, double prob, int state,
            const Visitor& visit) {
    const int t = static_cast<int>(prefix.size());
    for (int a = 0; a < d.num_actions(); ++a) {
        const double pa = policy.prob(t, state, a);
        if (pa <= 0.0) continue;
        prefix.push_back({state, a});
        if (t + 1 == d.horizon()) {
            visit(prefix, prob * pa);
        } else {
            auto row = d.next(t, state, a);
            for (int s2 = 0; s2 < d.num_states(); ++s2)
                if (row[s2] > 0.0) expand(d, policy, prefix, prob * pa * row[s2], s2, visit);
        }
        prefix.pop_back();
    }
}

} // namespace

void for_each_trajectory(const Dynamics& d, const Policy& policy, const Visitor& visit) {
    check_dimensions(d, policy);
    Trajectory prefix;
    prefix.reserve(d.horizon());
    for (int s = 0; s < d.num_states(); ++s)
        if (d.rho()[s] > 0.0) expand(d, policy, prefix, d.rho()[s], s, visit);
}

std::size_t count_trajectories(const Dynamics& d, const Policy& policy) {
    std::size_t n = 0;
    for_each_trajectory(d, policy, [&](const Trajectory&, double) { ++n; });
    return n;
}

double value(const TabularMdp& mdp, const Policy& policy) {
    double j = 0.0;
    for_each_trajectory(mdp.dynamics(), policy, [&](const Trajectory& tr, double p) {
        double ret = 0.0;
        for (int t = 0; t < mdp.horizon(); ++t) ret += mdp.reward(t, tr[t].state, tr[t].action);
        j += p * ret;
    });
    return j;
}

OccupancyTable occupancy(const Dynamics& d, const Policy& policy) {
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();
    OccupancyTable occ{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S, 0.0),
                       std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0)};
    for_each_trajectory(d, policy, [&](const Trajectory& tr, double p) {
        for (int t = 0; t < H; ++t) {
            occ.state_occ[static_cast<std::size_t>(t) * S + tr[t].state] += p;
            occ.state_action_occ[(static_cast<std::size_t>(t) * S + tr[t].state) * A +
                                 tr[t].action] += p;
        }
    });
    return occ;
}

double pop_01_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner) {
    // Expected fraction of steps, along expert trajectories, at which the
    // learner would choose something other than the action the expert took.
    double risk = 0.0;
    for_each_trajectory(mdp.dynamics(), expert, [&](const Trajectory& tr, double p) {
        double miss = 0.0;
        for (int t = 0; t < mdp.horizon(); ++t)
            miss += 1.0 - learner.prob(t, tr[t].state, tr[t].action);
        risk += p * miss;
    });
    return risk / mdp.horizon();
}

double pop_tv_risk(const TabularMdp& mdp, const Policy& expert, const Policy& learner) {
    double risk = 0.0;
    for_each_trajectory(mdp.dynamics(), expert, [&](const Trajectory& tr, double p) {
        double tv = 0.0;
        for (int t = 0; t < mdp.horizon(); ++t) {
            double l1 = 0.0;
            for (int a = 0; a < mdp.num_actions(); ++a)
                l1 += std::abs(learner.prob(t, tr[t].state, a) - expert.prob(t, tr[t].state, a));
            tv += 0.5 * l1;
        }
        risk += p * tv;
    });
    return risk / mdp.horizon();
}

EventTable event_probabilities(const Dynamics& d, const Policy& policy, const VisitIndex& index) {
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();
    EventTable out{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0)};
    for_each_trajectory(d, policy, [&](const Trajectory& tr, double p) {
        for (int t = 0; t < H; ++t) {
            bool left = false;
            for (int tau = 0; tau <= t; ++tau)
                if (!index.visited(tau, tr[tau].state)) left = true;
            if (left)
                out.probs[(static_cast<std::size_t>(t) * S + tr[t].state) * A + tr[t].action] += p;
        }
    });
    return out;
}

} // namespace ilab::enumeration
