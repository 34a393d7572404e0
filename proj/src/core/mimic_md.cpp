#include "mimic_md.hpp"

#include "errors.hpp"
#include "learners.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ilab {

namespace {

void check_index(const Dynamics& d, const VisitIndex& index) {
    if (index.num_states() != d.num_states() || index.num_actions() != d.num_actions() ||
        index.horizon() != d.horizon())
        throw DimensionError("visit index does not match the MDP dimensions");
}

void check_table(const Dynamics& d, const EventTable& table) {
    if (table.num_states != d.num_states() || table.num_actions != d.num_actions() ||
        table.horizon != d.horizon())
        throw DimensionError("event table does not match the MDP dimensions");
}

std::size_t gidx(int t, int s, int flag, int S) {
    return (static_cast<std::size_t>(t) * S + s) * 2 + flag;
}

} // namespace

double EventTable::layer_mass(int t) const noexcept {
    const auto width = static_cast<std::size_t>(num_states) * num_actions;
    const auto* begin = probs.data() + static_cast<std::size_t>(t) * width;
    return std::accumulate(begin, begin + width, 0.0);
}

AugmentedOccupancy augmented_occupancy(const Dynamics& d, const Policy& policy,
                                       const VisitIndex& index) {
    check_dimensions(d, policy);
    check_index(d, index);
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();
    AugmentedOccupancy out{S, H, std::vector<double>(static_cast<std::size_t>(H) * S * 2, 0.0)};
    auto& g = out.g;
    for (int s = 0; s < S; ++s) g[gidx(0, s, index.visited(0, s) ? 0 : 1, S)] = d.rho()[s];
    for (int t = 0; t + 1 < H; ++t) {
        for (int s = 0; s < S; ++s)
            for (int f = 0; f < 2; ++f) {
                const double mass = g[gidx(t, s, f, S)];
                if (mass == 0.0) continue;
                for (int a = 0; a < A; ++a) {
                    const double m = mass * policy.prob(t, s, a);
                    if (m == 0.0) continue;
                    auto row = d.next(t, s, a);
                    for (int s2 = 0; s2 < S; ++s2) {
                        if (row[s2] == 0.0) continue;
                        const int f2 = (f == 1 || !index.visited(t + 1, s2)) ? 1 : 0;
                        g[gidx(t + 1, s2, f2, S)] += m * row[s2];
                    }
                }
            }
    }
    return out;
}

EventTable event_probabilities(const Dynamics& d, const Policy& policy, const VisitIndex& index) {
    const auto aug = augmented_occupancy(d, policy, index);
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();
    EventTable out{S, A, H, std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0)};
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s) {
            const double m = aug.at(t, s, 1);
            for (int a = 0; a < A; ++a)
                out.probs[(static_cast<std::size_t>(t) * S + s) * A + a] = m * policy.prob(t, s, a);
        }
    return out;
}

EventTable empirical_event_fractions(const Dataset& d2, const VisitIndex& index) {
    if (d2.empty()) throw DomainError("empirical_event_fractions: D2 is empty");
    const int S = index.num_states();
    const int A = index.num_actions();
    const int H = index.horizon();
    if (d2.horizon != H) throw DimensionError("empirical_event_fractions: horizon mismatch");
    std::vector<double> counts(static_cast<std::size_t>(H) * S * A, 0.0);
    for (const auto& tr : d2.trajectories) {
        if (tr.size() != static_cast<std::size_t>(H))
            throw DimensionError("empirical_event_fractions: trajectory length mismatch");
        bool flag = false;
        for (int t = 0; t < H; ++t) {
            const auto [s, a] = tr[t];
            if (s < 0 || s >= S || a < 0 || a >= A)
                throw DimensionError("empirical_event_fractions: index out of range");
            if (!index.visited(t, s)) flag = true;
            if (flag) counts[(static_cast<std::size_t>(t) * S + s) * A + a] += 1.0;
        }
    }
    const double n = static_cast<double>(d2.size());
    for (auto& c : counts) c /= n;
    return {S, A, H, std::move(counts)};
}

double l1_distance(const EventTable& a, const EventTable& b) {
    if (a.probs.size() != b.probs.size()) throw DimensionError("l1_distance: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) acc += std::abs(a.probs[i] - b.probs[i]);
    return acc;
}

double md_objective(const Dynamics& d, const Policy& candidate, const VisitIndex& index,
                    const EventTable& target) {
    check_table(d, target);
    if (!is_in_pi_mimic(candidate, index))
        throw DomainError("md_objective: candidate does not mimic the expert on D1");
    return l1_distance(event_probabilities(d, candidate, index), target);
}

double md_objective_and_subgradient(const Dynamics& d, const Policy& policy,
                                    const VisitIndex& index, const EventTable& target,
                                    std::vector<double>& grad) {
    check_table(d, target);
    const auto aug = augmented_occupancy(d, policy, index);
    const int S = d.num_states();
    const int A = d.num_actions();
    const int H = d.horizon();
    auto cell = [&](int t, int s, int a) {
        return (static_cast<std::size_t>(t) * S + s) * A + a;
    };

    // Sign of each residual; 0 at exact zeros.
    std::vector<double> w(static_cast<std::size_t>(H) * S * A, 0.0);
    double objective = 0.0;
    for (int t = 0; t < H; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const double r = aug.at(t, s, 1) * policy.prob(t, s, a) - target.at(t, s, a);
                objective += std::abs(r);
                w[cell(t, s, a)] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
            }

    // lambda[t][s][f] = dL/dg_t(s, f); `cont` is the continuation term
    // sum_{s'} P_t(s'|s,a) lambda_{t+1}(s', max(f, u_{t+1}(s'))).
    std::vector<double> lambda(static_cast<std::size_t>(H) * S * 2, 0.0);
    std::vector<double> cont(static_cast<std::size_t>(S) * A * 2, 0.0);
    grad.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int t = H - 1; t >= 0; --t) {
        std::fill(cont.begin(), cont.end(), 0.0);
        if (t + 1 < H) {
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    auto row = d.next(t, s, a);
                    double c0 = 0.0;
                    double c1 = 0.0;
                    for (int s2 = 0; s2 < S; ++s2) {
                        const double l1 = lambda[gidx(t + 1, s2, 1, S)];
                        const double l0 =
                            index.visited(t + 1, s2) ? lambda[gidx(t + 1, s2, 0, S)] : l1;
                        c0 += row[s2] * l0;
                        c1 += row[s2] * l1;
                    }
                    cont[(static_cast<std::size_t>(s) * A + a) * 2 + 0] = c0;
                    cont[(static_cast<std::size_t>(s) * A + a) * 2 + 1] = c1;
                }
        }
        for (int s = 0; s < S; ++s) {
            double lam0 = 0.0;
            double lam1 = 0.0;
            for (int a = 0; a < A; ++a) {
                const double p = policy.prob(t, s, a);
                const double c0 = cont[(static_cast<std::size_t>(s) * A + a) * 2 + 0];
                const double c1 = cont[(static_cast<std::size_t>(s) * A + a) * 2 + 1];
                lam0 += p * c0;
                lam1 += p * (w[cell(t, s, a)] + c1);
                grad[cell(t, s, a)] = w[cell(t, s, a)] * aug.at(t, s, 1) + aug.at(t, s, 0) * c0 +
                                      aug.at(t, s, 1) * c1;
            }
            lambda[gidx(t, s, 0, S)] = lam0;
            lambda[gidx(t, s, 1, S)] = lam1;
        }
    }
    return objective;
}

FreeParameterization::FreeParameterization(const VisitIndex& index)
    : num_states_(index.num_states()), num_actions_(index.num_actions()),
      horizon_(index.horizon()) {
    index.require_deterministic("FreeParameterization");
    pinned_.assign(static_cast<std::size_t>(horizon_) * num_states_, -1);
    for (int t = 0; t < horizon_; ++t)
        for (int s = 0; s < num_states_; ++s) {
            const auto ea = index.expert_action(t, s);
            if (ea.kind == ExpertAction::Kind::unique)
                pinned_[static_cast<std::size_t>(t) * num_states_ + s] = ea.action;
            else
                cells_.push_back({t, s});
        }
}

Policy FreeParameterization::to_policy(std::span<const double> values) const {
    const int A = num_actions_;
    if (values.size() != cells_.size() * A)
        throw DimensionError("FreeParameterization::to_policy: expected #free * A values");
    std::vector<double> probs(static_cast<std::size_t>(horizon_) * num_states_ * A, 0.0);
    for (std::size_t i = 0; i < pinned_.size(); ++i)
        if (pinned_[i] >= 0) probs[i * A + pinned_[i]] = 1.0;
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        const auto row = static_cast<std::size_t>(cells_[k].t) * num_states_ + cells_[k].s;
        std::copy_n(values.data() + k * A, A, probs.data() + row * A);
    }
    return Policy(num_states_, A, horizon_, std::move(probs));
}

Policy FreeParameterization::deterministic_completion(std::span<const int> choices) const {
    if (choices.size() != cells_.size())
        throw DimensionError("FreeParameterization: expected one action per free cell");
    std::vector<int> actions(pinned_);
    for (std::size_t k = 0; k < cells_.size(); ++k)
        actions[static_cast<std::size_t>(cells_[k].t) * num_states_ + cells_[k].s] = choices[k];
    return Policy::deterministic(num_states_, num_actions_, horizon_, actions);
}

double completion_bits(const VisitIndex& index) {
    FreeParameterization free(index);
    return static_cast<double>(free.cells().size()) * std::log2(index.num_actions());
}

namespace {

constexpr double kTieTolerance = 1e-12;

double dist_to_interval(double x, double lo, double hi) {
    return x < lo ? lo - x : (x > hi ? x - hi : 0.0);
}

/// Lower bounds on the per-layer OPT cost. Mass with the flag down only ever
/// sits on visited states, whose actions are pinned, so it evolves
/// deterministically; the total flagged mass F_u is therefore exact for every
/// completion, and the flagged mass of each state is bracketed by
/// propagating intervals with the min / max transition probability over the
/// actions a free cell may take.
class CostBounder {
public:
    CostBounder(const Dynamics& d, const VisitIndex& index, const EventTable& target)
        : d_(d), index_(index), target_(target), S_(d.num_states()), A_(d.num_actions()),
          H_(d.horizon()), pinned_(static_cast<std::size_t>(H_) * S_, -1),
          entering_(static_cast<std::size_t>(H_) * S_, 0.0), flagged_(H_, 0.0),
          layer_target_(H_, 0.0), row_target_(static_cast<std::size_t>(H_) * S_, 0.0),
          pmin_(static_cast<std::size_t>(std::max(H_ - 1, 0)) * S_ * S_, 0.0),
          pmax_(pmin_.size(), 0.0) {
        for (int t = 0; t < H_; ++t)
            for (int s = 0; s < S_; ++s) {
                const auto ea = index.expert_action(t, s);
                if (ea.kind == ExpertAction::Kind::unique) pinned_[at(t, s)] = ea.action;
                double q = 0.0;
                for (int a = 0; a < A_; ++a) q += target.at(t, s, a);
                row_target_[at(t, s)] = q;
                layer_target_[t] += q;
            }
        for (int t = 0; t + 1 < H_; ++t)
            for (int s = 0; s < S_; ++s)
                for (int s2 = 0; s2 < S_; ++s2) {
                    double mn = std::numeric_limits<double>::infinity();
                    double mx = 0.0;
                    for (int a = 0; a < A_; ++a) {
                        const double p = d.next(t, s, a)[s2];
                        mn = std::min(mn, p);
                        mx = std::max(mx, p);
                    }
                    pmin_[tss(t, s, s2)] = mn;
                    pmax_[tss(t, s, s2)] = mx;
                }
        // Unflagged mass, exact.
        std::vector<double> g0(S_, 0.0);
        double unflagged = 0.0;
        for (int s = 0; s < S_; ++s) {
            if (index.visited(0, s)) {
                g0[s] = d.rho()[s];
                unflagged += g0[s];
            } else {
                entering_[at(0, s)] = d.rho()[s];
            }
        }
        flagged_[0] = std::max(0.0, 1.0 - unflagged);
        for (int t = 0; t + 1 < H_; ++t) {
            std::vector<double> next(S_, 0.0);
            for (int s = 0; s < S_; ++s) {
                if (g0[s] == 0.0) continue;
                auto row = d.next(t, s, pinned_[at(t, s)]);
                for (int s2 = 0; s2 < S_; ++s2) {
                    const double m = g0[s] * row[s2];
                    if (index.visited(t + 1, s2))
                        next[s2] += m;
                    else
                        entering_[at(t + 1, s2)] += m;
                }
            }
            g0.swap(next);
            unflagged = std::accumulate(g0.begin(), g0.end(), 0.0);
            flagged_[t + 1] = std::max(0.0, 1.0 - unflagged);
        }
    }

    int pinned(int t, int s) const { return pinned_[at(t, s)]; }
    double layer_target(int t) const { return layer_target_[t]; }

    /// Cost of the (t, s) row when the flagged mass m plays action c.
    double row_cost(int t, int s, double m, int c) const {
        double cost = 0.0;
        for (int a = 0; a < A_; ++a) cost += std::abs((a == c ? m : 0.0) - target_.at(t, s, a));
        return cost;
    }

    /// Lower bound on the (t, s) row cost for flagged mass in [lo, hi]; free
    /// rows range over deterministic actions or over the whole simplex.
    double cell_bound(int t, int s, double lo, double hi, bool deterministic) const {
        const double q = row_target_[at(t, s)];
        const int c = pinned_[at(t, s)];
        if (c >= 0) {
            const double qc = target_.at(t, s, c);
            return q - qc + dist_to_interval(qc, lo, hi);
        }
        if (!deterministic) return dist_to_interval(q, lo, hi);
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < A_; ++a) {
            const double qa = target_.at(t, s, a);
            best = std::min(best, q - qa + dist_to_interval(qa, lo, hi));
        }
        return best;
    }

    /// Bound on the cost of layers t+1 .. H-1 given the exact flagged masses
    /// at layer t, with every free cell from layer t on still open.
    double future(int t, std::span<const double> flagged_t, bool deterministic) const {
        std::vector<double> lo(flagged_t.begin(), flagged_t.end());
        std::vector<double> hi(lo);
        std::vector<double> lo2(S_);
        std::vector<double> hi2(S_);
        double total = 0.0;
        for (int u = t + 1; u < H_; ++u) {
            for (int s2 = 0; s2 < S_; ++s2) lo2[s2] = hi2[s2] = entering_[at(u, s2)];
            for (int s = 0; s < S_; ++s) {
                if (hi[s] == 0.0) continue;
                const int c = pinned_[at(u - 1, s)];
                if (c >= 0) {
                    auto row = d_.next(u - 1, s, c);
                    for (int s2 = 0; s2 < S_; ++s2) {
                        lo2[s2] += lo[s] * row[s2];
                        hi2[s2] += hi[s] * row[s2];
                    }
                } else {
                    for (int s2 = 0; s2 < S_; ++s2) {
                        lo2[s2] += lo[s] * pmin_[tss(u - 1, s, s2)];
                        hi2[s2] += hi[s] * pmax_[tss(u - 1, s, s2)];
                    }
                }
            }
            double cells = 0.0;
            for (int s2 = 0; s2 < S_; ++s2) {
                hi2[s2] = std::min(hi2[s2], flagged_[u]);
                cells += cell_bound(u, s2, lo2[s2], hi2[s2], deterministic);
            }
            total += std::max(cells, std::abs(flagged_[u] - layer_target_[u]));
            lo.swap(lo2);
            hi.swap(hi2);
        }
        return total;
    }

private:
    std::size_t at(int t, int s) const { return static_cast<std::size_t>(t) * S_ + s; }
    std::size_t tss(int t, int s, int s2) const {
        return (static_cast<std::size_t>(t) * S_ + s) * S_ + s2;
    }

    const Dynamics& d_;
    const VisitIndex& index_;
    const EventTable& target_;
    int S_;
    int A_;
    int H_;
    std::vector<int> pinned_;
    std::vector<double> entering_; // [t][s] mass whose flag goes up on arriving at (t, s)
    std::vector<double> flagged_;  // F_t
    std::vector<double> layer_target_;
    std::vector<double> row_target_;
    std::vector<double> pmin_;
    std::vector<double> pmax_;
};

/// Depth-first branch and bound over deterministic completions, visiting
/// free cells in (t, s) order and actions in increasing order.
class ExactSearch {
public:
    ExactSearch(const Dynamics& d, const VisitIndex& index, const EventTable& target,
                std::uint64_t max_nodes)
        : d_(d), index_(index), bounder_(d, index, target), S_(d.num_states()),
          A_(d.num_actions()), H_(d.horizon()), max_nodes_(max_nodes),
          actions_(static_cast<std::size_t>(H_) * S_, 0), free_by_t_(H_) {
        for (int t = 0; t < H_; ++t)
            for (int s = 0; s < S_; ++s) {
                const int c = bounder_.pinned(t, s);
                if (c >= 0)
                    actions_[at(t, s)] = c;
                else
                    free_by_t_[t].push_back(s);
            }
    }

    void run() {
        std::vector<double> g(static_cast<std::size_t>(S_) * 2, 0.0);
        for (int s = 0; s < S_; ++s) g[s * 2 + (index_.visited(0, s) ? 0 : 1)] = d_.rho()[s];
        enter_layer(0, g, 0.0);
    }

    double best_cost() const { return best_cost_; }
    const std::vector<int>& best_actions() const { return best_actions_; }
    std::uint64_t nodes() const { return nodes_; }

private:
    std::size_t at(int t, int s) const { return static_cast<std::size_t>(t) * S_ + s; }

    void enter_layer(int t, const std::vector<double>& g, double cost_prev) {
        if (t == H_) {
            if (cost_prev < best_cost_ - kTieTolerance) {
                best_cost_ = cost_prev;
                best_actions_ = actions_;
            }
            return;
        }
        double pinned = 0.0;
        std::vector<double> flagged(S_);
        for (int s = 0; s < S_; ++s) {
            flagged[s] = g[s * 2 + 1];
            if (bounder_.pinned(t, s) >= 0)
                pinned += bounder_.row_cost(t, s, flagged[s], actions_[at(t, s)]);
        }
        const auto& free = free_by_t_[t];
        // suffix[k] = sum of the per-cell minimum costs of free[k..].
        std::vector<double> suffix(free.size() + 1, 0.0);
        for (std::size_t k = free.size(); k-- > 0;) {
            const int s = free[k];
            suffix[k] = suffix[k + 1] + bounder_.cell_bound(t, s, flagged[s], flagged[s], true);
        }
        const double future = bounder_.future(t, flagged, true);
        if (cost_prev + pinned + suffix[0] + future >= best_cost_ - kTieTolerance) return;
        assign(t, g, 0, cost_prev + pinned, suffix, future);
    }

    void assign(int t, const std::vector<double>& g, std::size_t k, double cost_acc,
                const std::vector<double>& suffix, double future) {
        const auto& free = free_by_t_[t];
        if (k == free.size()) {
            enter_layer(t + 1, advance(t, g), cost_acc);
            return;
        }
        const int s = free[k];
        const double m = g[s * 2 + 1];
        // An unreachable free cell cannot influence anything downstream.
        const int choices = m == 0.0 ? 1 : A_;
        for (int c = 0; c < choices; ++c) {
            if (++nodes_ > max_nodes_)
                throw GuardExceededError(
                    "solve_opt_exact: search exceeded " + std::to_string(max_nodes_) +
                    " nodes; use the subgradient solver for this instance");
            const double cost = cost_acc + bounder_.row_cost(t, s, m, c);
            if (cost + suffix[k + 1] + future >= best_cost_ - kTieTolerance) continue;
            actions_[at(t, s)] = c;
            assign(t, g, k + 1, cost, suffix, future);
        }
        actions_[at(t, s)] = 0;
    }

    std::vector<double> advance(int t, const std::vector<double>& g) const {
        std::vector<double> next(static_cast<std::size_t>(S_) * 2, 0.0);
        if (t + 1 >= H_) return next;
        for (int s = 0; s < S_; ++s) {
            auto row = d_.next(t, s, actions_[at(t, s)]);
            for (int f = 0; f < 2; ++f) {
                const double mass = g[s * 2 + f];
                if (mass == 0.0) continue;
                for (int s2 = 0; s2 < S_; ++s2) {
                    if (row[s2] == 0.0) continue;
                    const int f2 = (f == 1 || !index_.visited(t + 1, s2)) ? 1 : 0;
                    next[s2 * 2 + f2] += mass * row[s2];
                }
            }
        }
        return next;
    }

    const Dynamics& d_;
    const VisitIndex& index_;
    CostBounder bounder_;
    int S_;
    int A_;
    int H_;
    std::uint64_t max_nodes_;
    std::uint64_t nodes_ = 0;
    std::vector<int> actions_;
    std::vector<std::vector<int>> free_by_t_;
    double best_cost_ = std::numeric_limits<double>::infinity();
    std::vector<int> best_actions_;
};

} // namespace

OptSolution solve_opt_exact(const Dynamics& d, const VisitIndex& index, const EventTable& target,
                            ExactSolverOptions options) {
    check_index(d, index);
    check_table(d, target);
    index.require_deterministic("solve_opt_exact");
    ExactSearch search(d, index, target, options.max_nodes);
    search.run();
    Policy policy = Policy::deterministic(d.num_states(), d.num_actions(), d.horizon(),
                                          search.best_actions());
    const double objective = l1_distance(event_probabilities(d, policy, index), target);
    return {std::move(policy), objective, 0.0, search.nodes()};
}

double opt_lower_bound(const Dynamics& d, const VisitIndex& index, const EventTable& target) {
    check_index(d, index);
    check_table(d, target);
    index.require_deterministic("opt_lower_bound");
    const CostBounder bounder(d, index, target);
    const int S = d.num_states();
    std::vector<double> flagged(S, 0.0);
    double lb = 0.0;
    for (int s = 0; s < S; ++s) {
        if (!index.visited(0, s)) flagged[s] = d.rho()[s];
        lb += bounder.cell_bound(0, s, flagged[s], flagged[s], false);
    }
    return lb + bounder.future(0, flagged, false);
}

void project_to_simplex(std::span<double> v) {
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) theta = candidate;
    }
    for (auto& x : v) x = std::max(x - theta, 0.0);
}

OptSolution solve_opt_subgradient(const Dynamics& d, const VisitIndex& index,
                                  const EventTable& target, SubgradientOptions options) {
    check_index(d, index);
    check_table(d, target);
    const FreeParameterization free(index);
    const int A = d.num_actions();
    const int S = d.num_states();
    const auto& cells = free.cells();
    const std::size_t n = cells.size() * A;
    const double lower = opt_lower_bound(d, index, target);

    std::vector<double> grad;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<double> best_x;
    std::uint64_t evaluations = 0;

    const int restarts = std::max(1, options.restarts);
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> x(n, 1.0 / A);
        if (r > 0) {
            CounterRng rng(child_seed(options.seed, static_cast<std::uint64_t>(r)));
            for (std::size_t k = 0; k < cells.size(); ++k) {
                double sum = 0.0;
                for (int a = 0; a < A; ++a) sum += (x[k * A + a] = rng.exponential());
                for (int a = 0; a < A; ++a) x[k * A + a] /= sum;
            }
        }
        double run_best = std::numeric_limits<double>::infinity();
        std::vector<double> run_x = x;
        // Step-weighted average of the second half of the iterates.
        std::vector<double> avg(n, 0.0);
        double avg_weight = 0.0;
        for (int k = 1; k <= options.steps + 1; ++k) {
            const double obj =
                md_objective_and_subgradient(d, free.to_policy(x), index, target, grad);
            ++evaluations;
            if (obj < run_best) {
                run_best = obj;
                run_x = x;
            }
            if (2 * k > options.steps) {
                const double w = 1.0 / std::sqrt(static_cast<double>(k));
                for (std::size_t i = 0; i < n; ++i) avg[i] += w * x[i];
                avg_weight += w;
            }
            if (k > options.steps || n == 0) break;
            const double step = options.step_scale / std::sqrt(static_cast<double>(k));
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const auto row = (static_cast<std::size_t>(cells[c].t) * S + cells[c].s) * A;
                std::span<double> xc(x.data() + c * A, A);
                for (int a = 0; a < A; ++a) xc[a] -= step * grad[row + a];
                project_to_simplex(xc);
            }
        }
        if (avg_weight > 0.0 && n > 0) {
            for (auto& v : avg) v /= avg_weight;
            for (std::size_t c = 0; c < cells.size(); ++c)
                project_to_simplex(std::span<double>(avg.data() + c * A, A));
            const double avg_obj =
                md_objective_and_subgradient(d, free.to_policy(avg), index, target, grad);
            ++evaluations;
            if (avg_obj < run_best) {
                run_best = avg_obj;
                run_x = avg;
            }
        }
        // Rounded candidate: argmax per free cell, lowest index on ties.
        std::vector<double> rounded(n, 0.0);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto* begin = run_x.data() + c * A;
            rounded[c * A + (std::max_element(begin, begin + A) - begin)] = 1.0;
        }
        const double rounded_obj =
            md_objective_and_subgradient(d, free.to_policy(rounded), index, target, grad);
        ++evaluations;
        if (rounded_obj < run_best) {
            run_best = rounded_obj;
            run_x = std::move(rounded);
        }
        if (run_best < best_obj) {
            best_obj = run_best;
            best_x = std::move(run_x);
        }
    }
    Policy policy = free.to_policy(best_x);
    const double objective = l1_distance(event_probabilities(d, policy, index), target);
    return {std::move(policy), objective, std::max(0.0, objective - lower), evaluations};
}

MimicMdResult mimic_md(const Dynamics& d, const Dataset& dataset, std::uint64_t seed,
                       const MdSolverConfig& solver) {
    VisitIndex full(dataset, d.num_states(), d.num_actions(), d.horizon());
    full.require_deterministic("mimic_md");
    auto split = split_dataset(dataset, child_seed(seed, 0));
    if (split.d2.empty()) throw DomainError("mimic_md: D2 is empty (need at least 1 trajectory)");
    VisitIndex index_d1(split.d1, d.num_states(), d.num_actions(), d.horizon());
    const auto target = empirical_event_fractions(split.d2, index_d1);
    OptSolution sol = [&] {
        if (solver.kind == MdSolverConfig::Kind::exact)
            return solve_opt_exact(d, index_d1, target, solver.exact);
        auto opts = solver.subgradient;
        opts.seed = child_seed(seed, 1);
        return solve_opt_subgradient(d, index_d1, target, opts);
    }();
    return {std::move(sol.policy), sol.objective, sol.epsilon, std::move(split)};
}

} // namespace ilab
