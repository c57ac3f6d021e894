#include "bastar/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace bastar {

double BoundSet::max_bound() const {
    return std::max(bound_K, std::max(bound_L, bound_M));
}

BindingBound BoundSet::binding() const {
    // Ties resolve toward the Others bound, which is the structurally
    // dominant term whenever S_K dwarfs S_L and S_M.
    if (bound_K >= bound_L && bound_K >= bound_M) return BindingBound::Other;
    if (bound_L >= bound_M) return BindingBound::Leader;
    return BindingBound::Member;
}

BoundSet deviation_bounds(const CostModel& model, const StakeAggregates& agg,
                          double alpha, double beta) {
    agg.validate();
    const double gamma = 1.0 - alpha - beta;
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0))
        throw ConfigError("deviation_bounds: alpha, beta and gamma must be positive");

    const double S_L = to_algos(agg.S_L);
    const double S_M = to_algos(agg.S_M);
    const double S_K = to_algos(agg.S_K);
    const double s_l = to_algos(agg.s_l_min);
    const double s_m = to_algos(agg.s_m_min);
    const double s_k = to_algos(agg.s_k_min);

    BoundSet b;
    const double denom_l = (alpha / S_L - gamma / (S_K + s_l)) * s_l;
    const double denom_m = (beta / S_M - gamma / (S_K + s_m)) * s_m;
    b.feasible = denom_l > 0.0 && denom_m > 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    b.bound_L = denom_l > 0.0 ? to_algos(model.c_L() - model.c_so) / denom_l : nan;
    b.bound_M = denom_m > 0.0 ? to_algos(model.c_M() - model.c_so) / denom_m : nan;
    b.bound_K = to_algos(model.c_K() - model.c_so) * S_K / (s_k * gamma);
    return b;
}

namespace {

struct Eval {
    bool feasible = false;
    double value = std::numeric_limits<double>::infinity();
};

Eval eval_point(const CostModel& model, const StakeAggregates& agg, double alpha,
                double beta) {
    Eval e;
    if (!(alpha > 0.0 && beta > 0.0 && alpha + beta < 1.0)) return e;
    const BoundSet b = deviation_bounds(model, agg, alpha, beta);
    if (!b.feasible) return e;
    e.feasible = true;
    e.value = b.max_bound();
    return e;
}

// Golden-section minimization over a closed interval; the objective is
// quasi-convex along each coordinate within a grid cell.
double golden_min(double lo, double hi, int iters, const std::function<double(double)>& f) {
    constexpr double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    double xs[4] = {a, x1, x2, b};
    double best = xs[0];
    double fb = f(xs[0]);
    for (double x : {x1, x2, b}) {
        const double fx = f(x);
        if (fx < fb) {
            fb = fx;
            best = x;
        }
    }
    return best;
}

} // namespace

OptimizerResult compute_parameters(const StakeAggregates& agg, const CostModel& model,
                                   const OptimizerConfig& cfg) {
    agg.validate();
    model.validate();
    cfg.validate();

    const double res = cfg.resolution;
    bool found = false;
    double best_a = 0.0, best_b = 0.0, best_v = std::numeric_limits<double>::infinity();

    for (double a = cfg.alpha_min; a <= cfg.alpha_max + 1e-15; a += res) {
        for (double b = cfg.beta_min; b <= cfg.beta_max + 1e-15; b += res) {
            const Eval e = eval_point(model, agg, a, b);
            if (!e.feasible) continue;
            // Ties break toward smaller alpha, then smaller beta.
            if (!found || e.value < best_v - 1e-15 ||
                (std::abs(e.value - best_v) <= 1e-15 &&
                 (a < best_a - 1e-15 || (std::abs(a - best_a) <= 1e-15 && b < best_b - 1e-15)))) {
                found = true;
                best_v = e.value;
                best_a = a;
                best_b = b;
            }
        }
    }
    if (!found)
        throw OptimizationError(
            "compute_parameters: no feasible (alpha, beta) grid point; "
            "S_L or S_M is likely too large relative to S_K for this search box");

    // Local refinement within one grid cell of the best point, clamped to the box.
    double a = best_a, bta = best_b, v = best_v;
    for (int it = 0; it < cfg.refine_iterations; ++it) {
        const double alo = std::max(cfg.alpha_min, best_a - res);
        const double ahi = std::min(cfg.alpha_max, best_a + res);
        const double blo = std::max(cfg.beta_min, best_b - res);
        const double bhi = std::min(cfg.beta_max, best_b + res);
        const double cur_b = bta;
        const double na = golden_min(alo, ahi, 40, [&](double x) {
            const Eval e = eval_point(model, agg, x, cur_b);
            return e.feasible ? e.value : std::numeric_limits<double>::infinity();
        });
        const Eval ea = eval_point(model, agg, na, cur_b);
        if (ea.feasible && ea.value < v) {
            a = na;
            v = ea.value;
        }
        const double cur_a = a;
        const double nb = golden_min(blo, bhi, 40, [&](double x) {
            const Eval e = eval_point(model, agg, cur_a, x);
            return e.feasible ? e.value : std::numeric_limits<double>::infinity();
        });
        const Eval eb = eval_point(model, agg, cur_a, nb);
        if (eb.feasible && eb.value < v) {
            bta = nb;
            v = eb.value;
        }
    }
    if (v > best_v) {
        a = best_a;
        bta = best_b;
        v = best_v;
    }

    const BoundSet bounds = deviation_bounds(model, agg, a, bta);
    OptimizerResult r;
    r.alpha = a;
    r.beta = bta;
    r.gamma = 1.0 - a - bta;
    r.max_bound_algos = bounds.max_bound();
    r.B_algos = r.max_bound_algos * (1.0 + cfg.epsilon);
    r.binding = bounds.binding();
    r.grid_resolution = res;
    return r;
}

// ---------------------------------------------------------------------------

bool block_forms(const GameInstance& g, const std::vector<Strategy>& profile) {
    if (g.rule.always_succeeds) return true;
    bool leader_ok = false;
    std::int64_t member_missing = 0;
    bool strong_ok = true;
    for (std::size_t i = 0; i < g.players.size(); ++i) {
        const auto& p = g.players[i];
        const Strategy s = profile[i];
        switch (p.role) {
        case Role::Leader:
            if (s == Strategy::Cooperate) leader_ok = true;
            break;
        case Role::Member:
            if (s != Strategy::Cooperate) member_missing += p.stake_micro;
            break;
        case Role::Other:
            if (p.in_strong_set && s != Strategy::Cooperate) strong_ok = false;
            break;
        }
    }
    return leader_ok && member_missing <= g.rule.committee_slack_micro && strong_ok;
}

std::vector<std::int64_t> game_payoffs(const GameInstance& g,
                                       const std::vector<Strategy>& profile) {
    const std::size_t n = g.players.size();
    std::vector<std::int64_t> reward(n, 0);

    if (block_forms(g, profile)) {
        auto eligible = [&](std::size_t i) {
            if (profile[i] == Strategy::Offline) return false;
            if (g.policy == PayPolicy::PayCooperatorsOnly &&
                profile[i] != Strategy::Cooperate)
                return false;
            return true;
        };
        if (g.mechanism == MechanismKind::Foundation) {
            std::vector<StakeShare> online;
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < n; ++i) {
                if (!eligible(i)) continue;
                online.push_back({static_cast<NodeId>(i), g.players[i].stake_micro});
                idx.push_back(i);
            }
            const auto pays = distribute_foundation(g.B_micro, online, g.total_stake_micro());
            for (std::size_t k = 0; k < pays.size(); ++k) reward[idx[k]] = pays[k].micro;
        } else {
            // Defecting leaders and members keep themselves online and are
            // paid from the Others pool; cooperating leaders/members form the
            // alpha/beta pools.
            std::vector<StakeShare> L, M, K;
            std::vector<std::size_t> iL, iM, iK;
            for (std::size_t i = 0; i < n; ++i) {
                if (!eligible(i)) continue;
                const auto& p = g.players[i];
                const StakeShare share{static_cast<NodeId>(i), p.stake_micro};
                if (p.role == Role::Leader && profile[i] == Strategy::Cooperate) {
                    L.push_back(share);
                    iL.push_back(i);
                } else if (p.role == Role::Member && profile[i] == Strategy::Cooperate) {
                    M.push_back(share);
                    iM.push_back(i);
                } else {
                    K.push_back(share);
                    iK.push_back(i);
                }
            }
            RewardParameters params;
            params.alpha = g.alpha;
            params.beta = g.beta;
            params.gamma = 1.0 - g.alpha - g.beta;
            params.B_micro = g.B_micro;
            if (!L.empty() && !M.empty() && !K.empty()) {
                const auto pays = distribute_role_based(params, L, M, K);
                std::size_t k = 0;
                for (std::size_t j = 0; j < iL.size(); ++j) reward[iL[j]] = pays[k++].micro;
                for (std::size_t j = 0; j < iM.size(); ++j) reward[iM[j]] = pays[k++].micro;
                for (std::size_t j = 0; j < iK.size(); ++j) reward[iK[j]] = pays[k++].micro;
            } else {
                // A deviation emptied a pool: disburse the surviving pools only.
                auto pay_pool = [&](double frac, const std::vector<StakeShare>& set,
                                    const std::vector<std::size_t>& map) {
                    if (set.empty()) return;
                    std::int64_t denom = 0;
                    for (const auto& s : set) denom += s.stake_micro;
                    const std::int64_t pool =
                        static_cast<std::int64_t>(std::floor(frac * static_cast<double>(g.B_micro)));
                    const auto alloc = allocate_proportional(pool, set, denom);
                    for (std::size_t j = 0; j < set.size(); ++j) reward[map[j]] = alloc[j];
                };
                pay_pool(g.alpha, L, iL);
                pay_pool(g.beta, M, iM);
                pay_pool(1.0 - g.alpha - g.beta, K, iK);
            }
        }
    }

    std::vector<std::int64_t> u(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t cost = role_cost(g.costs, g.players[i].role, profile[i]);
        u[i] = reward[i] - cost;
    }
    return u;
}

NashVerdict verify_nash(const GameInstance& g, const std::vector<Strategy>& profile) {
    NashVerdict verdict;
    const auto base = game_payoffs(g, profile);
    std::vector<Strategy> work = profile;
    for (std::size_t i = 0; i < g.players.size(); ++i) {
        for (Strategy alt : {Strategy::Cooperate, Strategy::Defect, Strategy::Offline}) {
            if (alt == profile[i]) continue;
            work[i] = alt;
            const auto u = game_payoffs(g, work);
            if (u[i] > base[i]) {
                verdict.profitable.push_back(
                    {static_cast<std::uint32_t>(i), profile[i], alt, u[i] - base[i]});
            }
            work[i] = profile[i];
        }
    }
    verdict.is_nash = verdict.profitable.empty();
    return verdict;
}

namespace {

template <typename Fn>
void for_each_opponent_profile(std::size_t n, std::uint32_t player, Fn&& fn) {
    std::vector<Strategy> profile(n, Strategy::Cooperate);
    const std::size_t others = n - 1;
    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < others; ++i) combos *= 3;
    for (std::uint64_t code = 0; code < combos; ++code) {
        std::uint64_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == player) continue;
            profile[i] = static_cast<Strategy>(c % 3);
            c /= 3;
        }
        fn(profile);
    }
}

} // namespace

bool check_dominance(const GameInstance& g, std::uint32_t player, Strategy dominated,
                     Strategy dominator) {
    if (dominated == dominator) return false;
    bool strict_everywhere = true;
    for_each_opponent_profile(g.players.size(), player, [&](std::vector<Strategy>& profile) {
        if (!strict_everywhere) return;
        profile[player] = dominator;
        const auto u_dom = game_payoffs(g, profile)[player];
        profile[player] = dominated;
        const auto u_sub = game_payoffs(g, profile)[player];
        if (u_dom <= u_sub) strict_everywhere = false;
    });
    return strict_everywhere;
}

bool defect_dominates_offline(const GameInstance& g, std::uint32_t player) {
    bool holds = true;
    for_each_opponent_profile(g.players.size(), player, [&](std::vector<Strategy>& profile) {
        if (!holds) return;
        profile[player] = Strategy::Defect;
        const auto payoffs_d = game_payoffs(g, profile);
        const std::int64_t u_d = payoffs_d[player];
        const std::int64_t paid_d = u_d + role_cost(g.costs, g.players[player].role,
                                                    Strategy::Defect);
        profile[player] = Strategy::Offline;
        const std::int64_t u_o = game_payoffs(g, profile)[player];
        if (u_d < u_o) holds = false;
        if (paid_d > 0 && u_d <= u_o) holds = false;
    });
    return holds;
}

} // namespace bastar
