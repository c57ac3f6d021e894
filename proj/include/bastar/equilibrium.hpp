#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bastar/common.hpp"
#include "bastar/incentives.hpp"

namespace bastar {

// Stake aggregates feeding the deviation bounds, all in micro-Algos.
// s_*_min are the minimum stakes over leaders, committee members and the
// strong-synchrony subset of Others.
struct StakeAggregates {
    std::int64_t S_L = 0, S_M = 0, S_K = 0;
    std::int64_t s_l_min = 0, s_m_min = 0, s_k_min = 0;

    void validate() const {
        if (S_L <= 0 || S_M <= 0 || S_K <= 0)
            throw ConfigError("stake aggregates: S_L, S_M, S_K must be positive");
        if (s_l_min <= 0 || s_m_min <= 0 || s_k_min <= 0)
            throw ConfigError("stake aggregates: minimum stakes must be positive");
        if (s_l_min > S_L || s_m_min > S_M || s_k_min > S_K)
            throw ConfigError("stake aggregates: a minimum stake exceeds its role total");
    }
};

enum class BindingBound : std::uint8_t { Leader, Member, Other };

inline const char* binding_name(BindingBound b) {
    switch (b) {
    case BindingBound::Leader: return "bound_L";
    case BindingBound::Member: return "bound_M";
    case BindingBound::Other: return "bound_K";
    }
    return "?";
}

// Right-hand sides of the three deviation inequalities, in Algos. bound_L and
// bound_M are only defined while the feasibility conditions
//   alpha/S_L > gamma/(S_K + s_l_min)   and   beta/S_M > gamma/(S_K + s_m_min)
// hold; `feasible` reports that. bound_K is defined for any gamma > 0.
struct BoundSet {
    double bound_L = 0.0;
    double bound_M = 0.0;
    double bound_K = 0.0;
    bool feasible = false;

    double max_bound() const;
    BindingBound binding() const;
};

BoundSet deviation_bounds(const CostModel& model, const StakeAggregates& agg,
                          double alpha, double beta);

struct OptimizerConfig {
    double resolution = 0.005;
    // Search region for (alpha, beta); defaults cover the reference
    // numerical-analysis region. Widen via config for a full-simplex search.
    double alpha_min = 0.01;
    double alpha_max = 0.04;
    double beta_min = 0.02;
    double beta_max = 0.05;
    double epsilon = 1e-6;   // strict-inequality margin on B
    int refine_iterations = 100;

    void validate() const {
        if (!(resolution > 0.0 && resolution <= 0.1))
            throw ConfigError("optimizer: resolution must lie in (0, 0.1]");
        if (!(alpha_min > 0.0 && beta_min > 0.0))
            throw ConfigError("optimizer: alpha_min and beta_min must be positive");
        if (alpha_max < alpha_min || beta_max < beta_min)
            throw ConfigError("optimizer: search box is empty");
        if (alpha_max + beta_max >= 1.0 && alpha_min + beta_min >= 1.0)
            throw ConfigError("optimizer: search box leaves no room for gamma");
        // The returned budget must sit strictly above the bound.
        if (epsilon <= 0.0) throw ConfigError("optimizer: epsilon must be positive");
    }
};

struct OptimizerResult {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double B_algos = 0.0;           // (1 + epsilon) * max bound at (alpha, beta)
    double max_bound_algos = 0.0;
    BindingBound binding = BindingBound::Other;
    double grid_resolution = 0.0;
};

// Grid search over the (alpha, beta) box restricted to the feasible simplex,
// minimizing the max of the three bounds; ties break toward smaller alpha,
// then smaller beta. A bounded coordinate-descent refinement (one grid cell
// around the best point) tightens the result.
OptimizerResult compute_parameters(const StakeAggregates& agg, const CostModel& model,
                                   const OptimizerConfig& cfg);

// ---------------------------------------------------------------------------
// Exhaustive game analysis on small instances.

enum class PayPolicy : std::uint8_t { PayOnline, PayCooperatorsOnly };

enum class MechanismKind : std::uint8_t { Foundation, RoleBased };

struct GamePlayer {
    Role role = Role::Other;
    std::int64_t stake_micro = 0;
    bool in_strong_set = false; // meaningful for Others only
};

// Block-success rule: a block forms iff at least one leader cooperates, the
// stake of non-cooperating committee members stays within `committee_slack`,
// and every strong-set Other cooperates. `always_succeeds` short-circuits the
// rule for degenerate test instances.
struct BlockRule {
    bool always_succeeds = false;
    std::int64_t committee_slack_micro = 0;
};

struct GameInstance {
    std::vector<GamePlayer> players;
    CostModel costs;
    MechanismKind mechanism = MechanismKind::RoleBased;
    double alpha = 0.0;
    double beta = 0.0;
    std::int64_t B_micro = 0;
    PayPolicy policy = PayPolicy::PayOnline;
    BlockRule rule;

    std::int64_t total_stake_micro() const {
        std::int64_t s = 0;
        for (const auto& p : players) s += p.stake_micro;
        return s;
    }
};

bool block_forms(const GameInstance& g, const std::vector<Strategy>& profile);

// Payoffs for every player under `profile`: reward by the instance mechanism
// (defecting leaders/members are paid from the Others pool while online;
// offline players earn nothing), minus the role/strategy cost.
std::vector<std::int64_t> game_payoffs(const GameInstance& g,
                                       const std::vector<Strategy>& profile);

struct Deviation {
    std::uint32_t player = 0;
    Strategy from = Strategy::Cooperate;
    Strategy to = Strategy::Defect;
    std::int64_t gain_micro = 0;
};

struct NashVerdict {
    bool is_nash = false;
    std::vector<Deviation> profitable;
};

NashVerdict verify_nash(const GameInstance& g, const std::vector<Strategy>& profile);

// True iff `dominator` yields a strictly greater payoff than `dominated` for
// the player against every opponent profile over {C, D, O}.
bool check_dominance(const GameInstance& g, std::uint32_t player, Strategy dominated,
                     Strategy dominator);

// Offline dominance: u(D) >= u(O) against every opponent profile, strictly
// whenever the defector would actually be paid.
bool defect_dominates_offline(const GameInstance& g, std::uint32_t player);

} // namespace bastar
