#pragma once

#include <cstdint>
#include <vector>

#include "bastar/common.hpp"

namespace bastar {

// Per-task costs in micro-Algos. The aggregates follow
//   c_fix = c_ve + c_se + c_so + c_go + c_vs + c_vc
//   c_L = c_fix + c_bl,  c_M = c_fix + c_bs + c_vo,  c_K = c_fix
// Defaults reproduce the reference aggregates (16, 12, 6, 5).
struct CostModel {
    std::int64_t c_ve = 1;
    std::int64_t c_se = 0;
    std::int64_t c_so = 5;
    std::int64_t c_go = 0;
    std::int64_t c_vs = 0;
    std::int64_t c_vc = 0;
    std::int64_t c_bl = 10;
    std::int64_t c_bs = 3;
    std::int64_t c_vo = 3;

    std::int64_t c_fix() const { return c_ve + c_se + c_so + c_go + c_vs + c_vc; }
    std::int64_t c_L() const { return c_fix() + c_bl; }
    std::int64_t c_M() const { return c_fix() + c_bs + c_vo; }
    std::int64_t c_K() const { return c_fix(); }
    // A node that is both leader and committee member pays the union of
    // role costs and is classified Leader for rewards.
    std::int64_t c_dual() const { return c_fix() + c_bl + c_bs + c_vo; }

    void validate() const {
        for (std::int64_t c : {c_ve, c_se, c_so, c_go, c_vs, c_vc, c_bl, c_bs, c_vo})
            if (c < 0) throw ConfigError("cost model: component costs must be non-negative");
        if (!(c_L() > c_M() && c_M() > c_K() && c_K() > c_so && c_so > 0))
            throw ConfigError("cost model: need c_L > c_M > c_K > c_so > 0");
    }
};

std::int64_t role_cost(const CostModel& model, Role role, Strategy strategy);

// Foundation schedule, Algos per round for reward periods 1..12; each period
// spans 500k blocks. Behavior past period 12 is undefined and rejected.
std::int64_t schedule_reward_micro(std::uint32_t period);

inline std::uint32_t schedule_period_for_block(std::uint64_t block_height) {
    return static_cast<std::uint32_t>(block_height / 500000) + 1;
}

struct RewardPools {
    std::int64_t foundation_remaining_micro = 1750000000LL * kMicroPerAlgo; // 1.75B ceiling
    std::int64_t fee_pool_micro = 0; // tracked as a counter only

    // Caps the requested disbursement at what the ceiling still allows and
    // debits it. Returns the granted amount.
    std::int64_t draw_foundation(std::int64_t request_micro) {
        const std::int64_t grant = std::min(request_micro, foundation_remaining_micro);
        foundation_remaining_micro -= grant;
        return grant;
    }
    void add_fees(std::int64_t fees_micro) { fee_pool_micro += fees_micro; }
};

struct RewardParameters {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::int64_t B_micro = 0;

    void validate() const {
        if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0))
            throw ConfigError("reward parameters: alpha, beta, gamma must be positive");
        if (std::abs(alpha + beta + gamma - 1.0) > 1e-12)
            throw ConfigError("reward parameters: alpha + beta + gamma must equal 1");
    }
};

struct StakeShare {
    NodeId node = 0;
    std::int64_t stake_micro = 0;
};

// Largest-remainder allocation of `amount_micro` across `shares` proportional
// to stake. The payments sum to floor(amount * sum(shares) / denom) exactly;
// with denom == sum(shares) the full amount is disbursed.
std::vector<std::int64_t> allocate_proportional(std::int64_t amount_micro,
                                                const std::vector<StakeShare>& shares,
                                                std::int64_t denom_micro);

struct Payment {
    NodeId node = 0;
    std::int64_t micro = 0;
};

// Equal per-stake rate for every online node irrespective of role. `total
// stake` is the denominator S_N; offline stake stays unpaid, so the sum of
// payments is the eligible share floor(B * online/S_N).
std::vector<Payment> distribute_foundation(std::int64_t B_micro,
                                           const std::vector<StakeShare>& online,
                                           std::int64_t total_stake_micro);

// Role-based split: alpha/beta/gamma pools over leaders/members/others, then
// by stake within each pool. Pools are integerized by largest remainder so
// payments sum to B exactly.
std::vector<Payment> distribute_role_based(const RewardParameters& params,
                                           const std::vector<StakeShare>& leaders,
                                           const std::vector<StakeShare>& members,
                                           const std::vector<StakeShare>& others);

struct PayoffRecord {
    NodeId node = 0;
    std::uint64_t round = 0;
    std::int64_t reward_micro = 0;
    std::int64_t cost_micro = 0;
    std::int64_t payoff_micro = 0;
    Role role = Role::Other;
    Strategy strategy = Strategy::Cooperate;
};

PayoffRecord compute_payoff(NodeId node, std::uint64_t round, Role role, Strategy strategy,
                            std::int64_t reward_micro, std::int64_t cost_micro);

} // namespace bastar
