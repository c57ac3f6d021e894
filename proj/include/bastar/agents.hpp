#pragma once

#include <cstdint>
#include <vector>

#include "bastar/common.hpp"
#include "bastar/incentives.hpp"
#include "bastar/stake.hpp"

namespace bastar {

struct BehaviorPolicy {
    enum class Kind : std::uint8_t { AllCooperate, FixedSet, RandomFraction, PayoffThreshold };
    Kind kind = Kind::AllCooperate;

    std::vector<NodeId> defect_set;  // FixedSet
    std::vector<NodeId> offline_set; // FixedSet
    double rate = 0.0;               // RandomFraction
    bool redraw_each_round = false;  // RandomFraction: defaults to one draw per run

    void validate() const {
        if (kind == Kind::RandomFraction && (rate < 0.0 || rate > 1.0))
            throw ConfigError("behavior: defection rate must lie in [0, 1]");
    }
};

// Per-replication strategy assignment. Strategies are hard-wired within a
// round; RandomFraction marks the first floor(rate*N) nodes of a seeded
// permutation as defectors, which keeps defector sets nested across swept
// rates under common random numbers.
class BehaviorEngine {
public:
    BehaviorEngine(BehaviorPolicy policy, std::uint32_t node_count, std::uint64_t seed);

    // `last_rate_micro_per_algo` is the previous round's per-stake-unit reward
    // rate; the payoff-threshold policy compares it against the marginal cost
    // of cooperating as an Other (myopic one-shot best response).
    const std::vector<Strategy>& assign(const StakeLedger& ledger, std::uint64_t round,
                                        const CostModel& costs,
                                        double last_rate_micro_per_algo);

    const std::vector<Strategy>& current() const { return strategies_; }

private:
    void draw_random_fraction();

    BehaviorPolicy policy_;
    std::uint32_t node_count_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<NodeId> permutation_;
    std::vector<Strategy> strategies_;
    bool drawn_ = false;
};

struct ParticipationFlags {
    bool propose = false;
    bool vote = false;
    bool relay = false;
    bool reachable = false;
    bool reward_eligible = false;
};

// Cooperate: full participation. Defect: sortition only, stays online as a
// message sink but performs no task (including gossiping, which Table II
// lists as a task). Offline: sortition only, unreachable and reward-ineligible.
inline ParticipationFlags execute_strategy(Strategy s) {
    switch (s) {
    case Strategy::Cooperate: return {true, true, true, true, true};
    case Strategy::Defect: return {false, false, false, true, true};
    case Strategy::Offline: return {false, false, false, false, false};
    }
    return {};
}

} // namespace bastar
