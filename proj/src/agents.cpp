#include "bastar/agents.hpp"

#include <algorithm>
#include <numeric>

#include "bastar/rng.hpp"

namespace bastar {

BehaviorEngine::BehaviorEngine(BehaviorPolicy policy, std::uint32_t node_count,
                               std::uint64_t seed)
    : policy_(std::move(policy)), node_count_(node_count), seed_(seed) {
    policy_.validate();
    strategies_.assign(node_count_, Strategy::Cooperate);
    if (policy_.kind == BehaviorPolicy::Kind::FixedSet) {
        for (NodeId n : policy_.defect_set) {
            if (n >= node_count_) throw ConfigError("behavior: defect_set node out of range");
            strategies_[n] = Strategy::Defect;
        }
        for (NodeId n : policy_.offline_set) {
            if (n >= node_count_) throw ConfigError("behavior: offline_set node out of range");
            strategies_[n] = Strategy::Offline;
        }
    }
}

void BehaviorEngine::draw_random_fraction() {
    if (permutation_.empty()) {
        permutation_.resize(node_count_);
        std::iota(permutation_.begin(), permutation_.end(), 0u);
        Rng rng(seed_);
        for (std::uint32_t i = node_count_; i > 1; --i) {
            const std::uint32_t j = static_cast<std::uint32_t>(rng.below(i));
            std::swap(permutation_[i - 1], permutation_[j]);
        }
    }
    std::fill(strategies_.begin(), strategies_.end(), Strategy::Cooperate);
    const auto defectors =
        static_cast<std::uint32_t>(policy_.rate * static_cast<double>(node_count_));
    for (std::uint32_t i = 0; i < defectors && i < node_count_; ++i)
        strategies_[permutation_[i]] = Strategy::Defect;
    drawn_ = true;
}

const std::vector<Strategy>& BehaviorEngine::assign(const StakeLedger& ledger,
                                                    std::uint64_t round,
                                                    const CostModel& costs,
                                                    double last_rate_micro_per_algo) {
    switch (policy_.kind) {
    case BehaviorPolicy::Kind::AllCooperate:
    case BehaviorPolicy::Kind::FixedSet:
        break; // fixed for the whole run
    case BehaviorPolicy::Kind::RandomFraction:
        if (!drawn_ || policy_.redraw_each_round) {
            if (policy_.redraw_each_round) {
                // Fold the round into the permutation seed for fresh draws.
                permutation_.clear();
                seed_ = seed_ * 0x9e3779b97f4a7c15ULL + round;
            }
            draw_random_fraction();
        }
        break;
    case BehaviorPolicy::Kind::PayoffThreshold: {
        // A selfish node cooperates iff the expected reward on its stake beats
        // the marginal cost of cooperation (evaluated as an Other, the role it
        // holds with near certainty before sortition).
        const std::int64_t marginal = costs.c_K() - costs.c_so;
        for (std::uint32_t n = 0; n < node_count_; ++n) {
            const double stake_algos = to_algos(ledger.micro[n]);
            const double expected_reward = last_rate_micro_per_algo * stake_algos;
            strategies_[n] = expected_reward < static_cast<double>(marginal)
                                 ? Strategy::Defect
                                 : Strategy::Cooperate;
        }
        break;
    }
    }
    return strategies_;
}

} // namespace bastar
