#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bastar/common.hpp"
#include "bastar/rng.hpp"

namespace bastar {

// Per-node stake balances in micro-Algos. total_micro is maintained as the
// exact sum of all balances; no balance may go negative.
struct StakeLedger {
    std::vector<std::int64_t> micro;
    std::int64_t total_micro = 0;

    std::size_t node_count() const { return micro.size(); }

    void recompute_total();
    void check() const;
};

struct StakeDistributionSpec {
    enum class Kind { Uniform, Normal };
    Kind kind = Kind::Uniform;
    std::uint32_t node_count = 0;
    // Uniform bounds / Normal mean and stddev, all in whole Algos.
    double lo = 1.0;
    double hi = 50.0;
    double mean = 100.0;
    double stddev = 10.0;

    void validate() const;
};

struct TransactionEvent {
    NodeId node = 0;
    std::int64_t delta_micro = 0; // signed, +-1..4 whole Algos
    bool applied = false;         // false when the zero-floor rule dropped it
};

struct TransactionRoundResult {
    std::vector<TransactionEvent> events;
    std::int64_t applied_delta_micro = 0;
};

StakeLedger generate_stakes(const StakeDistributionSpec& spec, std::uint64_t rng_seed);

// Draws `draws` nodes proportional to start-of-round stake (a node can be
// drawn repeatedly), gives each a uniform delta on {-4..-1, 1..4} Algos and
// applies it unless it would push the balance below zero.
TransactionRoundResult apply_transaction_round(StakeLedger& ledger, Rng& rng,
                                               std::uint32_t draws = 1000);

struct StakeSummary {
    std::int64_t S_L = 0, S_M = 0, S_K = 0;       // micro-Algos
    std::int64_t s_l_min = 0, s_m_min = 0, s_k_min = 0;
};

// Sums and minima per role. s_k_min is taken over `strong_others` when given
// (the strong-synchrony subset of Others), otherwise over all Others; nodes
// with stake below `k_floor_micro` are skipped for s_k_min.
StakeSummary stake_summary(const StakeLedger& ledger, const std::vector<Role>& roles,
                           const std::vector<NodeId>* strong_others = nullptr,
                           std::int64_t k_floor_micro = 0);

void write_ledger_csv(std::ostream& os, const StakeLedger& ledger);

} // namespace bastar
