#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bastar/agents.hpp"
#include "bastar/ba_star.hpp"
#include "bastar/config.hpp"
#include "bastar/equilibrium.hpp"
#include "bastar/gossip.hpp"
#include "bastar/incentives.hpp"
#include "bastar/sortition.hpp"
#include "bastar/stake.hpp"

namespace bastar {

struct MechanismConfig {
    MechanismKind kind = MechanismKind::Foundation;
    bool auto_params = true; // role-based: run the optimizer each round
    double alpha = 0.02;     // fixed role-based parameters
    double beta = 0.03;
    PayPolicy policy = PayPolicy::PayOnline;
    std::int64_t fee_per_round_micro = 0;   // F_i, tracked as a counter only
    std::int64_t reward_floor_w_micro = 0;  // U^w: stake <= w is reward-ineligible
};

struct ScenarioConfig {
    std::uint32_t node_count = 1000;
    std::uint32_t rounds = 30;
    std::uint32_t replications = 100;
    std::uint64_t master_seed = 42;
    std::uint32_t tx_per_round = 1000;
    bool rewards_only = false; // skip message-level simulation (reward experiments)
    std::uint32_t threads = 0; // 0 = hardware concurrency

    StakeDistributionSpec stakes;
    std::uint32_t out_degree = 5;
    DelayModel delay = DelayModel::uniform(50, 500);
    ConsensusParams consensus;
    SortitionParams sortition;
    CostModel costs;
    MechanismConfig mechanism;
    OptimizerConfig optimizer;
    std::int64_t s_k_floor_micro = 10 * kMicroPerAlgo;
    BehaviorPolicy behavior;
    double synchrony_threshold = 0.95;
    std::uint32_t weak_window = 10;
    double honest_stake_threshold = 2.0 / 3.0; // carried for reporting only

    // Per-node dump surfaces, recorded for replication 0 only.
    bool dump_outcomes = false;
    bool dump_payments = false;
    bool dump_behavior = false;
    bool dump_reach = false;

    void validate() const;
    static ScenarioConfig from_config(const ConfigFile& cfg);
};

struct OutcomeDumpRow {
    std::uint64_t round;
    NodeId node;
    char outcome; // F | T | N
    std::string block_hash;
};

struct BehaviorDumpRow {
    std::uint64_t round;
    NodeId node;
    char strategy; // C | D | O
};

struct ReachDumpRow {
    std::uint64_t round;
    NodeId sender;
    double reached_fraction;
};

struct RoundRow {
    std::uint32_t replication = 0;
    std::uint64_t round = 0;
    double final_frac = 0.0, tentative_frac = 0.0, noblock_frac = 0.0;
    bool block_added = false;
    bool agreed_final = false; // network-level agreement reached Final status
    std::uint32_t steps_used = 0;
    Synchrony sync = Synchrony::Strong;
    double defector_stake_share = 0.0;

    // Tentative chain entries finalize once a later block goes Final while
    // synchrony holds; this counts the entries upgraded by this round.
    std::uint32_t tentative_upgraded = 0;

    bool reward_ok = false; // false when the optimizer found no feasible point
    double alpha = 0.0, beta = 0.0;
    std::int64_t B_micro = 0;
    std::int64_t paid_micro = 0;
    std::int64_t eligible_stake_micro = 0;
    std::int64_t total_stake_micro = 0;
    std::int64_t cum_paid_micro = 0;
};

struct RunReport {
    std::uint32_t node_count = 0;
    std::uint32_t rounds = 0;
    std::uint32_t replications = 0;
    std::vector<RoundRow> rows; // replication-major, rounds in order

    // Replication-0 dumps, populated on request.
    std::vector<OutcomeDumpRow> outcome_dump;
    std::vector<PayoffRecord> payment_dump;
    std::vector<BehaviorDumpRow> behavior_dump;
    std::vector<ReachDumpRow> reach_dump;
    std::string ledger_csv; // initial replication-0 ledger snapshot

    // Replications aborted by a module error, with their diagnostics; the
    // aborted replication's rows stay zeroed.
    std::vector<std::pair<std::uint32_t, std::string>> aborted;

    const RoundRow& at(std::uint32_t rep, std::uint32_t round_idx) const {
        return rows[std::size_t(rep) * rounds + round_idx];
    }
};

RunReport run_scenario(const ScenarioConfig& cfg);

struct SweepResult {
    double rate = 0.0;
    RunReport report;
};

// Runs the scenario once per defection rate with a shared master seed, so
// topology, stakes and sortition draws are identical per replication index
// and defector sets are nested across rates.
std::vector<SweepResult> defection_sweep(const ScenarioConfig& base,
                                         const std::vector<double>& rates);

struct RewardRow {
    std::uint32_t replication = 0;
    std::uint64_t round = 0;
    std::int64_t foundation_B_micro = 0;
    std::int64_t foundation_paid_micro = 0;
    bool role_ok = false;
    double alpha = 0.0, beta = 0.0;
    double role_B_algos = 0.0;
    std::int64_t role_B_micro = 0;
    std::int64_t role_paid_micro = 0;
};

struct RewardComparisonReport {
    std::uint32_t rounds = 0;
    std::uint32_t replications = 0;
    std::vector<RewardRow> rows; // replication-major
};

// Both mechanisms evaluated side by side on the same per-round role sets and
// stake evolution (common random numbers); uses the rewards-only pipeline.
RewardComparisonReport reward_comparison(const ScenarioConfig& base);

// Drops floor(trim*n) smallest and largest samples, averages the rest.
double trimmed_mean(std::vector<double> samples, double trim = 0.20);

// --- CSV emission (floats carry 9 significant digits). ---
std::string format_g9(double v);
void write_fig3_csv(std::ostream& os, const RunReport& report, double trim = 0.20);
void write_fig5_csv(std::ostream& os, const RewardComparisonReport& report);
void write_fig6_csv(std::ostream& os, const RewardComparisonReport& report, double trim = 0.20);
void write_fig7_csv(std::ostream& os, const std::vector<double>& w_algos,
                    const std::vector<RewardComparisonReport>& reports, double trim = 0.20);
void write_rows_csv(std::ostream& os, const RunReport& report);
void write_outcome_dump_csv(std::ostream& os, const RunReport& report);
void write_payment_dump_csv(std::ostream& os, const RunReport& report);
void write_behavior_dump_csv(std::ostream& os, const RunReport& report);
void write_reach_dump_csv(std::ostream& os, const RunReport& report);

} // namespace bastar
