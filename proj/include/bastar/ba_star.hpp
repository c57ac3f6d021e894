#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bastar/common.hpp"
#include "bastar/gossip.hpp"
#include "bastar/hash.hpp"
#include "bastar/incentives.hpp"
#include "bastar/sortition.hpp"
#include "bastar/stake.hpp"

namespace bastar {

struct Block {
    Hash256 hash;
    Hash256 prev_hash;
    std::uint64_t round = 0;
    std::uint32_t txn_count = 0;
    bool is_empty = false;
    Seed seed;
};

// The empty block of a round is unique and derivable by every node.
Hash256 empty_block_hash(const Hash256& prev_hash, std::uint64_t round);
Hash256 proposal_block_hash(const Hash256& prev_hash, std::uint64_t round, NodeId proposer);

struct VoteRecord {
    NodeId voter = 0;
    std::uint64_t round = 0;
    std::uint32_t step = 0;
    Hash256 value;
    SortitionProof proof;
};

struct ConsensusParams {
    double threshold_step = 0.685;  // T for step committees
    double threshold_final = 0.74;  // T for the final committee
    std::uint32_t max_binary_steps = 22;
    std::uint32_t step_deadline_ms = 20000;

    void validate() const {
        if (!(threshold_step > 0.5 && threshold_step < 1.0))
            throw ConfigError("consensus: step threshold must lie in (0.5, 1)");
        if (!(threshold_final > 0.5 && threshold_final < 1.0))
            throw ConfigError("consensus: final threshold must lie in (0.5, 1)");
        if (max_binary_steps < 1)
            throw ConfigError("consensus: max_binary_steps must be >= 1");
        if (step_deadline_ms == 0)
            throw ConfigError("consensus: step deadline must be positive");
    }
};

struct TallyContext {
    const Seed* seed = nullptr;
    const SortitionParams* params = nullptr;
    std::span<const std::int64_t> stakes_micro;
    std::int64_t total_stake_micro = 0;
};

// Sums proof weights of verified votes for `value`; duplicate (voter, step)
// votes count once, first arrival wins.
std::pair<bool, std::int64_t> tally_votes(const std::vector<VoteRecord>& votes,
                                          const Hash256& value, std::int64_t threshold,
                                          const TallyContext& ctx);

enum class OutcomeKind : std::uint8_t { Final, Tentative, NoBlock };

inline char outcome_letter(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Final: return 'F';
    case OutcomeKind::Tentative: return 'T';
    case OutcomeKind::NoBlock: return 'N';
    }
    return '?';
}

enum class AgreeStatus : std::uint8_t { None, Tentative, Final };

struct RoundResult {
    // Per-node terminal state.
    std::vector<OutcomeKind> outcome;
    std::vector<std::int16_t> outcome_value; // -1 none, 0 empty, 1.. proposal index
    std::vector<std::uint8_t> was_leader;    // cooperating selected proposer
    std::vector<std::uint8_t> was_member;    // cooperating committee voter (any step)
    // Selected stake-weight (whole-Algo units) actually served: proposer
    // weight and the sum of committee weights across voting steps. These are
    // the reward-bearing stakes; S_L and S_M are their sums.
    std::vector<std::uint32_t> leader_weight;
    std::vector<std::uint32_t> member_weight;
    std::vector<std::int64_t> cost_micro;

    // Network-level summary.
    AgreeStatus agreed_status = AgreeStatus::None;
    Hash256 agreed_hash;
    bool agreed_is_empty = true;
    std::uint32_t steps_used = 0;
    std::uint32_t proposals_emitted = 0;

    std::vector<Hash256> values; // 0 = empty block, then proposals by priority
    std::vector<ReachSample> reach;

    std::uint32_t final_count = 0, tentative_count = 0, noblock_count = 0;
};

// One BA* round: proposal, two-step reduction, iterative BinaryBA*, final
// vote, per-node outcome classification and cost accounting. All message
// traffic runs through the gossip flood engine with per-link delays.
class RoundEngine {
public:
    RoundEngine(const PeerGraph* graph, ConsensusParams cons, SortitionParams sort,
                DelayModel delay, CostModel costs);

    RoundResult run(std::uint64_t round, const Seed& seed, const StakeLedger& ledger,
                    const std::vector<Strategy>& strategies, const Hash256& prev_hash,
                    std::uint64_t delay_key, bool collect_reach);

private:
    struct VoterList {
        std::vector<NodeId> nodes;
        std::vector<std::uint64_t> weights;
        std::int64_t coop_weight = 0;
    };

    // Runs sortition for `step` over all nodes; cooperating selected nodes
    // land in the voter list and accumulate their served weight.
    VoterList committee_for_step(std::uint64_t round, std::uint32_t step, const Seed& seed,
                                 const StakeLedger& ledger,
                                 const std::vector<Strategy>& strategies,
                                 std::vector<std::uint8_t>* selected_mask,
                                 std::vector<std::uint32_t>* member_weight);

    void flood_votes(const VoterList& voters, const std::vector<std::int16_t>& vote_value,
                     std::uint32_t step, std::uint64_t delay_key, std::uint32_t n_values,
                     bool collect_reach, RoundResult& result);

    const PeerGraph* graph_;
    ConsensusParams cons_;
    SortitionParams sort_;
    DelayModel delay_;
    CostModel costs_;

    FloodEngine flood_;
    std::vector<std::uint8_t> relayer_, receiver_;
    std::vector<std::int32_t> tally_;      // node x value, current step
    std::vector<std::int16_t> vote_of_;    // scratch: per-node vote choice
    std::vector<std::uint64_t> recv_lo_, recv_hi_; // proposal receipt bitmask
};

// Stake-role aggregation without message-level simulation, for reward
// experiments at full network scale under strong synchrony: sortition decides
// the served weights, the block is assumed to form when cooperation suffices.
// The canonical common-case round is one proposer pass, the two reduction
// steps, one BinaryBA* step and the final committee.
struct FastRoundRoles {
    std::vector<std::uint32_t> leader_weight; // whole-Algo units, cooperating only
    std::vector<std::uint32_t> member_weight;
    std::uint32_t n_leaders = 0, n_members = 0;
};

FastRoundRoles fast_round_roles(std::uint64_t round, const Seed& seed,
                                const StakeLedger& ledger,
                                const std::vector<Strategy>& strategies,
                                const SortitionParams& params);

} // namespace bastar
