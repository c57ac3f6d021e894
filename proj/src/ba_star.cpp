#include "bastar/ba_star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bastar {

namespace {

constexpr HashKey kBlockDomain{0x626c6f636b212121ULL, 0x3333333333333333ULL};

std::int64_t int_threshold(double tau, double fraction) {
    return static_cast<std::int64_t>(std::ceil(tau * fraction - 1e-9));
}

// Deterministic winner among values whose tally meets the threshold: highest
// weight, ties toward the smaller index (better priority).
std::int16_t threshold_winner(const std::int32_t* row, std::uint32_t n_values,
                              std::int64_t threshold) {
    std::int16_t best = -1;
    std::int32_t best_w = 0;
    for (std::uint32_t v = 0; v < n_values; ++v) {
        if (row[v] >= threshold && row[v] > best_w) {
            best_w = row[v];
            best = static_cast<std::int16_t>(v);
        }
    }
    return best;
}

} // namespace

Hash256 empty_block_hash(const Hash256& prev_hash, std::uint64_t round) {
    HashMsg msg;
    msg.u64(prev_hash.w[0]).u64(prev_hash.w[1]).u64(prev_hash.w[2]).u64(prev_hash.w[3]);
    msg.u64(round).u32(0x656d7074u); // "empt"
    return hash256(kBlockDomain, msg);
}

Hash256 proposal_block_hash(const Hash256& prev_hash, std::uint64_t round, NodeId proposer) {
    HashMsg msg;
    msg.u64(prev_hash.w[0]).u64(prev_hash.w[1]).u64(prev_hash.w[2]).u64(prev_hash.w[3]);
    msg.u64(round).u32(proposer).u32(0x70726f70u); // "prop"
    return hash256(kBlockDomain, msg);
}

std::pair<bool, std::int64_t> tally_votes(const std::vector<VoteRecord>& votes,
                                          const Hash256& value, std::int64_t threshold,
                                          const TallyContext& ctx) {
    std::int64_t weight = 0;
    std::vector<std::pair<NodeId, std::uint32_t>> seen;
    seen.reserve(votes.size());
    for (const auto& vote : votes) {
        if (vote.value != value) continue;
        const auto key = std::make_pair(vote.voter, vote.step);
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        if (ctx.seed && ctx.params) {
            const std::int64_t stake =
                vote.voter < ctx.stakes_micro.size() ? ctx.stakes_micro[vote.voter] : 0;
            if (!verify_proof(vote.proof, *ctx.seed, stake, *ctx.params,
                              ctx.total_stake_micro))
                continue;
        }
        weight += static_cast<std::int64_t>(vote.proof.weight);
    }
    return {weight >= threshold, weight};
}

RoundEngine::RoundEngine(const PeerGraph* graph, ConsensusParams cons, SortitionParams sort,
                         DelayModel delay, CostModel costs)
    : graph_(graph), cons_(cons), sort_(sort), delay_(delay), costs_(costs) {
    cons_.validate();
    sort_.validate();
    delay_.validate();
    costs_.validate();
    flood_.reset(graph_->node_count, delay_.max_ms());
}

RoundEngine::VoterList RoundEngine::committee_for_step(
    std::uint64_t round, std::uint32_t step, const Seed& seed, const StakeLedger& ledger,
    const std::vector<Strategy>& strategies, std::vector<std::uint8_t>* selected_mask,
    std::vector<std::uint32_t>* member_weight) {
    VoterList list;
    const std::uint32_t n = static_cast<std::uint32_t>(ledger.node_count());
    for (NodeId node = 0; node < n; ++node) {
        const auto proof = run_sortition(node, ledger.micro[node], round, step, seed, sort_,
                                         ledger.total_micro);
        if (!proof) continue;
        if (strategies[node] != Strategy::Cooperate) continue;
        if (selected_mask) (*selected_mask)[node] = 1;
        if (member_weight)
            (*member_weight)[node] += static_cast<std::uint32_t>(proof->weight);
        list.nodes.push_back(node);
        list.weights.push_back(proof->weight);
        list.coop_weight += static_cast<std::int64_t>(proof->weight);
    }
    return list;
}

void RoundEngine::flood_votes(const VoterList& voters,
                              const std::vector<std::int16_t>& vote_value, std::uint32_t step,
                              std::uint64_t delay_key, std::uint32_t n_values,
                              bool collect_reach, RoundResult& result) {
    std::fill(tally_.begin(), tally_.begin() + std::size_t(graph_->node_count) * n_values, 0);
    for (std::size_t i = 0; i < voters.nodes.size(); ++i) {
        const NodeId voter = voters.nodes[i];
        const std::int16_t value = vote_value[voter];
        if (value < 0) continue; // nothing to vote for (unconcluded final voter)
        const std::int32_t w = static_cast<std::int32_t>(voters.weights[i]);
        const std::uint64_t salt =
            0x766f7465ULL ^ (std::uint64_t(step + 1) << 36) ^ (std::uint64_t(voter) << 4);
        flood_.run(*graph_, voter, relayer_.data(), receiver_.data(), delay_,
                   cons_.step_deadline_ms, delay_key, salt);
        for (NodeId reached : flood_.reached_nodes()) {
            tally_[std::size_t(reached) * n_values + value] += w;
        }
        if (collect_reach) {
            ReachSample sample;
            sample.sender = voter;
            sample.reached.assign(graph_->node_count, 0);
            for (NodeId reached : flood_.reached_nodes()) sample.reached[reached] = 1;
            result.reach.push_back(std::move(sample));
        }
    }
}

RoundResult RoundEngine::run(std::uint64_t round, const Seed& seed, const StakeLedger& ledger,
                             const std::vector<Strategy>& strategies,
                             const Hash256& prev_hash, std::uint64_t delay_key,
                             bool collect_reach) {
    const std::uint32_t n = graph_->node_count;
    if (ledger.node_count() != n || strategies.size() != n)
        throw SimError("round engine: ledger/strategy size mismatch with topology");

    RoundResult result;
    result.outcome.assign(n, OutcomeKind::NoBlock);
    result.outcome_value.assign(n, -1);
    result.was_leader.assign(n, 0);
    result.was_member.assign(n, 0);
    result.leader_weight.assign(n, 0);
    result.member_weight.assign(n, 0);
    result.cost_micro.assign(n, 0);

    relayer_.assign(n, 0);
    receiver_.assign(n, 0);
    for (NodeId i = 0; i < n; ++i) {
        relayer_[i] = strategies[i] == Strategy::Cooperate;
        receiver_[i] = strategies[i] != Strategy::Offline;
    }

    // --- Proposal phase. Every node runs sortition (cost c_so is universal);
    // cooperating selected leaders emit a proposal + credential.
    struct Proposal {
        NodeId node;
        Hash256 priority;
        Hash256 block;
        std::uint32_t weight;
    };
    std::vector<Proposal> proposals;
    std::vector<std::uint8_t> selected_proposer(n, 0);
    for (NodeId node = 0; node < n; ++node) {
        const auto proof =
            run_sortition(node, ledger.micro[node], round, 0, seed, sort_, ledger.total_micro);
        if (!proof) continue;
        selected_proposer[node] = strategies[node] == Strategy::Cooperate;
        if (strategies[node] != Strategy::Cooperate) continue;
        proposals.push_back({node, proof->priority, proposal_block_hash(prev_hash, round, node),
                             static_cast<std::uint32_t>(proof->weight)});
    }
    std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.node < b.node;
    });
    if (proposals.size() > sort_.proposer_cap) proposals.resize(sort_.proposer_cap);
    result.proposals_emitted = static_cast<std::uint32_t>(proposals.size());
    for (const Proposal& p : proposals) result.leader_weight[p.node] = p.weight;

    const std::uint32_t n_values = static_cast<std::uint32_t>(proposals.size()) + 1;
    result.values.resize(n_values);
    result.values[0] = empty_block_hash(prev_hash, round);
    for (std::size_t i = 0; i < proposals.size(); ++i) result.values[i + 1] = proposals[i].block;

    tally_.assign(std::size_t(n) * n_values, 0);
    vote_of_.assign(n, -1);
    recv_lo_.assign(n, 0);
    recv_hi_.assign(n, 0);

    // Flood proposals; nodes retain the highest-priority one they receive.
    std::vector<std::int16_t> best_prop(n, -1);
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const NodeId origin = proposals[i].node;
        const std::uint64_t salt = 0xb10c0000ULL ^ origin;
        flood_.run(*graph_, origin, relayer_.data(), receiver_.data(), delay_,
                   cons_.step_deadline_ms, delay_key, salt);
        for (NodeId reached : flood_.reached_nodes()) {
            if (best_prop[reached] < 0)
                best_prop[reached] = static_cast<std::int16_t>(i + 1); // priority order
            if (i < 64)
                recv_lo_[reached] |= 1ULL << i;
            else
                recv_hi_[reached] |= 1ULL << (i - 64);
        }
        if (collect_reach) {
            ReachSample sample;
            sample.sender = origin;
            sample.reached.assign(n, 0);
            for (NodeId reached : flood_.reached_nodes()) sample.reached[reached] = 1;
            result.reach.push_back(std::move(sample));
        }
    }

    const std::int64_t thr_step = int_threshold(sort_.tau_step, cons_.threshold_step);
    const std::int64_t thr_final = int_threshold(sort_.tau_final, cons_.threshold_final);
    std::vector<std::uint8_t> selected_member(n, 0);

    // --- Reduction step 1: vote for the highest-priority received proposal,
    // or the empty block when none arrived.
    auto step1 = committee_for_step(round, 1, seed, ledger, strategies, &selected_member,
                                    &result.member_weight);
    for (NodeId node = 0; node < n; ++node)
        vote_of_[node] = best_prop[node] > 0 ? best_prop[node] : std::int16_t(0);
    flood_votes(step1, vote_of_, 1, delay_key, n_values, collect_reach, result);

    // --- Reduction step 2: vote for a hash with enough step-1 votes, else empty.
    auto step2 = committee_for_step(round, 2, seed, ledger, strategies, &selected_member,
                                    &result.member_weight);
    for (NodeId node = 0; node < n; ++node) {
        const std::int16_t w =
            threshold_winner(&tally_[std::size_t(node) * n_values], n_values, thr_step);
        vote_of_[node] = w >= 0 ? w : std::int16_t(0);
    }
    flood_votes(step2, vote_of_, 2, delay_key, n_values, collect_reach, result);

    // Reduction output: step-2 majority hash above threshold, else empty.
    std::vector<std::int16_t> current(n, 0);
    for (NodeId node = 0; node < n; ++node) {
        const std::int16_t w =
            threshold_winner(&tally_[std::size_t(node) * n_values], n_values, thr_step);
        current[node] = w >= 0 ? w : std::int16_t(0);
    }

    // --- BinaryBA*: iterate committee votes on the current value until nodes
    // observe a threshold or the step budget runs out.
    std::vector<std::uint8_t> concluded(n, 0);
    std::uint32_t online_count = 0;
    for (NodeId i = 0; i < n; ++i) online_count += receiver_[i];
    std::uint32_t concluded_count = 0;
    std::uint32_t steps_used = cons_.max_binary_steps;
    for (std::uint32_t k = 1; k <= cons_.max_binary_steps; ++k) {
        const std::uint32_t step = 2 + k;
        auto committee = committee_for_step(round, step, seed, ledger, strategies,
                                            &selected_member, &result.member_weight);
        // Below the threshold no observer can conclude, so the votes need not
        // be propagated at all; membership is still charged.
        if (committee.coop_weight >= thr_step) {
            for (NodeId node = 0; node < n; ++node) vote_of_[node] = current[node];
            flood_votes(committee, vote_of_, step, delay_key, n_values, collect_reach, result);
            for (NodeId node = 0; node < n; ++node) {
                if (!receiver_[node]) continue;
                const std::int16_t w = threshold_winner(&tally_[std::size_t(node) * n_values],
                                                        n_values, thr_step);
                if (w >= 0) {
                    current[node] = w;
                    if (!concluded[node]) {
                        concluded[node] = 1;
                        ++concluded_count;
                    }
                }
            }
        }
        if (concluded_count == online_count) {
            steps_used = k;
            break;
        }
    }
    result.steps_used = steps_used;

    // --- Final committee vote: concluded members vote their agreed value.
    auto final_committee =
        committee_for_step(round, kFinalStep, seed, ledger, strategies, &selected_member,
                           &result.member_weight);
    for (NodeId node = 0; node < n; ++node)
        vote_of_[node] = concluded[node] ? current[node] : std::int16_t(-1);
    flood_votes(final_committee, vote_of_, kFinalStep, delay_key, n_values, collect_reach,
                result);

    // --- Outcome classification. A node must hold the agreed block's content
    // to extract it; the empty block is derivable by construction.
    for (NodeId node = 0; node < n; ++node) {
        if (!receiver_[node] || !concluded[node]) continue;
        const std::int16_t v = current[node];
        bool has_content = v == 0;
        if (v > 0) {
            const std::uint32_t bit = static_cast<std::uint32_t>(v - 1);
            has_content = bit < 64 ? (recv_lo_[node] >> bit) & 1
                                   : (recv_hi_[node] >> (bit - 64)) & 1;
        }
        if (!has_content) continue; // stays NoBlock
        result.outcome_value[node] = v;
        const std::int32_t fw = tally_[std::size_t(node) * n_values + v];
        result.outcome[node] = fw >= thr_final ? OutcomeKind::Final : OutcomeKind::Tentative;
    }

    // --- Network agreement and the no-fork invariant.
    std::vector<std::uint32_t> finals(n_values, 0), tents(n_values, 0);
    for (NodeId node = 0; node < n; ++node) {
        if (result.outcome_value[node] < 0) {
            ++result.noblock_count;
            continue;
        }
        if (result.outcome[node] == OutcomeKind::Final) {
            ++result.final_count;
            ++finals[result.outcome_value[node]];
        } else {
            ++result.tentative_count;
            ++tents[result.outcome_value[node]];
        }
    }
    result.noblock_count = n - result.final_count - result.tentative_count;

    std::uint32_t nonempty_final_values = 0;
    for (std::uint32_t v = 1; v < n_values; ++v)
        if (finals[v] > 0) ++nonempty_final_values;
    if (nonempty_final_values > 1)
        throw SimError("safety violation: two non-empty blocks finalized in one round");

    std::int16_t agreed = -1;
    for (std::uint32_t v = 1; v < n_values; ++v)
        if (finals[v] > 0) agreed = static_cast<std::int16_t>(v);
    if (agreed < 0) {
        std::uint32_t best = 0;
        for (std::uint32_t v = 1; v < n_values; ++v)
            if (tents[v] > best) {
                best = tents[v];
                agreed = static_cast<std::int16_t>(v);
            }
    }
    if (agreed < 0 && (finals[0] > 0 || tents[0] > 0)) agreed = 0;
    if (agreed >= 0) {
        result.agreed_hash = result.values[agreed];
        result.agreed_is_empty = agreed == 0;
        result.agreed_status = finals[agreed] > 0 ? AgreeStatus::Final : AgreeStatus::Tentative;
    }

    // --- Cost accounting: exactly one of {c_L, c_M, c_K, c_so} per node,
    // union charge for dual leader/member selections.
    for (NodeId node = 0; node < n; ++node) {
        if (strategies[node] != Strategy::Cooperate) {
            result.cost_micro[node] = costs_.c_so;
            continue;
        }
        const bool lead = selected_proposer[node];
        const bool member = selected_member[node];
        result.was_leader[node] = lead;
        result.was_member[node] = member && !lead;
        if (lead && member)
            result.cost_micro[node] = costs_.c_dual();
        else if (lead)
            result.cost_micro[node] = costs_.c_L();
        else if (member)
            result.cost_micro[node] = costs_.c_M();
        else
            result.cost_micro[node] = costs_.c_K();
    }
    return result;
}

FastRoundRoles fast_round_roles(std::uint64_t round, const Seed& seed,
                                const StakeLedger& ledger,
                                const std::vector<Strategy>& strategies,
                                const SortitionParams& params) {
    const std::uint32_t n = static_cast<std::uint32_t>(ledger.node_count());
    FastRoundRoles out;
    out.leader_weight.assign(n, 0);
    out.member_weight.assign(n, 0);

    const std::uint32_t steps[4] = {1, 2, 3, kFinalStep};
    for (NodeId node = 0; node < n; ++node) {
        if (strategies[node] != Strategy::Cooperate) continue;
        const std::int64_t stake = ledger.micro[node];
        if (const auto proof = run_sortition(node, stake, round, 0, seed, params,
                                             ledger.total_micro)) {
            out.leader_weight[node] = static_cast<std::uint32_t>(proof->weight);
            ++out.n_leaders;
        }
        std::uint32_t mw = 0;
        for (std::uint32_t s : steps) {
            if (const auto proof = run_sortition(node, stake, round, s, seed, params,
                                                 ledger.total_micro))
                mw += static_cast<std::uint32_t>(proof->weight);
        }
        if (mw > 0) {
            out.member_weight[node] = mw;
            ++out.n_members;
        }
    }
    return out;
}

} // namespace bastar
