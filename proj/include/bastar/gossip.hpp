#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bastar/common.hpp"
#include "bastar/hash.hpp"
#include "bastar/sortition.hpp"

namespace bastar {

// Each node opens `out_degree` connections to uniformly drawn distinct peers.
// Connections are TCP-like bidirectional links: gossip flows both ways, so a
// node also serves the peers that picked it. (A strictly one-way flood would
// strand the ~e^-degree fraction of nodes nobody picked.)
struct PeerGraph {
    std::uint32_t node_count = 0;
    std::uint32_t out_degree = 0;
    std::vector<NodeId> peers;          // chosen peers, node_count x out_degree
    std::vector<std::uint32_t> link_off; // CSR over the undirected link lists
    std::vector<NodeId> link_to;

    const NodeId* out_begin(NodeId n) const { return peers.data() + std::size_t(n) * out_degree; }
    const NodeId* out_end(NodeId n) const { return out_begin(n) + out_degree; }
    const NodeId* link_begin(NodeId n) const { return link_to.data() + link_off[n]; }
    const NodeId* link_end(NodeId n) const { return link_to.data() + link_off[n + 1]; }
};

PeerGraph build_topology(std::uint32_t node_count, std::uint32_t out_degree,
                         std::uint64_t rng_seed);

struct DelayModel {
    enum class Kind : std::uint8_t { Constant, UniformRange };
    Kind kind = Kind::UniformRange;
    std::uint32_t lo_ms = 50;
    std::uint32_t hi_ms = 500;

    static DelayModel constant(std::uint32_t d) { return {Kind::Constant, d, d}; }
    static DelayModel uniform(std::uint32_t lo, std::uint32_t hi) {
        return {Kind::UniformRange, lo, hi};
    }

    void validate() const {
        if (lo_ms > hi_ms) throw ConfigError("delay model: lo must not exceed hi");
    }

    std::uint32_t max_ms() const { return hi_ms; }

    // Per-(message, edge) draw, deterministic in (key, salt, edge).
    std::uint32_t draw(std::uint64_t key, std::uint64_t salt, std::uint64_t edge_index) const {
        if (kind == Kind::Constant || lo_ms == hi_ms) return lo_ms;
        const std::uint64_t span = hi_ms - lo_ms + 1;
        const std::uint64_t h = mix64(key ^ mix64(salt ^ (edge_index * 0xd1342543de82ef95ULL)));
        return lo_ms + static_cast<std::uint32_t>(
                           (static_cast<__uint128_t>(h) * span) >> 64);
    }
};

inline constexpr std::uint32_t kUnreached = 0xffffffffu;

// The four gossip message kinds. Votes and block proposals carry the sender's
// sortition proof; credentials carry the proposer's proof and ride along with
// proposals in this engine.
struct NetMessage {
    enum class Kind : std::uint8_t { Transaction, Vote, BlockProposal, Credential };
    Kind kind = Kind::Transaction;
    NodeId origin = 0;
    std::uint32_t emit_ms = 0;
    std::optional<SortitionProof> proof;
    Hash256 value; // voted or proposed block hash

    // Votes and proposals are relayable only with a proof that verifies under
    // the round's seed.
    bool valid(const Seed& seed, std::int64_t stake_micro, const SortitionParams& params,
               std::int64_t total_stake_micro) const {
        if (kind == Kind::Transaction) return true;
        if (!proof || proof->node != origin) return false;
        return verify_proof(*proof, seed, stake_micro, params, total_stake_micro);
    }
};

// Event-driven flood over a fixed topology. A node with the message that
// satisfies the relayer predicate forwards once to its out-peers; others
// receive but never forward. Buffers are reused across floods, making a
// single engine instance cheap to drive for thousands of messages per round.
class FloodEngine {
public:
    void reset(std::uint32_t node_count, std::uint32_t max_delay_ms);

    // `relayer` / `receiver` are byte masks (0/1) over nodes; a null receiver
    // mask means everyone can receive. Returns the number of reached nodes.
    std::uint32_t run(const PeerGraph& graph, NodeId origin, const std::uint8_t* relayer,
                      const std::uint8_t* receiver, const DelayModel& delay,
                      std::uint32_t deadline_ms, std::uint64_t delay_key, std::uint64_t salt,
                      std::vector<NodeId>* relay_log = nullptr);

    std::uint32_t arrival_ms(NodeId n) const {
        return stamp_[n] == cur_stamp_ ? arrival_[n] : kUnreached;
    }
    bool reached(NodeId n) const { return stamp_[n] == cur_stamp_; }
    const std::vector<NodeId>& reached_nodes() const { return reached_; }

private:
    std::vector<std::uint32_t> arrival_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::vector<std::uint32_t>> ring_; // dial buckets: packed (node)
    std::vector<NodeId> reached_;
    std::uint32_t cur_stamp_ = 0;
    std::uint32_t ring_mask_ = 0;
};

// Single-message convenience wrapper matching the module-level operation.
std::vector<std::optional<std::uint32_t>> propagate(
    const PeerGraph& graph, NodeId origin, const std::vector<std::uint8_t>& relayer,
    const DelayModel& delay, std::uint32_t deadline_ms, std::uint64_t delay_key,
    std::uint64_t salt, const std::vector<std::uint8_t>* receiver = nullptr,
    std::vector<NodeId>* relay_log = nullptr);

enum class Synchrony : std::uint8_t { Strong, Weak, Async };

inline const char* synchrony_name(Synchrony s) {
    switch (s) {
    case Synchrony::Strong: return "strong";
    case Synchrony::Weak: return "weak";
    case Synchrony::Async: return "async";
    }
    return "?";
}

struct ReachSample {
    NodeId sender = 0;
    std::vector<std::uint8_t> reached; // mask over all nodes
};

struct SynchronyReport {
    std::uint64_t round = 0;
    Synchrony classification = Synchrony::Async;
    double mean_reach_fraction = 0.0;
    std::vector<NodeId> strong_set;
};

// Strong iff >= `threshold` of honest senders reach >= `threshold` of honest
// nodes within the deadline. Weak is a cross-round notion (a bounded async
// window followed by a strong round) and is relabeled by the caller; this
// classifier returns Strong or Async. strong_set is extracted greedily by
// dropping worst-connected nodes until the 95/95 condition holds among the
// remainder.
SynchronyReport classify_synchrony(const std::vector<ReachSample>& reach,
                                   const std::vector<std::uint8_t>& honest_mask,
                                   std::uint64_t round, double threshold = 0.95,
                                   bool extract_strong_set = true);

// Relabels Async rounds as Weak when a Strong round follows within
// `weak_window` rounds.
void relabel_weak_synchrony(std::vector<Synchrony>& sequence, std::uint32_t weak_window);

} // namespace bastar
