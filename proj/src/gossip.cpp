#include "bastar/gossip.hpp"

#include <algorithm>
#include <numeric>

#include "bastar/rng.hpp"

namespace bastar {

PeerGraph build_topology(std::uint32_t node_count, std::uint32_t out_degree,
                         std::uint64_t rng_seed) {
    if (out_degree >= node_count)
        throw ConfigError("topology: out_degree must be smaller than node_count");
    if (out_degree == 0) throw ConfigError("topology: out_degree must be positive");

    PeerGraph g;
    g.node_count = node_count;
    g.out_degree = out_degree;
    g.peers.resize(std::size_t(node_count) * out_degree);

    Rng rng(rng_seed);
    std::vector<NodeId> picked(out_degree);
    for (NodeId n = 0; n < node_count; ++n) {
        std::uint32_t have = 0;
        while (have < out_degree) {
            const NodeId cand = static_cast<NodeId>(rng.below(node_count));
            if (cand == n) continue;
            bool dup = false;
            for (std::uint32_t i = 0; i < have; ++i)
                if (picked[i] == cand) { dup = true; break; }
            if (dup) continue;
            picked[have++] = cand;
        }
        std::copy(picked.begin(), picked.end(), g.peers.begin() + std::size_t(n) * out_degree);
    }

    // Undirected link lists (deduplicated) in CSR form.
    std::vector<std::vector<NodeId>> nbrs(node_count);
    for (NodeId n = 0; n < node_count; ++n) {
        for (const NodeId* it = g.out_begin(n); it != g.out_end(n); ++it) {
            nbrs[n].push_back(*it);
            nbrs[*it].push_back(n);
        }
    }
    g.link_off.resize(node_count + 1, 0);
    for (NodeId n = 0; n < node_count; ++n) {
        auto& v = nbrs[n];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        g.link_off[n + 1] = g.link_off[n] + static_cast<std::uint32_t>(v.size());
    }
    g.link_to.resize(g.link_off[node_count]);
    for (NodeId n = 0; n < node_count; ++n)
        std::copy(nbrs[n].begin(), nbrs[n].end(), g.link_to.begin() + g.link_off[n]);
    return g;
}

void FloodEngine::reset(std::uint32_t node_count, std::uint32_t max_delay_ms) {
    arrival_.assign(node_count, 0);
    stamp_.assign(node_count, 0);
    cur_stamp_ = 0;
    std::uint32_t ring = 1;
    while (ring < max_delay_ms + 2) ring <<= 1;
    ring_.assign(ring, {});
    ring_mask_ = ring - 1;
    reached_.clear();
}

std::uint32_t FloodEngine::run(const PeerGraph& graph, NodeId origin,
                               const std::uint8_t* relayer, const std::uint8_t* receiver,
                               const DelayModel& delay, std::uint32_t deadline_ms,
                               std::uint64_t delay_key, std::uint64_t salt,
                               std::vector<NodeId>* relay_log) {
    ++cur_stamp_;
    reached_.clear();
    if (receiver && !receiver[origin]) return 0;

    // All entries in a dial slot share the same timestamp because the ring
    // spans more than the maximum edge delay, so storing the node suffices.
    std::uint64_t pending = 0;
    auto push = [&](NodeId node, std::uint32_t t) {
        ring_[t & ring_mask_].push_back(node);
        ++pending;
    };

    // The origin "arrives" at time 0 and always forwards its own message.
    stamp_[origin] = cur_stamp_;
    arrival_[origin] = 0;
    reached_.push_back(origin);
    auto forward = [&](NodeId from, std::uint32_t now) {
        if (relay_log) relay_log->push_back(from);
        const NodeId* it = graph.link_begin(from);
        const NodeId* end = graph.link_end(from);
        std::uint64_t edge = graph.link_off[from];
        for (; it != end; ++it, ++edge) {
            const NodeId to = *it;
            if (stamp_[to] == cur_stamp_) continue; // already delivered
            if (receiver && !receiver[to]) continue;
            const std::uint32_t t = now + delay.draw(delay_key, salt, edge);
            if (t > deadline_ms) continue;
            push(to, t);
        }
    };
    forward(origin, 0);

    std::uint32_t now = 0;
    while (pending > 0) {
        auto& bucket = ring_[now & ring_mask_];
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            const NodeId node = static_cast<NodeId>(bucket[i]);
            --pending;
            if (stamp_[node] == cur_stamp_) continue; // duplicate suppressed
            stamp_[node] = cur_stamp_;
            arrival_[node] = now;
            reached_.push_back(node);
            if (relayer[node]) forward(node, now);
        }
        bucket.clear();
        ++now;
    }
    return static_cast<std::uint32_t>(reached_.size());
}

std::vector<std::optional<std::uint32_t>> propagate(
    const PeerGraph& graph, NodeId origin, const std::vector<std::uint8_t>& relayer,
    const DelayModel& delay, std::uint32_t deadline_ms, std::uint64_t delay_key,
    std::uint64_t salt, const std::vector<std::uint8_t>* receiver,
    std::vector<NodeId>* relay_log) {
    if (deadline_ms == 0) throw ConfigError("propagate: deadline must be positive");
    delay.validate();
    FloodEngine engine;
    engine.reset(graph.node_count, delay.max_ms());
    engine.run(graph, origin, relayer.data(), receiver ? receiver->data() : nullptr, delay,
               deadline_ms, delay_key, salt, relay_log);
    std::vector<std::optional<std::uint32_t>> out(graph.node_count);
    for (NodeId n = 0; n < graph.node_count; ++n) {
        if (engine.reached(n)) out[n] = engine.arrival_ms(n);
    }
    return out;
}

SynchronyReport classify_synchrony(const std::vector<ReachSample>& reach,
                                   const std::vector<std::uint8_t>& honest_mask,
                                   std::uint64_t round, double threshold,
                                   bool extract_strong_set) {
    SynchronyReport report;
    report.round = round;

    std::uint32_t honest_total = 0;
    for (std::uint8_t h : honest_mask) honest_total += h;
    if (honest_total == 0) throw ConfigError("classify_synchrony: honest set is empty");
    if (reach.empty()) {
        report.classification = Synchrony::Async;
        return report;
    }

    // A sample with an empty reach mask records a node that was supposed to
    // gossip but sent nothing (a defector): it counts as a failing sender.
    const std::uint32_t n = static_cast<std::uint32_t>(honest_mask.size());
    auto evaluate = [&](const std::vector<std::uint8_t>& active, std::uint32_t active_honest,
                        double* mean_fraction) {
        std::uint32_t good_senders = 0, counted_senders = 0;
        double fraction_sum = 0.0;
        for (const auto& sample : reach) {
            if (!honest_mask[sample.sender] || !active[sample.sender]) continue;
            ++counted_senders;
            std::uint32_t hit = 0;
            if (!sample.reached.empty()) {
                for (std::uint32_t i = 0; i < n; ++i)
                    if (honest_mask[i] && active[i] && sample.reached[i]) ++hit;
            }
            const double frac =
                active_honest > 0 ? static_cast<double>(hit) / active_honest : 0.0;
            fraction_sum += frac;
            if (frac >= threshold) ++good_senders;
        }
        if (mean_fraction)
            *mean_fraction = counted_senders ? fraction_sum / counted_senders : 0.0;
        if (counted_senders == 0) return false;
        return static_cast<double>(good_senders) / counted_senders >= threshold;
    };

    std::vector<std::uint8_t> active(n, 1);
    const bool strong = evaluate(active, honest_total, &report.mean_reach_fraction);
    report.classification = strong ? Synchrony::Strong : Synchrony::Async;
    if (!extract_strong_set) {
        if (strong)
            for (std::uint32_t i = 0; i < n; ++i)
                if (honest_mask[i]) report.strong_set.push_back(i);
        return report;
    }

    // Greedy strong-set extraction: repeatedly drop the worst-connected node
    // until the condition holds among the remainder. A node's connectivity is
    // how well it receives plus, for senders, how far its own messages went;
    // silent senders score zero on the send side.
    std::vector<std::uint32_t> recv_score(n, 0);
    std::vector<double> send_frac(n, -1.0); // -1 marks non-senders
    std::uint32_t real_senders = 0;
    for (const auto& sample : reach) {
        if (!honest_mask[sample.sender]) continue;
        std::uint32_t hit = 0;
        if (!sample.reached.empty()) {
            ++real_senders;
            for (std::uint32_t i = 0; i < n; ++i) {
                if (honest_mask[i] && sample.reached[i]) {
                    ++recv_score[i];
                    ++hit;
                }
            }
        }
        send_frac[sample.sender] =
            honest_total > 0 ? static_cast<double>(hit) / honest_total : 0.0;
    }

    std::uint32_t active_honest = honest_total;
    for (std::uint32_t i = 0; i < n; ++i) active[i] = honest_mask[i];
    while (active_honest > 0) {
        if (evaluate(active, active_honest, nullptr)) break;
        std::uint32_t worst = n;
        double worst_key = 1e18;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (!active[i] || !honest_mask[i]) continue;
            const double recv_frac =
                real_senders > 0 ? static_cast<double>(recv_score[i]) / real_senders : 0.0;
            const double key =
                recv_frac + (send_frac[i] >= 0.0 ? send_frac[i] : recv_frac);
            if (key < worst_key) {
                worst_key = key;
                worst = i;
            }
        }
        if (worst == n) break;
        active[worst] = 0;
        --active_honest;
    }
    for (std::uint32_t i = 0; i < n; ++i)
        if (active[i] && honest_mask[i]) report.strong_set.push_back(i);
    return report;
}

void relabel_weak_synchrony(std::vector<Synchrony>& sequence, std::uint32_t weak_window) {
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] != Synchrony::Async) continue;
        const std::size_t limit = std::min(sequence.size(), i + 1 + weak_window);
        for (std::size_t j = i + 1; j < limit; ++j) {
            if (sequence[j] == Synchrony::Strong) {
                sequence[i] = Synchrony::Weak;
                break;
            }
        }
    }
}

} // namespace bastar
