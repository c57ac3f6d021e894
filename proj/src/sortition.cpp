#include "bastar/sortition.hpp"

#include <algorithm>
#include <cmath>

namespace bastar {

namespace {

constexpr HashKey kSeedDomain{0x5eed5eed5eed5eedULL, 0x1111111111111111ULL};
constexpr HashKey kGenesisDomain{0x67656e6573697321ULL, 0x2222222222222222ULL};
constexpr std::uint64_t kRefreshConst = 0x5265667265736821ULL;

HashKey sortition_key(const Seed& seed) { return seed.value.as_key(); }

double selection_probability(std::uint32_t step, const SortitionParams& params,
                             std::int64_t total_stake_micro) {
    const double total_algos =
        static_cast<double>(total_stake_micro) / static_cast<double>(kMicroPerAlgo);
    if (total_algos <= 0.0) return 0.0;
    return std::min(1.0, params.tau_for_step(step) / total_algos);
}

std::uint64_t proof_digest(const HashKey& key, NodeId node, std::uint64_t round,
                           std::uint32_t step, std::uint32_t chunk_idx) {
    HashMsg msg;
    msg.u32(node).u64(round).u32(step).u32(chunk_idx);
    return hash64(key, msg);
}

std::uint64_t draw_weight(const HashKey& key, NodeId node, std::uint64_t round,
                          std::uint32_t step, std::uint64_t units, double p) {
    if (units == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return units;
    // Sub-units are processed in chunks whose expected success count stays
    // small, so the quantile loop is short and (1-p)^m never underflows.
    // Summing independent Binomials over the chunks keeps the distribution
    // exactly Binomial(units, p).
    const std::uint64_t chunk = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(128.0 / p));
    std::uint64_t weight = 0;
    std::uint64_t done = 0;
    std::uint32_t chunk_idx = 0;
    while (done < units) {
        const std::uint64_t m = std::min(chunk, units - done);
        const std::uint64_t h = proof_digest(key, node, round, step, chunk_idx);
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        weight += binomial_quantile(u, m, p);
        done += m;
        ++chunk_idx;
    }
    return weight;
}

Hash256 priority_for(const HashKey& key, NodeId node, std::uint64_t round,
                     std::uint32_t step, std::uint64_t weight) {
    // min over the selected sub-units of H(proof || sub-unit index);
    // numerically smallest hash wins.
    Hash256 best{};
    best.w.fill(~0ULL);
    for (std::uint64_t j = 1; j <= weight; ++j) {
        HashMsg msg;
        msg.u32(node).u64(round).u32(step).u64(j).u32(0x70726900u); // "pri"
        const Hash256 h = hash256(key, msg);
        if (h < best) best = h;
    }
    return best;
}

} // namespace

Seed genesis_seed(std::uint64_t master_seed, std::uint64_t replication) {
    HashMsg msg;
    msg.u64(master_seed).u64(replication);
    Seed s;
    s.value = hash256(kGenesisDomain, msg);
    s.round_of_origin = 0;
    return s;
}

Seed next_seed(const Seed& prev, std::uint64_t round, std::uint64_t refresh_interval) {
    if (round != prev.round_of_origin + 1)
        throw SequencingError("next_seed: round must follow the previous seed's round");
    HashMsg msg;
    msg.u64(prev.value.w[0]).u64(prev.value.w[1]).u64(prev.value.w[2]).u64(prev.value.w[3]);
    msg.u64(round);
    if (refresh_interval > 0 && round % refresh_interval == 0) msg.u64(kRefreshConst);
    Seed s;
    s.value = hash256(kSeedDomain, msg);
    s.round_of_origin = round;
    return s;
}

std::uint64_t binomial_quantile(double u, std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    double q = std::exp(static_cast<double>(n) * std::log1p(-p));
    double cdf = q;
    std::uint64_t k = 0;
    const double odds = p / (1.0 - p);
    while (u >= cdf && k < n) {
        ++k;
        q *= odds * static_cast<double>(n - k + 1) / static_cast<double>(k);
        cdf += q;
        if (q == 0.0) break; // numeric tail exhausted
    }
    return k;
}

std::optional<SortitionProof> run_sortition(NodeId node, std::int64_t stake_micro,
                                            std::uint64_t round, std::uint32_t step,
                                            const Seed& seed, const SortitionParams& params,
                                            std::int64_t total_stake_micro) {
    if (stake_micro < 0) throw SimError("run_sortition: negative stake");
    const std::uint64_t units = static_cast<std::uint64_t>(stake_micro / kMicroPerAlgo);
    const double p = selection_probability(step, params, total_stake_micro);
    const HashKey key = sortition_key(seed);
    const std::uint64_t w = draw_weight(key, node, round, step, units, p);
    if (w == 0) return std::nullopt;
    SortitionProof proof;
    proof.node = node;
    proof.round = round;
    proof.step = step;
    proof.weight = w;
    proof.digest = proof_digest(key, node, round, step, 0);
    if (step == 0) proof.priority = priority_for(key, node, round, step, w);
    return proof;
}

bool verify_proof(const SortitionProof& proof, const Seed& seed, std::int64_t stake_micro,
                  const SortitionParams& params, std::int64_t total_stake_micro) {
    if (proof.weight == 0 || stake_micro < 0) return false;
    const std::uint64_t units = static_cast<std::uint64_t>(stake_micro / kMicroPerAlgo);
    const double p = selection_probability(proof.step, params, total_stake_micro);
    const HashKey key = sortition_key(seed);
    if (proof.digest != proof_digest(key, proof.node, proof.round, proof.step, 0))
        return false;
    const std::uint64_t w = draw_weight(key, proof.node, proof.round, proof.step, units, p);
    if (w < proof.weight) return false;
    if (proof.step == 0) {
        const Hash256 expect = priority_for(key, proof.node, proof.round, proof.step, proof.weight);
        if (expect != proof.priority) return false;
    }
    return true;
}

} // namespace bastar
