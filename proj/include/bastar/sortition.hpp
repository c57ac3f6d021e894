#pragma once

#include <cstdint>
#include <optional>

#include "bastar/common.hpp"
#include "bastar/hash.hpp"

namespace bastar {

// Step indices within a round: 0 selects proposers, 1..N are voting steps
// (1 and 2 belong to the reduction phase), kFinalStep is the final committee.
inline constexpr std::uint32_t kFinalStep = 0xffffu;

struct Seed {
    Hash256 value;
    std::uint64_t round_of_origin = 0;
};

struct SortitionParams {
    double tau_proposer = 26.0;  // expected selected stake-weight for leaders
    double tau_step = 1000.0;    // per voting step (S_STEP)
    double tau_final = 10000.0;  // final committee (S_FINAL)
    std::uint64_t refresh_interval = 1000; // seed re-key period R, in rounds
    std::uint32_t proposer_cap = 70;       // proposals retained per round

    void validate() const {
        if (tau_proposer <= 0 || tau_step <= 0 || tau_final <= 0)
            throw ConfigError("sortition: tau values must be positive");
        if (tau_final < tau_step)
            throw ConfigError("sortition: tau_final must be >= tau_step");
        if (refresh_interval == 0)
            throw ConfigError("sortition: refresh interval must be positive");
    }

    double tau_for_step(std::uint32_t step) const {
        if (step == 0) return tau_proposer;
        if (step == kFinalStep) return tau_final;
        return tau_step;
    }
};

struct SortitionProof {
    NodeId node = 0;
    std::uint64_t round = 0;
    std::uint32_t step = 0;
    std::uint64_t weight = 0;   // number of selected whole-Algo sub-units
    std::uint64_t digest = 0;   // keyed hash of (seed, node, round, step): the
                                // simulated VRF output that binds the proof to
                                // its seed. Replays under another seed fail on
                                // the digest with overwhelming probability.
    Hash256 priority;           // defined for proposer proofs (step 0)
};

Seed genesis_seed(std::uint64_t master_seed, std::uint64_t replication);

// Seed evolution: value_r = H(value_{r-1} || r); every `refresh_interval`
// rounds the derivation mixes a fixed re-keying constant.
Seed next_seed(const Seed& prev, std::uint64_t round, std::uint64_t refresh_interval);

// Stake-proportional selection: each whole-Algo sub-unit of the stake is a
// Bernoulli trial with p = tau / S_N (whole Algos). The trial block is drawn
// as an exact Binomial sample from a keyed hash of (seed, node, round, step,
// chunk), so the outcome is deterministic, privately computable and replayable.
std::optional<SortitionProof> run_sortition(NodeId node, std::int64_t stake_micro,
                                            std::uint64_t round, std::uint32_t step,
                                            const Seed& seed, const SortitionParams& params,
                                            std::int64_t total_stake_micro);

// True iff re-running the keyed-hash trials for the claimed node/step yields
// weight >= proof.weight and reproduces the claimed priority.
bool verify_proof(const SortitionProof& proof, const Seed& seed, std::int64_t stake_micro,
                  const SortitionParams& params, std::int64_t total_stake_micro);

// Exposed for the oracle tests: quantile of Binomial(n, p) at u in [0,1).
std::uint64_t binomial_quantile(double u, std::uint64_t n, double p);

} // namespace bastar
