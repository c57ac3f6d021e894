#include "bastar/stake.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace bastar {

void StakeLedger::recompute_total() {
    total_micro = 0;
    for (std::int64_t m : micro) total_micro += m;
}

void StakeLedger::check() const {
    std::int64_t sum = 0;
    for (std::int64_t m : micro) {
        if (m < 0) throw SimError("stake ledger holds a negative balance");
        sum += m;
    }
    if (sum != total_micro) throw SimError("stake ledger total out of sync");
}

void StakeDistributionSpec::validate() const {
    if (node_count == 0) throw ConfigError("stake spec: node_count must be positive");
    if (kind == Kind::Uniform) {
        if (lo < 1.0) throw ConfigError("stake spec: uniform lo must be >= 1 Algo");
        if (hi <= lo) throw ConfigError("stake spec: uniform hi must exceed lo");
    } else {
        if (stddev <= 0.0) throw ConfigError("stake spec: normal stddev must be positive");
        if (mean < 1.0) throw ConfigError("stake spec: normal mean must be >= 1 Algo");
    }
}

StakeLedger generate_stakes(const StakeDistributionSpec& spec, std::uint64_t rng_seed) {
    spec.validate();
    Rng rng(rng_seed);
    StakeLedger ledger;
    ledger.micro.resize(spec.node_count);
    if (spec.kind == StakeDistributionSpec::Kind::Uniform) {
        // Integer-uniform over the micro-Algo range [lo, hi], inclusive.
        const std::int64_t lo = static_cast<std::int64_t>(spec.lo * kMicroPerAlgo);
        const std::int64_t hi = static_cast<std::int64_t>(spec.hi * kMicroPerAlgo);
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        for (auto& m : ledger.micro) m = lo + static_cast<std::int64_t>(rng.below(span));
    } else {
        // Normal samples are truncated below at 1 Algo; the paper's specs
        // admit negative tail samples otherwise.
        for (auto& m : ledger.micro) {
            const double algos = spec.mean + spec.stddev * rng.normal();
            const std::int64_t v = static_cast<std::int64_t>(std::llround(algos * kMicroPerAlgo));
            m = std::max<std::int64_t>(v, kMicroPerAlgo);
        }
    }
    ledger.recompute_total();
    return ledger;
}

TransactionRoundResult apply_transaction_round(StakeLedger& ledger, Rng& rng,
                                               std::uint32_t draws) {
    if (ledger.node_count() == 0) throw SimError("transaction round on an empty ledger");

    // Selection is proportional to start-of-round stake; deltas apply
    // sequentially with the zero-floor rule checked against live balances.
    std::vector<std::int64_t> prefix(ledger.node_count());
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < ledger.micro.size(); ++i) {
        acc += ledger.micro[i];
        prefix[i] = acc;
    }

    TransactionRoundResult out;
    out.events.reserve(draws);
    for (std::uint32_t d = 0; d < draws; ++d) {
        NodeId node = 0;
        if (acc > 0) {
            const std::int64_t pick = static_cast<std::int64_t>(
                rng.below(static_cast<std::uint64_t>(acc)));
            node = static_cast<NodeId>(
                std::upper_bound(prefix.begin(), prefix.end(), pick) - prefix.begin());
        } else {
            node = static_cast<NodeId>(rng.below(ledger.node_count()));
        }
        // Uniform on {-4,...,-1, 1,...,4}.
        const std::uint64_t r = rng.below(8);
        const std::int64_t delta_algos = (r < 4) ? -static_cast<std::int64_t>(4 - r)
                                                 : static_cast<std::int64_t>(r - 3);
        TransactionEvent ev;
        ev.node = node;
        ev.delta_micro = delta_algos * kMicroPerAlgo;
        ev.applied = ledger.micro[node] + ev.delta_micro >= 0;
        if (ev.applied) {
            ledger.micro[node] += ev.delta_micro;
            ledger.total_micro += ev.delta_micro;
            out.applied_delta_micro += ev.delta_micro;
        }
        out.events.push_back(ev);
    }
    return out;
}

StakeSummary stake_summary(const StakeLedger& ledger, const std::vector<Role>& roles,
                           const std::vector<NodeId>* strong_others,
                           std::int64_t k_floor_micro) {
    if (roles.size() != ledger.node_count())
        throw RoleAssignmentError("role assignment size does not match the ledger");

    StakeSummary s;
    constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();
    std::int64_t min_l = kNone, min_m = kNone, min_k = kNone;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        const std::int64_t st = ledger.micro[i];
        switch (roles[i]) {
        case Role::Leader:
            s.S_L += st;
            min_l = std::min(min_l, st);
            break;
        case Role::Member:
            s.S_M += st;
            min_m = std::min(min_m, st);
            break;
        case Role::Other:
            s.S_K += st;
            break;
        }
    }
    if (min_l == kNone) throw RoleAssignmentError("no leaders in role assignment");
    if (min_m == kNone) throw RoleAssignmentError("no committee members in role assignment");

    if (strong_others) {
        for (NodeId n : *strong_others) {
            if (roles[n] != Role::Other) continue;
            if (ledger.micro[n] < k_floor_micro) continue;
            min_k = std::min(min_k, ledger.micro[n]);
        }
    } else {
        for (std::size_t i = 0; i < roles.size(); ++i) {
            if (roles[i] != Role::Other) continue;
            if (ledger.micro[i] < k_floor_micro) continue;
            min_k = std::min(min_k, ledger.micro[i]);
        }
    }
    s.s_l_min = min_l;
    s.s_m_min = min_m;
    s.s_k_min = (min_k == kNone) ? 0 : min_k;
    return s;
}

void write_ledger_csv(std::ostream& os, const StakeLedger& ledger) {
    os << "node_id,stake_microalgos\n";
    for (std::size_t i = 0; i < ledger.micro.size(); ++i) {
        os << i << ',' << ledger.micro[i] << '\n';
    }
}

} // namespace bastar
