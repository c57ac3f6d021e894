#include "bastar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace bastar {

namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint32_t domain, std::uint64_t index) {
    HashMsg msg;
    msg.u64(master).u32(domain).u64(index);
    return hash64(HashKey{0x646572697665ULL, 0x7365656473ULL}, msg);
}

constexpr std::uint32_t kSeedStakes = 1;
constexpr std::uint32_t kSeedTopology = 2;
constexpr std::uint32_t kSeedBehavior = 3;
constexpr std::uint32_t kSeedTx = 4;
constexpr std::uint32_t kSeedDelay = 5;

struct RoleSets {
    // Reward-bearing stakes: served proposer weight, served committee weight,
    // and the remaining online stake (S_N = S_L + S_M + S_K over the eligible
    // set). A node can hold shares in all three pools.
    std::vector<StakeShare> leaders, members, others;
    std::vector<StakeShare> eligible_full; // whole balances, for foundation sharing
    StakeAggregates agg{};
    std::int64_t eligible_stake = 0;
    std::int64_t online_stake = 0;
    bool has_all_roles = false;
};

// Builds payment-eligible role pools and bound aggregates from the served
// sortition weights. Defecting online stake sits wholly in the Others pool
// under pay-online; U^w removes balances <= w from eligibility and the
// minima; s*_k is the minimum balance among pure Others in the strong set at
// or above the configured floor.
RoleSets build_role_sets(const StakeLedger& ledger, const std::vector<Strategy>& strategies,
                         const std::vector<std::uint32_t>& leader_weight,
                         const std::vector<std::uint32_t>& member_weight,
                         const MechanismConfig& mech, std::int64_t s_k_floor_micro,
                         const std::vector<std::uint8_t>* strong_mask) {
    RoleSets rs;
    const std::int64_t w = mech.reward_floor_w_micro;
    std::int64_t min_l = 0, min_m = 0, min_k = 0;
    bool have_l = false, have_m = false, have_k = false;
    for (NodeId n = 0; n < ledger.node_count(); ++n) {
        const Strategy s = strategies[n];
        if (s == Strategy::Offline) continue;
        const std::int64_t stake = ledger.micro[n];
        rs.online_stake += stake;
        if (stake <= w) continue; // U^w: reward-ineligible
        if (mech.policy == PayPolicy::PayCooperatorsOnly && s != Strategy::Cooperate)
            continue;
        rs.eligible_stake += stake;
        rs.eligible_full.push_back({n, stake});
        const std::int64_t lw = static_cast<std::int64_t>(leader_weight[n]) * kMicroPerAlgo;
        const std::int64_t mw = static_cast<std::int64_t>(member_weight[n]) * kMicroPerAlgo;
        const std::int64_t rem = std::max<std::int64_t>(0, stake - lw - mw);
        if (lw > 0) {
            rs.leaders.push_back({n, lw});
            rs.agg.S_L += lw;
            if (!have_l || lw < min_l) min_l = lw, have_l = true;
        }
        if (mw > 0) {
            rs.members.push_back({n, mw});
            rs.agg.S_M += mw;
            if (!have_m || mw < min_m) min_m = mw, have_m = true;
        }
        if (rem > 0) {
            rs.others.push_back({n, rem});
            rs.agg.S_K += rem;
            if (lw == 0 && mw == 0 && stake >= s_k_floor_micro &&
                (!strong_mask || (*strong_mask)[n])) {
                if (!have_k || stake < min_k) min_k = stake, have_k = true;
            }
        }
    }
    rs.agg.s_l_min = min_l;
    rs.agg.s_m_min = min_m;
    rs.agg.s_k_min = min_k;
    rs.has_all_roles = have_l && have_m && have_k && rs.agg.S_K > 0;
    return rs;
}

struct RewardOutcome {
    bool ok = false;
    double alpha = 0.0, beta = 0.0;
    std::int64_t B_micro = 0;
    std::int64_t paid_micro = 0;
    std::int64_t eligible_stake = 0;
    double rate_micro_per_algo = 0.0; // per-stake-unit rate for the Others class
};

RewardOutcome foundation_round_reward(const RoleSets& rs, const StakeLedger& ledger,
                                      RewardPools& pools, std::uint64_t block_height,
                                      std::vector<Payment>* out_payments = nullptr) {
    RewardOutcome out;
    out.eligible_stake = rs.eligible_stake;
    const std::int64_t request = schedule_reward_micro(schedule_period_for_block(block_height));
    const std::int64_t B = pools.draw_foundation(request);
    auto payments = distribute_foundation(B, rs.eligible_full, ledger.total_micro);
    std::int64_t paid = 0;
    for (const auto& p : payments) paid += p.micro;
    if (out_payments) *out_payments = std::move(payments);
    const __int128 expect =
        (static_cast<__int128>(B) * rs.eligible_stake) / ledger.total_micro;
    if (paid != static_cast<std::int64_t>(expect))
        throw SimError("foundation payments do not match the eligible share exactly");
    out.ok = true;
    out.B_micro = B;
    out.paid_micro = paid;
    out.rate_micro_per_algo = ledger.total_micro > 0
                                  ? static_cast<double>(B) * kMicroPerAlgo /
                                        static_cast<double>(ledger.total_micro)
                                  : 0.0;
    return out;
}

RewardOutcome role_based_round_reward(const RoleSets& rs, const MechanismConfig& mech,
                                      const CostModel& costs, const OptimizerConfig& opt,
                                      RewardPools& pools,
                                      std::vector<Payment>* out_payments = nullptr) {
    RewardOutcome out;
    out.eligible_stake = rs.eligible_stake;
    if (!rs.has_all_roles) return out;
    double alpha = mech.alpha, beta = mech.beta, max_bound = 0.0;
    try {
        if (mech.auto_params) {
            const OptimizerResult r = compute_parameters(rs.agg, costs, opt);
            alpha = r.alpha;
            beta = r.beta;
            max_bound = r.max_bound_algos;
        } else {
            const BoundSet b = deviation_bounds(costs, rs.agg, alpha, beta);
            if (!b.feasible) return out;
            max_bound = b.max_bound();
        }
    } catch (const OptimizationError&) {
        return out;
    } catch (const ConfigError&) {
        return out;
    }
    const double B_algos = max_bound * (1.0 + opt.epsilon);
    RewardParameters params;
    params.alpha = alpha;
    params.beta = beta;
    params.gamma = 1.0 - alpha - beta;
    params.B_micro = static_cast<std::int64_t>(std::llround(B_algos * kMicroPerAlgo));
    if (static_cast<double>(params.B_micro) <= max_bound * kMicroPerAlgo)
        params.B_micro += 1; // preserve the strict inequality after rounding

    pools.draw_foundation(params.B_micro);
    auto payments = distribute_role_based(params, rs.leaders, rs.members, rs.others);
    std::int64_t paid = 0;
    for (const auto& p : payments) paid += p.micro;
    if (paid != params.B_micro)
        throw SimError("role-based payments do not sum to B exactly");
    if (out_payments) *out_payments = std::move(payments);
    out.ok = true;
    out.alpha = alpha;
    out.beta = beta;
    out.B_micro = params.B_micro;
    out.paid_micro = paid;
    out.rate_micro_per_algo = rs.agg.S_K > 0
                                  ? params.gamma * static_cast<double>(params.B_micro) *
                                        kMicroPerAlgo / static_cast<double>(rs.agg.S_K)
                                  : 0.0;
    return out;
}

struct DumpSink {
    std::vector<OutcomeDumpRow>* outcomes = nullptr;
    std::vector<PayoffRecord>* payments = nullptr;
    std::vector<BehaviorDumpRow>* behavior = nullptr;
    std::vector<ReachDumpRow>* reach = nullptr;
    std::string* ledger_csv = nullptr;
};

void run_replication(const ScenarioConfig& cfg, std::uint32_t rep, std::vector<RoundRow>& rows,
                     const DumpSink& sink = {}) {
    StakeLedger ledger = generate_stakes(cfg.stakes, derive_seed(cfg.master_seed, kSeedStakes, rep));
    Rng tx_rng(derive_seed(cfg.master_seed, kSeedTx, rep));
    const std::uint64_t delay_key = derive_seed(cfg.master_seed, kSeedDelay, rep);
    BehaviorEngine behavior(cfg.behavior, cfg.node_count,
                            derive_seed(cfg.master_seed, kSeedBehavior, rep));

    PeerGraph graph;
    std::unique_ptr<RoundEngine> engine;
    if (!cfg.rewards_only) {
        graph = build_topology(cfg.node_count, cfg.out_degree,
                               derive_seed(cfg.master_seed, kSeedTopology, rep));
        engine = std::make_unique<RoundEngine>(&graph, cfg.consensus, cfg.sortition, cfg.delay,
                                               cfg.costs);
    }

    if (sink.ledger_csv) {
        std::ostringstream os;
        write_ledger_csv(os, ledger);
        *sink.ledger_csv = os.str();
    }

    RewardPools pools;
    Seed seed = genesis_seed(cfg.master_seed, rep);
    Hash256 prev_hash = seed.value; // genesis block id
    std::uint64_t block_height = 0;
    std::int64_t cum_paid = 0;
    std::uint32_t pending_tentative = 0;
    double last_rate = 0.0;
    const bool needs_strong_set = cfg.mechanism.kind == MechanismKind::RoleBased &&
                                  cfg.mechanism.auto_params && !cfg.rewards_only;
    std::vector<Synchrony> sync_seq(cfg.rounds, Synchrony::Strong);

    for (std::uint32_t r = 1; r <= cfg.rounds; ++r) {
        seed = next_seed(seed, r, cfg.sortition.refresh_interval);
        const auto& strategies = behavior.assign(ledger, r, cfg.costs, last_rate);
        if (sink.behavior) {
            for (NodeId n = 0; n < cfg.node_count; ++n)
                sink.behavior->push_back({r, n, strategy_letter(strategies[n])});
        }

        RoundRow row;
        row.replication = rep;
        row.round = r;
        row.total_stake_micro = ledger.total_micro;
        std::int64_t defect_stake = 0;
        for (NodeId n = 0; n < cfg.node_count; ++n)
            if (strategies[n] != Strategy::Cooperate) defect_stake += ledger.micro[n];
        row.defector_stake_share =
            ledger.total_micro > 0
                ? static_cast<double>(defect_stake) / static_cast<double>(ledger.total_micro)
                : 0.0;

        std::vector<std::uint32_t> leader_weight, member_weight;
        std::vector<std::uint8_t> strong_mask;
        bool block_added = false;

        if (cfg.rewards_only) {
            // Strong synchrony is assumed: served weights come straight from
            // sortition and the block forms whenever cooperating roles exist.
            FastRoundRoles roles = fast_round_roles(r, seed, ledger, strategies,
                                                    cfg.sortition);
            leader_weight = std::move(roles.leader_weight);
            member_weight = std::move(roles.member_weight);
            block_added = roles.n_leaders + roles.n_members > 0;
            row.agreed_final = block_added;
            row.final_frac = 1.0;
            row.steps_used = 1;
            row.sync = Synchrony::Strong;
        } else {
            RoundResult res = engine->run(r, seed, ledger, strategies, prev_hash,
                                          delay_key, true);
            if (sink.outcomes) {
                for (NodeId n = 0; n < cfg.node_count; ++n) {
                    OutcomeDumpRow dump;
                    dump.round = r;
                    dump.node = n;
                    dump.outcome = outcome_letter(res.outcome[n]);
                    dump.block_hash = res.outcome_value[n] >= 0
                                          ? res.values[res.outcome_value[n]].hex()
                                          : std::string("-");
                    sink.outcomes->push_back(std::move(dump));
                }
            }
            if (sink.reach) {
                std::uint32_t online_count = 0;
                for (NodeId n = 0; n < cfg.node_count; ++n)
                    online_count += strategies[n] != Strategy::Offline;
                for (const ReachSample& sample : res.reach) {
                    std::uint32_t hit = 0;
                    for (NodeId n = 0; n < cfg.node_count; ++n)
                        if (strategies[n] != Strategy::Offline && sample.reached[n]) ++hit;
                    sink.reach->push_back(
                        {r, sample.sender,
                         online_count ? static_cast<double>(hit) / online_count : 0.0});
                }
            }
            leader_weight = std::move(res.leader_weight);
            member_weight = std::move(res.member_weight);
            block_added = res.agreed_status != AgreeStatus::None;
            row.final_frac = static_cast<double>(res.final_count) / cfg.node_count;
            row.tentative_frac = static_cast<double>(res.tentative_count) / cfg.node_count;
            row.noblock_frac = static_cast<double>(res.noblock_count) / cfg.node_count;
            row.steps_used = res.steps_used;

            // Honest-but-selfish nodes all belong to the Definition-2 sender
            // universe; defectors gossip nothing and enter as failing senders.
            std::vector<std::uint8_t> honest(cfg.node_count, 0);
            std::vector<ReachSample> reach = std::move(res.reach);
            for (NodeId n = 0; n < cfg.node_count; ++n) {
                honest[n] = strategies[n] != Strategy::Offline;
                if (honest[n] && strategies[n] != Strategy::Cooperate)
                    reach.push_back(ReachSample{n, {}});
            }
            if (!reach.empty()) {
                const SynchronyReport sr = classify_synchrony(reach, honest, r,
                                                              cfg.synchrony_threshold,
                                                              needs_strong_set);
                row.sync = sr.classification;
                if (needs_strong_set) {
                    strong_mask.assign(cfg.node_count, 0);
                    for (NodeId n : sr.strong_set) strong_mask[n] = 1;
                }
            } else {
                row.sync = Synchrony::Async;
            }
            if (block_added) {
                prev_hash = res.agreed_hash;
                ++block_height;
                row.agreed_final = res.agreed_status == AgreeStatus::Final;
                if (row.agreed_final) {
                    row.tentative_upgraded = pending_tentative;
                    pending_tentative = 0;
                } else {
                    ++pending_tentative;
                }
            }
        }
        sync_seq[r - 1] = row.sync;

        std::vector<Payment> round_payments;
        if (block_added) {
            const RoleSets rs = build_role_sets(ledger, strategies, leader_weight,
                                                member_weight, cfg.mechanism,
                                                cfg.s_k_floor_micro,
                                                strong_mask.empty() ? nullptr : &strong_mask);
            RewardOutcome reward;
            std::vector<Payment>* collect = sink.payments ? &round_payments : nullptr;
            if (cfg.mechanism.kind == MechanismKind::Foundation) {
                reward = foundation_round_reward(rs, ledger, pools, block_height, collect);
            } else {
                reward = role_based_round_reward(rs, cfg.mechanism, cfg.costs, cfg.optimizer,
                                                 pools, collect);
            }
            pools.add_fees(cfg.mechanism.fee_per_round_micro);
            row.reward_ok = reward.ok;
            row.alpha = reward.alpha;
            row.beta = reward.beta;
            row.B_micro = reward.B_micro;
            row.paid_micro = reward.paid_micro;
            row.eligible_stake_micro = reward.eligible_stake;
            cum_paid += reward.paid_micro;
            if (reward.ok) last_rate = reward.rate_micro_per_algo;
        } else {
            row.reward_ok = true; // nothing to disburse without a block
        }
        row.block_added = block_added;
        row.cum_paid_micro = cum_paid;

        if (sink.payments) {
            std::vector<std::int64_t> reward_of(cfg.node_count, 0);
            for (const Payment& p : round_payments) reward_of[p.node] += p.micro;
            for (NodeId n = 0; n < cfg.node_count; ++n) {
                const bool lead = leader_weight[n] > 0;
                const bool member = member_weight[n] > 0;
                const Role role = lead ? Role::Leader : member ? Role::Member : Role::Other;
                std::int64_t cost = role_cost(cfg.costs, role, strategies[n]);
                if (strategies[n] == Strategy::Cooperate && lead && member)
                    cost = cfg.costs.c_dual();
                sink.payments->push_back(
                    compute_payoff(n, r, role, strategies[n], reward_of[n], cost));
            }
        }

        if (cfg.tx_per_round > 0) apply_transaction_round(ledger, tx_rng, cfg.tx_per_round);
        rows[r - 1] = row;
    }

    relabel_weak_synchrony(sync_seq, cfg.weak_window);
    for (std::uint32_t r = 0; r < cfg.rounds; ++r) rows[r].sync = sync_seq[r];
}

template <typename Fn>
void parallel_replications(std::uint32_t replications, std::uint32_t threads, Fn&& fn) {
    std::uint32_t n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min(n_threads, replications);
    if (n_threads <= 1) {
        for (std::uint32_t rep = 0; rep < replications; ++rep) fn(rep);
        return;
    }
    std::atomic<std::uint32_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::uint32_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::uint32_t rep = next.fetch_add(1);
                if (rep >= replications) return;
                try {
                    fn(rep);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

void ScenarioConfig::validate() const {
    if (node_count == 0) throw ConfigError("scenario: node_count must be positive");
    if (rounds == 0) throw ConfigError("scenario: rounds must be positive");
    if (replications == 0) throw ConfigError("scenario: replications must be positive");
    stakes.validate();
    if (!rewards_only && out_degree >= node_count)
        throw ConfigError("scenario: out_degree must be smaller than node_count");
    delay.validate();
    consensus.validate();
    sortition.validate();
    costs.validate();
    optimizer.validate();
    behavior.validate();
    if (!(synchrony_threshold > 0.0 && synchrony_threshold <= 1.0))
        throw ConfigError("scenario: synchrony threshold must lie in (0, 1]");
    if (mechanism.kind == MechanismKind::RoleBased && !mechanism.auto_params) {
        if (!(mechanism.alpha > 0.0 && mechanism.beta > 0.0 &&
              mechanism.alpha + mechanism.beta < 1.0))
            throw ConfigError("scenario: fixed (alpha, beta) must leave gamma positive");
    }
}

RunReport run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    RunReport report;
    report.node_count = cfg.node_count;
    report.rounds = cfg.rounds;
    report.replications = cfg.replications;
    report.rows.resize(std::size_t(cfg.replications) * cfg.rounds);
    std::mutex abort_mutex;
    parallel_replications(cfg.replications, cfg.threads, [&](std::uint32_t rep) {
        std::vector<RoundRow> rows(cfg.rounds);
        DumpSink sink;
        if (rep == 0) { // dump surfaces cover the first replication
            if (cfg.dump_outcomes) sink.outcomes = &report.outcome_dump;
            if (cfg.dump_payments) sink.payments = &report.payment_dump;
            if (cfg.dump_behavior) sink.behavior = &report.behavior_dump;
            if (cfg.dump_reach) sink.reach = &report.reach_dump;
            sink.ledger_csv = &report.ledger_csv;
        }
        try {
            run_replication(cfg, rep, rows, sink);
        } catch (const SimError& e) {
            // A module error aborts the replication; the report marks it and
            // the remaining replications continue.
            std::lock_guard<std::mutex> lock(abort_mutex);
            report.aborted.emplace_back(rep, e.what());
            return;
        }
        std::copy(rows.begin(), rows.end(),
                  report.rows.begin() + std::size_t(rep) * cfg.rounds);
    });
    std::sort(report.aborted.begin(), report.aborted.end());
    return report;
}

std::vector<SweepResult> defection_sweep(const ScenarioConfig& base,
                                         const std::vector<double>& rates) {
    std::vector<SweepResult> out;
    out.reserve(rates.size());
    for (double rate : rates) {
        if (rate < 0.0 || rate > 1.0)
            throw ConfigError("defection sweep: rates must lie in [0, 1]");
        ScenarioConfig cfg = base;
        cfg.behavior.kind = rate == 0.0 && base.behavior.kind == BehaviorPolicy::Kind::AllCooperate
                                ? BehaviorPolicy::Kind::AllCooperate
                                : BehaviorPolicy::Kind::RandomFraction;
        cfg.behavior.rate = rate;
        out.push_back({rate, run_scenario(cfg)});
    }
    return out;
}

RewardComparisonReport reward_comparison(const ScenarioConfig& base) {
    ScenarioConfig cfg = base;
    cfg.rewards_only = true;
    cfg.validate();

    RewardComparisonReport report;
    report.rounds = cfg.rounds;
    report.replications = cfg.replications;
    report.rows.resize(std::size_t(cfg.replications) * cfg.rounds);

    parallel_replications(cfg.replications, cfg.threads, [&](std::uint32_t rep) {
        StakeLedger ledger =
            generate_stakes(cfg.stakes, derive_seed(cfg.master_seed, kSeedStakes, rep));
        Rng tx_rng(derive_seed(cfg.master_seed, kSeedTx, rep));
        std::vector<Strategy> strategies(cfg.node_count, Strategy::Cooperate);
        BehaviorEngine behavior(cfg.behavior, cfg.node_count,
                                derive_seed(cfg.master_seed, kSeedBehavior, rep));
        RewardPools pools_foundation, pools_role;
        Seed seed = genesis_seed(cfg.master_seed, rep);
        std::uint64_t block_height = 0;

        for (std::uint32_t r = 1; r <= cfg.rounds; ++r) {
            seed = next_seed(seed, r, cfg.sortition.refresh_interval);
            const auto& strat = behavior.assign(ledger, r, cfg.costs, 0.0);
            const FastRoundRoles roles = fast_round_roles(r, seed, ledger, strat, cfg.sortition);
            const RoleSets rs = build_role_sets(ledger, strat, roles.leader_weight,
                                                roles.member_weight, cfg.mechanism,
                                                cfg.s_k_floor_micro, nullptr);
            ++block_height;

            RewardRow row;
            row.replication = rep;
            row.round = r;
            const RewardOutcome f =
                foundation_round_reward(rs, ledger, pools_foundation, block_height);
            row.foundation_B_micro = f.B_micro;
            row.foundation_paid_micro = f.paid_micro;

            MechanismConfig role_mech = cfg.mechanism;
            role_mech.kind = MechanismKind::RoleBased;
            const RewardOutcome rb =
                role_based_round_reward(rs, role_mech, cfg.costs, cfg.optimizer, pools_role);
            row.role_ok = rb.ok;
            row.alpha = rb.alpha;
            row.beta = rb.beta;
            row.role_B_micro = rb.B_micro;
            row.role_B_algos = to_algos(rb.B_micro);
            row.role_paid_micro = rb.paid_micro;

            report.rows[std::size_t(rep) * cfg.rounds + (r - 1)] = row;
            if (cfg.tx_per_round > 0) apply_transaction_round(ledger, tx_rng, cfg.tx_per_round);
        }
    });
    return report;
}

double trimmed_mean(std::vector<double> samples, double trim) {
    if (samples.empty()) throw AggregationError("trimmed mean of an empty sample set");
    if (!(trim >= 0.0 && trim < 0.5))
        throw AggregationError("trimmed mean: trim fraction must lie in [0, 0.5)");
    std::sort(samples.begin(), samples.end());
    const std::size_t cut = static_cast<std::size_t>(trim * samples.size());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = cut; i < samples.size() - cut; ++i) {
        sum += samples[i];
        ++count;
    }
    return sum / static_cast<double>(count);
}

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_fig3_csv(std::ostream& os, const RunReport& report, double trim) {
    os << "round,final_frac,tentative_frac,noblock_frac\n";
    std::vector<double> finals, tents, nones;
    for (std::uint32_t r = 0; r < report.rounds; ++r) {
        finals.clear();
        tents.clear();
        nones.clear();
        for (std::uint32_t rep = 0; rep < report.replications; ++rep) {
            const RoundRow& row = report.at(rep, r);
            finals.push_back(row.final_frac);
            tents.push_back(row.tentative_frac);
            nones.push_back(row.noblock_frac);
        }
        os << (r + 1) << ',' << format_g9(trimmed_mean(finals, trim)) << ','
           << format_g9(trimmed_mean(tents, trim)) << ','
           << format_g9(trimmed_mean(nones, trim)) << '\n';
    }
}

void write_fig5_csv(std::ostream& os, const RewardComparisonReport& report) {
    os << "replication,mean_role_B_algos\n";
    for (std::uint32_t rep = 0; rep < report.replications; ++rep) {
        double sum = 0.0;
        std::uint32_t n = 0;
        for (std::uint32_t r = 0; r < report.rounds; ++r) {
            const RewardRow& row = report.rows[std::size_t(rep) * report.rounds + r];
            if (row.role_ok) {
                sum += row.role_B_algos;
                ++n;
            }
        }
        os << rep << ',' << format_g9(n ? sum / n : 0.0) << '\n';
    }
}

void write_fig6_csv(std::ostream& os, const RewardComparisonReport& report, double trim) {
    os << "round,foundation_B_algos,role_B_algos,cum_foundation_algos,cum_role_algos\n";
    double cum_f = 0.0, cum_r = 0.0;
    std::vector<double> f, rb;
    for (std::uint32_t r = 0; r < report.rounds; ++r) {
        f.clear();
        rb.clear();
        for (std::uint32_t rep = 0; rep < report.replications; ++rep) {
            const RewardRow& row = report.rows[std::size_t(rep) * report.rounds + r];
            f.push_back(to_algos(row.foundation_B_micro));
            if (row.role_ok) rb.push_back(row.role_B_algos);
        }
        const double fm = trimmed_mean(f, trim);
        const double rm = rb.empty() ? 0.0 : trimmed_mean(rb, trim);
        cum_f += fm;
        cum_r += rm;
        os << (r + 1) << ',' << format_g9(fm) << ',' << format_g9(rm) << ','
           << format_g9(cum_f) << ',' << format_g9(cum_r) << '\n';
    }
}

void write_fig7_csv(std::ostream& os, const std::vector<double>& w_algos,
                    const std::vector<RewardComparisonReport>& reports, double trim) {
    os << "round";
    for (double w : w_algos) os << ",role_B_algos_w" << format_g9(w)
                                << ",cum_role_algos_w" << format_g9(w);
    os << '\n';
    if (reports.empty()) return;
    std::vector<double> cum(reports.size(), 0.0);
    std::vector<double> samples;
    for (std::uint32_t r = 0; r < reports[0].rounds; ++r) {
        os << (r + 1);
        for (std::size_t wi = 0; wi < reports.size(); ++wi) {
            samples.clear();
            for (std::uint32_t rep = 0; rep < reports[wi].replications; ++rep) {
                const RewardRow& row = reports[wi].rows[std::size_t(rep) * reports[wi].rounds + r];
                if (row.role_ok) samples.push_back(row.role_B_algos);
            }
            const double m = samples.empty() ? 0.0 : trimmed_mean(samples, trim);
            cum[wi] += m;
            os << ',' << format_g9(m) << ',' << format_g9(cum[wi]);
        }
        os << '\n';
    }
}

void write_outcome_dump_csv(std::ostream& os, const RunReport& report) {
    os << "round,node_id,outcome,block_hash\n";
    for (const auto& row : report.outcome_dump)
        os << row.round << ',' << row.node << ',' << row.outcome << ',' << row.block_hash
           << '\n';
}

void write_payment_dump_csv(std::ostream& os, const RunReport& report) {
    os << "round,node_id,role,strategy,reward_microalgos,cost_microalgos,payoff_microalgos\n";
    for (const auto& rec : report.payment_dump)
        os << rec.round << ',' << rec.node << ',' << role_letter(rec.role) << ','
           << strategy_letter(rec.strategy) << ',' << rec.reward_micro << ','
           << rec.cost_micro << ',' << rec.payoff_micro << '\n';
}

void write_behavior_dump_csv(std::ostream& os, const RunReport& report) {
    os << "round,node_id,strategy\n";
    for (const auto& row : report.behavior_dump)
        os << row.round << ',' << row.node << ',' << row.strategy << '\n';
}

void write_reach_dump_csv(std::ostream& os, const RunReport& report) {
    os << "round,sender,reached_fraction\n";
    for (const auto& row : report.reach_dump)
        os << row.round << ',' << row.sender << ',' << format_g9(row.reached_fraction)
           << '\n';
}

void write_rows_csv(std::ostream& os, const RunReport& report) {
    os << "replication,round,final_frac,tentative_frac,noblock_frac,block_added,steps_used,"
          "synchrony,defector_stake_share,agreed_final,tentative_upgraded,reward_ok,alpha,beta,"
          "B_microalgos,paid_microalgos,eligible_stake_microalgos,total_stake_microalgos,"
          "cum_paid_microalgos\n";
    for (const RoundRow& row : report.rows) {
        os << row.replication << ',' << row.round << ',' << format_g9(row.final_frac) << ','
           << format_g9(row.tentative_frac) << ',' << format_g9(row.noblock_frac) << ','
           << (row.block_added ? 1 : 0) << ',' << row.steps_used << ','
           << synchrony_name(row.sync) << ',' << format_g9(row.defector_stake_share) << ','
           << (row.agreed_final ? 1 : 0) << ',' << row.tentative_upgraded << ','
           << (row.reward_ok ? 1 : 0) << ','
           << format_g9(row.alpha) << ',' << format_g9(row.beta) << ',' << row.B_micro << ','
           << row.paid_micro << ',' << row.eligible_stake_micro << ','
           << row.total_stake_micro << ',' << row.cum_paid_micro << '\n';
    }
}

ScenarioConfig ScenarioConfig::from_config(const ConfigFile& cfg) {
    ScenarioConfig sc;
    sc.node_count = static_cast<std::uint32_t>(cfg.get_int("scenario.nodes", sc.node_count));
    sc.rounds = static_cast<std::uint32_t>(cfg.get_int("scenario.rounds", sc.rounds));
    sc.replications =
        static_cast<std::uint32_t>(cfg.get_int("scenario.replications", sc.replications));
    sc.master_seed = static_cast<std::uint64_t>(cfg.get_int("scenario.seed", 42));
    sc.tx_per_round =
        static_cast<std::uint32_t>(cfg.get_int("scenario.tx_per_round", sc.tx_per_round));
    sc.rewards_only = cfg.get_bool("scenario.rewards_only", sc.rewards_only);
    sc.threads = static_cast<std::uint32_t>(cfg.get_int("scenario.threads", 0));

    const std::string dist = cfg.get_string("stakes.distribution", "uniform");
    if (dist == "uniform") {
        sc.stakes.kind = StakeDistributionSpec::Kind::Uniform;
        sc.stakes.lo = cfg.get_double("stakes.lo", 1.0);
        sc.stakes.hi = cfg.get_double("stakes.hi", 50.0);
    } else if (dist == "normal") {
        sc.stakes.kind = StakeDistributionSpec::Kind::Normal;
        sc.stakes.mean = cfg.get_double("stakes.mean", 100.0);
        sc.stakes.stddev = cfg.get_double("stakes.stddev", 10.0);
    } else {
        throw ConfigError("stakes.distribution must be `uniform` or `normal`");
    }
    sc.stakes.node_count = sc.node_count;

    sc.out_degree = static_cast<std::uint32_t>(cfg.get_int("topology.out_degree", 5));

    const std::string dkind = cfg.get_string("delay.model", "uniform");
    if (dkind == "uniform") {
        sc.delay = DelayModel::uniform(
            static_cast<std::uint32_t>(cfg.get_int("delay.lo_ms", 50)),
            static_cast<std::uint32_t>(cfg.get_int("delay.hi_ms", 500)));
    } else if (dkind == "constant") {
        sc.delay = DelayModel::constant(
            static_cast<std::uint32_t>(cfg.get_int("delay.value_ms", 100)));
    } else {
        throw ConfigError("delay.model must be `uniform` or `constant`");
    }

    sc.sortition.tau_proposer = cfg.get_double("consensus.tau_proposer", 26.0);
    sc.sortition.tau_step = cfg.get_double("consensus.tau_step", 1000.0);
    sc.sortition.tau_final = cfg.get_double("consensus.tau_final", 10000.0);
    sc.sortition.refresh_interval =
        static_cast<std::uint64_t>(cfg.get_int("consensus.seed_refresh_interval", 1000));
    sc.sortition.proposer_cap =
        static_cast<std::uint32_t>(cfg.get_int("consensus.proposer_cap", 70));
    sc.consensus.threshold_step = cfg.get_double("consensus.threshold_step", 0.685);
    sc.consensus.threshold_final = cfg.get_double("consensus.threshold_final", 0.74);
    sc.consensus.max_binary_steps =
        static_cast<std::uint32_t>(cfg.get_int("consensus.max_binary_steps", 22));
    sc.consensus.step_deadline_ms =
        static_cast<std::uint32_t>(cfg.get_int("consensus.step_deadline_ms", 20000));

    sc.costs.c_ve = cfg.get_int("costs.c_ve", sc.costs.c_ve);
    sc.costs.c_se = cfg.get_int("costs.c_se", sc.costs.c_se);
    sc.costs.c_so = cfg.get_int("costs.c_so", sc.costs.c_so);
    sc.costs.c_go = cfg.get_int("costs.c_go", sc.costs.c_go);
    sc.costs.c_vs = cfg.get_int("costs.c_vs", sc.costs.c_vs);
    sc.costs.c_vc = cfg.get_int("costs.c_vc", sc.costs.c_vc);
    sc.costs.c_bl = cfg.get_int("costs.c_bl", sc.costs.c_bl);
    sc.costs.c_bs = cfg.get_int("costs.c_bs", sc.costs.c_bs);
    sc.costs.c_vo = cfg.get_int("costs.c_vo", sc.costs.c_vo);

    const std::string mech = cfg.get_string("mechanism.kind", "foundation");
    if (mech == "foundation") {
        sc.mechanism.kind = MechanismKind::Foundation;
    } else if (mech == "role_based") {
        sc.mechanism.kind = MechanismKind::RoleBased;
    } else {
        throw ConfigError("mechanism.kind must be `foundation` or `role_based`");
    }
    const std::string alpha = cfg.get_string("mechanism.alpha", "auto");
    if (alpha == "auto") {
        sc.mechanism.auto_params = true;
    } else {
        sc.mechanism.auto_params = false;
        sc.mechanism.alpha = cfg.get_double("mechanism.alpha", 0.02);
        sc.mechanism.beta = cfg.get_double("mechanism.beta", 0.03);
    }
    const std::string policy = cfg.get_string("mechanism.pay_policy", "pay_online");
    if (policy == "pay_online") {
        sc.mechanism.policy = PayPolicy::PayOnline;
    } else if (policy == "pay_cooperators_only") {
        sc.mechanism.policy = PayPolicy::PayCooperatorsOnly;
    } else {
        throw ConfigError("mechanism.pay_policy must be `pay_online` or `pay_cooperators_only`");
    }
    sc.mechanism.fee_per_round_micro =
        algos_to_micro(cfg.get_double("mechanism.fee_per_round", 0.0));
    sc.mechanism.reward_floor_w_micro =
        algos_to_micro(cfg.get_double("mechanism.reward_floor_w", 0.0));

    sc.optimizer.resolution = cfg.get_double("optimizer.resolution", 0.005);
    sc.optimizer.alpha_min = cfg.get_double("optimizer.alpha_min", 0.01);
    sc.optimizer.alpha_max = cfg.get_double("optimizer.alpha_max", 0.04);
    sc.optimizer.beta_min = cfg.get_double("optimizer.beta_min", 0.02);
    sc.optimizer.beta_max = cfg.get_double("optimizer.beta_max", 0.05);
    sc.optimizer.epsilon = cfg.get_double("optimizer.epsilon", 1e-6);
    sc.optimizer.refine_iterations =
        static_cast<int>(cfg.get_int("optimizer.refine_iterations", 100));
    sc.s_k_floor_micro = algos_to_micro(cfg.get_double("optimizer.s_k_floor", 10.0));

    const std::string behavior = cfg.get_string("behavior.policy", "all_cooperate");
    if (behavior == "all_cooperate") {
        sc.behavior.kind = BehaviorPolicy::Kind::AllCooperate;
    } else if (behavior == "fixed_set") {
        sc.behavior.kind = BehaviorPolicy::Kind::FixedSet;
        for (double v : cfg.get_list("behavior.defect_set"))
            sc.behavior.defect_set.push_back(static_cast<NodeId>(v));
        for (double v : cfg.get_list("behavior.offline_set"))
            sc.behavior.offline_set.push_back(static_cast<NodeId>(v));
    } else if (behavior == "random_fraction") {
        sc.behavior.kind = BehaviorPolicy::Kind::RandomFraction;
        sc.behavior.rate = cfg.get_double("behavior.defect_rate", 0.0);
        sc.behavior.redraw_each_round = cfg.get_bool("behavior.redraw_each_round", false);
    } else if (behavior == "payoff_threshold") {
        sc.behavior.kind = BehaviorPolicy::Kind::PayoffThreshold;
    } else {
        throw ConfigError("behavior.policy must be one of all_cooperate, fixed_set, "
                          "random_fraction, payoff_threshold");
    }

    sc.synchrony_threshold = cfg.get_double("synchrony.threshold", 0.95);
    sc.weak_window = static_cast<std::uint32_t>(cfg.get_int("synchrony.weak_window", 10));
    sc.honest_stake_threshold = cfg.get_double("synchrony.honest_stake_threshold", 2.0 / 3.0);

    sc.dump_outcomes = cfg.get_bool("scenario.dump_outcomes", false);
    sc.dump_payments = cfg.get_bool("scenario.dump_payments", false);
    sc.dump_behavior = cfg.get_bool("scenario.dump_behavior", false);
    sc.dump_reach = cfg.get_bool("scenario.dump_reach", false);
    return sc;
}

} // namespace bastar
