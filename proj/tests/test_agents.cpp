#include <doctest.h>

#include <set>

#include "bastar/agents.hpp"

using namespace bastar;

namespace {

StakeLedger flat_ledger(std::uint32_t n, std::int64_t algos) {
    StakeLedger ledger;
    ledger.micro.assign(n, algos * kMicroPerAlgo);
    ledger.recompute_total();
    return ledger;
}

} // namespace

TEST_CASE("rate zero cooperates everywhere") {
    BehaviorPolicy policy;
    policy.kind = BehaviorPolicy::Kind::RandomFraction;
    policy.rate = 0.0;
    BehaviorEngine engine(policy, 100, 7);
    const auto ledger = flat_ledger(100, 10);
    const auto& s = engine.assign(ledger, 1, CostModel{}, 0.0);
    for (Strategy x : s) CHECK(x == Strategy::Cooperate);
}

TEST_CASE("rate 0.30 marks exactly 300 of 1000, reproducibly") {
    BehaviorPolicy policy;
    policy.kind = BehaviorPolicy::Kind::RandomFraction;
    policy.rate = 0.30;
    const auto ledger = flat_ledger(1000, 10);

    BehaviorEngine a(policy, 1000, 7), b(policy, 1000, 7);
    const auto& sa = a.assign(ledger, 1, CostModel{}, 0.0);
    const auto& sb = b.assign(ledger, 1, CostModel{}, 0.0);
    std::uint32_t defectors = 0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa[i] == sb[i]);
        defectors += sa[i] == Strategy::Defect;
    }
    CHECK(defectors == 300);

    // Strategies are hard-wired across rounds unless redraw is requested.
    const auto snapshot = sa;
    const auto& later = a.assign(ledger, 2, CostModel{}, 0.0);
    CHECK(later == snapshot);
}

TEST_CASE("defector sets nest across rates under one seed") {
    const auto ledger = flat_ledger(1000, 10);
    std::set<NodeId> low, high;
    for (double rate : {0.10, 0.20}) {
        BehaviorPolicy policy;
        policy.kind = BehaviorPolicy::Kind::RandomFraction;
        policy.rate = rate;
        BehaviorEngine engine(policy, 1000, 99);
        const auto& s = engine.assign(ledger, 1, CostModel{}, 0.0);
        auto& target = rate < 0.15 ? low : high;
        for (NodeId n = 0; n < 1000; ++n)
            if (s[n] == Strategy::Defect) target.insert(n);
    }
    CHECK(low.size() == 100);
    CHECK(high.size() == 200);
    for (NodeId n : low) CHECK(high.count(n) == 1);
}

TEST_CASE("fixed sets pin defectors and offline nodes") {
    BehaviorPolicy policy;
    policy.kind = BehaviorPolicy::Kind::FixedSet;
    policy.defect_set = {1, 5};
    policy.offline_set = {9};
    BehaviorEngine engine(policy, 10, 0);
    const auto ledger = flat_ledger(10, 1);
    const auto& s = engine.assign(ledger, 1, CostModel{}, 0.0);
    CHECK(s[1] == Strategy::Defect);
    CHECK(s[5] == Strategy::Defect);
    CHECK(s[9] == Strategy::Offline);
    CHECK(s[0] == Strategy::Cooperate);
}

TEST_CASE("payoff threshold defects when the rate cannot cover c_K - c_so") {
    BehaviorPolicy policy;
    policy.kind = BehaviorPolicy::Kind::PayoffThreshold;
    BehaviorEngine engine(policy, 50, 3);
    const auto ledger = flat_ledger(50, 10);
    const CostModel costs; // c_K - c_so = 1 micro-Algo

    // Rate 0.05 micro-Algos per Algo on 10 Algos = 0.5 < 1: defect.
    const auto& defect = engine.assign(ledger, 1, costs, 0.05);
    for (Strategy s : defect) CHECK(s == Strategy::Defect);

    // Rate 0.2 on 10 Algos = 2 >= 1: cooperate.
    const auto& coop = engine.assign(ledger, 2, costs, 0.2);
    for (Strategy s : coop) CHECK(s == Strategy::Cooperate);
}

TEST_CASE("participation flags per strategy") {
    const auto c = execute_strategy(Strategy::Cooperate);
    CHECK(c.propose);
    CHECK(c.vote);
    CHECK(c.relay);
    CHECK(c.reachable);
    CHECK(c.reward_eligible);

    const auto d = execute_strategy(Strategy::Defect);
    CHECK(!d.propose);
    CHECK(!d.vote);
    CHECK(!d.relay);
    CHECK(d.reachable);
    CHECK(d.reward_eligible);

    const auto o = execute_strategy(Strategy::Offline);
    CHECK(!o.reachable);
    CHECK(!o.reward_eligible);
}

TEST_CASE("rates outside [0, 1] are rejected") {
    BehaviorPolicy policy;
    policy.kind = BehaviorPolicy::Kind::RandomFraction;
    policy.rate = 1.5;
    CHECK_THROWS_AS(BehaviorEngine(policy, 10, 1), ConfigError);
}
