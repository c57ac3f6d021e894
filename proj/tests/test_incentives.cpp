#include <doctest.h>

#include <numeric>

#include "bastar/incentives.hpp"
#include "bastar/rng.hpp"

using namespace bastar;

TEST_CASE("cost aggregates follow the fixed/role sums") {
    CostModel m; // defaults: c_fix 6, c_bl 10, c_bs + c_vo 6, c_so 5
    m.validate();
    CHECK(m.c_fix() == 6);
    CHECK(m.c_L() == 16);
    CHECK(m.c_M() == 12);
    CHECK(m.c_K() == 6);
    CHECK(m.c_dual() == 22);

    CHECK(role_cost(m, Role::Leader, Strategy::Cooperate) == 16);
    CHECK(role_cost(m, Role::Member, Strategy::Cooperate) == 12);
    CHECK(role_cost(m, Role::Other, Strategy::Cooperate) == 6);
    for (Role r : {Role::Leader, Role::Member, Role::Other}) {
        CHECK(role_cost(m, r, Strategy::Defect) == 5);
        CHECK(role_cost(m, r, Strategy::Offline) == 5);
    }

    CostModel bad = m;
    bad.c_bl = 0; // collapses c_L to c_M... rejected
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("reward schedule endpoints and domain") {
    CHECK(schedule_reward_micro(1) == 20 * kMicroPerAlgo);
    CHECK(schedule_reward_micro(12) == 76 * kMicroPerAlgo);
    CHECK_THROWS_AS(schedule_reward_micro(0), ScheduleError);
    CHECK_THROWS_AS(schedule_reward_micro(13), ScheduleError);
    CHECK(schedule_period_for_block(0) == 1);
    CHECK(schedule_period_for_block(499999) == 1);
    CHECK(schedule_period_for_block(500000) == 2);
}

TEST_CASE("foundation pool honors the 1.75B ceiling") {
    RewardPools pools;
    pools.foundation_remaining_micro = 30 * kMicroPerAlgo;
    CHECK(pools.draw_foundation(20 * kMicroPerAlgo) == 20 * kMicroPerAlgo);
    CHECK(pools.draw_foundation(20 * kMicroPerAlgo) == 10 * kMicroPerAlgo);
    CHECK(pools.draw_foundation(20 * kMicroPerAlgo) == 0);
    CHECK(pools.foundation_remaining_micro == 0);
}

TEST_CASE("foundation distribution: degenerate and proportional cases") {
    SUBCASE("one node holding all stake receives B") {
        const std::vector<StakeShare> online = {{0, 1000 * kMicroPerAlgo}};
        const auto p = distribute_foundation(7 * kMicroPerAlgo, online, 1000 * kMicroPerAlgo);
        REQUIRE(p.size() == 1);
        CHECK(p[0].micro == 7 * kMicroPerAlgo);
    }
    SUBCASE("stakes {10, 30} with B = 4 pay {1, 3}") {
        const std::vector<StakeShare> online = {{0, 10 * kMicroPerAlgo},
                                                {1, 30 * kMicroPerAlgo}};
        const auto p = distribute_foundation(4 * kMicroPerAlgo, online, 40 * kMicroPerAlgo);
        CHECK(p[0].micro == 1 * kMicroPerAlgo);
        CHECK(p[1].micro == 3 * kMicroPerAlgo);
    }
    SUBCASE("random ledgers disburse B exactly when everyone is online") {
        Rng rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<StakeShare> online;
            std::int64_t total = 0;
            for (NodeId n = 0; n < 1000; ++n) {
                const std::int64_t stake = (1 + rng.below(500)) * 1000; // sub-Algo stakes
                online.push_back({n, stake});
                total += stake;
            }
            const std::int64_t B = 20 * kMicroPerAlgo + static_cast<std::int64_t>(rng.below(999));
            const auto p = distribute_foundation(B, online, total);
            std::int64_t sum = 0;
            for (const auto& x : p) sum += x.micro;
            CHECK(sum == B);
        }
    }
}

TEST_CASE("role-based distribution: symmetry, rates, exact sums") {
    SUBCASE("alpha+beta+gamma must be 1") {
        RewardParameters bad{1.0 / 3, 1.0 / 3, 0.5, kMicroPerAlgo};
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
    SUBCASE("equal thirds over equal role stakes pay every stake unit alike") {
        RewardParameters params{1.0 / 3, 1.0 / 3, 1.0 / 3, 9 * kMicroPerAlgo};
        const std::vector<StakeShare> L = {{0, 3 * kMicroPerAlgo}};
        const std::vector<StakeShare> M = {{1, 3 * kMicroPerAlgo}};
        const std::vector<StakeShare> K = {{2, 3 * kMicroPerAlgo}};
        const auto p = distribute_role_based(params, L, M, K);
        CHECK(p[0].micro == 3 * kMicroPerAlgo);
        CHECK(p[1].micro == 3 * kMicroPerAlgo);
        CHECK(p[2].micro == 3 * kMicroPerAlgo);
    }
    SUBCASE("leader rate alpha*B/S_L at the reference inputs") {
        // alpha = 0.02, B = 5.2 Algos, S_L = 26 -> 0.004 Algos per stake unit.
        RewardParameters params{0.02, 0.03, 0.95,
                                static_cast<std::int64_t>(5.2 * kMicroPerAlgo)};
        const std::vector<StakeShare> L = {{0, 26 * kMicroPerAlgo}};
        const std::vector<StakeShare> M = {{1, 13000 * kMicroPerAlgo}};
        const std::vector<StakeShare> K = {{2, 49986974LL * kMicroPerAlgo}};
        const auto p = distribute_role_based(params, L, M, K);
        const double rate = to_algos(p[0].micro) / 26.0;
        CHECK(rate == doctest::Approx(0.004).epsilon(1e-6));
    }
    SUBCASE("random partitions sum to B exactly") {
        Rng rng(9);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<StakeShare> L, M, K;
            for (NodeId n = 0; n < 60; ++n) {
                const StakeShare s{n, static_cast<std::int64_t>(1 + rng.below(1000)) * 100000};
                const auto bucket = rng.below(3);
                (bucket == 0 ? L : bucket == 1 ? M : K).push_back(s);
            }
            if (L.empty() || M.empty() || K.empty()) continue;
            const double a = 0.05 + 0.3 * rng.real();
            const double b = 0.05 + 0.3 * rng.real();
            RewardParameters params{a, b, 1.0 - a - b,
                                    static_cast<std::int64_t>(1 + rng.below(50000000))};
            const auto p = distribute_role_based(params, L, M, K);
            std::int64_t sum = 0;
            for (const auto& x : p) sum += x.micro;
            CHECK(sum == params.B_micro);
        }
    }
    SUBCASE("empty role sets are rejected") {
        RewardParameters params{0.2, 0.3, 0.5, kMicroPerAlgo};
        const std::vector<StakeShare> some = {{0, kMicroPerAlgo}};
        CHECK_THROWS_AS(distribute_role_based(params, {}, some, some), DistributionError);
        CHECK_THROWS_AS(distribute_role_based(params, some, {}, some), DistributionError);
        CHECK_THROWS_AS(distribute_role_based(params, some, some, {}), DistributionError);
    }
}

TEST_CASE("payoffs are reward minus cost; no block means no payment") {
    CostModel m;
    SUBCASE("all-defect round leaves u = -c_so") {
        const auto rec = compute_payoff(3, 1, Role::Other, Strategy::Defect, 0, m.c_so);
        CHECK(rec.payoff_micro == -5);
    }
    SUBCASE("cooperating Other under foundation sharing") {
        const std::int64_t reward = 120; // r_i * s_k in micro-Algos
        const auto rec = compute_payoff(4, 2, Role::Other, Strategy::Cooperate, reward, m.c_K());
        CHECK(rec.payoff_micro == reward - 6);
    }
    SUBCASE("defecting Other still paid under pay-online keeps c_so") {
        const std::int64_t reward = 120;
        const auto rec = compute_payoff(4, 2, Role::Other, Strategy::Defect, reward, m.c_so);
        CHECK(rec.payoff_micro == reward - 5);
    }
}

TEST_CASE("foundation equals role-based when shares mirror stake fractions") {
    // With alpha = S_L/S_N, beta = S_M/S_N, gamma = S_K/S_N and a budget that
    // divides all stakes, both mechanisms produce identical integer payments.
    const std::int64_t SL = 20 * kMicroPerAlgo, SM = 30 * kMicroPerAlgo,
                       SK = 50 * kMicroPerAlgo;
    const std::int64_t SN = SL + SM + SK;
    const std::vector<StakeShare> L = {{0, 8 * kMicroPerAlgo}, {1, 12 * kMicroPerAlgo}};
    const std::vector<StakeShare> M = {{2, 30 * kMicroPerAlgo}};
    const std::vector<StakeShare> K = {{3, 15 * kMicroPerAlgo}, {4, 35 * kMicroPerAlgo}};
    const std::int64_t B = SN / 10; // pays exactly stake/10 to everyone

    RewardParameters params{to_algos(SL) / to_algos(SN), to_algos(SM) / to_algos(SN),
                            to_algos(SK) / to_algos(SN), B};
    const auto role = distribute_role_based(params, L, M, K);

    std::vector<StakeShare> online;
    for (const auto* set : {&L, &M, &K}) online.insert(online.end(), set->begin(), set->end());
    const auto flat = distribute_foundation(B, online, SN);

    REQUIRE(role.size() == flat.size());
    for (std::size_t i = 0; i < role.size(); ++i) {
        CHECK(role[i].node == flat[i].node);
        CHECK(role[i].micro == flat[i].micro);
    }
}
