#include "bastar/incentives.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace bastar {

std::int64_t role_cost(const CostModel& model, Role role, Strategy strategy) {
    if (strategy != Strategy::Cooperate) return model.c_so;
    switch (role) {
    case Role::Leader: return model.c_L();
    case Role::Member: return model.c_M();
    case Role::Other: return model.c_K();
    }
    return model.c_K();
}

std::int64_t schedule_reward_micro(std::uint32_t period) {
    // Projected rewards for the first 12 reward periods, millions of Algos.
    static constexpr std::array<std::int64_t, 12> kMillions = {10, 13, 16, 19, 22, 25,
                                                               28, 31, 34, 36, 38, 38};
    if (period < 1 || period > 12)
        throw ScheduleError("reward schedule defined for periods 1..12 only");
    const std::int64_t total_micro = kMillions[period - 1] * 1000000LL * kMicroPerAlgo;
    return total_micro / 500000LL; // per-round share of the 500k-block period
}

std::vector<std::int64_t> allocate_proportional(std::int64_t amount_micro,
                                                const std::vector<StakeShare>& shares,
                                                std::int64_t denom_micro) {
    std::vector<std::int64_t> out(shares.size(), 0);
    if (shares.empty() || amount_micro <= 0 || denom_micro <= 0) return out;

    __int128 elig = 0;
    for (const auto& s : shares) elig += s.stake_micro;
    const __int128 target = (static_cast<__int128>(amount_micro) * elig) / denom_micro;

    std::int64_t assigned = 0;
    std::vector<std::pair<std::int64_t, std::uint32_t>> remainders(shares.size());
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const __int128 num = static_cast<__int128>(amount_micro) * shares[i].stake_micro;
        out[i] = static_cast<std::int64_t>(num / denom_micro);
        remainders[i] = {static_cast<std::int64_t>(num % denom_micro),
                         static_cast<std::uint32_t>(i)};
        assigned += out[i];
    }
    std::int64_t leftover = static_cast<std::int64_t>(target) - assigned;
    if (leftover > 0) {
        // Largest fractional remainder first; ties by node id for determinism.
        std::nth_element(remainders.begin(), remainders.begin() + (leftover - 1),
                         remainders.end(), [&](const auto& a, const auto& b) {
                             if (a.first != b.first) return a.first > b.first;
                             return shares[a.second].node < shares[b.second].node;
                         });
        std::sort(remainders.begin(), remainders.begin() + leftover,
                  [&](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return shares[a.second].node < shares[b.second].node;
                  });
        for (std::int64_t k = 0; k < leftover; ++k) out[remainders[k].second] += 1;
    }
    return out;
}

std::vector<Payment> distribute_foundation(std::int64_t B_micro,
                                           const std::vector<StakeShare>& online,
                                           std::int64_t total_stake_micro) {
    if (online.empty()) return {};
    std::int64_t online_sum = 0;
    for (const auto& s : online) online_sum += s.stake_micro;
    if (online_sum <= 0) return {};

    const auto alloc = allocate_proportional(B_micro, online, total_stake_micro);
    std::vector<Payment> payments(online.size());
    for (std::size_t i = 0; i < online.size(); ++i)
        payments[i] = {online[i].node, alloc[i]};
    return payments;
}

std::vector<Payment> distribute_role_based(const RewardParameters& params,
                                           const std::vector<StakeShare>& leaders,
                                           const std::vector<StakeShare>& members,
                                           const std::vector<StakeShare>& others) {
    params.validate();
    if (leaders.empty() || members.empty() || others.empty())
        throw DistributionError("role-based distribution requires non-empty role sets");

    // Integerize the three pool shares with largest remainder so they sum to B.
    const double b = static_cast<double>(params.B_micro);
    const std::array<double, 3> ideal = {params.alpha * b, params.beta * b, params.gamma * b};
    std::array<std::int64_t, 3> pool{};
    std::array<double, 3> frac{};
    std::int64_t used = 0;
    for (int i = 0; i < 3; ++i) {
        pool[i] = static_cast<std::int64_t>(std::floor(ideal[i]));
        frac[i] = ideal[i] - static_cast<double>(pool[i]);
        used += pool[i];
    }
    std::int64_t leftover = params.B_micro - used;
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int c) {
        if (frac[a] != frac[c]) return frac[a] > frac[c];
        return a < c;
    });
    for (std::int64_t k = 0; k < leftover && k < 3; ++k) pool[order[k]] += 1;

    auto pool_sum = [](const std::vector<StakeShare>& v) {
        std::int64_t s = 0;
        for (const auto& x : v) s += x.stake_micro;
        return s;
    };

    std::vector<Payment> payments;
    payments.reserve(leaders.size() + members.size() + others.size());
    const std::vector<StakeShare>* sets[3] = {&leaders, &members, &others};
    for (int i = 0; i < 3; ++i) {
        const std::int64_t denom = pool_sum(*sets[i]);
        if (denom <= 0) throw DistributionError("role-based distribution: empty-stake role set");
        const auto alloc = allocate_proportional(pool[i], *sets[i], denom);
        for (std::size_t j = 0; j < sets[i]->size(); ++j)
            payments.push_back({(*sets[i])[j].node, alloc[j]});
    }
    return payments;
}

PayoffRecord compute_payoff(NodeId node, std::uint64_t round, Role role, Strategy strategy,
                            std::int64_t reward_micro, std::int64_t cost_micro) {
    PayoffRecord rec;
    rec.node = node;
    rec.round = round;
    rec.role = role;
    rec.strategy = strategy;
    rec.reward_micro = reward_micro;
    rec.cost_micro = cost_micro;
    rec.payoff_micro = reward_micro - cost_micro;
    return rec;
}

} // namespace bastar
