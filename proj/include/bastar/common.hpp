#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bastar {

using NodeId = std::uint32_t;

// All money is accounted in integer micro-Algos so conservation checks are exact.
inline constexpr std::int64_t kMicroPerAlgo = 1'000'000;

inline constexpr double to_algos(std::int64_t micro) {
    return static_cast<double>(micro) / static_cast<double>(kMicroPerAlgo);
}

inline constexpr std::int64_t algos_to_micro(double algos) {
    return static_cast<std::int64_t>(algos * static_cast<double>(kMicroPerAlgo) + 0.5);
}

// Invalid configuration or input specs. The CLI maps this family to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Errors raised while a simulation or computation is running (exit code 3).
struct SimError : std::runtime_error {
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SequencingError : SimError {
    explicit SequencingError(const std::string& msg) : SimError(msg) {}
};

struct RoleAssignmentError : SimError {
    explicit RoleAssignmentError(const std::string& msg) : SimError(msg) {}
};

struct ScheduleError : SimError {
    explicit ScheduleError(const std::string& msg) : SimError(msg) {}
};

struct DistributionError : SimError {
    explicit DistributionError(const std::string& msg) : SimError(msg) {}
};

struct OptimizationError : SimError {
    explicit OptimizationError(const std::string& msg) : SimError(msg) {}
};

struct AggregationError : SimError {
    explicit AggregationError(const std::string& msg) : SimError(msg) {}
};

enum class Strategy : std::uint8_t { Cooperate = 0, Defect = 1, Offline = 2 };

enum class Role : std::uint8_t { Leader = 0, Member = 1, Other = 2 };

inline char strategy_letter(Strategy s) {
    switch (s) {
    case Strategy::Cooperate: return 'C';
    case Strategy::Defect: return 'D';
    case Strategy::Offline: return 'O';
    }
    return '?';
}

inline char role_letter(Role r) {
    switch (r) {
    case Role::Leader: return 'L';
    case Role::Member: return 'M';
    case Role::Other: return 'K';
    }
    return '?';
}

} // namespace bastar
