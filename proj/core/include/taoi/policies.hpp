#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "taoi/model.hpp"
#include "taoi/solver.hpp"

namespace taoi {

/// Seeded 64-bit Mersenne Twister (std::mt19937_64, whose output sequence is
/// fixed by the C++ standard). Draws are derived from raw 64-bit outputs so
/// they do not depend on the standard library's distribution classes:
///   uniform01 = (x >> 11) * 2^-53,   action index = x >> 62.
class RandomStream {
public:
    static constexpr const char* kAlgorithm = "mt19937_64";

    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

/// Expected post-action TAoI of `action`: (1 - p_a) * state + L(a).
double greedy_score(State state, Action action, const SystemConfig& config);

/// Minimizes the expected post-action TAoI (uncapped); canonical tie-break.
Action greedy_action(State state, const SystemConfig& config);

/// Uniform over the four actions, one draw per call.
Action random_action(RandomStream& stream);

/// Uniform interface over solver tables and the baselines.
class DecisionRule {
public:
    enum class Kind { table, greedy, random, constant };

    static DecisionRule table(Policy policy);
    static DecisionRule greedy(const SystemConfig& config);
    static DecisionRule random();
    static DecisionRule constant(Action action);

    Kind kind() const { return kind_; }
    const Policy& policy() const { return policy_; }
    Action action() const { return action_; }
    bool deterministic() const { return kind_ != Kind::random; }
    std::string name() const;

    /// Probability of each action (canonical index) at `state`.
    std::array<double, kNumActions> distribution(State state) const;

private:
    friend Action decide(const DecisionRule& rule, State state, RandomStream& stream);

    Kind kind_ = Kind::constant;
    Policy policy_;
    SystemConfig config_;
    Action action_;
};

/// Table rules throw std::out_of_range for states outside the table.
Action decide(const DecisionRule& rule, State state, RandomStream& stream);

}  // namespace taoi
