#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace taoi {

/// Raised when a problem instance violates one of its invariants.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// TAoI measured in slots at the start of a decision epoch, 1..delta_hat.
using State = std::int32_t;

/// Transmission (t1u, t2u) and inference (t1c, t2c) latencies, in slots.
struct LatencyConfig {
    int t1u = 1;
    int t2u = 2;
    int t1c = 1;
    int t2c = 2;

    void validate() const;
    friend bool operator==(const LatencyConfig&, const LatencyConfig&) = default;
};

/// Probability of a correct inference for each (resolution, model) pair.
struct AccuracyConfig {
    double p_s = 1.0;  ///< low resolution, small model
    double q_s = 1.0;  ///< high resolution, small model
    double p_l = 1.0;  ///< low resolution, large model
    double q_l = 1.0;  ///< high resolution, large model

    void validate() const;
    friend bool operator==(const AccuracyConfig&, const AccuracyConfig&) = default;
};

/// One of the four (resolution, model) decisions.
struct Action {
    std::uint8_t resolution = 0;  ///< 0 = low, 1 = high
    std::uint8_t model = 0;       ///< 0 = small, 1 = large

    /// Position in the canonical order (0,0), (1,0), (0,1), (1,1).
    constexpr int index() const { return resolution + 2 * model; }
    static constexpr Action from_index(int i) {
        return Action{static_cast<std::uint8_t>(i & 1), static_cast<std::uint8_t>((i >> 1) & 1)};
    }

    std::string to_string() const;
    friend constexpr bool operator==(const Action&, const Action&) = default;
};

inline constexpr int kNumActions = 4;

/// All actions in canonical order; every minimization breaks ties by this order.
inline constexpr std::array<Action, kNumActions> kActions = {
    Action{0, 0}, Action{1, 0}, Action{0, 1}, Action{1, 1}};

struct SystemConfig {
    LatencyConfig latency;
    AccuracyConfig accuracy;
    State delta_hat = 0;  ///< TAoI cap
    double epsilon = 0;   ///< uniformization constant

    /// Builds a validated config. delta_hat defaults to 100 * max L(a) and
    /// epsilon to min L(a).
    static SystemConfig make(const LatencyConfig& latency, const AccuracyConfig& accuracy,
                             std::optional<State> delta_hat = std::nullopt,
                             std::optional<double> epsilon = std::nullopt);

    void validate() const;
    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct TransitionEntry {
    State next = 0;
    double prob = 0;
};

/// At most three outcomes: reset, failure, and (after uniformization) a self-loop.
struct TransitionRow {
    std::array<TransitionEntry, 3> entries{};
    int size = 0;

    void push(State next, double prob);
    const TransitionEntry* begin() const { return entries.data(); }
    const TransitionEntry* end() const { return entries.data() + size; }
    double total() const;
};

/// L(a): slots spent on transmission plus inference.
int step_duration(Action action, const LatencyConfig& latency);
int min_step_duration(const LatencyConfig& latency);
int max_step_duration(const LatencyConfig& latency);

double success_prob(Action action, const AccuracyConfig& accuracy);

/// TAoI at the next decision epoch. A correct inference resets TAoI to the
/// step duration; otherwise it grows by the step duration, capped at delta_hat.
State next_state(State state, Action action, bool success, const SystemConfig& config);

/// Two-outcome SMDP row (merged into one entry if both targets coincide).
TransitionRow transition_distribution(State state, Action action, const SystemConfig& config);

/// Sum of per-slot TAoI over one step: L * (state + (L - 1) / 2).
double smdp_cost(State state, Action action, const SystemConfig& config);

}  // namespace taoi
