#include "taoi/model.hpp"

#include <algorithm>
#include <cmath>

namespace taoi {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ConfigError(message);
    }
}

void check_probability(double value, const char* name) {
    require(std::isfinite(value) && value > 0.0 && value <= 1.0,
            std::string(name) + " must lie in (0, 1], got " + std::to_string(value));
}

}  // namespace

void LatencyConfig::validate() const {
    require(t1u >= 1 && t2u >= 1 && t1c >= 1 && t2c >= 1, "latencies must be at least one slot");
    require(t1u < t2u, "t1u must be less than t2u");
    require(t1c < t2c, "t1c must be less than t2c");
}

void AccuracyConfig::validate() const {
    check_probability(p_s, "p_s");
    check_probability(q_s, "q_s");
    check_probability(p_l, "p_l");
    check_probability(q_l, "q_l");
}

std::string Action::to_string() const {
    return "(" + std::to_string(resolution) + "," + std::to_string(model) + ")";
}

SystemConfig SystemConfig::make(const LatencyConfig& latency, const AccuracyConfig& accuracy,
                                std::optional<State> delta_hat, std::optional<double> epsilon) {
    latency.validate();
    SystemConfig config;
    config.latency = latency;
    config.accuracy = accuracy;
    config.delta_hat = delta_hat.value_or(100 * max_step_duration(latency));
    config.epsilon = epsilon.value_or(static_cast<double>(min_step_duration(latency)));
    config.validate();
    return config;
}

void SystemConfig::validate() const {
    latency.validate();
    accuracy.validate();
    const int max_l = max_step_duration(latency);
    require(delta_hat >= 10 * max_l, "delta_hat must be at least 10 * max L(a) = " +
                                         std::to_string(10 * max_l) + ", got " +
                                         std::to_string(delta_hat));
    const int min_l = min_step_duration(latency);
    require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon <= min_l,
            "epsilon must lie in (0, min L(a)] = (0, " + std::to_string(min_l) + "]");
}

void TransitionRow::push(State next, double prob) {
    for (int i = 0; i < size; ++i) {
        if (entries[i].next == next) {
            entries[i].prob += prob;
            return;
        }
    }
    entries[size++] = TransitionEntry{next, prob};
}

double TransitionRow::total() const {
    double sum = 0;
    for (const auto& e : *this) {
        sum += e.prob;
    }
    return sum;
}

int step_duration(Action action, const LatencyConfig& latency) {
    const int transmit = action.resolution ? latency.t2u : latency.t1u;
    const int infer = action.model ? latency.t2c : latency.t1c;
    return transmit + infer;
}

int min_step_duration(const LatencyConfig& latency) {
    // t1u < t2u and t1c < t2c make (0,0) the shortest step, but the config may
    // not be validated yet.
    int best = step_duration(kActions[0], latency);
    for (Action a : kActions) {
        best = std::min(best, step_duration(a, latency));
    }
    return best;
}

int max_step_duration(const LatencyConfig& latency) {
    int best = step_duration(kActions[0], latency);
    for (Action a : kActions) {
        best = std::max(best, step_duration(a, latency));
    }
    return best;
}

double success_prob(Action action, const AccuracyConfig& accuracy) {
    switch (action.index()) {
        case 0: return accuracy.p_s;
        case 1: return accuracy.q_s;
        case 2: return accuracy.p_l;
        default: return accuracy.q_l;
    }
}

State next_state(State state, Action action, bool success, const SystemConfig& config) {
    const int duration = step_duration(action, config.latency);
    if (success) {
        return duration;
    }
    return std::min<State>(state + duration, config.delta_hat);
}

TransitionRow transition_distribution(State state, Action action, const SystemConfig& config) {
    const double p = success_prob(action, config.accuracy);
    TransitionRow row;
    row.push(next_state(state, action, true, config), p);
    if (p < 1.0) {
        row.push(next_state(state, action, false, config), 1.0 - p);
    }
    return row;
}

double smdp_cost(State state, Action action, const SystemConfig& config) {
    const long long l = step_duration(action, config.latency);
    return static_cast<double>(l * state + l * (l - 1) / 2);
}

}  // namespace taoi
