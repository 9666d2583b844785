#pragma once

#include <vector>

#include "taoi/model.hpp"

namespace taoi {

/// Per-slot cost of the equivalent discrete-time MDP: state + (L(a) - 1) / 2.
double per_step_cost(State state, Action action, const SystemConfig& config);

/// SMDP row with off-diagonal mass scaled by epsilon / L(a) and the remainder
/// placed on a self-loop. Zero-mass entries are dropped.
/// Throws ConfigError if epsilon lies outside (0, min L(a)].
TransitionRow uniformized_transition(State state, Action action, const SystemConfig& config);

/// Dense cost table and sparse transition rows of the uniformized MDP over
/// states 1..delta_hat. Immutable once built.
class MdpKernel {
public:
    explicit MdpKernel(const SystemConfig& config);

    const SystemConfig& config() const { return config_; }
    State num_states() const { return config_.delta_hat; }

    double cost(State state, Action action) const { return costs_[slot(state, action)]; }
    const TransitionRow& row(State state, Action action) const { return rows_[slot(state, action)]; }

    friend bool operator==(const MdpKernel& a, const MdpKernel& b);

private:
    static std::size_t slot(State state, Action action) {
        return static_cast<std::size_t>(state - 1) * kNumActions + action.index();
    }

    SystemConfig config_;
    std::vector<double> costs_;
    std::vector<TransitionRow> rows_;
};

MdpKernel build_kernel(const SystemConfig& config);

}  // namespace taoi
