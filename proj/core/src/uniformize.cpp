#include "taoi/uniformize.hpp"

#include <cmath>

namespace taoi {

double per_step_cost(State state, Action action, const SystemConfig& config) {
    const int l = step_duration(action, config.latency);
    return static_cast<double>(state) + 0.5 * static_cast<double>(l - 1);
}

TransitionRow uniformized_transition(State state, Action action, const SystemConfig& config) {
    const int min_l = min_step_duration(config.latency);
    if (!(std::isfinite(config.epsilon) && config.epsilon > 0.0 && config.epsilon <= min_l)) {
        throw ConfigError("epsilon must lie in (0, min L(a)] = (0, " + std::to_string(min_l) + "]");
    }
    const double scale = config.epsilon / step_duration(action, config.latency);

    TransitionRow out;
    double moved = 0;
    for (const auto& e : transition_distribution(state, action, config)) {
        if (e.next == state) {
            continue;  // folds into the self-loop below
        }
        const double prob = scale * e.prob;
        if (prob > 0) {
            out.push(e.next, prob);
            moved += prob;
        }
    }
    // Rounding residue below this is not a real self-loop.
    const double stay = 1.0 - moved;
    if (stay > 1e-14) {
        out.push(state, stay);
    }
    return out;
}

MdpKernel::MdpKernel(const SystemConfig& config) : config_(config) {
    config_.validate();
    const auto n = static_cast<std::size_t>(config_.delta_hat);
    costs_.resize(n * kNumActions);
    rows_.resize(n * kNumActions);
    for (State s = 1; s <= config_.delta_hat; ++s) {
        for (Action a : kActions) {
            costs_[slot(s, a)] = per_step_cost(s, a, config_);
            rows_[slot(s, a)] = uniformized_transition(s, a, config_);
        }
    }
}

bool operator==(const MdpKernel& a, const MdpKernel& b) {
    if (!(a.config_ == b.config_) || a.costs_ != b.costs_ || a.rows_.size() != b.rows_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.rows_.size(); ++i) {
        const auto& ra = a.rows_[i];
        const auto& rb = b.rows_[i];
        if (ra.size != rb.size) {
            return false;
        }
        for (int k = 0; k < ra.size; ++k) {
            if (ra.entries[k].next != rb.entries[k].next || ra.entries[k].prob != rb.entries[k].prob) {
                return false;
            }
        }
    }
    return true;
}

MdpKernel build_kernel(const SystemConfig& config) { return MdpKernel(config); }

}  // namespace taoi
