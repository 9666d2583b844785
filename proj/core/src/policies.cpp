#include "taoi/policies.hpp"

#include <stdexcept>

namespace taoi {

double greedy_score(State state, Action action, const SystemConfig& config) {
    const double p = success_prob(action, config.accuracy);
    const int l = step_duration(action, config.latency);
    return (1.0 - p) * (state + l) + p * l;
}

Action greedy_action(State state, const SystemConfig& config) {
    Action best = kActions[0];
    double best_score = greedy_score(state, best, config);
    for (Action a : kActions) {
        const double score = greedy_score(state, a, config);
        if (score < best_score) {
            best = a;
            best_score = score;
        }
    }
    return best;
}

Action random_action(RandomStream& stream) {
    return Action::from_index(static_cast<int>(stream.next_u64() >> 62));
}

DecisionRule DecisionRule::table(Policy policy) {
    DecisionRule rule;
    rule.kind_ = Kind::table;
    rule.policy_ = std::move(policy);
    return rule;
}

DecisionRule DecisionRule::greedy(const SystemConfig& config) {
    DecisionRule rule;
    rule.kind_ = Kind::greedy;
    rule.config_ = config;
    return rule;
}

DecisionRule DecisionRule::random() {
    DecisionRule rule;
    rule.kind_ = Kind::random;
    return rule;
}

DecisionRule DecisionRule::constant(Action action) {
    DecisionRule rule;
    rule.kind_ = Kind::constant;
    rule.action_ = action;
    return rule;
}

std::string DecisionRule::name() const {
    switch (kind_) {
        case Kind::table: return "optimal";
        case Kind::greedy: return "greedy";
        case Kind::random: return "random";
        case Kind::constant:
            return "constant:" + std::to_string(action_.resolution) + std::to_string(action_.model);
    }
    return "unknown";
}

std::array<double, kNumActions> DecisionRule::distribution(State state) const {
    std::array<double, kNumActions> out{};
    switch (kind_) {
        case Kind::random:
            out.fill(1.0 / kNumActions);
            return out;
        case Kind::table:
            if (state < 1 || state > policy_.num_states()) {
                throw std::out_of_range("decision table has no entry for state " +
                                        std::to_string(state));
            }
            out[static_cast<std::size_t>(policy_(state).index())] = 1.0;
            return out;
        case Kind::greedy:
            out[static_cast<std::size_t>(greedy_action(state, config_).index())] = 1.0;
            return out;
        case Kind::constant:
            out[static_cast<std::size_t>(action_.index())] = 1.0;
            return out;
    }
    return out;
}

Action decide(const DecisionRule& rule, State state, RandomStream& stream) {
    switch (rule.kind_) {
        case DecisionRule::Kind::table:
            if (state < 1 || state > rule.policy_.num_states()) {
                throw std::out_of_range("decision table has no entry for state " +
                                        std::to_string(state));
            }
            return rule.policy_(state);
        case DecisionRule::Kind::greedy: return greedy_action(state, rule.config_);
        case DecisionRule::Kind::random: return random_action(stream);
        case DecisionRule::Kind::constant: return rule.action_;
    }
    return rule.action_;
}

}  // namespace taoi
