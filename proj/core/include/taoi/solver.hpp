#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "taoi/model.hpp"
#include "taoi/uniformize.hpp"

namespace taoi {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relative values over states 1..delta_hat, pinned to zero at the reference state.
struct ValueFunction {
    std::vector<double> values;
    State reference_state = 1;

    double operator()(State s) const { return values[static_cast<std::size_t>(s - 1)]; }
    double& operator()(State s) { return values[static_cast<std::size_t>(s - 1)]; }
    State num_states() const { return static_cast<State>(values.size()); }
};

/// Deterministic stationary policy over states 1..delta_hat.
struct Policy {
    std::vector<Action> actions;

    Action operator()(State s) const { return actions[static_cast<std::size_t>(s - 1)]; }
    Action& operator()(State s) { return actions[static_cast<std::size_t>(s - 1)]; }
    State num_states() const { return static_cast<State>(actions.size()); }

    static Policy constant(State num_states, Action action) {
        return Policy{std::vector<Action>(static_cast<std::size_t>(num_states), action)};
    }
    friend bool operator==(const Policy&, const Policy&) = default;
};

enum class SolveMethod { rvi, rpi_threshold, pi_exhaustive };

std::string to_string(SolveMethod method);

struct SolveReport {
    double gain = 0;
    int iterations = 0;
    double residual = 0;
    double wall_time = 0;  ///< seconds
    SolveMethod method = SolveMethod::rvi;
    bool converged = false;
    long long full_backups = 0;    ///< states where all four actions were compared
    long long shortcut_hits = 0;   ///< states where the threshold action was copied
};

struct Solution {
    ValueFunction value;
    Policy policy;
    SolveReport report;
};

/// Which latency-to-accuracy ratio is smallest, and its action/probability.
struct CaseClassification {
    double l_min = 0;
    Action a_hat;
    double p_hat = 0;
    int case_index = 1;  ///< 1..4, canonical action order
    std::array<double, kNumActions> ratios{};
};

CaseClassification compute_lmin(const LatencyConfig& latency, const AccuracyConfig& accuracy);
inline CaseClassification compute_lmin(const SystemConfig& config) {
    return compute_lmin(config.latency, config.accuracy);
}

/// Relative tolerance under which two Q-values count as tied; ties resolve to
/// the canonical-order-first action.
inline constexpr double kTieTolerance = 1e-9;

/// R(s,a) + sum_s' p(s'|s,a) V(s') on the uniformized kernel.
double q_value(const ValueFunction& value, State state, Action action, const MdpKernel& kernel);

struct Backup {
    Action action;
    double value = 0;
};

/// Canonical-order-first minimizer of q_value at `state`.
Backup bellman_backup(const ValueFunction& value, State state, const MdpKernel& kernel);

/// Greedy policy with respect to `value`.
Policy extract_policy(const ValueFunction& value, const MdpKernel& kernel);

/// Relative value iteration; stops when the span of V_{k+1} - V_k drops to `tol`.
/// A run that hits `max_iter` comes back with report.converged == false.
Solution relative_value_iteration(const MdpKernel& kernel, double tol = 1e-9,
                                  int max_iter = 2'000'000);

struct PolicyEvaluation {
    ValueFunction value;
    double gain = 0;
    double residual = 0;  ///< max Bellman-equation residual relative to max(1, |V|)
};

/// Solves gain + V(s) = R(s, pi(s)) + sum p(s'|s, pi(s)) V(s') with V(ref) = 0.
/// Uses a sparse LU factorization up to kDirectSolveLimit states and a damped
/// fixed-point iteration above. Throws SolverError if `tol` is not met.
PolicyEvaluation policy_evaluation(const Policy& policy, const MdpKernel& kernel, State ref_state,
                                   double tol = 1e-9,
                                   const ValueFunction* warm_start = nullptr);

inline constexpr State kDirectSolveLimit = 20000;

/// Policy iteration from pi_0 = (0,0) that skips the minimization at a state
/// whenever the previous state already took the l_min action.
Solution rpi_threshold(const MdpKernel& kernel, double tol = 1e-9, int max_iter = 1000);
Solution rpi_threshold(const SystemConfig& config, double tol = 1e-9, int max_iter = 1000);

/// Plain policy iteration with a full minimization at every state.
Solution exhaustive_policy_iteration(const MdpKernel& kernel, double tol = 1e-9,
                                     int max_iter = 1000);

/// Highest state checked by the structural verifiers: delta_hat - 2 * max L(a).
State interior_limit(const SystemConfig& config);

struct ValuePropertyReport {
    State interior_end = 0;
    std::vector<State> non_monotone;  ///< V(s+1) < V(s)
    std::vector<State> non_concave;   ///< slope at s exceeds slope at s-1
    std::vector<std::pair<State, State>> slope_bound;  ///< pairs below L(a_hat)/(eps p_hat)
    double slope_lower_bound = 0;

    bool ok() const { return non_monotone.empty() && non_concave.empty() && slope_bound.empty(); }
};

/// Numerical checks on the interior: V non-decreasing, V concave, and
/// V(d2) - V(d1) >= L(a_hat) / (epsilon * p_hat) * (d2 - d1).
ValuePropertyReport verify_value_properties(const ValueFunction& value, const SystemConfig& config,
                                            double tol = 1e-7);

struct ThresholdReport {
    Action a_hat;
    int case_index = 1;
    State interior_end = 0;
    std::optional<State> threshold;  ///< first interior state taking a_hat
    std::vector<std::pair<State, State>> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks that the interior states taking a_hat form an upward-closed set.
ThresholdReport verify_threshold_structure(const Policy& policy, const SystemConfig& config);

}  // namespace taoi
