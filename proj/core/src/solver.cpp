#include "taoi/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "sparse_lu.hpp"

namespace taoi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

double q_raw(const std::vector<double>& v, State s, Action a, const MdpKernel& kernel) {
    double q = kernel.cost(s, a);
    for (const auto& e : kernel.row(s, a)) {
        q += e.prob * v[static_cast<std::size_t>(e.next - 1)];
    }
    return q;
}

// Bellman-equation residual of (gain, V) under `policy`, relative to max(1, |V|).
double evaluation_residual(const Policy& policy, const MdpKernel& kernel,
                           const std::vector<double>& v, double gain) {
    double worst = 0;
    for (State s = 1; s <= kernel.num_states(); ++s) {
        const double r = gain + v[static_cast<std::size_t>(s - 1)] - q_raw(v, s, policy(s), kernel);
        worst = std::max(worst, std::abs(r));
    }
    return worst / std::max(1.0, max_abs(v));
}

PolicyEvaluation evaluate_direct(const Policy& policy, const MdpKernel& kernel, State ref) {
    const State n = kernel.num_states();
    const int ref_col = ref - 1;

    // Column ref_col carries the gain in place of the pinned V(ref) = 0.
    detail::Triplets triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 5);
    std::vector<double> rhs(static_cast<std::size_t>(n));
    for (State s = 1; s <= n; ++s) {
        const int row = s - 1;
        const Action a = policy(s);
        rhs[static_cast<std::size_t>(row)] = kernel.cost(s, a);
        triplets.emplace_back(row, ref_col, 1.0);
        if (s != ref) {
            triplets.emplace_back(row, row, 1.0);
        }
        for (const auto& e : kernel.row(s, a)) {
            if (e.next != ref) {
                triplets.emplace_back(row, e.next - 1, -e.prob);
            }
        }
    }

    std::vector<double> x;
    if (!detail::sparse_lu_solve(n, triplets, rhs, x)) {
        throw SolverError("policy evaluation: sparse factorization failed");
    }
    PolicyEvaluation out;
    out.gain = x[static_cast<std::size_t>(ref_col)];
    x[static_cast<std::size_t>(ref_col)] = 0.0;
    out.value = ValueFunction{std::move(x), ref};
    return out;
}

PolicyEvaluation evaluate_fixed_point(const Policy& policy, const MdpKernel& kernel, State ref,
                                      double tol, const ValueFunction* warm_start) {
    constexpr double kDamping = 0.5;
    constexpr long kMaxSweeps = 50'000'000;
    const State n = kernel.num_states();
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    if (warm_start != nullptr && warm_start->num_states() == n) {
        v = warm_start->values;
        const double shift = v[static_cast<std::size_t>(ref - 1)];
        for (double& x : v) {
            x -= shift;
        }
    }
    std::vector<double> w(v.size());
    double gain = 0;
    for (long sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (State s = 1; s <= n; ++s) {
            const auto i = static_cast<std::size_t>(s - 1);
            w[i] = q_raw(v, s, policy(s), kernel);
            lo = std::min(lo, w[i] - v[i]);
            hi = std::max(hi, w[i] - v[i]);
        }
        gain = w[static_cast<std::size_t>(ref - 1)];
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = (1.0 - kDamping) * v[i] + kDamping * (w[i] - gain);
        }
        if (hi - lo <= tol * std::max(1.0, max_abs(v))) {
            break;
        }
    }
    PolicyEvaluation out;
    out.value = ValueFunction{std::move(v), ref};
    out.gain = gain;
    return out;
}

Solution policy_iteration(const MdpKernel& kernel, double tol, int max_iter, bool use_threshold) {
    const auto start = Clock::now();
    const SystemConfig& config = kernel.config();
    const State n = kernel.num_states();
    const Action a_hat = compute_lmin(config).a_hat;
    constexpr State kRef = 1;

    Solution out;
    out.report.method = use_threshold ? SolveMethod::rpi_threshold : SolveMethod::pi_exhaustive;
    Policy current = Policy::constant(n, Action{0, 0});
    const ValueFunction* warm = nullptr;
    for (int iter = 1; iter <= max_iter; ++iter) {
        PolicyEvaluation eval = policy_evaluation(current, kernel, kRef, tol, warm);
        out.value = std::move(eval.value);
        out.report.gain = eval.gain;
        out.report.residual = eval.residual;
        out.report.iterations = iter;
        warm = &out.value;

        Policy next = current;
        for (State s = 1; s <= n; ++s) {
            if (use_threshold && s > 1 && next(s - 1) == a_hat) {
                next(s) = a_hat;
                ++out.report.shortcut_hits;
                continue;
            }
            next(s) = bellman_backup(out.value, s, kernel).action;
            ++out.report.full_backups;
        }
        if (next == current) {
            out.report.converged = true;
            break;
        }
        current = std::move(next);
    }
    out.policy = std::move(current);
    out.report.wall_time = seconds_since(start);
    return out;
}

}  // namespace

std::string to_string(SolveMethod method) {
    switch (method) {
        case SolveMethod::rvi: return "rvi";
        case SolveMethod::rpi_threshold: return "rpi-threshold";
        case SolveMethod::pi_exhaustive: return "pi-exhaustive";
    }
    return "unknown";
}

CaseClassification compute_lmin(const LatencyConfig& latency, const AccuracyConfig& accuracy) {
    CaseClassification out;
    out.l_min = std::numeric_limits<double>::infinity();
    for (Action a : kActions) {
        const double p = success_prob(a, accuracy);
        if (!(p > 0.0)) {
            throw ConfigError("compute_lmin: success probability of " + a.to_string() +
                              " must be positive");
        }
        const double ratio = step_duration(a, latency) / p;
        out.ratios[static_cast<std::size_t>(a.index())] = ratio;
        if (ratio < out.l_min) {
            out.l_min = ratio;
            out.a_hat = a;
            out.p_hat = p;
            out.case_index = a.index() + 1;
        }
    }
    return out;
}

double q_value(const ValueFunction& value, State state, Action action, const MdpKernel& kernel) {
    return q_raw(value.values, state, action, kernel);
}

Backup bellman_backup(const ValueFunction& value, State state, const MdpKernel& kernel) {
    std::array<double, kNumActions> q{};
    double best = std::numeric_limits<double>::infinity();
    for (Action a : kActions) {
        q[static_cast<std::size_t>(a.index())] = q_value(value, state, a, kernel);
        best = std::min(best, q[static_cast<std::size_t>(a.index())]);
    }
    const double slack = kTieTolerance * std::max(1.0, std::abs(best));
    for (Action a : kActions) {
        const double qa = q[static_cast<std::size_t>(a.index())];
        if (qa <= best + slack) {
            return Backup{a, qa};
        }
    }
    return Backup{kActions[0], q[0]};
}

Policy extract_policy(const ValueFunction& value, const MdpKernel& kernel) {
    Policy policy = Policy::constant(kernel.num_states(), Action{0, 0});
    for (State s = 1; s <= kernel.num_states(); ++s) {
        policy(s) = bellman_backup(value, s, kernel).action;
    }
    return policy;
}

Solution relative_value_iteration(const MdpKernel& kernel, double tol, int max_iter) {
    if (!(tol > 0)) {
        throw SolverError("relative_value_iteration: tol must be positive");
    }
    const auto start = Clock::now();
    const State n = kernel.num_states();
    constexpr State kRef = 1;

    Solution out;
    out.report.method = SolveMethod::rvi;
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<double> tv(v.size());
    for (int iter = 1; iter <= max_iter; ++iter) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (State s = 1; s <= n; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (Action a : kActions) {
                best = std::min(best, q_raw(v, s, a, kernel));
            }
            const auto i = static_cast<std::size_t>(s - 1);
            tv[i] = best;
            lo = std::min(lo, best - v[i]);
            hi = std::max(hi, best - v[i]);
        }
        const double gain = tv[static_cast<std::size_t>(kRef - 1)];
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = tv[i] - gain;
        }
        out.report.gain = gain;
        out.report.residual = hi - lo;
        out.report.iterations = iter;
        out.report.full_backups += n;
        if (hi - lo <= tol) {
            out.report.converged = true;
            break;
        }
    }
    out.value = ValueFunction{std::move(v), kRef};
    out.policy = extract_policy(out.value, kernel);
    out.report.wall_time = seconds_since(start);
    return out;
}

PolicyEvaluation policy_evaluation(const Policy& policy, const MdpKernel& kernel, State ref_state,
                                   double tol, const ValueFunction* warm_start) {
    const State n = kernel.num_states();
    if (policy.num_states() != n) {
        throw SolverError("policy_evaluation: policy covers " +
                          std::to_string(policy.num_states()) + " states, kernel has " +
                          std::to_string(n));
    }
    if (ref_state < 1 || ref_state > n) {
        throw SolverError("policy_evaluation: reference state out of range");
    }
    PolicyEvaluation out = n <= kDirectSolveLimit
                               ? evaluate_direct(policy, kernel, ref_state)
                               : evaluate_fixed_point(policy, kernel, ref_state, tol, warm_start);
    out.residual = evaluation_residual(policy, kernel, out.value.values, out.gain);
    if (!(out.residual <= tol)) {
        throw SolverError("policy_evaluation: residual " + std::to_string(out.residual) +
                          " exceeds tolerance " + std::to_string(tol));
    }
    return out;
}

Solution rpi_threshold(const MdpKernel& kernel, double tol, int max_iter) {
    return policy_iteration(kernel, tol, max_iter, true);
}

Solution rpi_threshold(const SystemConfig& config, double tol, int max_iter) {
    return rpi_threshold(build_kernel(config), tol, max_iter);
}

Solution exhaustive_policy_iteration(const MdpKernel& kernel, double tol, int max_iter) {
    return policy_iteration(kernel, tol, max_iter, false);
}

State interior_limit(const SystemConfig& config) {
    return config.delta_hat - 2 * max_step_duration(config.latency);
}

ValuePropertyReport verify_value_properties(const ValueFunction& value, const SystemConfig& config,
                                            double tol) {
    ValuePropertyReport report;
    report.interior_end = std::min(interior_limit(config), value.num_states() - 1);
    const State end = report.interior_end;
    const auto lmin = compute_lmin(config);
    const double bound = step_duration(lmin.a_hat, config.latency) / (config.epsilon * lmin.p_hat);
    report.slope_lower_bound = bound;

    for (State d = 1; d <= end; ++d) {
        if (value(d + 1) < value(d) - tol) {
            report.non_monotone.push_back(d);
        }
        if (d >= 2 && value(d + 1) - value(d) > value(d) - value(d - 1) + tol) {
            report.non_concave.push_back(d);
        }
    }

    auto check_pair = [&](State d1, State d2) {
        if (value(d2) - value(d1) < bound * (d2 - d1) - tol) {
            report.slope_bound.emplace_back(d1, d2);
        }
    };
    for (State d = 1; d < end; ++d) {
        check_pair(d, d + 1);
    }
    const int stride = max_step_duration(config.latency);
    for (State d2 = 1 + stride; d2 <= end; d2 += stride) {
        check_pair(1, d2);
    }
    return report;
}

ThresholdReport verify_threshold_structure(const Policy& policy, const SystemConfig& config) {
    const auto lmin = compute_lmin(config);
    ThresholdReport report;
    report.a_hat = lmin.a_hat;
    report.case_index = lmin.case_index;
    report.interior_end = std::min(interior_limit(config), policy.num_states());
    for (State d = 1; d <= report.interior_end; ++d) {
        if (policy(d) == lmin.a_hat) {
            if (!report.threshold) {
                report.threshold = d;
            }
        } else if (report.threshold) {
            report.violations.emplace_back(*report.threshold, d);
        }
    }
    return report;
}

}  // namespace taoi
