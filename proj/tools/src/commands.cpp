#include "taoi/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "taoi/evaluate.hpp"
#include "taoi/policies.hpp"

namespace taoi::cli {

namespace {

std::string describe(const SystemConfig& sys) {
    std::ostringstream os;
    os << "t1u=" << sys.latency.t1u << " t2u=" << sys.latency.t2u << " t1c=" << sys.latency.t1c
       << " t2c=" << sys.latency.t2c << " p_s=" << format_real(sys.accuracy.p_s)
       << " q_s=" << format_real(sys.accuracy.q_s) << " p_l=" << format_real(sys.accuracy.p_l)
       << " q_l=" << format_real(sys.accuracy.q_l) << " delta_hat=" << sys.delta_hat
       << " epsilon=" << format_real(sys.epsilon);
    return os.str();
}

std::string describe(const CaseClassification& c) {
    std::ostringstream os;
    os << "case " << c.case_index << " a_hat=" << c.a_hat.to_string()
       << " p_hat=" << format_real(c.p_hat) << " l_min=" << format_real(c.l_min) << " ratios=";
    for (std::size_t i = 0; i < c.ratios.size(); ++i) {
        os << (i ? "," : "") << format_real(c.ratios[i]);
    }
    return os.str();
}

std::string describe(const SolveReport& r) {
    std::ostringstream os;
    os << to_string(r.method) << ": gain=" << format_real(r.gain) << " iterations=" << r.iterations
       << " full_backups=" << r.full_backups << " shortcut_hits=" << r.shortcut_hits
       << " residual=" << format_real(r.residual) << " converged=" << (r.converged ? "yes" : "no");
    return os.str();
}

template <typename T>
std::string list_head(const std::vector<T>& items, std::size_t limit = 10) {
    std::ostringstream os;
    for (std::size_t i = 0; i < std::min(limit, items.size()); ++i) {
        if constexpr (std::is_same_v<T, State>) {
            os << (i ? " " : "") << items[i];
        } else {
            os << (i ? " " : "") << "(" << items[i].first << "," << items[i].second << ")";
        }
    }
    if (items.size() > limit) {
        os << " ...";
    }
    return os.str();
}

Policy greedy_table(const SystemConfig& sys) {
    Policy p = Policy::constant(sys.delta_hat, Action{0, 0});
    for (State s = 1; s <= sys.delta_hat; ++s) {
        p(s) = greedy_action(s, sys);
    }
    return p;
}

DecisionRule make_rule(const PolicySpec& spec, const SystemConfig& sys, const Policy& optimal) {
    switch (spec.kind) {
        case PolicySpec::Kind::optimal: return DecisionRule::table(optimal);
        case PolicySpec::Kind::greedy: return DecisionRule::greedy(sys);
        case PolicySpec::Kind::random: return DecisionRule::random();
        case PolicySpec::Kind::constant: return DecisionRule::constant(spec.action);
    }
    return DecisionRule::random();
}

std::optional<State> threshold_of(const PolicySpec& spec, const SystemConfig& sys,
                                  const Policy& optimal, Action a_hat) {
    switch (spec.kind) {
        case PolicySpec::Kind::optimal: return first_state_with(optimal, a_hat);
        case PolicySpec::Kind::greedy: return first_state_with(greedy_table(sys), a_hat);
        case PolicySpec::Kind::constant:
            return spec.action == a_hat ? std::optional<State>(1) : std::nullopt;
        case PolicySpec::Kind::random: return std::nullopt;
    }
    return std::nullopt;
}

Solution solve_or_throw(const MdpKernel& kernel) {
    Solution sol = rpi_threshold(kernel, kSolveTolerance);
    if (!sol.report.converged) {
        throw SolverError("rpi-threshold did not converge after " +
                          std::to_string(sol.report.iterations) + " iterations");
    }
    return sol;
}

std::vector<ResultRow> sweep_point(const ExperimentConfig& config, double value) {
    std::vector<ResultRow> rows;
    try {
        const SystemConfig sys = config.system_at(value);
        const MdpKernel kernel = build_kernel(sys);
        const Solution sol = solve_or_throw(kernel);
        const CaseClassification lmin = compute_lmin(sys);
        for (const auto& spec : config.policies) {
            ResultRow row;
            row.sweep_value = value;
            row.policy = spec.name();
            row.lmin_case = lmin.case_index;
            try {
                const DecisionRule rule = make_rule(spec, sys, sol.policy);
                row.exact_gain = exact_average(rule, sys).gain;
                const SimResult sim = simulate(rule, sys, config.seed, config.horizon_steps);
                row.mc_avg = sim.avg_taoi_per_slot;
                row.mc_avg_eq7 = sim.avg_start_of_step_taoi_per_slot;
                row.threshold_state = threshold_of(spec, sys, sol.policy, lmin.a_hat);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        rows.clear();
        for (const auto& spec : config.policies) {
            ResultRow row;
            row.sweep_value = value;
            row.policy = spec.name();
            row.error = e.what();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

std::string format_real(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string format_row(const ResultRow& row) {
    std::ostringstream os;
    os << format_real(row.sweep_value) << ',' << row.policy << ',';
    if (!row.error.empty()) {
        os << "nan,nan,nan," << row.lmin_case << ",failed";
        return os.str();
    }
    os << format_real(row.exact_gain) << ',' << format_real(row.mc_avg) << ','
       << format_real(row.mc_avg_eq7) << ',' << row.lmin_case << ',';
    if (row.threshold_state) {
        os << *row.threshold_state;
    } else {
        os << "none";
    }
    return os.str();
}

std::vector<ResultRow> compute_sweep(const ExperimentConfig& config, unsigned jobs) {
    const std::vector<double> values =
        config.sweep ? config.sweep->values : std::vector<double>{0.0};
    std::vector<std::vector<ResultRow>> per_point(values.size());
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(values.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            per_point[i] = sweep_point(config, values[i]);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }

    std::vector<ResultRow> rows;
    for (auto& point : per_point) {
        std::move(point.begin(), point.end(), std::back_inserter(rows));
    }
    return rows;
}

std::string render_sweep(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                         const std::string& timestamp) {
    std::ostringstream os;
    os << "# generated " << timestamp << '\n';
    os << "# run=" << config.label;
    if (config.sweep) {
        os << " sweep_param=" << config.sweep->param << " sweep_values=";
        for (std::size_t i = 0; i < config.sweep->values.size(); ++i) {
            os << (i ? "," : "") << format_real(config.sweep->values[i]);
        }
    }
    os << " seed=" << config.seed << " horizon_steps=" << config.horizon_steps
       << " rng=" << RandomStream::kAlgorithm << '\n';
    const SystemConfig base = config.base_system();
    os << "# base " << describe(base)
       << " delta_hat_rule=" << (config.delta_hat ? "fixed" : "100*maxL")
       << " epsilon_rule=" << (config.epsilon ? "fixed" : "minL") << '\n';
    os << kCsvHeader << '\n';
    for (const auto& row : rows) {
        os << format_row(row) << '\n';
    }
    return os.str();
}

std::string write_policy_table(const Policy& policy) {
    std::ostringstream os;
    os << "delta,a_u,a_c\n";
    for (State s = 1; s <= policy.num_states(); ++s) {
        os << s << ',' << int(policy(s).resolution) << ',' << int(policy(s).model) << '\n';
    }
    return os.str();
}

Policy read_policy_table(std::string_view text, State delta_hat, const std::string& source) {
    using Kind = ConfigParseError::Kind;
    Policy policy = Policy::constant(delta_hat, Action{0, 0});
    std::vector<bool> seen(static_cast<std::size_t>(delta_hat), false);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header) {
            if (line != "delta,a_u,a_c") {
                throw ConfigParseError(Kind::syntax, source, line_no,
                                       "expected header 'delta,a_u,a_c'");
            }
            header = true;
            continue;
        }
        long long s = 0;
        int u = 0;
        int c = 0;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lld,%d,%d%c", &s, &u, &c, &tail) != 3) {
            throw ConfigParseError(Kind::syntax, source, line_no, "expected 'delta,a_u,a_c'");
        }
        if (s < 1 || s > delta_hat) {
            throw ConfigParseError(Kind::invalid_value, source, line_no,
                                   "state " + std::to_string(s) + " outside 1.." +
                                       std::to_string(delta_hat));
        }
        if ((u != 0 && u != 1) || (c != 0 && c != 1)) {
            throw ConfigParseError(Kind::invalid_value, source, line_no, "action flags must be 0 or 1");
        }
        if (seen[static_cast<std::size_t>(s - 1)]) {
            throw ConfigParseError(Kind::invalid_value, source, line_no,
                                   "state " + std::to_string(s) + " listed twice");
        }
        seen[static_cast<std::size_t>(s - 1)] = true;
        policy(static_cast<State>(s)) =
            Action{static_cast<std::uint8_t>(u), static_cast<std::uint8_t>(c)};
    }
    const auto missing = std::find(seen.begin(), seen.end(), false);
    if (!header || missing != seen.end()) {
        const auto first = static_cast<long>(missing - seen.begin()) + 1;
        throw ConfigParseError(Kind::invalid_value, source, 0,
                               header ? "no action for state " + std::to_string(first)
                                      : std::string("empty policy table"));
    }
    return policy;
}

std::optional<State> first_state_with(const Policy& policy, Action action) {
    for (State s = 1; s <= policy.num_states(); ++s) {
        if (policy(s) == action) {
            return s;
        }
    }
    return std::nullopt;
}

int run_solve(const ExperimentConfig& config, const SolveOptions& options, std::ostream& out,
              std::ostream& err) {
    const SystemConfig sys = config.base_system();
    const MdpKernel kernel = build_kernel(sys);
    const CaseClassification lmin = compute_lmin(sys);
    Solution sol;
    try {
        sol = solve_or_throw(kernel);
    } catch (const std::exception& e) {
        err << "solve failed: " << e.what() << '\n';
        return kExitFailure;
    }

    out << "config: " << describe(sys) << '\n';
    out << "l_min: " << describe(lmin) << '\n';
    out << describe(sol.report) << '\n';
    const auto threshold = first_state_with(sol.policy, lmin.a_hat);
    out << "threshold_state: " << (threshold ? std::to_string(*threshold) : "none") << '\n';
    out << "policy:\n";
    for (State s = 1; s <= sol.policy.num_states();) {
        State e = s;
        while (e < sol.policy.num_states() && sol.policy(e + 1) == sol.policy(s)) {
            ++e;
        }
        out << "  " << s << "-" << e << " " << sol.policy(s).to_string() << '\n';
        s = e + 1;
    }

    int status = kExitOk;
    if (options.verify) {
        const State end = interior_limit(sys);
        auto agree = [&](const Solution& other) {
            int differing = 0;
            for (State s = 1; s <= end; ++s) {
                differing += sol.policy(s) == other.policy(s) ? 0 : 1;
            }
            const double rel = std::abs(other.report.gain - sol.report.gain) /
                               std::max(1.0, std::abs(sol.report.gain));
            const bool ok = other.report.converged && differing == 0 && rel <= kGainAgreement;
            out << "agreement " << to_string(other.report.method) << ": " << (ok ? "PASS" : "FAIL")
                << " (differing interior states " << differing << ", relative gain gap "
                << format_real(rel) << ")\n";
            return ok;
        };
        const Solution rvi = relative_value_iteration(kernel, kSolveTolerance);
        const Solution pi = exhaustive_policy_iteration(kernel, kSolveTolerance);
        out << describe(rvi.report) << '\n' << describe(pi.report) << '\n';
        const bool ok_rvi = agree(rvi);
        const bool ok_pi = agree(pi);
        const ThresholdReport th = verify_threshold_structure(sol.policy, sys);
        out << "threshold structure: " << (th.ok() ? "PASS" : "FAIL") << " (a_hat="
            << th.a_hat.to_string() << ", interior 1.." << th.interior_end << ", violations "
            << th.violations.size() << ")\n";
        if (!(ok_rvi && ok_pi && th.ok())) {
            status = kExitFailure;
        }
    }

    if (!config.output_path.empty()) {
        std::ofstream file(config.output_path, std::ios::binary);
        if (!file) {
            err << "cannot write " << config.output_path << '\n';
            return kExitFailure;
        }
        file << write_policy_table(sol.policy);
    }
    return status;
}

int run_sweep(const ExperimentConfig& config, unsigned jobs, std::ostream& out, std::ostream& err) {
    if (!config.sweep) {
        err << "sweep: config has no sweep_param / sweep_values\n";
        return kExitUsage;
    }
    const auto rows = compute_sweep(config, jobs);
    char stamp[64] = "unknown";
    const std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const std::string doc = render_sweep(config, rows, stamp);

    int status = kExitOk;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            err << "point " << format_real(row.sweep_value) << " (" << row.policy
                << ") failed: " << row.error << '\n';
            status = kExitFailure;
        }
    }
    if (config.output_path.empty()) {
        out << doc;
    } else {
        std::ofstream file(config.output_path, std::ios::binary);
        if (!file) {
            err << "cannot write " << config.output_path << '\n';
            return kExitFailure;
        }
        file << doc;
        out << "wrote " << rows.size() << " rows to " << config.output_path << '\n';
    }
    return status;
}

int run_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    const SystemConfig sys = config.base_system();
    std::optional<Solution> sol;
    std::ostringstream doc;
    doc << "policy,seed,steps,slots,avg_taoi_per_slot,avg_start_of_step_taoi_per_slot,"
           "success_rate,exact_gain,rng\n";
    try {
        for (const auto& spec : config.policies) {
            if (spec.kind == PolicySpec::Kind::optimal && !sol) {
                sol = solve_or_throw(build_kernel(sys));
            }
            const DecisionRule rule =
                make_rule(spec, sys, sol ? sol->policy : Policy::constant(sys.delta_hat, {}));
            const SimResult r = simulate(rule, sys, config.seed, config.horizon_steps);
            const ExactResult exact = exact_average(rule, sys);
            doc << spec.name() << ',' << r.seed << ',' << r.total_steps << ',' << r.total_slots
                << ',' << format_real(r.avg_taoi_per_slot) << ','
                << format_real(r.avg_start_of_step_taoi_per_slot) << ','
                << format_real(r.success_rate) << ',' << format_real(exact.gain) << ','
                << RandomStream::kAlgorithm << '\n';
        }
    } catch (const std::exception& e) {
        err << "simulate failed: " << e.what() << '\n';
        return kExitFailure;
    }
    if (config.output_path.empty()) {
        out << doc.str();
    } else {
        std::ofstream file(config.output_path, std::ios::binary);
        if (!file) {
            err << "cannot write " << config.output_path << '\n';
            return kExitFailure;
        }
        file << doc.str();
    }
    return kExitOk;
}

int run_verify(const ExperimentConfig& config, const std::optional<std::string>& policy_text,
               const std::string& policy_source, std::ostream& out, std::ostream& err) {
    const SystemConfig sys = config.base_system();
    const MdpKernel kernel = build_kernel(sys);
    Policy policy;
    ValueFunction value;
    try {
        if (policy_text) {
            policy = read_policy_table(*policy_text, sys.delta_hat, policy_source);
            value = policy_evaluation(policy, kernel, 1, kSolveTolerance).value;
        } else {
            Solution sol = solve_or_throw(kernel);
            policy = std::move(sol.policy);
            value = std::move(sol.value);
        }
    } catch (const ConfigParseError& e) {
        err << "policy rejected: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "verify failed: " << e.what() << '\n';
        return kExitFailure;
    }

    const ValuePropertyReport vp = verify_value_properties(value, sys);
    const ThresholdReport th = verify_threshold_structure(policy, sys);
    const int max_l = max_step_duration(sys.latency);
    out << "config: " << describe(sys) << '\n';
    out << "interior: states 1.." << vp.interior_end << " (boundary band " << 2 * max_l
        << " below delta_hat)\n";
    if (vp.interior_end < 2 * max_l) {
        out << "warning: interior holds fewer than " << 2 * max_l
            << " states; structural checks are weak\n";
    }
    auto line = [&](const std::string& name, bool ok, const std::string& detail) {
        out << name << ": " << (ok ? "PASS" : "FAIL") << detail << '\n';
    };
    line("value non-decreasing", vp.non_monotone.empty(),
         vp.non_monotone.empty() ? "" : " states " + list_head(vp.non_monotone));
    line("value concave", vp.non_concave.empty(),
         vp.non_concave.empty() ? "" : " states " + list_head(vp.non_concave));
    line("slope lower bound " + format_real(vp.slope_lower_bound), vp.slope_bound.empty(),
         vp.slope_bound.empty()
             ? ""
             : " " + std::to_string(vp.slope_bound.size()) + " pairs " + list_head(vp.slope_bound));
    line("threshold structure a_hat=" + th.a_hat.to_string(), th.ok(),
         th.ok() ? (th.threshold ? " threshold " + std::to_string(*th.threshold) : " a_hat unused")
                 : " pairs " + list_head(th.violations));
    return vp.ok() && th.ok() ? kExitOk : kExitFailure;
}

}  // namespace taoi::cli
