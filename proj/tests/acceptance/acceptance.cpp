// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "support/configs.hpp"
#include "taoi/cli/commands.hpp"
#include "taoi/cli/experiment.hpp"
#include "taoi/evaluate.hpp"
#include "taoi/policies.hpp"
#include "taoi/solver.hpp"
#include "taoi/uniformize.hpp"

using namespace taoi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

std::string label(const SystemConfig& c) {
    std::ostringstream os;
    os << "(" << c.latency.t1u << "," << c.latency.t2u << "," << c.latency.t1c << ","
       << c.latency.t2c << "; " << c.accuracy.p_s << "," << c.accuracy.q_s << ","
       << c.accuracy.p_l << "," << c.accuracy.q_l << ")";
    return os.str();
}

struct Solved {
    SystemConfig config;
    Solution rpi, rvi, pi;
};

std::vector<Solved> solve_suite(double& elapsed) {
    std::vector<SystemConfig> configs = testcfg::random_configs(25, 20261016);
    for (const auto& name : cli::preset_names()) configs.push_back(cli::preset(name).base_system());
    const auto t0 = Clock::now();
    std::vector<Solved> out;
    for (const auto& c : configs) {
        const MdpKernel k = build_kernel(c);
        out.push_back({c, rpi_threshold(k), relative_value_iteration(k), exhaustive_policy_iteration(k)});
    }
    elapsed = seconds_since(t0);
    return out;
}

std::map<std::string, std::vector<cli::ResultRow>> sweeps;

const std::vector<cli::ResultRow>& sweep_rows(const std::string& name) {
    auto it = sweeps.find(name);
    if (it == sweeps.end()) {
        it = sweeps.emplace(name, cli::compute_sweep(cli::preset(name))).first;
    }
    return it->second;
}

std::vector<const cli::ResultRow*> rows_for(const std::string& name, const std::string& policy) {
    std::vector<const cli::ResultRow*> out;
    for (const auto& r : sweep_rows(name)) {
        if (r.policy == policy) out.push_back(&r);
    }
    return out;
}

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
    std::printf("%s %2d %s%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

}  // namespace

int main() {
    double suite_time = 0;
    const auto suite = solve_suite(suite_time);

    {
        Outcome o;
        for (const auto& s : suite) {
            for (const Solution* other : {&s.rvi, &s.pi}) {
                if (!other->report.converged || !s.rpi.report.converged) {
                    o.fail(label(s.config) + " did not converge");
                }
                for (State d = 1; d <= interior_limit(s.config); ++d) {
                    if (!(s.rpi.policy(d) == other->policy(d))) {
                        o.fail(label(s.config) + " " + to_string(other->report.method) +
                               " differs at " + std::to_string(d));
                        break;
                    }
                }
                if (rel(s.rpi.report.gain, other->report.gain) > 1e-7) {
                    o.fail(label(s.config) + " gain gap vs " + to_string(other->report.method));
                }
            }
        }
        if (suite_time > 60) o.fail("took " + std::to_string(suite_time) + " s");
        if (o.pass) {
            o.detail = std::to_string(suite.size()) + " configs, " +
                       std::to_string(suite_time).substr(0, 5) + " s";
        }
        report(1, "oracle equivalence (rpi / pi / rvi)", o);
    }

    {
        Outcome o;
        for (const auto& s : suite) {
            const auto th = verify_threshold_structure(s.rpi.policy, s.config);
            if (!th.ok()) o.fail(label(s.config) + " " + std::to_string(th.violations.size()) + " violations");
        }
        report(2, "threshold structure of optimal policies", o);
    }

    {
        Outcome o;
        int bad = 0;
        for (const auto& s : suite) {
            const auto r = verify_value_properties(s.rpi.value, s.config);
            if (!r.ok()) {
                ++bad;
                std::ostringstream why;
                why << label(s.config) << " monotone " << r.non_monotone.size() << ", concave "
                    << r.non_concave.size() << ", slope bound " << r.slope_bound.size();
                if (!r.slope_bound.empty()) {
                    why << " (first pair " << r.slope_bound.front().first << ","
                        << r.slope_bound.front().second << " of interior 1.." << r.interior_end << ")";
                }
                o.fail(why.str());
            }
        }
        if (!o.pass) o.detail += "; " + std::to_string(bad) + "/" + std::to_string(suite.size()) + " configs fail";
        report(3, "value function monotone, concave, slope bound", o);
    }

    {
        Outcome o;
        const auto cfg = SystemConfig::make({1, 2, 2, 11}, {1.0, 0.5, 0.6, 0.8});
        const auto rule = DecisionRule::constant({0, 0});
        const double exact = exact_average(rule, cfg).gain;
        const double mc = simulate(rule, cfg, 42, 1'000'000, State{3}).avg_taoi_per_slot;
        if (std::abs(exact - 4.0) > 1e-9) o.fail("exact " + cli::format_real(exact));
        if (std::abs(mc - 4.0) > 1e-9) o.fail("monte carlo " + cli::format_real(mc));
        report(4, "renewal cycle gain 4", o);
    }

    {
        Outcome o;
        const auto t0 = Clock::now();
        double worst = 0;
        for (const std::string name : {"fig3a", "fig4a"}) {
            for (const auto& r : sweep_rows(name)) {
                if (!r.error.empty()) {
                    o.fail(name + " " + cli::format_real(r.sweep_value) + " " + r.error);
                    continue;
                }
                const double gap = std::abs(r.mc_avg - r.exact_gain) / r.exact_gain;
                worst = std::max(worst, gap);
                if (gap > 0.01) {
                    o.fail(name + " " + r.policy + " at " + cli::format_real(r.sweep_value) +
                           " gap " + cli::format_real(gap));
                }
            }
        }
        const double t = seconds_since(t0);
        if (t > 300) o.fail("took " + std::to_string(t) + " s");
        if (o.pass) o.detail = "worst relative gap " + cli::format_real(worst);
        report(5, "monte carlo agrees with exact evaluation", o);
    }

    {
        Outcome o;
        for (const std::string name : {"fig3a", "fig3b", "fig4a", "fig4b"}) {
            const auto opt = rows_for(name, "optimal");
            const auto greedy = rows_for(name, "greedy");
            const auto random = rows_for(name, "random");
            for (std::size_t i = 0; i < opt.size(); ++i) {
                if (opt[i]->exact_gain > greedy[i]->exact_gain ||
                    opt[i]->exact_gain > random[i]->exact_gain) {
                    o.fail(name + " at " + cli::format_real(opt[i]->sweep_value));
                }
            }
        }
        report(6, "optimal beats greedy and random on every sweep point", o);
    }

    {
        Outcome o;
        const auto base = cli::preset("fig3a");
        std::optional<double> plateau;
        for (int t2u = 10; t2u <= 14; ++t2u) {
            const auto cfg = base.system_at(t2u);
            const auto sol = rpi_threshold(cfg);
            const double g = exact_average(DecisionRule::table(sol.policy), cfg).gain;
            if (!plateau) plateau = g;
            if (std::abs(g - *plateau) > 1e-9) {
                o.fail("gain " + cli::format_real(g) + " at t2u=" + std::to_string(t2u));
            }
            for (State d = 1; d <= interior_limit(cfg); ++d) {
                if (sol.policy(d).resolution == 1) {
                    o.fail("high resolution chosen at t2u=" + std::to_string(t2u) + ", state " +
                           std::to_string(d));
                    break;
                }
            }
        }
        if (o.pass) o.detail = "gain " + cli::format_real(*plateau);
        report(7, "fig3a plateau for t2u >= 10", o);
    }

    {
        Outcome o;
        const auto cfg = cli::preset("fig3a").system_at(14);
        const auto sol = rpi_threshold(cfg);
        for (State d = 1; d <= interior_limit(cfg); ++d) {
            const Action g = greedy_action(d, cfg);
            if (!(sol.policy(d) == g)) {
                o.fail("optimal " + sol.policy(d).to_string() + " vs greedy " + g.to_string() +
                       " at state " + std::to_string(d));
                break;
            }
        }
        for (State d = 1; d <= interior_limit(cfg); ++d) {
            if (!(sol.policy(d) == Action{0, 0}) || !(greedy_action(d, cfg) == Action{0, 0})) {
                o.fail(o.detail.empty() ? "not constantly (0,0) at state " + std::to_string(d)
                                        : o.detail);
                break;
            }
        }
        report(8, "fig3a t2u=14 optimal equals greedy, both (0,0)", o);
    }

    {
        Outcome o;
        for (const std::string name : {"fig4a", "fig4b"}) {
            const auto opt = rows_for(name, "optimal");
            for (std::size_t i = 1; i < opt.size(); ++i) {
                if (opt[i]->exact_gain > opt[i - 1]->exact_gain + 1e-9) {
                    o.fail(name + " rises at " + cli::format_real(opt[i]->sweep_value));
                }
            }
        }
        report(9, "optimal gain non-increasing in p_s and q_l", o);
    }

    {
        Outcome o;
        const auto at6 = compute_lmin(testcfg::fig2(6));
        const auto at10 = compute_lmin(testcfg::fig2(10));
        if (at6.case_index != 4 || !(at6.a_hat == Action{1, 1})) o.fail("t2u=6 gives case " + std::to_string(at6.case_index));
        if (at10.case_index != 3 || !(at10.a_hat == Action{0, 1})) o.fail("t2u=10 gives case " + std::to_string(at10.case_index));
        report(10, "case classifier on fig2", o);
    }

    {
        Outcome o;
        const auto config = cli::preset("fig3a");
        auto data = [&](const std::vector<cli::ResultRow>& rows) {
            const auto doc = cli::render_sweep(config, rows, "-");
            return doc.substr(doc.find('\n') + 1);
        };
        if (data(sweep_rows("fig3a")) != data(cli::compute_sweep(config, 3))) {
            o.fail("fig3a rerun differs");
        }
        report(11, "byte-identical rerun of preset fig3a", o);
    }

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
