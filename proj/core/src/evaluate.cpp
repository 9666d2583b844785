#include "taoi/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "sparse_lu.hpp"

namespace taoi {

namespace {

constexpr double kStationaryTolerance = 1e-10;

double balance_residual(const ChainRows& rows, const std::vector<double>& mu) {
    std::vector<double> next(mu.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& [j, p] : rows[i]) {
            next[static_cast<std::size_t>(j)] += mu[i] * p;
        }
    }
    double r = 0;
    double total = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        r += std::abs(next[i] - mu[i]);
        total += mu[i];
    }
    return r + std::abs(total - 1.0);
}

std::vector<double> stationary_direct(const ChainRows& rows) {
    const int n = static_cast<int>(rows.size());
    // Balance equations (I - P^T) mu = 0 with the last one replaced by sum(mu) = 1.
    const int norm_row = n - 1;
    detail::Triplets triplets;
    for (int i = 0; i < n; ++i) {
        if (i != norm_row) {
            triplets.emplace_back(i, i, 1.0);
        }
        for (const auto& [j, p] : rows[static_cast<std::size_t>(i)]) {
            if (j != norm_row) {
                triplets.emplace_back(j, i, -p);
            }
        }
        triplets.emplace_back(norm_row, i, 1.0);
    }
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    rhs[static_cast<std::size_t>(norm_row)] = 1.0;
    std::vector<double> mu;
    if (!detail::sparse_lu_solve(n, triplets, rhs, mu)) {
        throw SolverError("stationary_distribution: sparse factorization failed");
    }
    return mu;
}

std::vector<double> stationary_power(const ChainRows& rows) {
    constexpr long kMaxSweeps = 10'000'000;
    const std::size_t n = rows.size();
    std::vector<double> mu(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (long sweep = 0; sweep < kMaxSweeps; ++sweep) {
        // Lazy chain (I + P) / 2 has the same stationary law and is aperiodic.
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = 0.5 * mu[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& [j, p] : rows[i]) {
                next[static_cast<std::size_t>(j)] += 0.5 * mu[i] * p;
            }
        }
        double change = 0;
        for (std::size_t i = 0; i < n; ++i) {
            change += std::abs(next[i] - mu[i]);
        }
        mu.swap(next);
        if (change < 0.1 * kStationaryTolerance) {
            break;
        }
    }
    return mu;
}

}  // namespace

SimResult simulate(const DecisionRule& rule, const SystemConfig& config, std::uint64_t seed,
                   std::int64_t num_steps, std::optional<State> initial_state) {
    if (num_steps < 1) {
        throw std::invalid_argument("simulate: num_steps must be at least 1");
    }
    RandomStream stream(seed);
    State state = initial_state.value_or(min_step_duration(config.latency));
    if (state < 1 || state > config.delta_hat) {
        throw std::invalid_argument("simulate: initial state out of range");
    }

    SimResult out;
    out.seed = seed;
    std::int64_t start_sum = 0;
    std::int64_t successes = 0;
    for (std::int64_t t = 0; t < num_steps; ++t) {
        const Action a = decide(rule, state, stream);
        const std::int64_t l = step_duration(a, config.latency);
        const bool success = stream.bernoulli(success_prob(a, config.accuracy));
        out.total_cost += l * state + l * (l - 1) / 2;
        out.total_slots += l;
        start_sum += state;
        successes += success ? 1 : 0;
        state = next_state(state, a, success, config);
    }
    out.total_steps = num_steps;
    out.avg_taoi_per_slot =
        static_cast<double>(out.total_cost) / static_cast<double>(out.total_slots);
    out.avg_start_of_step_taoi_per_slot =
        static_cast<double>(start_sum) / static_cast<double>(out.total_slots);
    out.success_rate = static_cast<double>(successes) / static_cast<double>(num_steps);
    return out;
}

std::vector<double> stationary_distribution(const ChainRows& rows) {
    if (rows.empty()) {
        throw SolverError("stationary_distribution: empty chain");
    }
    std::vector<double> mu = rows.size() <= static_cast<std::size_t>(kDirectSolveLimit)
                                 ? stationary_direct(rows)
                                 : stationary_power(rows);
    for (double& x : mu) {
        if (x < -1e-12 || !std::isfinite(x)) {
            throw SolverError("stationary_distribution: negative or non-finite mass");
        }
        x = std::max(x, 0.0);
    }
    const double residual = balance_residual(rows, mu);
    if (!(residual <= kStationaryTolerance)) {
        throw SolverError("stationary_distribution: residual " + std::to_string(residual) +
                          " exceeds 1e-10");
    }
    return mu;
}

ExactResult exact_average(const DecisionRule& rule, const SystemConfig& config) {
    config.validate();
    const State n = config.delta_hat;
    ChainRows rows(static_cast<std::size_t>(n));
    std::vector<double> mean_cost(rows.size());
    std::vector<double> mean_length(rows.size());
    for (State s = 1; s <= n; ++s) {
        const auto i = static_cast<std::size_t>(s - 1);
        const auto mix = rule.distribution(s);
        auto& row = rows[i];
        for (Action a : kActions) {
            const double w = mix[static_cast<std::size_t>(a.index())];
            if (w == 0.0) {
                continue;
            }
            mean_cost[i] += w * smdp_cost(s, a, config);
            mean_length[i] += w * step_duration(a, config.latency);
            for (const auto& e : transition_distribution(s, a, config)) {
                const int j = e.next - 1;
                auto it = std::find_if(row.begin(), row.end(),
                                       [j](const auto& entry) { return entry.first == j; });
                if (it == row.end()) {
                    row.emplace_back(j, w * e.prob);
                } else {
                    it->second += w * e.prob;
                }
            }
        }
    }

    ExactResult out;
    out.stationary = stationary_distribution(rows);
    out.residual = balance_residual(rows, out.stationary);
    double cost = 0;
    double length = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        cost += out.stationary[i] * mean_cost[i];
        length += out.stationary[i] * mean_length[i];
    }
    out.gain = cost / length;
    return out;
}

}  // namespace taoi
