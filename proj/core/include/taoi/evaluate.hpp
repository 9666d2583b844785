#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "taoi/model.hpp"
#include "taoi/policies.hpp"

namespace taoi {

struct SimResult {
    double avg_taoi_per_slot = 0;               ///< sum of per-slot TAoI / total slots
    double avg_start_of_step_taoi_per_slot = 0; ///< sum of start-of-step TAoI / total slots
    std::int64_t total_steps = 0;
    std::int64_t total_slots = 0;
    std::int64_t total_cost = 0;  ///< sum of per-slot TAoI
    std::uint64_t seed = 0;
    double success_rate = 0;
};

/// Runs `num_steps` decision epochs from `initial_state` (default: min L(a)).
/// Each epoch draws the action (random rules only) and then the outcome from
/// one RandomStream seeded with `seed`.
SimResult simulate(const DecisionRule& rule, const SystemConfig& config, std::uint64_t seed,
                   std::int64_t num_steps, std::optional<State> initial_state = std::nullopt);

/// Sparse rows of a Markov chain over 0-based indices.
using ChainRows = std::vector<std::vector<std::pair<int, double>>>;

/// Stationary distribution of a unichain. Direct sparse solve up to
/// kDirectSolveLimit states, lazy power iteration above. Throws SolverError
/// if the balance residual exceeds 1e-10.
std::vector<double> stationary_distribution(const ChainRows& rows);

struct ExactResult {
    double gain = 0;
    std::vector<double> stationary;  ///< indexed by state - 1
    double residual = 0;
};

/// Long-run per-slot TAoI of `rule` from the stationary distribution of its
/// induced step chain: sum mu(s) E_a[R(s,a)] / sum mu(s) E_a[L(a)].
ExactResult exact_average(const DecisionRule& rule, const SystemConfig& config);

}  // namespace taoi
