#pragma once

#include <vector>

#include <Eigen/Sparse>

namespace taoi::detail {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Solves A x = b for a square sparse A with two rounds of iterative
/// refinement. Returns false if the factorization fails.
bool sparse_lu_solve(int n, const Triplets& triplets, const std::vector<double>& rhs,
                     std::vector<double>& solution);

}  // namespace taoi::detail
