#include "sparse_lu.hpp"

#include <Eigen/SparseLU>

namespace taoi::detail {

bool sparse_lu_solve(int n, const Triplets& triplets, const std::vector<double>& rhs,
                     std::vector<double>& solution) {
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        return false;
    }
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) {
        return false;
    }
    for (int round = 0; round < 2; ++round) {
        const Eigen::VectorXd r = b - a * x;
        x += lu.solve(r);
    }
    solution.assign(x.data(), x.data() + n);
    return x.allFinite();
}

}  // namespace taoi::detail
