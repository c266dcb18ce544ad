#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "maser/grid.hpp"

namespace maser {

struct EigenPairs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // unit-norm columns
};

// Lowest k eigenpairs of a real symmetric banded operator. Pure tridiagonal
// operators go to the LAPACK tridiagonal solver; operators with corners are
// materialized dense.
EigenPairs lowest_eigenpairs(const BandedOperator& h, std::size_t k);
EigenPairs lowest_eigenpairs_dense(const Eigen::MatrixXd& h, std::size_t k);
EigenPairs all_eigenpairs_dense(const Eigen::MatrixXd& h);

// Flip each column so its largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& v);

// Eigenvalues of a general complex matrix (no vectors).
Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXcd& a);

}  // namespace maser
