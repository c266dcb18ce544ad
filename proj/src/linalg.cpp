#include "maser/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "maser/errors.hpp"

namespace maser {

namespace {

// Rejects eigenpairs whose residual or orthonormality is off; guards against
// silently wrong vectors from the backend.
void verify(const EigenPairs& p, const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& apply, double scale) {
    const auto k = p.vectors.cols();
    Eigen::MatrixXd r = apply(p.vectors) - p.vectors * p.values.asDiagonal();
    double ortho = (p.vectors.transpose() * p.vectors - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    double res = r.colwise().norm().maxCoeff();
    if (ortho > 1e-8 || res > 1e-9 * scale)
        throw SolverError("eigensolver returned inaccurate vectors (orthogonality " + std::to_string(ortho) +
                          ", residual " + std::to_string(res / scale) + ")");
}

}  // namespace

void fix_signs(Eigen::MatrixXd& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        if (v(imax, j) < 0.0) v.col(j) *= -1.0;
    }
}

EigenPairs lowest_eigenpairs(const BandedOperator& h, std::size_t k) {
    if (!h.is_symmetric()) throw SolverError("eigensolve requires a symmetric operator");
    if (h.has_corners()) return lowest_eigenpairs_dense(h.to_dense(), k);

    const auto n = static_cast<lapack_int>(h.dimension());
    if (k == 0 || k > h.dimension()) throw SolverError("requested level count out of range");
    std::vector<double> d = h.diagonal;
    std::vector<double> e(h.upper.begin(), h.upper.end());
    e.push_back(0.0);
    lapack_int m = 0;
    EigenPairs out;
    Eigen::VectorXd w(n);  // LAPACK needs room for all n values
    out.vectors.resize(n, static_cast<Eigen::Index>(k));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
    lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1,
                                     static_cast<lapack_int>(k), 2.0 * LAPACKE_dlamch('S'), &m, w.data(),
                                     out.vectors.data(), n, ifail.data());
    if (info != 0 || m != static_cast<lapack_int>(k))
        throw SolverError("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
    out.values = w.head(static_cast<Eigen::Index>(k));
    fix_signs(out.vectors);
    double scale = 0.0;
    for (std::size_t i = 0; i < h.dimension(); ++i)
        scale = std::max(scale, std::abs(h.diagonal[i]) + (i > 0 ? std::abs(h.lower[i - 1]) : 0.0) +
                                    (i + 1 < h.dimension() ? std::abs(h.upper[i]) : 0.0));
    verify(out, [&](const Eigen::MatrixXd& x) {
        Eigen::MatrixXd y(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) y.col(j) = h.apply(Eigen::VectorXd(x.col(j)));
        return y;
    }, scale);
    return out;
}

EigenPairs lowest_eigenpairs_dense(const Eigen::MatrixXd& h, std::size_t k) {
    const auto n = h.rows();
    if (h.rows() != h.cols()) throw SolverError("eigensolve requires a square matrix");
    if (k == 0 || k > static_cast<std::size_t>(n)) throw SolverError("requested level count out of range");
    EigenPairs out;
    if (n == 1) {
        out.values = Eigen::VectorXd::Constant(1, h(0, 0));
        out.vectors = Eigen::MatrixXd::Ones(1, 1);
        return out;
    }
    // Householder reduction here, tridiagonal solve in LAPACK, then back-transform.
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(h);
    BandedOperator t;
    Eigen::VectorXd diag = tri.diagonal();
    Eigen::VectorXd sub = tri.subDiagonal();
    t.diagonal.assign(diag.data(), diag.data() + n);
    t.lower.assign(sub.data(), sub.data() + (n - 1));
    t.upper = t.lower;
    t.top_right = t.bottom_left = 0.0;
    auto z = lowest_eigenpairs(t, k);
    out.values = z.values;
    out.vectors = tri.matrixQ() * z.vectors;
    fix_signs(out.vectors);
    verify(out, [&](const Eigen::MatrixXd& x) { return Eigen::MatrixXd(h * x); }, h.cwiseAbs().rowwise().sum().maxCoeff());
    return out;
}

EigenPairs all_eigenpairs_dense(const Eigen::MatrixXd& h) {
    return lowest_eigenpairs_dense(h, static_cast<std::size_t>(h.rows()));
}

Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXcd& a) {
    const auto n = static_cast<lapack_int>(a.rows());
    Eigen::MatrixXcd work = a;
    Eigen::VectorXcd w(n);
    auto* pa = reinterpret_cast<lapack_complex_double*>(work.data());
    auto* pw = reinterpret_cast<lapack_complex_double*>(w.data());
    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, pa, n, pw, nullptr, 1, nullptr, 1);
    if (info != 0) throw SolverError("general eigensolver failed (info " + std::to_string(info) + ")");
    return w;
}

}  // namespace maser
