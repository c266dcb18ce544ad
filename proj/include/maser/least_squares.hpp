#pragma once

#include <functional>

#include <Eigen/Dense>

namespace maser {

using ResidualFunction = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residual)>;

struct LeastSquaresOptions {
    int max_evaluations = 4000;
    double xtol = 1e-14;
    double ftol = 1e-14;
    double diff_step = 1e-12;  // squared relative finite-difference step
};

struct LeastSquaresResult {
    Eigen::VectorXd x;
    Eigen::MatrixXd jacobian;  // central differences at x
    double cost = 0.0;         // sum of squared residuals
    int evaluations = 0;
    int iterations = 0;
    int status = 0;
    bool converged = false;

    // smallest / largest singular value of the jacobian
    double conditioning() const;
};

// Levenberg-Marquardt with a central-difference jacobian.
LeastSquaresResult least_squares(const ResidualFunction& f, const Eigen::VectorXd& x0, Eigen::Index n_residuals,
                                 const LeastSquaresOptions& options = {});

}  // namespace maser
