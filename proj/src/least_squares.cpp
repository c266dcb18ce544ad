#include "maser/least_squares.hpp"

#include <cmath>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace maser {

namespace {

struct Functor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const ResidualFunction* f = nullptr;
    Eigen::Index n = 0;
    Eigen::Index m = 0;

    Eigen::Index inputs() const { return n; }
    Eigen::Index values() const { return m; }
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        r.resize(m);
        (*f)(x, r);
        return r.allFinite() ? 0 : -1;
    }
};

Eigen::MatrixXd central_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x, Eigen::Index m, double step2) {
    const double step = std::sqrt(step2);
    Eigen::MatrixXd j(m, x.size());
    Eigen::VectorXd rp(m), rm(m);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        double h = step * std::max(std::abs(x(k)), 1.0);
        Eigen::VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        f(xp, rp);
        f(xm, rm);
        j.col(k) = (rp - rm) / (2.0 * h);
    }
    return j;
}

}  // namespace

double LeastSquaresResult::conditioning() const {
    if (jacobian.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian);
    const auto& s = svd.singularValues();
    return s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
}

LeastSquaresResult least_squares(const ResidualFunction& f, const Eigen::VectorXd& x0, Eigen::Index n_residuals,
                                 const LeastSquaresOptions& options) {
    Functor functor;
    functor.f = &f;
    functor.n = x0.size();
    functor.m = n_residuals;
    Eigen::NumericalDiff<Functor, Eigen::Central> diff(functor, options.diff_step);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor, Eigen::Central>> lm(diff);
    lm.parameters.maxfev = options.max_evaluations;
    lm.parameters.xtol = options.xtol;
    lm.parameters.ftol = options.ftol;

    LeastSquaresResult out;
    out.x = x0;
    auto status = lm.minimize(out.x);
    out.status = static_cast<int>(status);
    out.evaluations = static_cast<int>(lm.nfev);
    out.iterations = static_cast<int>(lm.iter);
    using namespace Eigen::LevenbergMarquardtSpace;
    out.converged = status != ImproperInputParameters && status != TooManyFunctionEvaluation && status != UserAsked &&
                    out.x.allFinite();
    Eigen::VectorXd r(n_residuals);
    f(out.x, r);
    out.cost = r.squaredNorm();
    out.jacobian = central_jacobian(f, out.x, n_residuals, options.diff_step);
    return out;
}

}  // namespace maser
