#include "maser/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "maser/errors.hpp"
#include "maser/grid.hpp"
#include "maser/linalg.hpp"
#include "maser/units.hpp"

namespace maser {

namespace {

Eigen::MatrixXcd random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(normal(rng), normal(rng));
    return m;
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

CheckResult timed(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    try {
        auto [ok, detail] = body();
        r.passed = ok;
        r.detail = detail;
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

RandomModel random_model(std::mt19937_64& rng, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    RandomModel m;
    Eigen::MatrixXcd a = random_complex(rng, d, d);
    m.h = 0.5 * (a + a.adjoint()) / std::sqrt(static_cast<double>(dim));
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> rate(0.5, 1.0);
    int n = count(rng);
    m.min_rate = 1.0;
    for (int k = 0; k < n; ++k) {
        JumpOperator j;
        j.op = random_complex(rng, d, d) / std::sqrt(static_cast<double>(dim));
        j.rate = rate(rng);
        j.label = "random" + std::to_string(k);
        m.min_rate = std::min(m.min_rate, j.rate);
        m.jumps.push_back(std::move(j));
    }
    return m;
}

Eigen::MatrixXcd random_density_matrix(std::mt19937_64& rng, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd a = random_complex(rng, d, d);
    Eigen::MatrixXcd rho = a * a.adjoint();
    return rho / rho.trace().real();
}

InvariantReport check_liouvillian(const Liouvillian& l) {
    InvariantReport r;
    const double lnorm = l.norm();
    const auto d = static_cast<Eigen::Index>(l.hilbert_dim);
    Eigen::VectorXcd id = vectorize(Eigen::MatrixXcd::Identity(d, d));
    r.trace_residual = (id.adjoint() * l.generator).norm() / lnorm;
    Eigen::VectorXcd ev = general_eigenvalues(l.dense());
    double radius = ev.cwiseAbs().maxCoeff();
    r.max_real_part = ev.real().maxCoeff() / radius;
    SolverOptions o;
    o.method = GapMethod::Dense;
    auto ss = steady_state(l, o);
    r.steady_residual = (l.generator * vectorize(ss.rho)).norm() / lnorm;
    r.trace_error = std::abs(ss.rho.trace() - 1.0);
    r.hermiticity = (ss.rho - ss.rho.adjoint()).norm();
    r.min_eigenvalue = ss.min_eigenvalue;
    return r;
}

Eigen::MatrixXcd integrate_rk4(const Liouvillian& l, const Eigen::MatrixXcd& rho0, double t_final, std::size_t steps) {
    const double h = t_final / static_cast<double>(steps);
    Eigen::MatrixXcd gen = l.dense();
    Eigen::VectorXcd y = vectorize(rho0);
    for (std::size_t s = 0; s < steps; ++s) {
        Eigen::VectorXcd k1 = gen * y;
        Eigen::VectorXcd k2 = gen * (y + 0.5 * h * k1);
        Eigen::VectorXcd k3 = gen * (y + 0.5 * h * k2);
        Eigen::VectorXcd k4 = gen * (y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return unvectorize(y, l.hilbert_dim);
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd diff = a - b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double bloch_excited_population(double omega_r, double gamma) {
    return omega_r * omega_r / (gamma * gamma + 2.0 * omega_r * omega_r);
}

Liouvillian driven_two_level(double omega_r, double gamma) {
    Eigen::MatrixXcd h(2, 2);
    h << 0.0, 0.5 * omega_r, 0.5 * omega_r, 0.0;
    JumpOperator lower;
    lower.op = Eigen::MatrixXcd::Zero(2, 2);
    lower.op(0, 1) = 1.0;  // |g><e|, index 0 = ground
    lower.rate = gamma;
    lower.label = "decay";
    return build_liouvillian(h, {lower});
}

Liouvillian lossy_cavity(std::size_t levels, double chi) {
    const auto n = static_cast<Eigen::Index>(levels);
    JumpOperator a;
    a.op = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a.op(k - 1, k) = std::sqrt(static_cast<double>(k));
    a.rate = chi;
    a.label = "cavity";
    return build_liouvillian(Eigen::MatrixXcd::Zero(n, n), {a});
}

std::vector<CheckResult> run_invariant_suite(const ValidationOptions& options) {
    std::vector<CheckResult> out;

    out.push_back(timed("derivative operator symmetry", [] {
        bool ok = true;
        for (std::size_t n : {3u, 10u, 1000u}) {
            auto g = PhaseGrid::periodic(n, units::two_pi);
            ok = ok && build_first_derivative(g).is_antisymmetric() && build_second_derivative(g).is_symmetric();
        }
        return std::pair{ok, std::string(ok ? "antisymmetric D1, symmetric D2" : "symmetry broken")};
    }));

    std::mt19937_64 rng(options.seed);
    std::vector<RandomModel> models;
    std::uniform_int_distribution<std::size_t> dims(2, options.max_dim);
    for (std::size_t i = 0; i < options.random_models; ++i) models.push_back(random_model(rng, dims(rng)));

    out.push_back(timed("random Liouvillian invariants", [&] {
        InvariantReport worst;
        worst.min_eigenvalue = 1.0;
        for (const auto& m : models) {
            auto r = check_liouvillian(build_liouvillian(m.h, m.jumps));
            worst.trace_residual = std::max(worst.trace_residual, r.trace_residual);
            worst.max_real_part = std::max(worst.max_real_part, r.max_real_part);
            worst.steady_residual = std::max(worst.steady_residual, r.steady_residual);
            worst.trace_error = std::max(worst.trace_error, r.trace_error);
            worst.hermiticity = std::max(worst.hermiticity, r.hermiticity);
            worst.min_eigenvalue = std::min(worst.min_eigenvalue, r.min_eigenvalue);
        }
        bool ok = worst.trace_residual < 1e-10 && worst.max_real_part <= 1e-8 && worst.steady_residual < 1e-8 &&
                  worst.trace_error < 1e-10 && worst.hermiticity < 1e-10 && worst.min_eigenvalue >= -1e-8;
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "%zu models: trace %.2e, max Re %.2e, steady %.2e, min eig %.2e", models.size(),
                      worst.trace_residual, worst.max_real_part, worst.steady_residual, worst.min_eigenvalue);
        return std::pair{ok, std::string(buf)};
    }));

    out.push_back(timed("time integration reaches the steady state", [&] {
        double worst = 0.0;
        std::size_t count = std::min<std::size_t>(models.size(), 5);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& m = models[i];
            auto l = build_liouvillian(m.h, m.jumps);
            double radius = general_eigenvalues(l.dense()).cwiseAbs().maxCoeff();
            double t = 50.0 / m.min_rate;
            auto steps = static_cast<std::size_t>(std::ceil(t * radius / 0.5));
            auto rho = integrate_rk4(l, random_density_matrix(rng, l.hilbert_dim), t, steps);
            SolverOptions o;
            o.method = GapMethod::Dense;
            worst = std::max(worst, trace_distance(rho, steady_state(l, o).rho));
        }
        return std::pair{worst < 1e-6, fmt("max trace distance %.2e", worst)};
    }));

    out.push_back(timed("driven two-level steady state", [] {
        double worst = 0.0;
        for (double w : {0.1, 1.0, 3.0}) {
            auto ss = steady_state(driven_two_level(w, 1.0));
            worst = std::max(worst, std::abs(ss.rho(1, 1).real() - bloch_excited_population(w, 1.0)));
        }
        return std::pair{worst < 1e-8, fmt("max population error %.2e", worst)};
    }));

    out.push_back(timed("lossy cavity gap", [] {
        double chi = 2.0;
        auto g = spectral_gap(lossy_cavity(4, chi));
        double err = std::abs(g.linewidth - chi / 2.0) / (chi / 2.0);
        return std::pair{err < 1e-10, fmt("gap / (chi/2) - 1 = %.2e", err)};
    }));

    return out;
}

}  // namespace maser
