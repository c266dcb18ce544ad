#include "maser/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maser/errors.hpp"

namespace maser {

PhaseGrid PhaseGrid::periodic(std::size_t n, double period, double origin) {
    PhaseGrid g;
    g.n_points = n;
    g.period = period;
    g.spacing = n > 0 ? period / static_cast<double>(n) : 0.0;
    g.origin = origin;
    g.boundary = Boundary::Periodic;
    g.validate();
    return g;
}

PhaseGrid PhaseGrid::open(std::size_t n, double spacing) {
    PhaseGrid g;
    g.n_points = n;
    g.spacing = spacing;
    g.origin = -0.5 * static_cast<double>(n > 0 ? n - 1 : 0) * spacing;
    g.boundary = Boundary::Open;
    g.validate();
    return g;
}

std::vector<double> PhaseGrid::coordinates() const {
    std::vector<double> x(n_points);
    for (std::size_t k = 0; k < n_points; ++k) x[k] = coordinate(k);
    return x;
}

void PhaseGrid::validate() const {
    if (n_points < 3) throw ConfigError("phase grid needs at least 3 points, got " + std::to_string(n_points));
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("phase grid spacing must be positive");
    if (boundary == Boundary::Periodic) {
        double err = std::abs(static_cast<double>(n_points) * spacing - period);
        if (!(period > 0.0) || err > 1e-12 * period) throw ConfigError("periodic grid: n * spacing must equal the period");
    }
}

bool BandedOperator::is_symmetric() const {
    return lower == upper && top_right == bottom_left;
}

bool BandedOperator::is_antisymmetric() const {
    if (std::any_of(diagonal.begin(), diagonal.end(), [](double d) { return d != 0.0; })) return false;
    for (std::size_t k = 0; k < lower.size(); ++k)
        if (lower[k] != -upper[k]) return false;
    return top_right == -bottom_left;
}

std::vector<double> BandedOperator::apply(std::span<const double> x) const {
    const std::size_t n = dimension();
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = diagonal[k] * x[k];
        if (k > 0) s += lower[k - 1] * x[k - 1];
        if (k + 1 < n) s += upper[k] * x[k + 1];
        y[k] = s;
    }
    y[0] += top_right * x[n - 1];
    y[n - 1] += bottom_left * x[0];
    return y;
}

Eigen::VectorXd BandedOperator::apply(const Eigen::VectorXd& x) const {
    auto y = apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    return Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

Eigen::MatrixXd BandedOperator::to_dense() const {
    const auto n = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        m(k, k) = diagonal[k];
        if (k + 1 < n) {
            m(k, k + 1) = upper[k];
            m(k + 1, k) = lower[k];
        }
    }
    m(0, n - 1) += top_right;
    m(n - 1, 0) += bottom_left;
    return m;
}

BandedOperator BandedOperator::transposed() const {
    BandedOperator t = *this;
    std::swap(t.lower, t.upper);
    std::swap(t.top_right, t.bottom_left);
    return t;
}

BandedOperator BandedOperator::scaled(double s) const {
    BandedOperator t = *this;
    for (auto& v : t.lower) v *= s;
    for (auto& v : t.diagonal) v *= s;
    for (auto& v : t.upper) v *= s;
    t.top_right *= s;
    t.bottom_left *= s;
    return t;
}

BandedOperator BandedOperator::plus_diagonal(std::span<const double> v) const {
    BandedOperator t = *this;
    for (std::size_t k = 0; k < t.diagonal.size(); ++k) t.diagonal[k] += v[k];
    return t;
}

BandedOperator build_first_derivative(const PhaseGrid& grid) {
    grid.validate();
    const std::size_t n = grid.n_points;
    const double c = 1.0 / (2.0 * grid.spacing);
    BandedOperator d;
    d.diagonal.assign(n, 0.0);
    d.upper.assign(n - 1, c);
    d.lower.assign(n - 1, -c);
    if (grid.boundary == Boundary::Periodic) {
        d.top_right = -c;
        d.bottom_left = c;
    }
    return d;
}

BandedOperator build_second_derivative(const PhaseGrid& grid) {
    grid.validate();
    const std::size_t n = grid.n_points;
    const double c = 1.0 / (grid.spacing * grid.spacing);
    BandedOperator d;
    d.diagonal.assign(n, -2.0 * c);
    d.upper.assign(n - 1, c);
    d.lower.assign(n - 1, c);
    if (grid.boundary == Boundary::Periodic) {
        d.top_right = c;
        d.bottom_left = c;
    }
    return d;
}

double ConvergenceTable::max_difference(std::size_t row) const {
    double m = 0.0;
    for (double v : fractional_differences.at(row)) m = std::max(m, std::abs(v));
    return m;
}

ConvergenceTable convergence_scan(const std::function<std::vector<double>(std::size_t)>& builder,
                                  const std::vector<std::size_t>& sizes, std::size_t n_levels) {
    if (sizes.empty()) throw ConfigError("convergence scan needs at least one size");
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw ConfigError("convergence scan sizes must be ascending");
    if (n_levels < 2) throw ConfigError("convergence scan needs at least 2 levels");

    ConvergenceTable table;
    table.sizes = sizes;
    for (std::size_t n : sizes) {
        auto e = builder(n);
        if (e.size() < n_levels) throw SolverError("builder returned too few levels");
        std::vector<double> s(n_levels - 1);
        for (std::size_t k = 0; k + 1 < n_levels; ++k) s[k] = e[k + 1] - e[k];
        table.spacings.push_back(std::move(s));
    }
    const auto& ref = table.spacings.back();
    for (const auto& s : table.spacings) {
        std::vector<double> d(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) d[k] = (s[k] - ref[k]) / ref[k];
        table.fractional_differences.push_back(std::move(d));
    }
    return table;
}

}  // namespace maser
