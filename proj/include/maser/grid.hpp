#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace maser {

enum class Boundary { Periodic, Open };

struct PhaseGrid {
    std::size_t n_points = 0;
    double spacing = 0.0;
    double origin = 0.0;
    Boundary boundary = Boundary::Open;
    double period = 0.0;  // only meaningful for periodic grids

    static PhaseGrid periodic(std::size_t n, double period, double origin = 0.0);
    // Open grid centered on zero: phi_k = (k - (n-1)/2) h.
    static PhaseGrid open(std::size_t n, double spacing);

    double coordinate(std::size_t k) const { return origin + spacing * static_cast<double>(k); }
    std::vector<double> coordinates() const;
    double extent() const { return spacing * static_cast<double>(n_points); }
    void validate() const;
};

// Real tridiagonal matrix plus the two wrap-around corners.
struct BandedOperator {
    std::vector<double> lower;     // (k+1, k)
    std::vector<double> diagonal;  // (k, k)
    std::vector<double> upper;     // (k, k+1)
    double top_right = 0.0;        // (0, n-1)
    double bottom_left = 0.0;      // (n-1, 0)

    std::size_t dimension() const { return diagonal.size(); }
    bool has_corners() const { return top_right != 0.0 || bottom_left != 0.0; }
    bool is_symmetric() const;
    bool is_antisymmetric() const;

    std::vector<double> apply(std::span<const double> x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd to_dense() const;
    BandedOperator transposed() const;
    BandedOperator scaled(double s) const;
    // this + diag(v)
    BandedOperator plus_diagonal(std::span<const double> v) const;
};

BandedOperator build_first_derivative(const PhaseGrid& grid);
BandedOperator build_second_derivative(const PhaseGrid& grid);

struct ConvergenceTable {
    std::vector<std::size_t> sizes;
    // fractional_differences[i][k]: spacing k at sizes[i] relative to the last size
    std::vector<std::vector<double>> fractional_differences;
    std::vector<std::vector<double>> spacings;

    double max_difference(std::size_t row) const;
};

// builder(n) returns the lowest energies (at least n_levels) at grid size n.
ConvergenceTable convergence_scan(const std::function<std::vector<double>(std::size_t)>& builder,
                                  const std::vector<std::size_t>& sizes, std::size_t n_levels);

}  // namespace maser
