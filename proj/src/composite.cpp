#include "maser/composite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "maser/errors.hpp"
#include "maser/linalg.hpp"

namespace maser {

std::vector<std::string> CouplingParams::validate(double c_s, double c_t, double c_c) const {
    if (!(c_st >= 0.0) || !(c_tc >= 0.0)) throw ConfigError("coupling capacitances must be non-negative");
    std::vector<std::string> warnings;
    auto check = [&](double r, const char* what) {
        if (r >= 0.1) {
            std::ostringstream os;
            os << "coupling ratio " << what << " = " << r << " exceeds 0.1; first-order inverse may be inaccurate";
            warnings.push_back(os.str());
        }
    };
    check(c_st / c_s, "C_st/C_s");
    check(c_st / c_t, "C_st/C_t");
    check(c_tc / c_t, "C_tc/C_t");
    check(c_tc / c_c, "C_tc/C_c");
    return warnings;
}

Eigen::Matrix3d capacitance_matrix(double c_s, double c_t, double c_c, const CouplingParams& k) {
    Eigen::Matrix3d c;
    c << c_s + k.c_st, k.c_st, 0.0,
         k.c_st, c_t + k.c_st + k.c_tc, k.c_tc,
         0.0, k.c_tc, c_c + k.c_tc;
    return c;
}

Eigen::Matrix3d inverse_capacitance_first_order(double c_s, double c_t, double c_c, const CouplingParams& k) {
    if (!(c_s > 0.0 && c_t > 0.0 && c_c > 0.0)) throw ConfigError("capacitances must be positive");
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 0) = 1.0 / c_s - k.c_st / (c_s * c_s);
    m(1, 1) = 1.0 / c_t - (k.c_st + k.c_tc) / (c_t * c_t);
    m(2, 2) = 1.0 / c_c - k.c_tc / (c_c * c_c);
    m(0, 1) = m(1, 0) = -k.c_st / (c_s * c_t);
    m(1, 2) = m(2, 1) = -k.c_tc / (c_t * c_c);
    return m;
}

Eigen::MatrixXd coupling_matrix_element_table(const Eigen::MatrixXd& d1_a, const Eigen::MatrixXd& d1_b,
                                              double prefactor) {
    if (d1_a.rows() != d1_a.cols() || d1_b.rows() != d1_b.cols())
        throw ConfigError("matrix element tables must be square");
    const auto na = d1_a.rows(), nb = d1_b.rows();
    Eigen::MatrixXd out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = (-prefactor * d1_a(i, j)) * d1_b;
    return out;
}

Eigen::MatrixXd coupling_matrix_element_table(const ComponentSpectrum& a, const ComponentSpectrum& b,
                                              double prefactor) {
    return coupling_matrix_element_table(a.d1_elements, b.d1_elements, prefactor);
}

std::size_t AtomBasis::index_of(int snail, int transmon) const {
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k].snail == snail && labels[k].transmon == transmon) return k;
    throw ConfigError("no atom state with label (" + std::to_string(snail) + "," + std::to_string(transmon) + ")");
}

void assign_labels(AtomBasis& atom, bool strict) {
    const auto dim = atom.states.cols();
    const auto nt = static_cast<Eigen::Index>(atom.n_transmon);
    struct Candidate {
        double overlap;
        Eigen::Index eigen;
        Eigen::Index product;
    };
    std::vector<Candidate> cands;
    cands.reserve(static_cast<std::size_t>(dim * dim));
    for (Eigen::Index e = 0; e < dim; ++e)
        for (Eigen::Index p = 0; p < dim; ++p) cands.push_back({std::abs(atom.states(p, e)), e, p});
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.eigen != b.eigen) return a.eigen < b.eigen;
        return a.product < b.product;
    });
    std::vector<bool> eigen_done(static_cast<std::size_t>(dim), false), product_done(static_cast<std::size_t>(dim), false);
    atom.labels.assign(static_cast<std::size_t>(dim), {});
    atom.overlaps.assign(static_cast<std::size_t>(dim), 0.0);
    for (const auto& c : cands) {
        auto e = static_cast<std::size_t>(c.eigen), p = static_cast<std::size_t>(c.product);
        if (eigen_done[e] || product_done[p]) continue;
        eigen_done[e] = product_done[p] = true;
        atom.labels[e] = {static_cast<int>(c.product / nt), static_cast<int>(c.product % nt)};
        atom.overlaps[e] = c.overlap;
    }
    for (std::size_t e = 0; e < atom.overlaps.size(); ++e) {
        double o = atom.overlaps[e];
        std::ostringstream os;
        os << "atom state " << e << " labelled (" << atom.labels[e].snail << "," << atom.labels[e].transmon
           << ") with overlap " << o;
        if (o < 0.25) throw SolverError("label assignment failed: " + os.str());
        if (strict && o < 1.0 / std::sqrt(2.0)) throw SolverError("strict labelling: " + os.str());
        if (o < 0.5) atom.warnings.push_back(os.str());
    }
}

AtomBasis build_artificial_atom(const ComponentSpectrum& snail, const ComponentSpectrum& transmon,
                                double coupling_coefficient, std::size_t n_s, std::size_t n_t, bool strict) {
    if (n_s == 0 || n_t == 0) throw ConfigError("atom cutoffs must be positive");
    if (snail.levels() < n_s || transmon.levels() < n_t) throw ConfigError("component spectra have fewer levels than the atom cutoffs");
    auto s = snail.truncated(n_s);
    auto t = transmon.truncated(n_t);
    const auto ns = static_cast<Eigen::Index>(n_s), nt = static_cast<Eigen::Index>(n_t);

    Eigen::MatrixXd h = coupling_matrix_element_table(s, t, coupling_coefficient);
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = 0; j < nt; ++j)
            h(i * nt + j, i * nt + j) += (s.energies(i) - s.energies(0)) + (t.energies(j) - t.energies(0));
    h = 0.5 * (h + h.transpose());
    auto eig = all_eigenpairs_dense(h);

    AtomBasis atom;
    atom.n_snail = n_s;
    atom.n_transmon = n_t;
    atom.energies = eig.values;
    atom.states = eig.vectors;
    assign_labels(atom, strict);
    Eigen::MatrixXd ds = Eigen::kroneckerProduct(s.d1_elements, Eigen::MatrixXd::Identity(nt, nt));
    Eigen::MatrixXd dt = Eigen::kroneckerProduct(Eigen::MatrixXd::Identity(ns, ns), t.d1_elements);
    atom.snail_d1 = atom.states.transpose() * ds * atom.states;
    atom.transmon_d1 = atom.states.transpose() * dt * atom.states;
    return atom;
}

ReducedPump build_reduced_pump(const AtomBasis& atom, const Eigen::MatrixXd& snail_d1_atom, double omega,
                               double omega_p, PumpRule rule) {
    const auto d = static_cast<Eigen::Index>(atom.dimension());
    if (snail_d1_atom.rows() != d || snail_d1_atom.cols() != d) throw ConfigError("pump operator dimension mismatch");
    ReducedPump p;
    p.amplitude = omega;
    p.omega_p = omega_p;
    p.rule = rule;
    p.raising = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto& li = atom.labels[static_cast<std::size_t>(i)];
            const auto& lj = atom.labels[static_cast<std::size_t>(j)];
            int ds = lj.snail - li.snail, dt = lj.transmon - li.transmon;
            bool keep = ds == 1 && (rule == PumpRule::Strict ? dt == 1 : std::abs(dt) == 1);
            if (keep) p.raising(j, i) = omega * std::abs(snail_d1_atom(j, i));
        }
    }
    return p;
}

Eigen::MatrixXd transmon_cavity_coupling(const AtomBasis& atom, const ComponentSpectrum& cavity, double k_tc) {
    return coupling_matrix_element_table(atom.transmon_d1, cavity.d1_elements, k_tc);
}

RotatingFrameModel apply_rotating_frame(const AtomBasis& atom, const ComponentSpectrum& cavity,
                                        const Eigen::MatrixXd& h_tc, const ReducedPump& pump) {
    const auto na = static_cast<Eigen::Index>(atom.dimension());
    const auto nc = static_cast<Eigen::Index>(cavity.levels());
    const auto d = na * nc;
    if (atom.labels.size() != static_cast<std::size_t>(atom.energies.size()))
        throw ConfigError("unlabelled atom state in rotating frame transformation");
    if (h_tc.rows() != d || h_tc.cols() != d) throw ConfigError("coupling operator dimension mismatch");
    if (pump.raising.rows() != na) throw ConfigError("pump operator dimension mismatch");

    RotatingFrameModel m;
    m.atom_dim = static_cast<std::size_t>(na);
    m.cavity_dim = static_cast<std::size_t>(nc);
    m.labels = atom.labels;
    m.omega_p = pump.omega_p;
    m.omega_pump_amplitude = pump.amplitude;
    m.cavity_frequency = nc > 1 ? cavity.energies(1) - cavity.energies(0) : 0.0;

    Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd dropped = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index a = 0; a < na; ++a)
        for (Eigen::Index b = 0; b < na; ++b) {
            bool same = atom.labels[static_cast<std::size_t>(a)].snail == atom.labels[static_cast<std::size_t>(b)].snail;
            (same ? kept : dropped).block(a * nc, b * nc, nc, nc) = h_tc.block(a * nc, b * nc, nc, nc);
        }
    m.dropped_terms_norm = dropped.norm();
    m.retained_coupling_norm = kept.norm();

    m.h_static = kept;
    const double e0 = atom.energies(0);
    for (Eigen::Index a = 0; a < na; ++a) {
        double ea = atom.energies(a) - e0 - atom.labels[static_cast<std::size_t>(a)].snail * pump.omega_p;
        for (Eigen::Index n = 0; n < nc; ++n) m.h_static(a * nc + n, a * nc + n) += ea + cavity.energies(n) - cavity.energies(0);
    }
    m.pump_static = Eigen::kroneckerProduct(pump.raising, Eigen::MatrixXd::Identity(nc, nc));
    m.h_static += m.pump_static + m.pump_static.transpose();
    return m;
}

std::vector<int> excitation_grading(const RotatingFrameModel& m) {
    std::vector<int> g(m.dimension());
    for (std::size_t a = 0; a < m.atom_dim; ++a)
        for (std::size_t n = 0; n < m.cavity_dim; ++n)
            g[a * m.cavity_dim + n] = m.labels[a].transmon + static_cast<int>(n) - m.labels[a].snail;
    return g;
}

RotatingFrameModel excitation_conserving_part(const RotatingFrameModel& m) {
    auto g = excitation_grading(m);
    RotatingFrameModel out = m;
    double removed = 0.0;
    const auto d = static_cast<Eigen::Index>(m.dimension());
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            if (g[static_cast<std::size_t>(i)] != g[static_cast<std::size_t>(j)]) {
                removed += out.h_static(i, j) * out.h_static(i, j);
                out.h_static(i, j) = 0.0;
                out.pump_static(i, j) = 0.0;
            }
    out.nonconserving_norm = std::sqrt(removed);
    return out;
}

CrossingResult minimize_splitting(const std::function<double(double)>& splitting, const std::vector<double>& scan) {
    if (scan.size() < 3) throw ConfigError("crossing scan needs at least 3 points");
    if (!std::is_sorted(scan.begin(), scan.end())) throw ConfigError("crossing scan must be ascending");
    std::vector<double> v(scan.size());
    for (std::size_t k = 0; k < scan.size(); ++k) v[k] = splitting(scan[k]);
    auto it = std::min_element(v.begin(), v.end());
    auto k = static_cast<std::size_t>(it - v.begin());
    if (k == 0 || k + 1 == scan.size()) throw SolverError("resonance not bracketed by the scan");
    auto r = boost::math::tools::brent_find_minima(splitting, scan[k - 1], scan[k + 1], 30);
    CrossingResult out;
    out.location = r.first;
    out.min_splitting = std::min(r.second, *it);
    if (*it < r.second) out.location = scan[k];
    out.coupling = 0.5 * out.min_splitting;
    return out;
}

}  // namespace maser
