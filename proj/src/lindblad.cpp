#include "maser/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/SparseLU>
#include <json.hpp>

#include "maser/errors.hpp"
#include "maser/linalg.hpp"

namespace maser {

std::vector<JumpOperator> JumpInventory::all() const {
    std::vector<JumpOperator> out = snail_jumps;
    out.insert(out.end(), transmon_jumps.begin(), transmon_jumps.end());
    if (cavity_jump) out.push_back(*cavity_jump);
    return out;
}

JumpInventory build_jump_inventory(const AtomBasis& atom, std::size_t n_c, double chi_s, double chi_t, double chi_c) {
    if (chi_s < 0.0 || chi_t < 0.0 || chi_c < 0.0) throw ConfigError("decay rates must be non-negative");
    if (n_c == 0) throw ConfigError("cavity cutoff must be positive");
    const auto na = static_cast<Eigen::Index>(atom.dimension());
    const auto nc = static_cast<Eigen::Index>(n_c);
    const auto d = na * nc;
    JumpInventory inv;
    auto atom_jump = [&](Eigen::Index from, Eigen::Index to, double weight) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
        for (Eigen::Index n = 0; n < nc; ++n) a(to * nc + n, from * nc + n) = weight;
        return a;
    };
    for (Eigen::Index i = 0; i < na; ++i) {
        const auto& l = atom.labels[static_cast<std::size_t>(i)];
        std::ostringstream tag;
        tag << "(" << l.snail << "," << l.transmon << ")";
        if (l.snail > 0) {
            auto j = static_cast<Eigen::Index>(atom.index_of(l.snail - 1, l.transmon));
            inv.snail_jumps.push_back({atom_jump(i, j, std::sqrt(static_cast<double>(l.snail))), chi_s, "snail " + tag.str()});
        }
        if (l.transmon > 0) {
            auto j = static_cast<Eigen::Index>(atom.index_of(l.snail, l.transmon - 1));
            inv.transmon_jumps.push_back(
                {atom_jump(i, j, std::sqrt(static_cast<double>(l.transmon))), chi_t, "transmon " + tag.str()});
        }
    }
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index a = 0; a < na; ++a)
        for (Eigen::Index n = 1; n < nc; ++n) c(a * nc + n - 1, a * nc + n) = std::sqrt(static_cast<double>(n));
    inv.cavity_jump = JumpOperator{c, chi_c, "cavity"};
    return inv;
}

double Liouvillian::norm() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < generator.outerSize(); ++k) {
        double s = 0.0;
        for (SparseMatrixC::InnerIterator it(generator, k); it; ++it) s += std::abs(it.value());
        m = std::max(m, s);
    }
    return m;
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

Eigen::MatrixXcd Liouvillian::apply(const Eigen::MatrixXcd& rho) const {
    Eigen::VectorXcd v = generator * vectorize(rho);
    return unvectorize(v, hilbert_dim);
}

Liouvillian build_liouvillian(const Eigen::MatrixXcd& h, const std::vector<JumpOperator>& jumps) {
    const auto d = h.rows();
    if (h.cols() != d) throw ConfigError("hamiltonian must be square");
    // effective non-hermitian generator K = -iH - 1/2 sum r A^dag A
    Eigen::MatrixXcd k = cplx(0.0, -1.0) * h;
    for (const auto& j : jumps) {
        if (j.op.rows() != d || j.op.cols() != d) throw ConfigError("jump operator dimension mismatch");
        if (j.rate < 0.0) throw ConfigError("jump rates must be non-negative");
        if (j.rate > 0.0) k -= 0.5 * j.rate * (j.op.adjoint() * j.op);
    }
    std::vector<Eigen::Triplet<cplx>> trip;
    auto nz = [](const Eigen::MatrixXcd& m) {
        std::vector<std::tuple<Eigen::Index, Eigen::Index, cplx>> out;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                if (m(r, c) != cplx(0.0, 0.0)) out.emplace_back(r, c, m(r, c));
        return out;
    };
    auto knz = nz(k);
    trip.reserve(2 * static_cast<std::size_t>(d) * knz.size());
    // I (x) K and conj(K) (x) I
    for (Eigen::Index j = 0; j < d; ++j)
        for (auto [r, c, v] : knz) trip.emplace_back(r + j * d, c + j * d, v);
    for (auto [r, c, v] : knz)
        for (Eigen::Index i = 0; i < d; ++i) trip.emplace_back(i + r * d, i + c * d, std::conj(v));
    // conj(A) (x) A
    for (const auto& j : jumps) {
        if (j.rate == 0.0) continue;
        auto anz = nz(j.op);
        for (auto [r1, c1, v1] : anz)
            for (auto [r2, c2, v2] : anz) trip.emplace_back(r2 + r1 * d, c2 + c1 * d, j.rate * std::conj(v1) * v2);
    }
    Liouvillian l;
    l.hilbert_dim = static_cast<std::size_t>(d);
    l.generator.resize(d * d, d * d);
    l.generator.setFromTriplets(trip.begin(), trip.end());
    l.generator.prune(cplx(0.0, 0.0));
    l.generator.makeCompressed();
    return l;
}

Liouvillian build_liouvillian(const RotatingFrameModel& model, const JumpInventory& jumps) {
    auto l = build_liouvillian(Eigen::MatrixXcd(model.h_static.cast<cplx>()), jumps.all());
    l.metadata.atom_dim = model.atom_dim;
    l.metadata.cavity_dim = model.cavity_dim;
    l.metadata.omega_p = model.omega_p;
    l.metadata.cavity_frequency = model.cavity_frequency;
    l.metadata.labels = model.labels;
    l.metadata.grading = excitation_grading(model);
    return l;
}

GapMethod parse_gap_method(const std::string& name) {
    if (name == "auto") return GapMethod::Auto;
    if (name == "dense") return GapMethod::Dense;
    if (name == "shift_invert") return GapMethod::ShiftInvert;
    if (name == "sectors") return GapMethod::Sectors;
    throw ConfigError("unknown solver method '" + name + "'");
}

std::string to_string(GapMethod m) {
    switch (m) {
        case GapMethod::Auto: return "auto";
        case GapMethod::Dense: return "dense";
        case GapMethod::ShiftInvert: return "shift_invert";
        case GapMethod::Sectors: return "sectors";
    }
    return "auto";
}

namespace {

using SparseLUC = Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>>;
using SolveFn = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

SparseMatrixC shifted(const SparseMatrixC& l, cplx sigma) {
    SparseMatrixC id(l.rows(), l.cols());
    id.setIdentity();
    SparseMatrixC a = l - sigma * id;
    a.makeCompressed();
    return a;
}

Eigen::VectorXcd start_vector(Eigen::Index n) {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd v(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double re = u(rng);
        double im = u(rng);
        v(k) = cplx(re, im);
    }
    return v.normalized();
}

using ProjectFn = std::function<void(Eigen::VectorXcd&)>;

// project, when given, restricts the iteration to an invariant subspace.
RitzPairs arnoldi(const SolveFn& apply, double lnorm, const SolveFn& solve, Eigen::Index n, cplx sigma, int nev,
                  int max_dim, double tol, const ProjectFn& project = {}) {
    const Eigen::Index m_max = std::min<Eigen::Index>(max_dim, n);
    nev = static_cast<int>(std::min<Eigen::Index>(nev, m_max));
    Eigen::MatrixXcd v(n, m_max + 1);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m_max + 1, m_max);
    Eigen::VectorXcd v0 = start_vector(n);
    if (project) project(v0);
    v.col(0) = v0.normalized();
    RitzPairs best;
    Eigen::Index m = 0;
    for (Eigen::Index j = 0; j < m_max; ++j) {
        Eigen::VectorXcd w = solve(v.col(j));
        if (project) project(w);
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXcd c = v.leftCols(j + 1).adjoint() * w;
            w -= v.leftCols(j + 1) * c;
            h.col(j).head(j + 1) += c;
        }
        double beta = w.norm();
        h(j + 1, j) = beta;
        m = j + 1;
        bool breakdown = beta <= 1e-14 * h.col(j).head(j + 1).norm();
        if (!breakdown) v.col(j + 1) = w / beta;
        bool check = breakdown || m == m_max || (m >= nev + 8 && (m - nev) % 8 == 0);
        if (!check) continue;

        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h.topLeftCorner(m, m));
        Eigen::VectorXcd theta = es.eigenvalues();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
        for (Eigen::Index k = 0; k < m; ++k) order[static_cast<std::size_t>(k)] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta(a)) > std::abs(theta(b)); });
        int take = static_cast<int>(std::min<Eigen::Index>(nev, m));
        RitzPairs r;
        r.values.resize(take);
        r.vectors.resize(n, take);
        r.residuals.resize(take);
        for (int k = 0; k < take; ++k) {
            auto idx = order[static_cast<std::size_t>(k)];
            cplx lam = sigma + 1.0 / theta(idx);
            Eigen::VectorXcd y = v.leftCols(m) * es.eigenvectors().col(idx);
            y.normalize();
            r.values(k) = lam;
            r.vectors.col(k) = y;
            r.residuals(k) = (apply(y) - lam * y).norm() / lnorm;
        }
        best = std::move(r);
        if (breakdown || best.residuals.maxCoeff() <= tol) break;
    }
    return best;
}

struct Candidate {
    cplx value;
    double residual;
};

// Index of the null eigenvalue; throws on missing or degenerate null space.
std::size_t check_null(const std::vector<Candidate>& vals, double radius) {
    if (vals.empty()) throw SolverError("no eigenvalues available");
    std::vector<std::size_t> order(vals.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(vals[a].value) < std::abs(vals[b].value); });
    if (std::abs(vals[order[0]].value) > 1e-6 * radius) throw SolverError("no eigenvalue near zero: no steady state");
    if (order.size() > 1 && std::abs(vals[order[1]].value) <= 1e-9 * radius)
        throw MultistabilityError("degenerate null space: multiple steady states");
    return order[0];
}

void add_candidates(std::vector<Candidate>& vals, const RitzPairs& r, double radius) {
    for (Eigen::Index k = 0; k < r.values.size(); ++k) {
        // the same eigenvalue may be found from two shifts
        Candidate c{r.values(k), r.residuals(k)};
        auto dup = std::find_if(vals.begin(), vals.end(),
                                [&](const Candidate& v) { return std::abs(v.value - c.value) <= 1e-10 * radius; });
        if (dup == vals.end()) vals.push_back(c);
        else if (c.residual < dup->residual) *dup = c;
    }
}

// One coherence-order block of a sector-conserving generator.
struct Sector {
    std::vector<Eigen::Index> index;  // positions in the vectorized space
    Eigen::MatrixXcd block;
};

}  // namespace

struct LiouvillianSolver::Impl {
    const Liouvillian& l;
    SolverOptions opt;
    GapMethod mode = GapMethod::Dense;
    double lnorm = 0.0;
    double sigma0 = 0.0;
    // dense path
    std::optional<Eigen::VectorXcd> eigenvalues;
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXcd>> dense_lu;
    // sparse path
    std::optional<SparseLUC> lu0;
    // sector path
    std::vector<int> coherence;  // coherence order of every vectorized index
    std::optional<Sector> sector0;
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXcd>> sector_lu0;
    std::optional<RitzPairs> ritz0;
    std::optional<Eigen::VectorXcd> null0;

    Impl(const Liouvillian& l_, SolverOptions o) : l(l_), opt(std::move(o)) {
        lnorm = l.norm();
        if (!(lnorm > 0.0)) lnorm = 1.0;
        sigma0 = 1e-12 * lnorm;
        const auto dd = static_cast<std::size_t>(l.generator.rows());
        switch (opt.method) {
            case GapMethod::Auto: mode = dd <= opt.dense_limit ? GapMethod::Dense : GapMethod::ShiftInvert; break;
            default: mode = opt.method; break;
        }
        if (mode == GapMethod::Sectors) init_sectors();
    }

    void init_sectors() {
        const auto& g = l.metadata.grading;
        const auto d = l.hilbert_dim;
        if (g.size() != d) throw SolverError("sector solver needs the excitation grading of the model");
        coherence.resize(d * d);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < d; ++i) coherence[i + j * d] = g[i] - g[j];
        for (Eigen::Index k = 0; k < l.generator.outerSize(); ++k)
            for (SparseMatrixC::InnerIterator it(l.generator, k); it; ++it)
                if (coherence[static_cast<std::size_t>(it.row())] != coherence[static_cast<std::size_t>(it.col())])
                    throw SolverError("generator mixes coherence sectors; use the excitation-conserving model");
    }

    Sector make_sector(int q) const {
        Sector s;
        std::vector<Eigen::Index> pos(coherence.size(), -1);
        for (std::size_t k = 0; k < coherence.size(); ++k)
            if (coherence[k] == q) {
                pos[k] = static_cast<Eigen::Index>(s.index.size());
                s.index.push_back(static_cast<Eigen::Index>(k));
            }
        const auto n = static_cast<Eigen::Index>(s.index.size());
        s.block = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index c = 0; c < n; ++c)
            for (SparseMatrixC::InnerIterator it(l.generator, s.index[static_cast<std::size_t>(c)]); it; ++it)
                s.block(pos[static_cast<std::size_t>(it.row())], c) = it.value();
        return s;
    }

    const Eigen::VectorXcd& dense_eigenvalues() {
        if (!eigenvalues) eigenvalues = general_eigenvalues(l.dense());
        return *eigenvalues;
    }

    SolveFn solver0() {
        if (mode == GapMethod::Dense) {
            if (!dense_lu) {
                Eigen::MatrixXcd a = l.dense();
                a.diagonal().array() -= sigma0;
                dense_lu.emplace(a);
            }
            return [this](const Eigen::VectorXcd& b) { return Eigen::VectorXcd(dense_lu->solve(b)); };
        }
        if (mode == GapMethod::Sectors) {
            if (!sector0) sector0 = make_sector(0);
            if (!sector_lu0) {
                Eigen::MatrixXcd a = sector0->block;
                a.diagonal().array() -= sigma0;
                sector_lu0.emplace(a);
            }
            return [this](const Eigen::VectorXcd& b) { return Eigen::VectorXcd(sector_lu0->solve(b)); };
        }
        if (!lu0) {
            lu0.emplace();
            lu0->compute(shifted(l.generator, sigma0));
            if (lu0->info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
        }
        return [this](const Eigen::VectorXcd& b) { return Eigen::VectorXcd(lu0->solve(b)); };
    }

    SolveFn apply0() {
        if (mode == GapMethod::Sectors) {
            if (!sector0) sector0 = make_sector(0);
            return [this](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(sector0->block * x); };
        }
        return [this](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(l.generator * x); };
    }

    // Positions of the diagonal entries rho(i, i) in the working space.
    std::vector<Eigen::Index> diagonal_positions() const {
        const auto d = static_cast<Eigen::Index>(l.hilbert_dim);
        std::vector<Eigen::Index> out;
        if (mode == GapMethod::Sectors) {
            for (std::size_t k = 0; k < sector0->index.size(); ++k)
                if (sector0->index[k] % d == sector0->index[k] / d) out.push_back(static_cast<Eigen::Index>(k));
        } else {
            for (Eigen::Index i = 0; i < d; ++i) out.push_back(i + i * d);
        }
        return out;
    }

    // Unit-trace null vector of the working space by inverse iteration.
    const Eigen::VectorXcd& null_vector() {
        if (!null0) {
            auto solve = solver0();
            auto n = mode == GapMethod::Sectors ? static_cast<Eigen::Index>(sector0->index.size()) : l.generator.rows();
            Eigen::VectorXcd x = start_vector(n);
            for (int it = 0; it < 20; ++it) {
                Eigen::VectorXcd y = solve(x);
                y.normalize();
                cplx ph = y.dot(x);
                if (std::abs(ph) > 0.0) y *= std::conj(ph) / std::abs(ph);
                double change = (y - x).norm();
                x = y;
                if (change < 1e-14 && it >= 1) break;
            }
            cplx tr(0.0, 0.0);
            for (auto k : diagonal_positions()) tr += x(k);
            if (std::abs(tr) <= 1e-12 * x.norm()) throw SolverError("steady-state vector has zero trace");
            null0 = x / tr;
        }
        return *null0;
    }

    // Ritz pairs near zero; in sector mode the vectors live in block q = 0.
    // The iteration runs on the traceless subspace, which L preserves, so the
    // null eigenvalue does not swamp the Hessenberg matrix; it is added back
    // as a separate pair.
    const RitzPairs& near_zero() {
        if (!ritz0) {
            auto solve = solver0();
            auto apply = apply0();
            const auto& x = null_vector();
            auto diag = diagonal_positions();
            ProjectFn project = [&](Eigen::VectorXcd& w) {
                cplx tr(0.0, 0.0);
                for (auto k : diag) tr += w(k);
                w -= tr * x;
            };
            auto n = x.size();
            auto r = arnoldi(apply, lnorm, solve, n, sigma0, opt.arnoldi_nev, opt.arnoldi_max_dim, opt.arnoldi_tol,
                             project);
            Eigen::VectorXcd xn = x.normalized();
            Eigen::VectorXcd lx = apply(xn);
            cplx lam0 = xn.dot(lx);
            const auto k = r.values.size();
            RitzPairs out;
            out.values.resize(k + 1);
            out.vectors.resize(n, k + 1);
            out.residuals.resize(k + 1);
            out.values(0) = lam0;
            out.vectors.col(0) = xn;
            out.residuals(0) = (lx - lam0 * xn).norm() / lnorm;
            out.values.tail(k) = r.values;
            out.vectors.rightCols(k) = r.vectors;
            out.residuals.tail(k) = r.residuals;
            ritz0 = std::move(out);
        }
        return *ritz0;
    }

    double radius() {
        if (mode == GapMethod::Dense) return dense_eigenvalues().cwiseAbs().maxCoeff();
        return lnorm;
    }
};

LiouvillianSolver::LiouvillianSolver(const Liouvillian& l, SolverOptions options)
    : impl_(std::make_unique<Impl>(l, std::move(options))) {}

LiouvillianSolver::~LiouvillianSolver() = default;

GapMethod LiouvillianSolver::method() const { return impl_->mode; }

double LiouvillianSolver::spectral_radius() { return impl_->radius(); }

SteadyStateReport LiouvillianSolver::steady_state() {
    auto& im = *impl_;
    const auto& l = im.l;
    const auto d = l.hilbert_dim;
    double radius = spectral_radius();

    Eigen::VectorXcd x;
    if (im.mode == GapMethod::Dense) {
        const auto& ev = im.dense_eigenvalues();
        std::vector<Candidate> c;
        for (Eigen::Index k = 0; k < ev.size(); ++k) c.push_back({ev(k), -1.0});
        check_null(c, radius);
        x = vectorize(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
    } else {
        const auto& r = im.near_zero();
        std::vector<Candidate> c;
        for (Eigen::Index k = 0; k < r.values.size(); ++k) c.push_back({r.values(k), r.residuals(k)});
        auto k0 = check_null(c, radius);
        x = r.vectors.col(static_cast<Eigen::Index>(k0));
    }
    auto solve = im.solver0();
    x.normalize();
    for (int it = 0; it < 20; ++it) {
        Eigen::VectorXcd y = solve(x);
        y.normalize();
        // fix the phase so successive iterates are comparable
        cplx ph = y.dot(x);
        if (std::abs(ph) > 0.0) y *= std::conj(ph) / std::abs(ph);
        double change = (y - x).norm();
        x = y;
        if (change < 1e-14 && it >= 1) break;
    }
    if (im.mode == GapMethod::Sectors) {
        Eigen::VectorXcd full = Eigen::VectorXcd::Zero(l.generator.rows());
        const auto& idx = im.sector0->index;
        for (std::size_t k = 0; k < idx.size(); ++k) full(idx[k]) = x(static_cast<Eigen::Index>(k));
        x = std::move(full);
    }

    cplx tr(0.0, 0.0);
    for (std::size_t i = 0; i < d; ++i) tr += x(static_cast<Eigen::Index>(i + i * d));
    if (std::abs(tr) == 0.0) throw SolverError("steady-state vector has zero trace");
    x /= tr;

    SteadyStateReport rep;
    rep.method = to_string(im.mode);
    rep.null_residual = (l.generator * x).norm();
    Eigen::MatrixXcd rho = unvectorize(x, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    rep.rho = rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = es.eigenvalues().minCoeff();

    const auto na = l.metadata.atom_dim, nc = l.metadata.cavity_dim;
    if (na * nc == d && nc > 0) {
        rep.atom_populations.assign(na, 0.0);
        rep.cavity_populations.assign(nc, 0.0);
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t c = 0; c < nc; ++c) {
                double p = rho(static_cast<Eigen::Index>(a * nc + c), static_cast<Eigen::Index>(a * nc + c)).real();
                rep.atom_populations[a] += p;
                rep.cavity_populations[c] += p;
            }
        for (std::size_t c = 0; c < nc; ++c) rep.cavity_occupation += static_cast<double>(c) * rep.cavity_populations[c];
        rep.labels = l.metadata.labels;
    }
    if (rep.min_eigenvalue < -1e-8) rep.diagnostics.push_back("steady state has negative eigenvalue");
    if (rep.null_residual > 1e-8 * im.lnorm) rep.diagnostics.push_back("steady-state residual above 1e-8 ||L||");
    return rep;
}

GapResult LiouvillianSolver::spectral_gap() {
    auto& im = *impl_;
    const auto& l = im.l;
    double radius = spectral_radius();
    std::vector<Candidate> vals;
    std::vector<double> probes = im.opt.probe_frequencies;
    if (l.metadata.cavity_frequency > 0.0) probes.insert(probes.begin(), l.metadata.cavity_frequency);
    if (im.mode == GapMethod::Dense) {
        const auto& ev = im.dense_eigenvalues();
        for (Eigen::Index k = 0; k < ev.size(); ++k) vals.push_back({ev(k), -1.0});
    } else if (im.mode == GapMethod::Sectors) {
        add_candidates(vals, im.near_zero(), radius);
        // block q oscillates near -q times the cavity frequency in this frame
        const double wc = l.metadata.cavity_frequency;
        std::map<int, Sector> blocks;
        for (double w : probes) {
            int q = wc > 0.0 ? -static_cast<int>(std::lround(w / wc)) : 0;
            if (q == 0) continue;
            auto it = blocks.find(q);
            if (it == blocks.end()) it = blocks.emplace(q, im.make_sector(q)).first;
            const Sector& sq = it->second;
            const auto nq = static_cast<Eigen::Index>(sq.index.size());
            if (nq == 0) continue;
            cplx sigma(im.sigma0, w);
            Eigen::MatrixXcd a = sq.block;
            a.diagonal().array() -= sigma;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
            auto r = arnoldi([&](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(sq.block * x); }, im.lnorm,
                             [&](const Eigen::VectorXcd& b) { return Eigen::VectorXcd(lu.solve(b)); }, nq, sigma,
                             im.opt.arnoldi_nev, im.opt.arnoldi_max_dim, im.opt.arnoldi_tol);
            add_candidates(vals, r, radius);
        }
    } else {
        add_candidates(vals, im.near_zero(), radius);
        auto apply = im.apply0();
        for (double w : probes) {
            cplx sigma(im.sigma0, w);
            SparseLUC lu;
            lu.compute(shifted(l.generator, sigma));
            if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
            auto r = arnoldi(apply, im.lnorm, [&](const Eigen::VectorXcd& b) { return Eigen::VectorXcd(lu.solve(b)); },
                             l.generator.rows(), sigma, im.opt.arnoldi_nev, im.opt.arnoldi_max_dim, im.opt.arnoldi_tol);
            add_candidates(vals, r, radius);
        }
    }
    auto k0 = check_null(vals, radius);
    cplx null_value = vals[k0].value;

    GapResult g;
    const double tie = 1e-12 * radius;
    std::optional<std::size_t> best;
    std::optional<std::size_t> best_coh;
    const double wc = l.metadata.cavity_frequency;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const auto& c = vals[k];
        g.eigenvalues.push_back(c.value);
        if (k == k0 || std::abs(c.value - null_value) <= 1e-9 * radius) continue;
        auto better = [&](std::optional<std::size_t> cur) {
            if (!cur) return true;
            const auto& b = vals[*cur];
            double da = std::abs(c.value.real()), db = std::abs(b.value.real());
            if (std::abs(da - db) > tie) return da < db;
            if ((c.value.imag() >= 0.0) != (b.value.imag() >= 0.0)) return c.value.imag() >= 0.0;
            return std::abs(c.value.imag()) < std::abs(b.value.imag());
        };
        if (better(best)) best = k;
        if (wc > 0.0 && c.value.imag() > 0.5 * wc && c.value.imag() < 1.5 * wc && better(best_coh)) best_coh = k;
    }
    if (!best) throw SolverError("no nonzero eigenvalue found for the spectral gap");
    cplx lam = vals[*best].value;
    g.eigenvalue = lam;
    g.linewidth = std::abs(lam.real());
    g.emission_offset = lam.imag();
    if (best_coh) {
        g.coherence_linewidth = std::abs(vals[*best_coh].value.real());
        g.coherence_offset = vals[*best_coh].value.imag();
    }
    if (im.mode == GapMethod::Dense) {
        // residual of the candidate from inverse iteration at a nearby shift
        Eigen::MatrixXcd a = l.dense();
        cplx s = lam + cplx(1e-10 * radius, 0.0);
        a.diagonal().array() -= s;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        Eigen::VectorXcd y = start_vector(a.rows());
        for (int it = 0; it < 4; ++it) y = lu.solve(y).normalized();
        g.residual = (l.generator * y - lam * y).norm() / im.lnorm;
    } else {
        g.residual = vals[*best].residual;
    }
    if (g.residual > 1e-6) throw SolverError("ill-conditioned gap eigenpair (residual " + std::to_string(g.residual) + ")");
    return g;
}

SteadyStateReport steady_state(const Liouvillian& l, const SolverOptions& options) {
    LiouvillianSolver s(l, options);
    return s.steady_state();
}

GapResult spectral_gap(const Liouvillian& l, const SolverOptions& options) {
    LiouvillianSolver s(l, options);
    return s.spectral_gap();
}

SteadyStateReport analyze(const Liouvillian& l, const SolverOptions& options) {
    LiouvillianSolver s(l, options);
    auto rep = s.steady_state();
    auto g = s.spectral_gap();
    rep.linewidth = g.linewidth;
    rep.emission_offset = g.emission_offset;
    rep.coherence_linewidth = g.coherence_linewidth;
    return rep;
}

RitzPairs shift_invert_arnoldi(const SparseMatrixC& l, cplx sigma, int nev, int max_dim, double tol) {
    SparseLUC lu;
    lu.compute(shifted(l, sigma));
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
    double lnorm = 0.0;
    for (Eigen::Index k = 0; k < l.outerSize(); ++k) {
        double s = 0.0;
        for (SparseMatrixC::InnerIterator it(l, k); it; ++it) s += std::abs(it.value());
        lnorm = std::max(lnorm, s);
    }
    return arnoldi([&](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(l * x); }, lnorm > 0.0 ? lnorm : 1.0,
                   [&](const Eigen::VectorXcd& b) { return Eigen::VectorXcd(lu.solve(b)); }, l.rows(), sigma, nev, max_dim,
                   tol);
}

std::string SteadyStateReport::to_json() const {
    nlohmann::json j;
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    j["cavity_occupation"] = cavity_occupation;
    j["linewidth"] = num(linewidth);
    j["linewidth_hz"] = num(linewidth / (2.0 * M_PI));
    j["emission_offset"] = num(emission_offset);
    j["coherence_linewidth"] = num(coherence_linewidth);
    j["null_residual"] = null_residual;
    j["min_eigenvalue"] = min_eigenvalue;
    j["method"] = method;
    nlohmann::json pops = nlohmann::json::array();
    for (std::size_t k = 0; k < atom_populations.size(); ++k) {
        nlohmann::json p;
        if (k < labels.size()) p["label"] = {labels[k].snail, labels[k].transmon};
        p["population"] = atom_populations[k];
        pops.push_back(p);
    }
    j["atom_populations"] = pops;
    j["cavity_populations"] = cavity_populations;
    j["diagnostics"] = diagnostics;
    return j.dump(2);
}

}  // namespace maser
