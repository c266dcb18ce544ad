#include <array>
#include "maser/signal.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "maser/errors.hpp"
#include "maser/least_squares.hpp"
#include "maser/units.hpp"

namespace maser {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Numeric rows of a delimited text file; the first line may be a header.
std::vector<std::vector<double>> read_columns(const std::string& path, std::size_t ncols) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        bool numeric = true;
        while (ss >> tok) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (row.empty() && numeric) continue;
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw IoError(path + ":" + std::to_string(lineno) + ": non-numeric data");
        }
        first = false;
        if (row.size() != ncols)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(ncols) + " columns");
        rows.push_back(std::move(row));
    }
    return rows;
}

double median(std::vector<double> v) {
    if (v.empty()) return nan;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

double median_spacing(const std::vector<double>& f) {
    std::vector<double> d(f.size() - 1);
    for (std::size_t i = 0; i + 1 < f.size(); ++i) d[i] = f[i + 1] - f[i];
    return median(d);
}

}  // namespace

void SpectrumTrace::validate() const {
    if (frequencies.size() != powers.size()) throw ConfigError("spectrum: frequency and power lengths differ");
    if (frequencies.size() < 5) throw ConfigError("spectrum: need at least 5 points");
    for (std::size_t i = 0; i + 1 < frequencies.size(); ++i)
        if (!(frequencies[i + 1] > frequencies[i])) throw ConfigError("spectrum: frequencies must increase strictly");
}

SpectrumTrace spectrum_from_dbm(std::vector<double> frequencies, const std::vector<double>& dbm) {
    SpectrumTrace t;
    t.frequencies = std::move(frequencies);
    t.powers.reserve(dbm.size());
    for (double p : dbm) t.powers.push_back(dbm_to_mw(p));
    t.validate();
    return t;
}

SpectrumTrace read_spectrum(const std::string& path) {
    std::vector<double> f, p;
    for (const auto& row : read_columns(path, 2)) {
        f.push_back(row[0]);
        p.push_back(row[1]);
    }
    auto t = spectrum_from_dbm(std::move(f), p);
    t.source = path;
    return t;
}

double lorentzian(double f, const LorentzianParams& p) {
    double hw = 0.5 * p.gamma;
    return p.amplitude / units::pi * hw / ((f - p.f0) * (f - p.f0) + hw * hw) + p.offset;
}

LorentzianParams lorentzian_seed(const SpectrumTrace& trace) {
    trace.validate();
    const auto& f = trace.frequencies;
    const auto& p = trace.powers;
    auto imax = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    LorentzianParams s;
    s.f0 = f[imax];
    s.offset = median(p);
    double half = 0.5 * (p[imax] + s.offset);
    auto crossing = [&](int dir) {
        for (std::size_t i = imax; dir < 0 ? i > 0 : i + 1 < f.size(); i = dir < 0 ? i - 1 : i + 1) {
            std::size_t j = dir < 0 ? i - 1 : i + 1;
            if (p[j] <= half) return f[j] + (half - p[j]) * (f[i] - f[j]) / (p[i] - p[j]);
        }
        return dir < 0 ? f.front() : f.back();
    };
    s.gamma = std::max(crossing(1) - crossing(-1), 2.0 * median_spacing(f));
    s.amplitude = (p[imax] - s.offset) * units::pi * s.gamma / 2.0;
    return s;
}

LorentzianFit fit_lorentzian(const SpectrumTrace& trace, std::optional<LorentzianParams> guess) {
    trace.validate();
    LorentzianParams seed = guess ? *guess : lorentzian_seed(trace);
    if (!(seed.gamma > 0.0)) throw ConfigError("lorentzian: initial gamma must be positive");
    // Work in units of the seed width around the seed centre and of the peak power.
    const double fs = seed.gamma;
    const double fc = seed.f0;
    double ps = 0.0;
    for (double p : trace.powers) ps = std::max(ps, std::abs(p));
    if (ps == 0.0) throw SolverError("lorentzian: trace is identically zero");
    const auto n = static_cast<Eigen::Index>(trace.frequencies.size());
    Eigen::VectorXd u(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u(i) = (trace.frequencies[static_cast<std::size_t>(i)] - fc) / fs;
        y(i) = trace.powers[static_cast<std::size_t>(i)] / ps;
    }
    auto model = [&](const Eigen::VectorXd& x, double ui) {
        double hw = 0.5 * std::abs(x(1));
        double d = ui - x(0);
        return x(2) / units::pi * hw / (d * d + hw * hw) + x(3);
    };
    Eigen::VectorXd x0(4);
    x0 << (seed.f0 - fc) / fs, seed.gamma / fs, seed.amplitude / (ps * fs), seed.offset / ps;
    auto res = least_squares(
        [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
            for (Eigen::Index i = 0; i < n; ++i) r(i) = model(x, u(i)) - y(i);
        },
        x0, n);
    LorentzianFit fit;
    fit.params = {fc + fs * res.x(0), fs * std::abs(res.x(1)), ps * fs * res.x(2), ps * res.x(3)};
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = trace.powers[static_cast<std::size_t>(i)] - lorentzian(trace.frequencies[static_cast<std::size_t>(i)], fit.params);
        fit.residuals.push_back(r);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    fit.under_resolved = fit.params.gamma < 2.0 * median_spacing(trace.frequencies);
    if (!fit.converged) throw SolverError("lorentzian fit did not converge");
    return fit;
}

void IQTrace::validate() const {
    if (!(dt > 0.0)) throw ConfigError("iq trace: dt must be positive");
    if (samples.size() < 2) throw ConfigError("iq trace: need at least 2 samples");
}

IQTrace read_iq_text(const std::string& path) {
    auto rows = read_columns(path, 3);
    if (rows.size() < 2) throw IoError(path + ": need at least 2 samples");
    IQTrace t;
    t.dt = (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && std::abs(rows[i][0] - rows[i - 1][0] - t.dt) > 1e-6 * t.dt)
            throw IoError(path + ": time steps are not uniform");
        t.samples.emplace_back(rows[i][1], rows[i][2]);
    }
    t.validate();
    return t;
}

IQTrace read_iq_binary(const std::string& path, const std::string& sidecar) {
    std::string meta = sidecar.empty() ? path + ".meta" : sidecar;
    std::ifstream m(meta);
    if (!m) throw IoError("cannot open sidecar '" + meta + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(m, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto key = line.substr(0, eq), val = line.substr(eq + 1);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        val.erase(std::remove_if(val.begin(), val.end(), ::isspace), val.end());
        kv[key] = val;
    }
    if (!kv.count("dt_s")) throw IoError(meta + ": missing dt_s");
    IQTrace t;
    try {
        t.dt = std::stod(kv["dt_s"]);
    } catch (const std::exception&) {
        throw IoError(meta + ": bad dt_s");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    in.seekg(0, std::ios::end);
    auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % (2 * sizeof(float)) != 0) throw IoError(path + ": size is not a whole number of float32 pairs");
    std::vector<float> buf(bytes / sizeof(float));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError(path + ": read failed");
    for (std::size_t i = 0; i < buf.size(); i += 2) t.samples.emplace_back(buf[i], buf[i + 1]);
    t.validate();
    return t;
}

void write_iq_binary(const IQTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (const auto& z : trace.samples) {
        float v[2] = {static_cast<float>(z.real()), static_cast<float>(z.imag())};
        out.write(reinterpret_cast<const char*>(v), sizeof v);
    }
    std::ofstream meta(path + ".meta");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", trace.dt);
    meta << "dt_s = " << buf << "\nsamples = " << trace.samples.size() << '\n';
    if (!out || !meta) throw IoError("write failed for '" + path + "'");
}

std::vector<double> Correlation::magnitude() const {
    std::vector<double> m;
    for (const auto& g : values) m.push_back(std::abs(g));
    return m;
}

std::vector<double> Correlation::phase() const {
    std::vector<double> p;
    for (const auto& g : values) p.push_back(std::arg(g));
    return unwrap_phase(p);
}

Correlation two_time_correlation(const IQTrace& trace, double max_lag, CorrelationEstimator estimator) {
    trace.validate();
    const std::size_t n = trace.samples.size();
    if (max_lag < 0.0 || max_lag > trace.duration() / 4.0 * (1.0 + 1e-12))
        throw ConfigError("correlation: max lag must lie within a quarter of the trace duration");
    auto kmax = static_cast<std::size_t>(std::floor(max_lag / trace.dt + 1e-9));
    if (kmax + 1 >= n) throw ConfigError("correlation: insufficient samples for the requested lag");
    // Zero-padded FFT gives all lag sums at once.
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> z(m, 0.0), spec;
    std::copy(trace.samples.begin(), trace.samples.end(), z.begin());
    fft.fwd(spec, z);
    for (auto& s : spec) s = std::norm(s);
    std::vector<std::complex<double>> acf;
    fft.inv(acf, spec);
    // acf[k] = sum_t z*(t) z(t + k) up to the inverse transform's scale
    Correlation c;
    std::complex<double> g0 = acf[0] / static_cast<double>(n);
    for (std::size_t k = 0; k <= kmax; ++k) {
        double norm = estimator == CorrelationEstimator::Unbiased ? static_cast<double>(n - k) : static_cast<double>(n);
        c.lags.push_back(static_cast<double>(k) * trace.dt);
        c.values.push_back(acf[k] / norm / g0);
    }
    return c;
}

CorrelationLinewidth linewidth_from_correlation(const Correlation& corr, const CorrelationLinewidthOptions& o) {
    if (corr.lags.size() < 3) throw ConfigError("correlation: need at least 3 lags");
    auto mag = corr.magnitude();
    CorrelationLinewidth out;
    double tmax = corr.lags.back();
    out.resolution_floor_hz = -std::log1p(-o.min_decay) / tmax;
    if (1.0 - mag.back() < o.min_decay) {
        out.unresolved = true;
        out.tau_c = std::numeric_limits<double>::infinity();
        out.linewidth_inverse_tau = nan;
        out.linewidth_inverse_pi_tau = nan;
        return out;
    }
    // Fit log|G| = b - tau / tau_c over lags k >= 1 above the floor; the zero
    // lag carries the white-noise power. The noise on log|G| scales as 1/|G|,
    // so each lag is weighted by |G|^2.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    std::vector<std::array<double, 3>> pts;
    for (std::size_t k = 1; k < mag.size(); ++k) {
        if (mag[k] < o.floor) break;
        double x = corr.lags[k], yv = std::log(mag[k]), w = mag[k] * mag[k];
        pts.push_back({x, yv, w});
        sw += w;
        sx += w * x;
        sy += w * yv;
        sxx += w * x * x;
        sxy += w * x * yv;
        ++cnt;
    }
    if (cnt < 2) throw SolverError("correlation decays below the fit floor within one lag");
    double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    double intercept = (sy - slope * sx) / sw;
    double ss = 0.0;
    for (auto [x, yv, w] : pts) ss += w * (yv - intercept - slope * x) * (yv - intercept - slope * x);
    out.points_used = cnt;
    out.rms_log_residual = std::sqrt(ss / sw);
    out.non_exponential = out.rms_log_residual > o.max_rms_log_residual;
    if (!(slope < 0.0)) {
        out.unresolved = true;
        out.tau_c = std::numeric_limits<double>::infinity();
        out.linewidth_inverse_tau = nan;
        out.linewidth_inverse_pi_tau = nan;
        return out;
    }
    out.tau_c = -1.0 / slope;
    out.linewidth_inverse_tau = 1.0 / out.tau_c;
    out.linewidth_inverse_pi_tau = 1.0 / (units::pi * out.tau_c);
    return out;
}

std::vector<double> unwrap_phase(const std::vector<double>& phases) {
    if (phases.empty()) throw ConfigError("unwrap_phase: empty input");
    std::vector<double> out(phases.size());
    out[0] = phases[0];
    double shift = 0.0;
    for (std::size_t i = 1; i < phases.size(); ++i) {
        double d = phases[i] - phases[i - 1];
        if (d > units::pi || d < -units::pi) shift -= units::two_pi * std::round(d / units::two_pi);
        out[i] = phases[i] + shift;
    }
    return out;
}

SpectrumTrace periodogram(const IQTrace& trace, std::size_t segment, double center_hz) {
    trace.validate();
    if (segment < 8 || segment > trace.samples.size()) throw ConfigError("periodogram: bad segment length");
    std::vector<double> w(segment);
    double w2 = 0.0;
    for (std::size_t i = 0; i < segment; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(units::two_pi * static_cast<double>(i) / static_cast<double>(segment));
        w2 += w[i] * w[i];
    }
    Eigen::FFT<double> fft;
    std::vector<double> acc(segment, 0.0);
    std::size_t count = 0;
    std::vector<std::complex<double>> buf(segment), spec;
    for (std::size_t start = 0; start + segment <= trace.samples.size(); start += segment / 2) {
        for (std::size_t i = 0; i < segment; ++i) buf[i] = trace.samples[start + i] * w[i];
        fft.fwd(spec, buf);
        for (std::size_t i = 0; i < segment; ++i) acc[i] += std::norm(spec[i]);
        ++count;
    }
    const double fs = 1.0 / trace.dt;
    SpectrumTrace out;
    out.resolution_bandwidth = fs / static_cast<double>(segment);
    out.source = "periodogram";
    // eigen's forward transform uses exp(-i...), so bin k is frequency +k fs / N
    for (std::size_t j = 0; j < segment; ++j) {
        std::size_t k = (j + (segment + 1) / 2) % segment;
        double f = (static_cast<double>(k) - (k >= (segment + 1) / 2 ? static_cast<double>(segment) : 0.0)) * fs /
                   static_cast<double>(segment);
        out.frequencies.push_back(center_hz + f);
        out.powers.push_back(acc[k] / (static_cast<double>(count) * fs * w2));
    }
    return out;
}

IQTrace synthetic_tone(const SyntheticToneOptions& o) {
    IQTrace t;
    t.dt = o.dt;
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double step = std::sqrt(units::two_pi * o.linewidth_hz * o.dt);
    double phase = 0.0;
    t.samples.reserve(o.samples);
    for (std::size_t i = 0; i < o.samples; ++i) {
        double carrier = units::two_pi * o.offset_hz * o.dt * static_cast<double>(i);
        std::complex<double> z = std::polar(o.amplitude, carrier + phase);
        if (o.amplitude_noise > 0.0)
            z += o.amplitude * o.amplitude_noise * std::complex<double>(normal(rng), normal(rng));
        t.samples.push_back(z);
        phase += step * normal(rng);
    }
    t.validate();
    return t;
}

void write_fit_record(const LorentzianFit& fit, std::ostream& out) {
    char buf[64];
    auto put = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << k << " = " << buf << '\n';
    };
    put("f0_hz", fit.params.f0);
    put("gamma_hz", fit.params.gamma);
    put("amplitude", fit.params.amplitude);
    put("offset", fit.params.offset);
    put("residual_rms", fit.residual_rms);
    out << "converged = " << (fit.converged ? "true" : "false") << '\n';
    out << "under_resolved = " << (fit.under_resolved ? "true" : "false") << '\n';
}

void write_correlation_record(const CorrelationLinewidth& lw, std::ostream& out) {
    char buf[64];
    auto put = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << k << " = " << buf << '\n';
    };
    put("tau_c_s", lw.tau_c);
    put("linewidth_inverse_tau_hz", lw.linewidth_inverse_tau);
    put("linewidth_inverse_pi_tau_hz", lw.linewidth_inverse_pi_tau);
    put("rms_log_residual", lw.rms_log_residual);
    put("resolution_floor_hz", lw.resolution_floor_hz);
    out << "points_used = " << lw.points_used << '\n';
    out << "unresolved = " << (lw.unresolved ? "true" : "false") << '\n';
    out << "non_exponential = " << (lw.non_exponential ? "true" : "false") << '\n';
}

}  // namespace maser
