#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace maser {

struct SpectrumTrace {
    std::vector<double> frequencies;  // Hz, strictly increasing
    std::vector<double> powers;       // linear (mW)
    double resolution_bandwidth = 0.0;
    std::string source;
    void validate() const;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
// Two columns frequency_hz, power_dbm; header line optional.
SpectrumTrace read_spectrum(const std::string& path);
SpectrumTrace spectrum_from_dbm(std::vector<double> frequencies, const std::vector<double>& dbm);

struct LorentzianParams {
    double f0 = 0.0;
    double gamma = 0.0;      // FWHM, Hz
    double amplitude = 0.0;  // area under the peak
    double offset = 0.0;
};

// A (1/pi)(gamma/2) / ((f - f0)^2 + (gamma/2)^2) + c
double lorentzian(double f, const LorentzianParams& p);

struct LorentzianFit {
    LorentzianParams params;
    double residual_rms = 0.0;
    std::vector<double> residuals;
    bool converged = false;
    bool under_resolved = false;  // gamma narrower than two frequency bins
    int iterations = 0;
};

LorentzianFit fit_lorentzian(const SpectrumTrace& trace, std::optional<LorentzianParams> guess = {});
// Seed used when no guess is given.
LorentzianParams lorentzian_seed(const SpectrumTrace& trace);

struct IQTrace {
    std::vector<std::complex<double>> samples;  // I + iQ
    double dt = 0.0;                            // s
    void validate() const;
    double duration() const { return dt * static_cast<double>(samples.size()); }
};

// Three columns time_s, i, q with uniform time steps; header optional.
IQTrace read_iq_text(const std::string& path);
// Interleaved little-endian float32 (i, q) pairs; dt read from the key=value
// sidecar (default <path>.meta, key dt_s).
IQTrace read_iq_binary(const std::string& path, const std::string& sidecar = {});
void write_iq_binary(const IQTrace& trace, const std::string& path);

enum class CorrelationEstimator { Unbiased, Biased };

struct Correlation {
    std::vector<double> lags;  // s
    std::vector<std::complex<double>> values;
    std::vector<double> magnitude() const;
    std::vector<double> phase() const;  // unwrapped
};

// G(k dt) = <z*(t) z(t + k dt)> averaged over t, normalized so G(0) = 1.
Correlation two_time_correlation(const IQTrace& trace, double max_lag,
                                 CorrelationEstimator estimator = CorrelationEstimator::Unbiased);

struct CorrelationLinewidthOptions {
    double floor = 0.3679;           // lags with |G| below this (1/e) are not fitted
    double max_rms_log_residual = 0.05;
    double min_decay = 0.01;         // 1 - |G(max lag)| needed to resolve a decay
};

struct CorrelationLinewidth {
    double tau_c = 0.0;               // s
    double linewidth_inverse_tau = 0.0;     // 1 / tau_c (reported convention)
    double linewidth_inverse_pi_tau = 0.0;  // 1 / (pi tau_c), Lorentzian FWHM of a phase-diffusing tone
    double rms_log_residual = 0.0;
    std::size_t points_used = 0;
    bool unresolved = false;   // decay below the resolution floor
    bool non_exponential = false;
    double resolution_floor_hz = 0.0;  // smallest 1/tau_c the lag window resolves
};

CorrelationLinewidth linewidth_from_correlation(const Correlation& corr, const CorrelationLinewidthOptions& options = {});

// Successive differences brought into [-pi, pi] by multiples of 2 pi.
std::vector<double> unwrap_phase(const std::vector<double>& phases);

// Welch-averaged two-sided power spectrum of the complex signal, returned on
// increasing frequency (Hz), with a Hann window and segments of the given
// length (power of two not required).
SpectrumTrace periodogram(const IQTrace& trace, std::size_t segment, double center_hz = 0.0);

struct SyntheticToneOptions {
    std::size_t samples = 1 << 16;
    double dt = 1e-4;              // s
    double offset_hz = 0.0;        // carrier offset
    double linewidth_hz = 0.0;     // Lorentzian FWHM from Wiener phase diffusion
    double amplitude = 1.0;
    double amplitude_noise = 0.0;  // relative gaussian noise on I and Q
    std::uint64_t seed = 1;
};
// Constant-radius tone with Wiener phase, phase increments of variance
// 2 pi linewidth dt.
IQTrace synthetic_tone(const SyntheticToneOptions& options);

// Report records for the analyze command.
void write_fit_record(const LorentzianFit& fit, std::ostream& out);
void write_correlation_record(const CorrelationLinewidth& lw, std::ostream& out);

}  // namespace maser
