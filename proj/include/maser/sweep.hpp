#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maser/device.hpp"
#include "maser/lindblad.hpp"

namespace maser {

// Numeric parameters that a config may set or sweep. Keys carry their unit.
struct ParameterInfo {
    std::string key;
    double default_value;
    std::string description;
    bool integral = false;
};
const std::vector<ParameterInfo>& parameter_registry();
const ParameterInfo* find_parameter(const std::string& key);

using ParameterSet = std::map<std::string, double>;
ParameterSet default_parameters();

struct AxisSpec {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    std::size_t count = 1;
    bool geometric = false;  // log-spaced between start and stop
    std::vector<double> values() const;
};

struct SweepConfig {
    ParameterSet params;
    std::vector<AxisSpec> axes;  // axis 0 varies slowest
    PumpRule pump_rule = PumpRule::Strict;
    bool keep_counter_rotating = false;
    bool strict_labels = false;
    SolverOptions solver;
    std::string output_path;
    std::size_t threads = 1;

    // Canonical key=value text fully describing the run.
    std::string canonical() const;
    std::uint64_t hash() const;
};

// Flat "key = value" text; '#' starts a comment. Throws ConfigError.
SweepConfig parse_config(std::istream& in);
SweepConfig load_config(const std::string& path);
std::uint64_t fnv1a64(const std::string& text);

// Physical device and pump for one parameter set. transmon.frequency_ghz,
// when finite, overrides transmon.flux.
DeviceParams device_from(const ParameterSet& p);
PumpSettings pump_from(const ParameterSet& p, PumpRule rule);

// Memoized component solves; safe to share between worker threads. Entries
// are pure functions of the parameters that select them.
class ComponentCache {
public:
    explicit ComponentCache(bool enabled = true);
    ~ComponentCache();
    ComponentCache(const ComponentCache&) = delete;
    ComponentCache& operator=(const ComponentCache&) = delete;

    std::shared_ptr<const ComponentSpectrum> snail(const DeviceParams& d);
    std::shared_ptr<const ComponentSpectrum> transmon(const DeviceParams& d);
    std::shared_ptr<const ComponentSpectrum> cavity(const DeviceParams& d);
    std::shared_ptr<const AtomBasis> atom(const DeviceParams& d, bool strict);
    // transmon flux (flux quanta) for transmon.frequency_ghz
    double transmon_flux(const DeviceParams& d, double frequency_ghz);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct OperatingPoint {
    DeviceParams device;
    PumpSettings pump;
    std::shared_ptr<const AtomBasis> atom;
    std::shared_ptr<const ComponentSpectrum> cavity;
    RotatingFrameModel model;
    Liouvillian liouvillian;
};
OperatingPoint build_operating_point(const SweepConfig& cfg, const ParameterSet& p, ComponentCache& cache);

enum class PointStatus { Ok, Multistable, SolverFailed, Invalid };
std::string to_string(PointStatus s);

struct PointRecord {
    std::vector<double> coordinates;
    PointStatus status = PointStatus::Ok;
    // Payload is empty unless status is Ok.
    std::optional<double> occupation;
    std::optional<double> linewidth_hz;
    std::optional<double> emission_offset_hz;
    std::optional<double> residual;  // ||L rho|| / ||L||
    std::string message;
};

PointRecord evaluate_point(const SweepConfig& cfg, const ParameterSet& p, ComponentCache& cache);

struct SweepResultGrid {
    std::vector<AxisSpec> axes;
    std::vector<std::vector<double>> coordinates;
    std::vector<PointRecord> records;  // row-major, last axis fastest
    std::uint64_t config_hash = 0;
    std::string code_version;
    std::string timestamp;
    double elapsed_s = 0.0;

    std::size_t index(const std::vector<std::size_t>& idx) const;
    std::vector<std::size_t> unravel(std::size_t flat) const;
    void write_csv(std::ostream& out) const;
    void write_metadata(std::ostream& out, const SweepConfig& cfg) const;
};

struct RunOptions {
    std::size_t threads = 1;
    bool use_cache = true;
};
SweepResultGrid run_sweep(const SweepConfig& cfg, const RunOptions& options);
SweepResultGrid run_sweep(const SweepConfig& cfg);
// Writes <path> and <path>.meta.
void save_sweep(const SweepResultGrid& grid, const SweepConfig& cfg, const std::string& path);

struct Extremum {
    std::vector<std::size_t> index;
    std::vector<double> coordinates;
    double value = 0.0;
};
struct Extrema {
    Extremum max_occupation;
    Extremum min_linewidth;
};
// Failed points are ignored; ties go to the lexicographically lowest index.
Extrema locate_extrema(const SweepResultGrid& grid);

}  // namespace maser
