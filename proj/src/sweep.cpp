#include "maser/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "maser/errors.hpp"
#include "maser/units.hpp"

namespace maser {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

const std::vector<ParameterInfo> registry = {
    {"snail.i_s1_ua", 0.075, "small-junction critical current (uA)"},
    {"snail.i_s2_ua", 0.25, "large-junction critical current (uA)"},
    {"snail.l_lin_nh", 0.2, "stray linear inductance (nH)"},
    {"snail.c_s_ff", 341.0, "snail capacitance (fF)"},
    {"snail.flux", 0.23, "snail external flux (flux quanta)"},
    {"transmon.i_t1_ua", 0.03, "first junction critical current (uA)"},
    {"transmon.i_t2_ua", 0.03, "second junction critical current (uA)"},
    {"transmon.c_t_ff", 70.0, "transmon capacitance (fF)"},
    {"transmon.flux", 0.1745, "transmon external flux (flux quanta)"},
    {"transmon.frequency_ghz", nan, "bare g->e target; overrides transmon.flux when set"},
    {"cavity.c_c_ff", 200.0, "cavity capacitance (fF)"},
    {"cavity.l_c_nh", 2.606, "cavity inductance (nH)"},
    {"coupling.c_st_ff", 5.0, "snail-transmon coupling capacitance (fF)"},
    {"coupling.c_tc_ff", 0.015, "transmon-cavity coupling capacitance (fF)"},
    {"pump.frequency_ghz", 12.693, "pump frequency omega_p / 2pi (GHz)"},
    {"pump.amplitude_mhz", 175.0, "pump amplitude Omega / 2pi (MHz)"},
    {"rates.snail_mhz", 24.5, "snail decay chi_s / 2pi (MHz)"},
    {"rates.transmon_khz", 2.0, "transmon decay chi_t / 2pi (kHz)"},
    {"rates.cavity_khz", 19.7, "cavity decay chi_c / 2pi (kHz)"},
    {"cutoff.snail", 3, "snail levels in the atom", true},
    {"cutoff.transmon", 3, "transmon levels in the atom", true},
    {"cutoff.cavity", 4, "cavity levels", true},
    {"grid.snail_points", 400, "snail grid points over 4 pi", true},
    {"grid.transmon_points", 400, "transmon grid points over 2 pi", true},
    {"grid.cavity_points", 2000, "cavity grid points", true},
    {"grid.cavity_width", 4.2, "cavity grid extent (rad), centred at zero"},
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& key) {
    double v = 0.0;
    auto t = trim(text);
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError("key '" + key + "': cannot parse number '" + t + "'");
    return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_csv(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void check_integral(const ParameterInfo& info, double v) {
    if (info.integral && (v != std::floor(v) || v < 1.0))
        throw ConfigError("key '" + info.key + "' must be a positive integer");
}

AxisSpec parse_axis(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    AxisSpec a;
    std::string start, stop, count, spacing;
    if (!(ss >> a.name >> start >> stop >> count))
        throw ConfigError("key '" + key + "': expected '<name> <start> <stop> <count> [linear|geometric]'");
    ss >> spacing;
    std::string extra;
    if (ss >> extra) throw ConfigError("key '" + key + "': trailing text '" + extra + "'");
    a.start = parse_number(start, key);
    a.stop = parse_number(stop, key);
    double c = parse_number(count, key);
    if (c < 1.0 || c != std::floor(c)) throw ConfigError("key '" + key + "': count must be a positive integer");
    a.count = static_cast<std::size_t>(c);
    if (spacing.empty() || spacing == "linear") a.geometric = false;
    else if (spacing == "geometric") a.geometric = true;
    else throw ConfigError("key '" + key + "': unknown spacing '" + spacing + "'");
    const auto* info = find_parameter(a.name);
    if (!info) throw ConfigError("key '" + key + "': unknown parameter '" + a.name + "'");
    if (a.start > a.stop) throw ConfigError("key '" + key + "': start must not exceed stop");
    if (a.geometric && a.start <= 0.0) throw ConfigError("key '" + key + "': geometric axis needs a positive start");
    for (double v : a.values()) check_integral(*info, v);
    return a;
}

template <class T>
class Memo {
public:
    template <class F>
    std::shared_ptr<const T> get(const std::vector<double>& key, bool enabled, F&& make) {
        if (!enabled) return std::make_shared<const T>(make());
        std::promise<std::shared_ptr<const T>> promise;
        std::shared_future<std::shared_ptr<const T>> future;
        bool owner = false;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                future = promise.get_future().share();
                entries_.emplace(key, future);
                owner = true;
            } else {
                future = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(std::make_shared<const T>(make()));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return future.get();
    }

private:
    std::mutex mutex_;
    std::map<std::vector<double>, std::shared_future<std::shared_ptr<const T>>> entries_;
};

std::vector<double> snail_key(const DeviceParams& d) {
    const auto& s = d.snail;
    return {s.i_s1, s.i_s2, s.l_lin, s.c_s, s.flux_ext, d.inverse_capacitance()(0, 0),
            static_cast<double>(d.grids.snail_points), static_cast<double>(d.cutoffs.snail)};
}

std::vector<double> transmon_key(const DeviceParams& d) {
    const auto& t = d.transmon;
    return {t.i_t1, t.i_t2, t.c_t, t.flux_ext, d.inverse_capacitance()(1, 1),
            static_cast<double>(d.grids.transmon_points), static_cast<double>(d.cutoffs.transmon)};
}

std::vector<double> cavity_key(const DeviceParams& d) {
    return {d.cavity.c_c, d.cavity.l_c, d.inverse_capacitance()(2, 2), static_cast<double>(d.grids.cavity_points),
            d.grids.cavity_spacing, static_cast<double>(d.cutoffs.cavity)};
}

}  // namespace

const std::vector<ParameterInfo>& parameter_registry() { return registry; }

const ParameterInfo* find_parameter(const std::string& key) {
    for (const auto& p : registry)
        if (p.key == key) return &p;
    return nullptr;
}

ParameterSet default_parameters() {
    ParameterSet p;
    for (const auto& info : registry) p[info.key] = info.default_value;
    return p;
}

std::vector<double> AxisSpec::values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (count == 1) {
            v[i] = start;
            continue;
        }
        double t = static_cast<double>(i) / static_cast<double>(count - 1);
        v[i] = geometric ? start * std::pow(stop / start, t) : start + (stop - start) * t;
    }
    if (count > 1) v.back() = stop;
    return v;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string SweepConfig::canonical() const {
    std::ostringstream out;
    for (const auto& [k, v] : params) out << k << '=' << fmt(v) << '\n';
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const auto& a = axes[i];
        out << "axis." << i + 1 << '=' << a.name << ' ' << fmt(a.start) << ' ' << fmt(a.stop) << ' ' << a.count << ' '
            << (a.geometric ? "geometric" : "linear") << '\n';
    }
    out << "pump.rule=" << (pump_rule == PumpRule::Strict ? "strict" : "loose") << '\n';
    out << "model.counter_rotating=" << (keep_counter_rotating ? "keep" : "drop") << '\n';
    out << "atom.strict_labels=" << (strict_labels ? "true" : "false") << '\n';
    out << "solver.method=" << to_string(solver.method) << '\n';
    out << "solver.dense_limit=" << solver.dense_limit << '\n';
    out << "solver.arnoldi_nev=" << solver.arnoldi_nev << '\n';
    out << "solver.arnoldi_max_dim=" << solver.arnoldi_max_dim << '\n';
    out << "solver.arnoldi_tol=" << fmt(solver.arnoldi_tol) << '\n';
    return out.str();
}

std::uint64_t SweepConfig::hash() const { return fnv1a64(canonical()); }

SweepConfig parse_config(std::istream& in) {
    SweepConfig cfg;
    cfg.params = default_parameters();
    std::map<int, AxisSpec> axes;
    std::set<std::string> seen;
    bool method_set = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError("key '" + key + "' has no value");

        if (const auto* info = find_parameter(key)) {
            double v = parse_number(value, key);
            check_integral(*info, v);
            cfg.params[key] = v;
        } else if (key.rfind("axis.", 0) == 0) {
            int n = static_cast<int>(parse_number(key.substr(5), key));
            if (n < 1 || n > 3) throw ConfigError("axis index must be 1, 2 or 3");
            axes[n] = parse_axis(key, value);
        } else if (key == "pump.rule") {
            if (value == "strict") cfg.pump_rule = PumpRule::Strict;
            else if (value == "loose") cfg.pump_rule = PumpRule::Loose;
            else throw ConfigError("pump.rule must be strict or loose");
        } else if (key == "model.counter_rotating") {
            if (value == "drop") cfg.keep_counter_rotating = false;
            else if (value == "keep") cfg.keep_counter_rotating = true;
            else throw ConfigError("model.counter_rotating must be drop or keep");
        } else if (key == "atom.strict_labels") {
            cfg.strict_labels = parse_bool(value, key);
        } else if (key == "solver.method") {
            cfg.solver.method = parse_gap_method(value);
            method_set = true;
        } else if (key == "solver.dense_limit") {
            cfg.solver.dense_limit = static_cast<std::size_t>(parse_number(value, key));
        } else if (key == "solver.arnoldi_nev") {
            cfg.solver.arnoldi_nev = static_cast<int>(parse_number(value, key));
        } else if (key == "solver.arnoldi_max_dim") {
            cfg.solver.arnoldi_max_dim = static_cast<int>(parse_number(value, key));
        } else if (key == "solver.arnoldi_tol") {
            cfg.solver.arnoldi_tol = parse_number(value, key);
        } else if (key == "output.path") {
            cfg.output_path = value;
        } else if (key == "run.threads") {
            double t = parse_number(value, key);
            if (t < 1.0 || t != std::floor(t)) throw ConfigError("run.threads must be a positive integer");
            cfg.threads = static_cast<std::size_t>(t);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    int expect = 1;
    std::set<std::string> names;
    for (auto& [n, a] : axes) {
        if (n != expect++) throw ConfigError("axes must be numbered consecutively from axis.1");
        if (!names.insert(a.name).second) throw ConfigError("parameter '" + a.name + "' is swept twice");
        cfg.axes.push_back(a);
    }
    if (!method_set) cfg.solver.method = cfg.keep_counter_rotating ? GapMethod::Auto : GapMethod::Sectors;
    if (cfg.keep_counter_rotating && cfg.solver.method == GapMethod::Sectors)
        throw ConfigError("solver.method = sectors needs model.counter_rotating = drop");
    device_from(cfg.params).validate();
    return cfg;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    return parse_config(in);
}

DeviceParams device_from(const ParameterSet& p) {
    auto get = [&](const char* k) {
        auto it = p.find(k);
        if (it == p.end()) throw ConfigError(std::string("missing parameter '") + k + "'");
        return it->second;
    };
    auto count = [&](const char* k) { return static_cast<std::size_t>(get(k)); };
    DeviceParams d;
    d.snail = {get("snail.i_s1_ua"), get("snail.i_s2_ua"), get("snail.l_lin_nh"), get("snail.c_s_ff"),
               units::flux_quanta_to_phase(get("snail.flux")), {}};
    d.transmon = {get("transmon.i_t1_ua"), get("transmon.i_t2_ua"), get("transmon.c_t_ff"),
                  units::flux_quanta_to_phase(get("transmon.flux"))};
    d.cavity = {get("cavity.c_c_ff"), get("cavity.l_c_nh")};
    d.coupling = {get("coupling.c_st_ff"), get("coupling.c_tc_ff")};
    d.grids.snail_points = count("grid.snail_points");
    d.grids.transmon_points = count("grid.transmon_points");
    d.grids.cavity_points = count("grid.cavity_points");
    d.grids.cavity_spacing = get("grid.cavity_width") / static_cast<double>(d.grids.cavity_points);
    d.cutoffs = {count("cutoff.snail"), count("cutoff.transmon"), count("cutoff.cavity")};
    d.rates = {units::mhz_to_angular(get("rates.snail_mhz")), units::khz_to_angular(get("rates.transmon_khz")),
               units::khz_to_angular(get("rates.cavity_khz"))};
    return d;
}

PumpSettings pump_from(const ParameterSet& p, PumpRule rule) {
    return {units::mhz_to_angular(p.at("pump.amplitude_mhz")), units::ghz_to_angular(p.at("pump.frequency_ghz")), rule};
}

struct ComponentCache::Impl {
    bool enabled = true;
    Memo<ComponentSpectrum> snail, transmon, cavity;
    Memo<AtomBasis> atom;
    Memo<double> flux;
};

ComponentCache::ComponentCache(bool enabled) : impl_(std::make_unique<Impl>()) { impl_->enabled = enabled; }
ComponentCache::~ComponentCache() = default;

std::shared_ptr<const ComponentSpectrum> ComponentCache::snail(const DeviceParams& d) {
    return impl_->snail.get(snail_key(d), impl_->enabled, [&] { return solve_snail(d, d.cutoffs.snail); });
}

std::shared_ptr<const ComponentSpectrum> ComponentCache::transmon(const DeviceParams& d) {
    return impl_->transmon.get(transmon_key(d), impl_->enabled, [&] { return solve_transmon(d, d.cutoffs.transmon); });
}

std::shared_ptr<const ComponentSpectrum> ComponentCache::cavity(const DeviceParams& d) {
    return impl_->cavity.get(cavity_key(d), impl_->enabled, [&] { return solve_cavity(d, d.cutoffs.cavity); });
}

std::shared_ptr<const AtomBasis> ComponentCache::atom(const DeviceParams& d, bool strict) {
    auto key = snail_key(d);
    auto tk = transmon_key(d);
    key.insert(key.end(), tk.begin(), tk.end());
    key.push_back(d.snail_transmon_coefficient());
    key.push_back(strict ? 1.0 : 0.0);
    return impl_->atom.get(key, impl_->enabled, [&] {
        auto s = snail(d);
        auto t = transmon(d);
        return build_atom(d, *s, *t, strict);
    });
}

double ComponentCache::transmon_flux(const DeviceParams& d, double frequency_ghz) {
    const auto& t = d.transmon;
    std::vector<double> key{t.i_t1, t.i_t2, t.c_t, d.inverse_capacitance()(1, 1),
                            static_cast<double>(d.grids.transmon_points), frequency_ghz};
    return *impl_->flux.get(key, impl_->enabled, [&] { return transmon_flux_for_frequency(d, frequency_ghz); });
}

OperatingPoint build_operating_point(const SweepConfig& cfg, const ParameterSet& p, ComponentCache& cache) {
    OperatingPoint op;
    op.device = device_from(p);
    op.device.validate();
    double ft = p.at("transmon.frequency_ghz");
    if (std::isfinite(ft))
        op.device.transmon.flux_ext = units::flux_quanta_to_phase(cache.transmon_flux(op.device, ft));
    op.pump = pump_from(p, cfg.pump_rule);
    op.atom = cache.atom(op.device, cfg.strict_labels);
    op.cavity = cache.cavity(op.device);
    op.model = build_frame_model(op.device, *op.atom, *op.cavity, op.pump);
    if (!cfg.keep_counter_rotating) op.model = excitation_conserving_part(op.model);
    auto jumps = build_jump_inventory(*op.atom, op.device.cutoffs.cavity, op.device.rates.snail,
                                      op.device.rates.transmon, op.device.rates.cavity);
    op.liouvillian = build_liouvillian(op.model, jumps);
    return op;
}

std::string to_string(PointStatus s) {
    switch (s) {
        case PointStatus::Ok: return "ok";
        case PointStatus::Multistable: return "multistable";
        case PointStatus::SolverFailed: return "solver_failed";
        case PointStatus::Invalid: return "invalid";
    }
    return "unknown";
}

PointRecord evaluate_point(const SweepConfig& cfg, const ParameterSet& p, ComponentCache& cache) {
    PointRecord rec;
    try {
        auto op = build_operating_point(cfg, p, cache);
        auto rep = analyze(op.liouvillian, cfg.solver);
        rec.occupation = rep.cavity_occupation;
        rec.linewidth_hz = units::angular_to_hz(rep.linewidth);
        rec.emission_offset_hz = units::angular_to_hz(rep.emission_offset);
        rec.residual = rep.null_residual / op.liouvillian.norm();
    } catch (const MultistabilityError& e) {
        rec.status = PointStatus::Multistable;
        rec.message = e.what();
    } catch (const SolverError& e) {
        rec.status = PointStatus::SolverFailed;
        rec.message = e.what();
    } catch (const ConfigError& e) {
        rec.status = PointStatus::Invalid;
        rec.message = e.what();
    }
    if (rec.status != PointStatus::Ok) {
        rec.occupation.reset();
        rec.linewidth_hz.reset();
        rec.emission_offset_hz.reset();
        rec.residual.reset();
    }
    return rec;
}

std::size_t SweepResultGrid::index(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) flat = flat * axes[a].count + idx.at(a);
    return flat;
}

std::vector<std::size_t> SweepResultGrid::unravel(std::size_t flat) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        idx[a] = flat % axes[a].count;
        flat /= axes[a].count;
    }
    return idx;
}

void SweepResultGrid::write_csv(std::ostream& out) const {
    for (const auto& a : axes) out << a.name << ',';
    out << "occupation,linewidth_hz,emission_offset_hz,residual,status\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt_csv(*v) : std::string(); };
    for (const auto& r : records) {
        for (double c : r.coordinates) out << fmt_csv(c) << ',';
        out << opt(r.occupation) << ',' << opt(r.linewidth_hz) << ',' << opt(r.emission_offset_hz) << ','
            << opt(r.residual) << ',' << to_string(r.status) << '\n';
    }
}

void SweepResultGrid::write_metadata(std::ostream& out, const SweepConfig& cfg) const {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
    std::size_t ok = 0;
    for (const auto& r : records) ok += r.status == PointStatus::Ok;
    out << "config_hash = " << hash << '\n';
    out << "code_version = " << code_version << '\n';
    out << "timestamp = " << timestamp << '\n';
    out << "elapsed_s = " << fmt_csv(elapsed_s) << '\n';
    out << "points = " << records.size() << '\n';
    out << "ok_points = " << ok << '\n';
    out << "vectorization = column-stacking\n";
    out << "cavity_grid_origin = " << fmt(-0.5 * cfg.params.at("grid.cavity_width")) << '\n';
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].status != PointStatus::Ok)
            out << "failure." << i << " = " << to_string(records[i].status) << ": " << records[i].message << '\n';
    out << "# canonical config\n";
    std::istringstream canon(cfg.canonical());
    std::string line;
    while (std::getline(canon, line)) out << "config." << line.replace(line.find('='), 1, " = ") << '\n';
}

SweepResultGrid run_sweep(const SweepConfig& cfg, const RunOptions& options) {
    auto t0 = std::chrono::steady_clock::now();
    SweepResultGrid grid;
    grid.axes = cfg.axes;
    grid.config_hash = cfg.hash();
    grid.code_version = MASER_VERSION;
    {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        grid.timestamp = buf;
    }
    std::vector<std::vector<double>> values;
    std::size_t total = 1;
    for (const auto& a : cfg.axes) {
        values.push_back(a.values());
        total *= a.count;
    }
    grid.coordinates.resize(total);
    grid.records.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto idx = grid.unravel(i);
        for (std::size_t a = 0; a < idx.size(); ++a) grid.coordinates[i].push_back(values[a][idx[a]]);
    }

    ComponentCache cache(options.use_cache);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            ParameterSet p = cfg.params;
            for (std::size_t a = 0; a < cfg.axes.size(); ++a) p[cfg.axes[a].name] = grid.coordinates[i][a];
            auto rec = evaluate_point(cfg, p, cache);
            rec.coordinates = grid.coordinates[i];
            grid.records[i] = std::move(rec);
        }
    };
    std::size_t n_threads = std::max<std::size_t>(1, std::min(options.threads, total));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    grid.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return grid;
}

SweepResultGrid run_sweep(const SweepConfig& cfg) { return run_sweep(cfg, RunOptions{cfg.threads, true}); }

void save_sweep(const SweepResultGrid& grid, const SweepConfig& cfg, const std::string& path) {
    std::ofstream csv(path);
    if (!csv) throw IoError("cannot write '" + path + "'");
    grid.write_csv(csv);
    std::ofstream meta(path + ".meta");
    if (!meta) throw IoError("cannot write '" + path + ".meta'");
    grid.write_metadata(meta, cfg);
    if (!csv || !meta) throw IoError("write failed for '" + path + "'");
}

Extrema locate_extrema(const SweepResultGrid& grid) {
    std::optional<std::size_t> best_n, best_w;
    for (std::size_t i = 0; i < grid.records.size(); ++i) {
        const auto& r = grid.records[i];
        if (r.status != PointStatus::Ok) continue;
        if (r.occupation && (!best_n || *r.occupation > *grid.records[*best_n].occupation)) best_n = i;
        if (r.linewidth_hz && std::isfinite(*r.linewidth_hz) &&
            (!best_w || *r.linewidth_hz < *grid.records[*best_w].linewidth_hz))
            best_w = i;
    }
    if (!best_n || !best_w) throw SolverError("sweep has no successful points");
    auto make = [&](std::size_t i, double v) { return Extremum{grid.unravel(i), grid.coordinates[i], v}; };
    return {make(*best_n, *grid.records[*best_n].occupation), make(*best_w, *grid.records[*best_w].linewidth_hz)};
}

}  // namespace maser
