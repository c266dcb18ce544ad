// masersim: command line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "maser/device.hpp"
#include "maser/errors.hpp"
#include "maser/signal.hpp"
#include "maser/sweep.hpp"
#include "maser/units.hpp"
#include "maser/validation.hpp"

using namespace maser;

namespace {

struct Globals {
    std::string config;
    std::string out;
    std::size_t threads = 0;
    bool strict = false;
};

SweepConfig load(const Globals& g) {
    SweepConfig cfg;
    if (g.config.empty()) {
        std::istringstream empty;
        cfg = parse_config(empty);
    } else {
        cfg = load_config(g.config);
    }
    if (g.threads > 0) cfg.threads = g.threads;
    if (g.strict) cfg.strict_labels = true;
    return cfg;
}

// Output stream: --out path or stdout.
struct Output {
    std::ofstream file;
    std::ostream* stream = &std::cout;
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw IoError("cannot write '" + path + "'");
        stream = &file;
    }
    std::ostream& operator*() { return *stream; }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_fit_snail(const Globals& g, const std::string& data) {
    auto cfg = load(g);
    auto d = device_from(cfg.params);
    SnailFitOptions opt;
    opt.grid_points = d.grids.snail_points;
    auto fit = fit_snail_parameters(read_flux_data(data), d.snail, d.snail.c_s, opt);
    Output out(g.out);
    write_snail_record(fit, *out);
    for (std::size_t i = 0; i < fit.residuals_ghz.size(); ++i)
        *out << "# residual." << i << " = " << num(fit.residuals_ghz[i]) << '\n';
    return 0;
}

int cmd_spectrum(const Globals& g, const std::string& component, std::size_t levels) {
    auto cfg = load(g);
    auto op_device = device_from(cfg.params);
    double ft = cfg.params.at("transmon.frequency_ghz");
    if (std::isfinite(ft)) op_device.transmon.flux_ext = units::flux_quanta_to_phase(transmon_flux_for_frequency(op_device, ft));
    ComponentSpectrum s;
    if (component == "snail") s = solve_snail(op_device, levels);
    else if (component == "transmon") s = solve_transmon(op_device, levels);
    else if (component == "cavity") s = solve_cavity(op_device, levels);
    else throw ConfigError("unknown component '" + component + "'");
    Output out(g.out);
    *out << "level,energy_ghz,transition_ghz\n";
    for (std::size_t k = 0; k < s.levels(); ++k)
        *out << k << ',' << num(units::angular_to_ghz(s.energies(static_cast<Eigen::Index>(k)))) << ','
             << (k > 0 ? num(units::angular_to_ghz(s.transition(k - 1, k))) : std::string()) << '\n';
    return 0;
}

int cmd_steady(const Globals& g) {
    auto cfg = load(g);
    ComponentCache cache;
    auto op = build_operating_point(cfg, cfg.params, cache);
    auto rep = analyze(op.liouvillian, cfg.solver);
    auto dt = dressed_transitions(*op.atom);
    Output out(g.out);
    *out << rep.to_json() << '\n';
    std::cerr << "cavity occupation " << num(rep.cavity_occupation) << ", linewidth "
              << num(units::angular_to_hz(rep.linewidth)) << " Hz, coherence linewidth "
              << num(units::angular_to_hz(rep.coherence_linewidth)) << " Hz\n";
    std::cerr << "dressed ge " << num(units::angular_to_ghz(dt.ge)) << " GHz, gf/2 " << num(units::angular_to_ghz(dt.gf_half))
              << " GHz, ef " << num(units::angular_to_ghz(dt.ef)) << " GHz, cavity "
              << num(units::angular_to_ghz(op.cavity->transition(0, 1))) << " GHz\n";
    std::cerr << "dropped / retained coupling norm " << num(op.model.dropped_terms_norm / op.model.retained_coupling_norm)
              << ", removed counter-rotating norm " << num(op.model.nonconserving_norm) << '\n';
    return 0;
}

int cmd_sweep(const Globals& g) {
    auto cfg = load(g);
    std::string path = g.out.empty() ? cfg.output_path : g.out;
    if (path.empty()) throw ConfigError("no output path: set output.path or --out");
    auto grid = run_sweep(cfg);
    save_sweep(grid, cfg, path);
    std::size_t ok = 0;
    for (const auto& r : grid.records) ok += r.status == PointStatus::Ok;
    std::cerr << "wrote " << grid.records.size() << " points (" << ok << " ok) to " << path << " in "
              << num(grid.elapsed_s) << " s\n";
    if (ok == 0) throw SolverError("no operating point succeeded");
    if (g.strict && ok != grid.records.size()) throw SolverError("strict mode: some operating points failed");
    auto e = locate_extrema(grid);
    auto show = [&](const char* what, const Extremum& x) {
        std::cerr << what << ' ' << num(x.value) << " at";
        for (std::size_t a = 0; a < grid.axes.size(); ++a) std::cerr << ' ' << grid.axes[a].name << '=' << num(x.coordinates[a]);
        std::cerr << '\n';
    };
    show("max occupation", e.max_occupation);
    show("min linewidth_hz", e.min_linewidth);
    return 0;
}

int cmd_analyze(const Globals& g, const std::string& spectrum, const std::string& iq, bool binary, double max_lag) {
    if (spectrum.empty() == iq.empty()) throw ConfigError("analyze needs exactly one of --spectrum or --iq");
    Output out(g.out);
    if (!spectrum.empty()) {
        auto trace = read_spectrum(spectrum);
        auto fit = fit_lorentzian(trace);
        write_fit_record(fit, std::cout);
        *out << "frequency_hz,power_mw,model_mw,residual_mw\n";
        for (std::size_t i = 0; i < trace.frequencies.size(); ++i)
            *out << num(trace.frequencies[i]) << ',' << num(trace.powers[i]) << ','
                 << num(lorentzian(trace.frequencies[i], fit.params)) << ',' << num(fit.residuals[i]) << '\n';
        return 0;
    }
    auto trace = binary ? read_iq_binary(iq) : read_iq_text(iq);
    double lag = max_lag > 0.0 ? max_lag : trace.duration() / 4.0;
    auto corr = two_time_correlation(trace, lag);
    auto lw = linewidth_from_correlation(corr);
    write_correlation_record(lw, std::cout);
    auto mag = corr.magnitude();
    auto ph = corr.phase();
    *out << "lag_s,magnitude,phase_rad\n";
    for (std::size_t k = 0; k < corr.lags.size(); ++k) *out << num(corr.lags[k]) << ',' << num(mag[k]) << ',' << num(ph[k]) << '\n';
    return 0;
}

int cmd_validate(const Globals& g) {
    Output out(g.out);
    bool ok = true;
    for (const auto& r : run_invariant_suite()) {
        *out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << num(r.seconds) << " s): " << r.detail << '\n';
        ok = ok && r.passed;
    }
    if (!ok) throw SolverError("invariant suite failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-artificial-atom maser simulator"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "config file (key = value)");
    app.add_option("--out", g.out, "output path");
    app.add_option("--threads", g.threads, "worker threads");
    app.add_flag("--strict", g.strict, "strict labelling; any failed point is an error");

    std::string data, component = "transmon", spectrum, iq;
    std::size_t levels = 5;
    bool binary = false;
    double max_lag = 0.0;
    auto* fit = app.add_subcommand("fit-snail", "fit snail circuit parameters to (flux, frequency) data");
    fit->add_option("data", data, "two-column flux (flux quanta), frequency (GHz) file")->required();
    auto* spec = app.add_subcommand("spectrum", "eigensolve one circuit component");
    spec->add_option("--component", component, "snail, transmon or cavity");
    spec->add_option("--levels", levels, "number of levels");
    app.add_subcommand("steady", "steady state and linewidth at one operating point");
    app.add_subcommand("sweep", "grid sweep over the configured axes");
    auto* an = app.add_subcommand("analyze", "fit a spectrum or an IQ trace");
    an->add_option("--spectrum", spectrum, "two-column frequency (Hz), power (dBm) file");
    an->add_option("--iq", iq, "IQ trace (time_s, i, q text or float32 pairs)");
    an->add_flag("--binary", binary, "IQ file is interleaved float32 with a .meta sidecar");
    an->add_option("--max-lag", max_lag, "largest correlation lag (s); default a quarter of the trace");
    app.add_subcommand("validate", "run the invariant suite");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "fit-snail") return cmd_fit_snail(g, data);
        if (name == "spectrum") return cmd_spectrum(g, component, levels);
        if (name == "steady") return cmd_steady(g);
        if (name == "sweep") return cmd_sweep(g);
        if (name == "analyze") return cmd_analyze(g, spectrum, iq, binary, max_lag);
        if (name == "validate") return cmd_validate(g);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
