// Python bindings: parameters in, plain dicts and numpy arrays out.

#include <complex>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maser/components.hpp"
#include "maser/device.hpp"
#include "maser/errors.hpp"
#include "maser/signal.hpp"
#include "maser/sweep.hpp"
#include "maser/units.hpp"
#include "maser/validation.hpp"

namespace py = pybind11;
using namespace maser;

namespace {

// Config text plus per-key overrides; overrides must name registered parameters.
SweepConfig make_config(const std::string& text, const std::map<std::string, double>& overrides) {
    std::istringstream in(text);
    auto cfg = parse_config(in);
    for (const auto& [k, v] : overrides) {
        if (!find_parameter(k)) throw ConfigError("unknown key '" + k + "'");
        cfg.params[k] = v;
    }
    return cfg;
}

py::array_t<double> to_numpy(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::object optional_value(const std::optional<double>& v) {
    return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict steady(const std::map<std::string, double>& overrides, const std::string& text) {
    auto cfg = make_config(text, overrides);
    SteadyStateReport rep;
    DressedTransitions dt;
    double wc = 0.0;
    {
        py::gil_scoped_release release;
        ComponentCache cache;
        auto op = build_operating_point(cfg, cfg.params, cache);
        rep = analyze(op.liouvillian, cfg.solver);
        dt = dressed_transitions(*op.atom);
        wc = op.cavity->transition(0, 1);
    }
    py::dict out;
    out["occupation"] = rep.cavity_occupation;
    out["linewidth_hz"] = units::angular_to_hz(rep.linewidth);
    out["emission_offset_hz"] = units::angular_to_hz(rep.emission_offset);
    out["coherence_linewidth_hz"] = units::angular_to_hz(rep.coherence_linewidth);
    out["null_residual"] = rep.null_residual;
    out["min_eigenvalue"] = rep.min_eigenvalue;
    out["method"] = rep.method;
    out["atom_populations"] = rep.atom_populations;
    out["cavity_populations"] = rep.cavity_populations;
    py::list labels;
    for (const auto& l : rep.labels) labels.append(py::make_tuple(l.snail, l.transmon));
    out["labels"] = labels;
    out["diagnostics"] = rep.diagnostics;
    out["rho"] = rep.rho;
    py::dict tr;
    tr["ge_ghz"] = units::angular_to_ghz(dt.ge);
    tr["gf_half_ghz"] = units::angular_to_ghz(dt.gf_half);
    tr["ef_ghz"] = units::angular_to_ghz(dt.ef);
    tr["cavity_ghz"] = units::angular_to_ghz(wc);
    out["transitions"] = tr;
    return out;
}

py::dict sweep(const std::string& text, std::size_t threads, bool use_cache) {
    auto cfg = make_config(text, {});
    SweepResultGrid g;
    {
        py::gil_scoped_release release;
        g = run_sweep(cfg, {threads, use_cache});
    }
    py::dict out;
    py::list names;
    for (std::size_t a = 0; a < g.axes.size(); ++a) {
        names.append(g.axes[a].name);
        std::vector<double> col;
        for (const auto& c : g.coordinates) col.push_back(c[a]);
        out[py::str(g.axes[a].name)] = to_numpy(col);
    }
    out["axes"] = names;
    auto column = [&](auto field) {
        std::vector<double> col;
        for (const auto& r : g.records) col.push_back((r.*field).value_or(std::numeric_limits<double>::quiet_NaN()));
        return to_numpy(col);
    };
    out["occupation"] = column(&PointRecord::occupation);
    out["linewidth_hz"] = column(&PointRecord::linewidth_hz);
    out["emission_offset_hz"] = column(&PointRecord::emission_offset_hz);
    out["residual"] = column(&PointRecord::residual);
    py::list status;
    for (const auto& r : g.records) status.append(to_string(r.status));
    out["status"] = status;
    std::ostringstream csv, meta;
    g.write_csv(csv);
    g.write_metadata(meta, cfg);
    out["csv"] = csv.str();
    out["metadata"] = meta.str();
    out["config_hash"] = g.config_hash;
    return out;
}

Eigen::VectorXd spectrum(const std::string& component, const std::map<std::string, double>& overrides, std::size_t levels) {
    auto cfg = make_config("", overrides);
    auto d = device_from(cfg.params);
    ComponentSpectrum s;
    if (component == "snail") s = solve_snail(d, levels);
    else if (component == "transmon") s = solve_transmon(d, levels);
    else if (component == "cavity") s = solve_cavity(d, levels);
    else throw ConfigError("unknown component '" + component + "'");
    Eigen::VectorXd ghz = s.energies / (units::two_pi * 1e9);
    return ghz;
}

py::dict fit_spectrum(const std::vector<double>& f, const std::vector<double>& p) {
    SpectrumTrace t;
    t.frequencies = f;
    t.powers = p;
    auto fit = fit_lorentzian(t);
    py::dict out;
    out["f0"] = fit.params.f0;
    out["gamma"] = fit.params.gamma;
    out["amplitude"] = fit.params.amplitude;
    out["offset"] = fit.params.offset;
    out["residual_rms"] = fit.residual_rms;
    out["converged"] = fit.converged;
    out["under_resolved"] = fit.under_resolved;
    return out;
}

py::dict correlation(const std::vector<std::complex<double>>& samples, double dt, double max_lag) {
    IQTrace t;
    t.samples = samples;
    t.dt = dt;
    auto corr = two_time_correlation(t, max_lag > 0.0 ? max_lag : t.duration() / 4.0);
    auto lw = linewidth_from_correlation(corr);
    py::dict out;
    out["lags"] = corr.lags;
    out["values"] = corr.values;
    out["tau_c"] = lw.tau_c;
    out["linewidth_inverse_tau"] = lw.linewidth_inverse_tau;
    out["linewidth_inverse_pi_tau"] = lw.linewidth_inverse_pi_tau;
    out["unresolved"] = lw.unresolved;
    out["non_exponential"] = lw.non_exponential;
    out["resolution_floor_hz"] = lw.resolution_floor_hz;
    return out;
}

py::dict fit_snail(const std::vector<double>& flux, const std::vector<double>& freq_ghz,
                   const std::map<std::string, double>& initial, std::size_t grid_points) {
    if (flux.size() != freq_ghz.size()) throw ConfigError("flux and frequency lengths differ");
    std::vector<FluxPoint> data;
    for (std::size_t i = 0; i < flux.size(); ++i) data.push_back({flux[i], freq_ghz[i]});
    auto d = device_from(make_config("", initial).params);
    SnailFitOptions opt;
    opt.grid_points = grid_points;
    auto fit = fit_snail_parameters(data, d.snail, d.snail.c_s, opt);
    py::dict out;
    out["i_s1_ua"] = fit.params.i_s1;
    out["i_s2_ua"] = fit.params.i_s2;
    out["l_lin_nh"] = fit.params.l_lin;
    out["c_s_ff"] = fit.params.c_s;
    out["alpha"] = optional_value(fit.params.alpha);
    out["rms_residual_ghz"] = fit.rms_residual_ghz;
    out["residuals_ghz"] = fit.residuals_ghz;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Single-artificial-atom maser simulator";
    m.attr("__version__") = MASER_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("default_parameters", &default_parameters);
    m.def("steady_state", &steady, py::arg("params") = std::map<std::string, double>{}, py::arg("config") = "",
          "Steady state, linewidth and dressed transitions at one operating point.");
    m.def("sweep", &sweep, py::arg("config"), py::arg("threads") = 1, py::arg("use_cache") = true,
          "Grid sweep; returns one numpy column per axis and payload field.");
    m.def("component_spectrum", &spectrum, py::arg("component"), py::arg("params") = std::map<std::string, double>{},
          py::arg("levels") = 5, "Energies (GHz) of snail, transmon or cavity.");
    m.def("fit_lorentzian", &fit_spectrum, py::arg("frequencies_hz"), py::arg("powers_mw"));
    m.def("correlation_linewidth", &correlation, py::arg("samples"), py::arg("dt"), py::arg("max_lag") = 0.0);
    m.def("fit_snail", &fit_snail, py::arg("flux"), py::arg("frequency_ghz"),
          py::arg("initial") = std::map<std::string, double>{}, py::arg("grid_points") = 400);
    m.def("validate", [] {
        py::list out;
        for (const auto& r : run_invariant_suite()) out.append(py::make_tuple(r.name, r.passed, r.detail));
        return out;
    });
}
