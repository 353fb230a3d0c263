//============================================================================
// kinmix — experiment runner for the kinetic orientation-mixing toolkit.
//
// Subcommands:
//   critical    print the critical boundary frequency b_c and coupling Γ_c
//   dispersion  stability verdict + boundary-curve CSV for one (Γ, ε)
//   simulate    run the coupled mode evolution from a JSON config
//   volterra    memory-kernel route: build K and U, solve, cross-check
//   fit         decay/growth fits on recorded trace channels
//   sweep       parameter sweeps with aggregated half-lives and slopes
//   selfcheck   fast internal consistency battery
//
// Exit codes: 0 ok, 1 error, 2 marginal/ambiguous verdict.
// Outputs are deterministic: identical config + seed give byte-identical
// files (binary64 round-trip formatting, no timestamps).
//============================================================================
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kinmix/diagnostics.hpp"
#include "kinmix/dispersion.hpp"
#include "kinmix/dynamics.hpp"
#include "kinmix/errors.hpp"
#include "kinmix/harmonics.hpp"
#include "kinmix/volterra.hpp"

using json = nlohmann::ordered_json;
using kinmix::cplx;

namespace {

//----------------------------------------------------------------------------
// Small utilities.
//----------------------------------------------------------------------------

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    kinmix::check<kinmix::DataError>(static_cast<bool>(out),
                                     "cannot open for writing: " + path);
    out << content;
    out.flush();
    kinmix::check<kinmix::DataError>(static_cast<bool>(out),
                                     "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    kinmix::check<kinmix::DataError>(static_cast<bool>(in),
                                     "cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Print JSON to stdout, or write it to `out` when nonempty.
void emit_json(const json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        write_text_file(out, text);
}

json load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw kinmix::ConfigError(std::string("config parse error in ") +
                                  path + ": " + e.what());
    }
    kinmix::check(j.is_object(), "config must be a JSON object: " + path);
    return j;
}

//----------------------------------------------------------------------------
// Run specification: ModeConfig + datum + bookkeeping, parsed from JSON.
//----------------------------------------------------------------------------

struct DatumSpec {
    std::string kind = "default";  // "default" | "random"
    int lmax = 8;                  // random datum window
    int mmax = 2;
    unsigned seed = 1;
    double scale = 1.0;
};

struct RunSpec {
    kinmix::ModeConfig mode;
    DatumSpec datum;
    long seed = 0;
    std::string out = "trace.csv";
    bool plot_stub = true;
    // volterra extras
    bool cross_check = true;
    kinmix::WeightSpec weight;
};

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw kinmix::ConfigError("config field '" + key + "': " + e.what());
    }
}

RunSpec parse_run_spec(const json& j) {
    RunSpec rs;
    rs.mode.gamma = field_or<double>(j, "gamma", 0.0);
    rs.mode.nu = field_or<double>(j, "nu", 0.0);
    rs.mode.swimmer_sign = field_or<int>(j, "swimmer_sign", -1);
    rs.mode.mmax = field_or<int>(j, "mmax", 1);
    rs.mode.dt = field_or<double>(j, "dt", 1e-2);
    rs.mode.t_end = field_or<double>(j, "t_end", 1.0);
    rs.mode.output_stride = field_or<long>(j, "output_stride", 1);
    rs.mode.sobolev_exponents =
        field_or<std::vector<double>>(j, "sobolev_exponents", {});
    rs.seed = field_or<long>(j, "seed", 0);
    rs.out = field_or<std::string>(j, "out", rs.out);
    rs.plot_stub = field_or<bool>(j, "plot_stub", true);
    rs.cross_check = field_or<bool>(j, "cross_check", true);

    if (j.contains("datum")) {
        const json& d = j.at("datum");
        kinmix::check(d.is_object(), "config field 'datum' must be an object");
        rs.datum.kind = field_or<std::string>(d, "kind", "default");
        rs.datum.lmax = field_or<int>(d, "lmax", rs.datum.lmax);
        rs.datum.mmax = field_or<int>(d, "mmax", rs.datum.mmax);
        rs.datum.seed = field_or<unsigned>(d, "seed", rs.datum.seed);
        rs.datum.scale = field_or<double>(d, "scale", 1.0);
        kinmix::check(
            rs.datum.kind == "default" || rs.datum.kind == "random",
            "datum.kind must be 'default' or 'random'");
        kinmix::check(std::isfinite(rs.datum.scale) && rs.datum.scale != 0.0,
                      "datum.scale must be finite and nonzero");
    }

    if (j.contains("weight")) {
        const json& w = j.at("weight");
        kinmix::check(w.is_object(), "config field 'weight' must be an object");
        const std::string kind = field_or<std::string>(w, "kind", "power");
        if (kind == "power")
            rs.weight.kind = kinmix::WeightSpec::Kind::power;
        else if (kind == "power_log")
            rs.weight.kind = kinmix::WeightSpec::Kind::power_log;
        else
            throw kinmix::ConfigError(
                "weight.kind must be 'power' or 'power_log'");
        rs.weight.alpha = field_or<double>(w, "alpha", 2.0);
    }

    // Degree window: explicit value, or 0/absent for the adequacy floor.
    int lmax = field_or<int>(j, "lmax", 0);
    if (lmax <= 0)
        lmax = kinmix::resolution_floor(rs.mode.t_end, rs.mode.nu);
    rs.mode.lmax = lmax;

    // The datum must fit inside the mode window (embedding never truncates).
    const int dl = rs.datum.kind == "default" ? 2 : rs.datum.lmax;
    const int dm = rs.datum.kind == "default" ? 1 : rs.datum.mmax;
    kinmix::check(dl <= rs.mode.lmax && dm <= rs.mode.mmax,
                  "datum window exceeds the mode window (lmax/mmax)");

    rs.mode.validate();
    return rs;
}

kinmix::SphericalField make_datum(const RunSpec& rs) {
    kinmix::SphericalField f =
        rs.datum.kind == "default"
            ? kinmix::default_datum(rs.mode.lmax, rs.mode.mmax)
            : kinmix::embed(kinmix::random_smooth_field(
                                rs.datum.lmax, rs.datum.mmax, rs.datum.seed),
                            rs.mode.lmax, rs.mode.mmax);
    if (rs.datum.scale != 1.0)
        for (auto& c : f.coeffs) c *= rs.datum.scale;
    return f;
}

json resolved_config(const RunSpec& rs) {
    json datum = {{"kind", rs.datum.kind}, {"scale", rs.datum.scale}};
    if (rs.datum.kind == "random") {
        datum["lmax"] = rs.datum.lmax;
        datum["mmax"] = rs.datum.mmax;
        datum["seed"] = rs.datum.seed;
    }
    return json{{"gamma", rs.mode.gamma},
                {"nu", rs.mode.nu},
                {"swimmer_sign", rs.mode.swimmer_sign},
                {"lmax", rs.mode.lmax},
                {"mmax", rs.mode.mmax},
                {"dt", rs.mode.dt},
                {"t_end", rs.mode.t_end},
                {"output_stride", rs.mode.output_stride},
                {"sobolev_exponents", rs.mode.sobolev_exponents},
                {"datum", datum},
                {"seed", rs.seed}};
}

//----------------------------------------------------------------------------
// Plot-script stubs (data files are the product; rendering happens offline).
//----------------------------------------------------------------------------

std::string trace_plot_stub(const std::string& csv) {
    return "#!/usr/bin/env python3\n"
           "# Plotting stub for a trace CSV; pass an alternative path as "
           "argv[1].\n"
           "import csv, math, sys\n"
           "path = sys.argv[1] if len(sys.argv) > 1 else \"" + csv + "\"\n"
           "rows = list(csv.DictReader(open(path)))\n"
           "t = [float(r[\"t\"]) for r in rows]\n"
           "absu = [math.hypot(math.hypot(float(r[\"re_ux\"]), "
           "float(r[\"im_ux\"])),\n"
           "                   math.hypot(float(r[\"re_uy\"]), "
           "float(r[\"im_uy\"]))) for r in rows]\n"
           "import matplotlib.pyplot as plt\n"
           "for name in (\"l2\", \"h1grad\", \"energy\"):\n"
           "    plt.plot(t, [float(r[name]) for r in rows], label=name)\n"
           "plt.plot(t, absu, label=\"|u|\")\n"
           "plt.xlabel(\"t\"); plt.yscale(\"log\"); plt.legend()\n"
           "plt.show()\n";
}

std::string curve_plot_stub(const std::string& csv) {
    return "#!/usr/bin/env python3\n"
           "# Plotting stub for a boundary-curve CSV; pass an alternative "
           "path as argv[1].\n"
           "import csv, sys\n"
           "path = sys.argv[1] if len(sys.argv) > 1 else \"" + csv + "\"\n"
           "rows = list(csv.DictReader(open(path)))\n"
           "re = [float(r[\"reF\"]) for r in rows]\n"
           "im = [float(r[\"imF\"]) for r in rows]\n"
           "import matplotlib.pyplot as plt\n"
           "plt.plot(re, im, \"-\")\n"
           "plt.axhline(0.0, lw=0.5, color=\"k\")\n"
           "plt.axvline(0.0, lw=0.5, color=\"k\")\n"
           "plt.xlabel(\"Re F\"); plt.ylabel(\"Im F\")\n"
           "plt.show()\n";
}

//----------------------------------------------------------------------------
// Trace CSV reading (for `fit`).
//----------------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;
};

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    kinmix::check<kinmix::DataError>(static_cast<bool>(in),
                                     "cannot open: " + path);
    Table tb;
    std::string line;
    kinmix::check<kinmix::DataError>(static_cast<bool>(std::getline(in, line)),
                                     "empty CSV: " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) tb.header.push_back(cell);
    tb.cols.resize(tb.header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            kinmix::check<kinmix::DataError>(
                c < tb.cols.size(),
                "ragged CSV row at line " + std::to_string(lineno));
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            kinmix::check<kinmix::DataError>(
                end != cell.c_str(),
                "non-numeric CSV cell at line " + std::to_string(lineno));
            tb.cols[c++].push_back(v);
        }
        kinmix::check<kinmix::DataError>(
            c == tb.cols.size(),
            "short CSV row at line " + std::to_string(lineno));
    }
    kinmix::check<kinmix::DataError>(!tb.cols.empty() && !tb.cols[0].empty(),
                                     "CSV has no data rows: " + path);
    return tb;
}

std::size_t column_index(const Table& tb, const std::string& name) {
    for (std::size_t i = 0; i < tb.header.size(); ++i)
        if (tb.header[i] == name) return i;
    throw kinmix::DataError("no column '" + name + "' in trace");
}

// Extract a channel; "absu" is the velocity magnitude from the four
// component columns.
std::vector<double> extract_channel(const Table& tb, const std::string& name) {
    if (name == "absu") {
        const auto& rx = tb.cols[column_index(tb, "re_ux")];
        const auto& ix = tb.cols[column_index(tb, "im_ux")];
        const auto& ry = tb.cols[column_index(tb, "re_uy")];
        const auto& iy = tb.cols[column_index(tb, "im_uy")];
        std::vector<double> out(rx.size());
        for (std::size_t i = 0; i < rx.size(); ++i)
            out[i] = std::sqrt(rx[i] * rx[i] + ix[i] * ix[i] +
                               ry[i] * ry[i] + iy[i] * iy[i]);
        return out;
    }
    return tb.cols[column_index(tb, name)];
}

//----------------------------------------------------------------------------
// Subcommand: critical
//----------------------------------------------------------------------------

int run_critical(bool as_json, bool selfcheck, const std::string& out) {
    const kinmix::CriticalConstants cc = kinmix::find_bc();
    const double reference = 0.62375;
    const double deviation = std::abs(cc.b_c - reference);
    if (selfcheck) {
        const bool ok = deviation <= 1e-3;
        std::cout << (ok ? "ok" : "FAIL") << ": |b_c - " << fmt17(reference)
                  << "| = " << fmt17(deviation) << "\n";
        return ok ? 0 : 1;
    }
    if (as_json || !out.empty()) {
        emit_json(json{{"command", "critical"},
                       {"b_c", cc.b_c},
                       {"gamma_c", cc.gamma_c},
                       {"reference_b_c", reference},
                       {"deviation", deviation},
                       {"seed", 0}},
                  out);
    } else {
        std::cout << "b_c = " << fmt17(cc.b_c) << "\n"
                  << "gamma_c = " << fmt17(cc.gamma_c) << "\n";
    }
    return 0;
}

//----------------------------------------------------------------------------
// Subcommand: dispersion
//----------------------------------------------------------------------------

int run_dispersion(double gamma, int sign, const std::string& curve,
                   const std::string& out, bool plot) {
    const kinmix::DispersionScan scan =
        kinmix::spectral_condition(gamma, sign);

    if (!curve.empty()) {
        std::string csv = "b,reF,imF\n";
        for (std::size_t i = 0; i < scan.b_samples.size(); ++i) {
            csv += fmt17(scan.b_samples[i]) + "," +
                   fmt17(scan.F_values[i].real()) + "," +
                   fmt17(scan.F_values[i].imag()) + "\n";
        }
        write_text_file(curve, csv);
        if (plot) write_text_file(curve + ".plot.py", curve_plot_stub(curve));
    }

    json roots = json::array();
    for (const cplx& r : scan.roots)
        roots.push_back(json{{"re", r.real()}, {"im", r.imag()}});
    emit_json(json{{"command", "dispersion"},
                   {"config", {{"gamma", gamma}, {"swimmer_sign", sign}}},
                   {"verdict", kinmix::verdict_name(scan.verdict)},
                   {"winding_number", scan.winding_number},
                   {"roots", roots},
                   {"curve_samples", scan.b_samples.size()},
                   {"curve_csv", curve},
                   {"seed", 0}},
              out);
    return scan.verdict == kinmix::Verdict::marginal ? 2 : 0;
}

//----------------------------------------------------------------------------
// Subcommand: simulate
//----------------------------------------------------------------------------

int run_simulate(const std::string& config_path, const std::string& meta_out) {
    const RunSpec rs = parse_run_spec(load_config(config_path));
    const kinmix::SphericalField psi = make_datum(rs);
    const kinmix::Trace tr = kinmix::evolve_coupled(rs.mode, psi);

    kinmix::save_trace_csv(tr, rs.out);
    if (rs.plot_stub)
        write_text_file(rs.out + ".plot.py", trace_plot_stub(rs.out));

    json meta{{"command", "simulate"},
              {"config", resolved_config(rs)},
              {"samples", tr.t.size()},
              {"diverged", tr.diverged},
              {"final", {{"t", tr.t.back()}, {"l2", tr.l2.back()}}},
              {"trace_csv", rs.out}};
    if (tr.diverged) meta["t_diverged"] = tr.t_diverged;
    emit_json(meta, meta_out.empty() ? rs.out + ".meta.json" : meta_out);

    if (tr.diverged) {
        std::cerr << "error: run diverged at t = " << fmt17(tr.t_diverged)
                  << " (velocity magnitude passed the overflow guard)\n";
        return 1;
    }
    std::cout << "wrote " << rs.out << " (" << tr.t.size() << " samples)\n";
    return 0;
}

//----------------------------------------------------------------------------
// Subcommand: volterra
//----------------------------------------------------------------------------

int run_volterra(const std::string& config_path) {
    const RunSpec rs = parse_run_spec(load_config(config_path));
    const kinmix::SphericalField psi = make_datum(rs);

    const long steps = rs.mode.step_count();
    kinmix::check(steps % rs.mode.output_stride == 0,
                  "output_stride must divide the step count");
    const long nsamp = steps / rs.mode.output_stride + 1;
    const double h = rs.mode.dt * static_cast<double>(rs.mode.output_stride);
    std::vector<double> tgrid(static_cast<std::size_t>(nsamp));
    for (long j = 0; j < nsamp; ++j)
        tgrid[static_cast<std::size_t>(j)] = static_cast<double>(j) * h;

    const std::vector<kinmix::MatN> K = kinmix::build_kernel(rs.mode, tgrid);
    const std::vector<kinmix::VelocitySample> U =
        kinmix::build_source(rs.mode, psi, tgrid);

    kinmix::VolterraProblem prob;
    prob.dt = h;
    prob.kernel = K;
    prob.source.resize(U.size());
    for (std::size_t j = 0; j < U.size(); ++j) {
        kinmix::VecN s = kinmix::VecN::zero(2);
        s[0] = U[j].x;
        s[1] = U[j].y;
        prob.source[j] = s;
    }
    const std::vector<kinmix::VecN> u = kinmix::solve(prob);

    std::string csv = "t,re_ux,im_ux,re_uy,im_uy,abs_u\n";
    for (std::size_t j = 0; j < u.size(); ++j) {
        csv += fmt17(tgrid[j]) + "," + fmt17(u[j][0].real()) + "," +
               fmt17(u[j][0].imag()) + "," + fmt17(u[j][1].real()) + "," +
               fmt17(u[j][1].imag()) + "," + fmt17(u[j].norm()) + "\n";
    }
    write_text_file(rs.out, csv);
    if (rs.plot_stub)
        write_text_file(rs.out + ".plot.py", trace_plot_stub(rs.out));

    const kinmix::DecayReport decay =
        kinmix::check_weighted_decay(u, prob.source, h, rs.weight);

    json report{{"command", "volterra"},
                {"config", resolved_config(rs)},
                {"samples", u.size()},
                {"u_csv", rs.out},
                {"decay",
                 {{"weight_alpha", rs.weight.alpha},
                  {"weight_kind",
                   rs.weight.kind == kinmix::WeightSpec::Kind::power
                       ? "power"
                       : "power_log"},
                  {"ratio_full", decay.ratio_full},
                  {"ratio_half", decay.ratio_half},
                  {"horizon_stable", decay.horizon_stable},
                  {"degenerate", decay.degenerate}}}};

    bool consistent = true;
    if (rs.cross_check) {
        const kinmix::Trace tr = kinmix::evolve_coupled(rs.mode, psi);
        kinmix::check<kinmix::ConsistencyError>(
            !tr.diverged && tr.t.size() == u.size(),
            "cross-check run diverged or sampled differently");
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double dev = std::sqrt(std::norm(u[j][0] - tr.ux[j]) +
                                         std::norm(u[j][1] - tr.uy[j]));
            const double mag =
                std::sqrt(std::norm(tr.ux[j]) + std::norm(tr.uy[j]));
            num = std::max(num, dev);
            den = std::max(den, mag);
        }
        const double rel = den > 0.0 ? num / den
                           : (num > 0.0 ? std::numeric_limits<double>::infinity()
                                        : 0.0);
        consistent = rel <= 1e-3;
        report["cross_check"] = json{{"max_rel_deviation", rel},
                                     {"tolerance", 1e-3},
                                     {"pass", consistent}};
    }
    emit_json(report, rs.out + ".report.json");
    std::cout << "wrote " << rs.out << " (" << u.size() << " samples)\n";
    return consistent ? 0 : 2;
}

//----------------------------------------------------------------------------
// Subcommand: fit
//----------------------------------------------------------------------------

struct FitArgs {
    std::string trace;
    std::string channel = "absu";
    std::string model = "power";
    double t0 = 0.0;
    double t1 = 0.0;
    double envelope = 0.0;  // window width; 0 disables
    std::string out;
};

int run_fit(const FitArgs& fa) {
    const Table tb = read_csv(fa.trace);
    const std::vector<double>& t = tb.cols[column_index(tb, "t")];
    std::vector<double> y = extract_channel(tb, fa.channel);

    std::vector<double> tf = t, yf = y;
    if (fa.envelope > 0.0) {
        tf.clear();
        yf.clear();
        kinmix::envelope_maxima(t, y, fa.envelope, tf, yf);
    }

    kinmix::FitReport rep;
    if (fa.model == "power")
        rep = kinmix::fit_power_law(tf, yf, fa.t0, fa.t1, false);
    else if (fa.model == "power-log")
        rep = kinmix::fit_power_law(tf, yf, fa.t0, fa.t1, true);
    else if (fa.model == "exponential")
        rep = kinmix::fit_exponential(tf, yf, fa.t0, fa.t1);
    else
        throw kinmix::ConfigError(
            "model must be power, power-log, or exponential");
    rep.channel = fa.channel;

    const bool accepted = rep.residual_rms <= 0.1;
    emit_json(json{{"command", "fit"},
                   {"trace", fa.trace},
                   {"channel", rep.channel},
                   {"model", rep.model},
                   {"window", {rep.t0, rep.t1}},
                   {"envelope_window", fa.envelope},
                   {"exponent_or_rate", rep.exponent_or_rate},
                   {"amplitude", rep.amplitude},
                   {"residual", rep.residual_rms},
                   {"accepted", accepted},
                   {"seed", 0}},
              fa.out);
    return accepted ? 0 : 2;
}

//----------------------------------------------------------------------------
// Subcommand: sweep
//----------------------------------------------------------------------------

struct PointResult {
    double x = 0.0;
    double halflife = 0.0;
    double final_ratio = 0.0;
    int lmax = 0;
    double t_end = 0.0;
    std::string error;
};

double halflife_from_trace(const kinmix::Trace& tr) {
    const double target = 0.5 * tr.l2.front();
    for (std::size_t j = 0; j < tr.l2.size(); ++j) {
        if (tr.l2[j] > target) continue;
        if (j == 0) return 0.0;
        // interpolate linearly in log amplitude between samples
        const double la = std::log(tr.l2[j - 1]);
        const double lb = std::log(tr.l2[j]);
        const double frac = (la - std::log(target)) / (la - lb);
        return tr.t[j - 1] + frac * (tr.t[j] - tr.t[j - 1]);
    }
    throw kinmix::DataError(
        "half-life not reached within horizon (final ratio " +
        fmt17(tr.l2.back() / tr.l2.front()) + ")");
}

int run_sweep(const std::string& config_path) {
    const json cfg = load_config(config_path);
    const std::string param = field_or<std::string>(cfg, "param", "nu");
    const std::string measurement =
        field_or<std::string>(cfg, "measurement", "halflife");
    kinmix::check(measurement == "halflife",
                  "unsupported measurement: " + measurement);
    const std::string out = field_or<std::string>(cfg, "out", "");
    const long seed = field_or<long>(cfg, "seed", 0);
    kinmix::check(cfg.contains("base") && cfg.at("base").is_object(),
                  "sweep config needs a 'base' object");
    kinmix::check(cfg.contains("points") && cfg.at("points").is_array() &&
                      !cfg.at("points").empty(),
                  "sweep config needs a nonempty 'points' array");

    const json& points = cfg.at("points");
    std::vector<json> merged;
    for (const json& p : points) {
        kinmix::check(p.is_object() && p.contains(param),
                      "each sweep point must set '" + param + "'");
        json m = cfg.at("base");
        for (auto it = p.begin(); it != p.end(); ++it) m[it.key()] = it.value();
        merged.push_back(std::move(m));
    }

    const std::size_t n = merged.size();
    std::vector<PointResult> results(n);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= n) break;
            PointResult& r = results[i];
            try {
                const RunSpec rs = parse_run_spec(merged[i]);
                r.x = merged[i].at(param).get<double>();
                r.lmax = rs.mode.lmax;
                r.t_end = rs.mode.t_end;
                const kinmix::Trace tr =
                    kinmix::evolve_coupled(rs.mode, make_datum(rs));
                kinmix::check<kinmix::ConsistencyError>(
                    !tr.diverged, "sweep point diverged");
                r.halflife = halflife_from_trace(tr);
                r.final_ratio = tr.l2.back() / tr.l2.front();
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };

    long threads = field_or<long>(cfg, "threads", 0);
    if (threads <= 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<long>(threads, static_cast<long>(n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (long i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    json jpoints = json::array();
    std::vector<double> xs, hs;
    bool any_error = false;
    for (const PointResult& r : results) {
        json jp{{param, r.x}};
        if (r.error.empty()) {
            jp["halflife"] = r.halflife;
            jp["final_ratio"] = r.final_ratio;
            jp["lmax"] = r.lmax;
            jp["t_end"] = r.t_end;
            xs.push_back(r.x);
            hs.push_back(r.halflife);
        } else {
            jp["error"] = r.error;
            any_error = true;
        }
        jpoints.push_back(jp);
    }

    json report{{"command", "sweep"},
                {"param", param},
                {"measurement", measurement},
                {"points", jpoints},
                {"seed", seed}};
    if (xs.size() >= 2) report["slope"] = kinmix::scaling_slope(xs, hs);
    emit_json(report, out);
    return any_error ? 1 : 0;
}

//----------------------------------------------------------------------------
// Subcommand: selfcheck
//----------------------------------------------------------------------------

int run_selfcheck(bool as_json) {
    struct Check {
        std::string name;
        bool ok;
        std::string detail;
    };
    std::vector<Check> checks;
    auto add = [&](const std::string& name, bool ok,
                   const std::string& detail) {
        checks.push_back({name, ok, detail});
    };

    // 1. Critical constants against the reference value.
    {
        const auto cc = kinmix::find_bc();
        const double dev = std::abs(cc.b_c - 0.62375);
        add("critical_constants", dev <= 1e-3, "deviation " + fmt17(dev));
    }

    // 2. Convolution solve against the closed form for K = e^{-t}, v = 1:
    //    u(t) = (1 + e^{-2t})/2.
    {
        const double dt = 1e-3;
        const long n = 5001;
        kinmix::VolterraProblem p;
        p.dt = dt;
        p.kernel.resize(n);
        p.source.resize(n);
        for (long j = 0; j < n; ++j) {
            const double t = dt * static_cast<double>(j);
            kinmix::MatN k = kinmix::MatN::zero(1);
            k(0, 0) = std::exp(-t);
            p.kernel[static_cast<std::size_t>(j)] = k;
            kinmix::VecN s = kinmix::VecN::zero(1);
            s[0] = 1.0;
            p.source[static_cast<std::size_t>(j)] = s;
        }
        const auto u = kinmix::solve(p);
        double worst = 0.0;
        for (long j = 0; j < n; ++j) {
            const double t = dt * static_cast<double>(j);
            const double exact = 0.5 * (1.0 + std::exp(-2.0 * t));
            worst = std::max(
                worst, std::abs(u[static_cast<std::size_t>(j)][0] - exact));
        }
        add("volterra_solve", worst <= 1e-6, "max error " + fmt17(worst));
    }

    // 3. Resolvent of K = e^{-t} against e^{-2t}.
    {
        const double dt = 1e-3;
        const long n = 5001;
        std::vector<kinmix::MatN> K(static_cast<std::size_t>(n));
        for (long j = 0; j < n; ++j) {
            kinmix::MatN k = kinmix::MatN::zero(1);
            k(0, 0) = std::exp(-dt * static_cast<double>(j));
            K[static_cast<std::size_t>(j)] = k;
        }
        const auto R = kinmix::resolvent(K, dt);
        double worst = 0.0;
        for (long j = 0; j < n; ++j) {
            const double t = dt * static_cast<double>(j);
            worst = std::max(worst,
                             std::abs(R[static_cast<std::size_t>(j)](0, 0) -
                                      std::exp(-2.0 * t)));
        }
        add("volterra_resolvent", worst <= 1e-6, "max error " + fmt17(worst));
    }

    // 4. Built memory kernel at t = 0 equals gamma*sign/5.
    {
        kinmix::ModeConfig c;
        c.gamma = 1.7;
        c.nu = 0.0;
        c.swimmer_sign = -1;
        c.lmax = 34;
        c.mmax = 1;
        c.dt = 0.05;
        c.t_end = 1.0;
        c.output_stride = 4;
        std::vector<double> tgrid;
        for (int j = 0; j <= 5; ++j) tgrid.push_back(0.2 * j);
        const auto K = kinmix::build_kernel(c, tgrid);
        const double dev = std::abs(K[0](0, 0) - cplx(-0.34, 0.0));
        add("kernel_t0_identity", dev <= 1e-8, "deviation " + fmt17(dev));
    }

    // 5. Interpolation gap of the uniform state at sigma = 1 equals 1/3.
    {
        kinmix::SphericalField f(2, 1);
        f.at(0, 0) = 1.0;
        const auto grid = kinmix::QuadratureGrid::for_field(2, 1);
        const double gap = kinmix::interpolation_gap(f, 1.0, grid);
        const double dev = std::abs(gap - 1.0 / 3.0);
        add("interpolation_gap_uniform", dev <= 1e-10,
            "deviation " + fmt17(dev));
    }

    // 6. Determinism: identical runs serialize byte-identically.
    {
        kinmix::ModeConfig c;
        c.gamma = 1.3;
        c.nu = 0.01;
        c.swimmer_sign = -1;
        c.lmax = 34;
        c.mmax = 1;
        c.dt = 0.01;
        c.t_end = 1.0;
        c.output_stride = 10;
        c.sobolev_exponents = {-1.5};
        const auto psi = kinmix::default_datum(c.lmax, c.mmax);
        const auto dir = std::filesystem::temp_directory_path();
        const std::string p1 = (dir / "kinmix_selfcheck_a.csv").string();
        const std::string p2 = (dir / "kinmix_selfcheck_b.csv").string();
        kinmix::save_trace_csv(kinmix::evolve_coupled(c, psi), p1);
        kinmix::save_trace_csv(kinmix::evolve_coupled(c, psi), p2);
        const bool same = read_text_file(p1) == read_text_file(p2);
        std::filesystem::remove(p1);
        std::filesystem::remove(p2);
        add("determinism", same, same ? "byte-identical" : "outputs differ");
    }

    bool all_ok = true;
    for (const Check& c : checks) all_ok = all_ok && c.ok;

    if (as_json) {
        json items = json::array();
        for (const Check& c : checks)
            items.push_back(json{
                {"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
        emit_json(json{{"command", "selfcheck"},
                       {"checks", items},
                       {"all_ok", all_ok},
                       {"seed", 0}},
                  "");
    } else {
        for (const Check& c : checks)
            std::cout << (c.ok ? "ok" : "FAIL") << ": " << c.name << " ("
                      << c.detail << ")\n";
        std::cout << (all_ok ? "selfcheck passed" : "selfcheck FAILED")
                  << "\n";
    }
    return all_ok ? 0 : 1;
}

}  // namespace

//----------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"kinmix: kinetic orientation-mixing experiment runner"};
    app.require_subcommand(1);

    // critical
    bool crit_json = false, crit_selfcheck = false;
    std::string crit_out;
    CLI::App* critical =
        app.add_subcommand("critical", "critical constants b_c and gamma_c");
    critical->add_flag("--json", crit_json, "machine-readable output");
    critical->add_flag("--selfcheck", crit_selfcheck,
                       "exit nonzero if b_c drifts from the reference");
    critical->add_option("--out", crit_out, "write JSON to this path");

    // dispersion
    double disp_gamma = 1.0;
    int disp_sign = -1;
    std::string disp_curve, disp_out;
    bool disp_plot = true;
    CLI::App* dispersion = app.add_subcommand(
        "dispersion", "stability verdict and boundary curve");
    dispersion->add_option("--gamma", disp_gamma, "coupling strength (> 0)")
        ->required();
    dispersion->add_option("--sign", disp_sign, "swimmer sign (-1 or 1)")
        ->check(CLI::IsMember({-1, 1}));
    dispersion->add_option("--curve", disp_curve,
                           "write (b, reF, imF) CSV to this path");
    dispersion->add_option("--out", disp_out, "write verdict JSON here");
    dispersion->add_flag("--plot,!--no-plot", disp_plot,
                         "emit plotting stub next to the curve CSV");

    // simulate
    std::string sim_config, sim_meta;
    CLI::App* simulate =
        app.add_subcommand("simulate", "run the coupled mode evolution");
    simulate->add_option("config", sim_config, "JSON experiment config")
        ->required();
    simulate->add_option("--meta-out", sim_meta,
                         "metadata JSON path (default: <out>.meta.json)");

    // volterra
    std::string vol_config;
    CLI::App* volterra = app.add_subcommand(
        "volterra", "memory-kernel route with cross-check");
    volterra->add_option("config", vol_config, "JSON experiment config")
        ->required();

    // fit
    FitArgs fa;
    CLI::App* fit = app.add_subcommand("fit", "decay fits on trace channels");
    fit->add_option("--trace", fa.trace, "trace CSV path")->required();
    fit->add_option("--channel", fa.channel,
                    "column name, or 'absu' for velocity magnitude");
    fit->add_option("--model", fa.model, "power | power-log | exponential");
    fit->add_option("--t0", fa.t0, "window start")->required();
    fit->add_option("--t1", fa.t1, "window end")->required();
    fit->add_option("--envelope", fa.envelope,
                    "pre-reduce to windowed maxima of this width");
    fit->add_option("--out", fa.out, "write fit JSON to this path");

    // sweep
    std::string sweep_config;
    CLI::App* sweep =
        app.add_subcommand("sweep", "parameter sweep with aggregation");
    sweep->add_option("config", sweep_config, "JSON sweep config")->required();

    // selfcheck
    bool self_json = false;
    CLI::App* selfcheck =
        app.add_subcommand("selfcheck", "fast internal consistency battery");
    selfcheck->add_flag("--json", self_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(critical))
            return run_critical(crit_json, crit_selfcheck, crit_out);
        if (app.got_subcommand(dispersion))
            return run_dispersion(disp_gamma, disp_sign, disp_curve, disp_out,
                                  disp_plot);
        if (app.got_subcommand(simulate))
            return run_simulate(sim_config, sim_meta);
        if (app.got_subcommand(volterra)) return run_volterra(vol_config);
        if (app.got_subcommand(fit)) return run_fit(fa);
        if (app.got_subcommand(sweep)) return run_sweep(sweep_config);
        if (app.got_subcommand(selfcheck)) return run_selfcheck(self_json);
    } catch (const kinmix::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
