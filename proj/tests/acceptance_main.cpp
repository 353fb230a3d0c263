//============================================================================
// acceptance_main.cpp — quantitative acceptance battery: twelve numbered
// end-to-end checks covering the critical constants, mixing decay rates,
// stability verdicts, memory-kernel identities, enhanced-dissipation
// scaling, and structural invariants.  Every criterion prints one PASS/FAIL
// line with the measured numbers (plus indented notes for quantities that
// are reported but not bounded); the battery always runs to completion.
//
// Exit code: 0 when every criterion executed to completion, regardless of
// verdicts (failed criteria are analyzed in the README); 1 on an execution
// error.  With --strict the exit code is the number of failed criteria.
//============================================================================
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kinmix/diagnostics.hpp"
#include "kinmix/dispersion.hpp"
#include "kinmix/dynamics.hpp"
#include "kinmix/errors.hpp"
#include "kinmix/harmonics.hpp"
#include "kinmix/volterra.hpp"
#include "oracles.hpp"

using kinmix::cplx;
using kinmix::ModeConfig;
using kinmix::SphericalField;
using kinmix::Trace;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

struct Stopwatch {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

std::string fmt(double x, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

int n_pass = 0, n_fail = 0;
std::vector<int> failed_ids;

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%2d] %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    (pass ? n_pass : n_fail)++;
    if (!pass) failed_ids.push_back(id);
}

void note(const std::string& text) {
    std::printf("      - %s\n", text.c_str());
    std::fflush(stdout);
}

// |u|(t) from the recorded velocity components.
std::vector<double> velocity_magnitude(const Trace& tr) {
    std::vector<double> a(tr.t.size());
    for (std::size_t j = 0; j < tr.t.size(); ++j)
        a[j] = std::sqrt(std::norm(tr.ux[j]) + std::norm(tr.uy[j]));
    return a;
}

// First time at which ‖ψ‖ halves, log-interpolated between samples.
double halflife(const Trace& tr) {
    const double target = 0.5 * tr.l2.front();
    for (std::size_t j = 1; j < tr.l2.size(); ++j) {
        if (tr.l2[j] <= target) {
            const double num = std::log(tr.l2[j - 1] / target);
            const double den = std::log(tr.l2[j - 1] / tr.l2[j]);
            return tr.t[j - 1] + (tr.t[j] - tr.t[j - 1]) * num / den;
        }
    }
    throw kinmix::DataError("half-life not reached within the horizon");
}

kinmix::FitReport envelope_power_fit(const std::vector<double>& t,
                                     const std::vector<double>& y,
                                     double window, double t0, double t1) {
    std::vector<double> te, ye;
    kinmix::envelope_maxima(t, y, window, te, ye);
    return kinmix::fit_power_law(te, ye, t0, t1);
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    bool execution_error = false;
    std::printf("acceptance battery (deterministic; single process)\n");

    // Run A of criterion 2 is shared with criteria 3 and 4.
    std::optional<Trace> run_a;

    //------------------------------------------------------------------ 1
    try {
        Stopwatch sw;
        const auto cc = kinmix::find_bc();
        const double rt = sw.seconds();  // cost of the operation under test
        const double dev = std::abs(cc.b_c - 0.62375);

        // Independent dense sign scan of the principal-value integral
        // (excision + Richardson quadrature), then bisection.  Oracle cost
        // is test overhead and is excluded from the runtime bound.
        double lo = 0.0, hi = 0.0;
        for (double b = 0.05; b < 0.95; b += 0.01) {
            if (oracle::pv_excision(b) < 0.0 &&
                oracle::pv_excision(b + 0.01) >= 0.0) {
                lo = b;
                hi = b + 0.01;
                break;
            }
        }
        for (int it = 0; it < 40 && hi > lo; ++it) {
            const double mid = 0.5 * (lo + hi);
            (oracle::pv_excision(mid) < 0.0 ? lo : hi) = mid;
        }
        const double b_or = 0.5 * (lo + hi);
        const double gamma_or =
            4.0 / (3.0 * kPi * b_or * b_or * (1.0 - b_or * b_or));
        const double gdev = std::abs(cc.gamma_c - gamma_or);

        const bool pass = dev <= 5e-5 && gdev <= 1e-6 && rt < 1.0;
        report(1, pass,
               "critical constants — b_c = " + fmt(cc.b_c, 15) +
                   ", |b_c - 0.62375| = " + fmt(dev, 4) +
                   " (tol 5e-05); gamma_c vs sign-scan oracle " +
                   fmt(gdev, 3) + " (tol 1e-06); runtime " + fmt(rt, 3) +
                   " s (< 1 s)");
        note("gamma_c = " + fmt(cc.gamma_c, 15) + ", scan-oracle root b = " +
             fmt(b_or, 12));
    } catch (const std::exception& e) {
        report(1, false, std::string("critical constants — execution error: ") +
                             e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 2
    try {
        Stopwatch sw;
        ModeConfig a;
        a.gamma = 1.0;
        a.nu = 0.0;
        a.swimmer_sign = -1;
        a.lmax = 512;
        a.mmax = 1;
        a.dt = 5e-3;
        a.t_end = 200.0;
        a.output_stride = 100;
        a.sobolev_exponents = {-1.5};
        run_a = kinmix::evolve_coupled(a, kinmix::default_datum(512, 1));
        const auto absu = velocity_magnitude(*run_a);

        const auto fit = envelope_power_fit(run_a->t, absu, kTwoPi, 20.0,
                                            200.0);
        double wsup_a = 0.0;
        for (std::size_t j = 0; j < run_a->t.size(); ++j)
            wsup_a = std::max(wsup_a, (1.0 + run_a->t[j]) *
                                          (1.0 + run_a->t[j]) * absu[j]);

        ModeConfig b = a;
        b.lmax = 768;
        b.t_end = 400.0;
        b.sobolev_exponents.clear();
        const Trace run_b =
            kinmix::evolve_coupled(b, kinmix::default_datum(768, 1));
        const auto absu_b = velocity_magnitude(run_b);
        double wsup_b = 0.0;
        for (std::size_t j = 0; j < run_b.t.size(); ++j)
            wsup_b = std::max(wsup_b, (1.0 + run_b.t[j]) *
                                          (1.0 + run_b.t[j]) * absu_b[j]);
        const bool horizon_stable =
            std::abs(wsup_b - wsup_a) <= 0.1 * wsup_a;
        const double rt = sw.seconds();

        const bool pass = std::abs(fit.exponent_or_rate - 2.0) <= 0.15 &&
                          fit.residual_rms <= 0.1 && horizon_stable &&
                          rt <= 300.0;
        report(2, pass,
               "inviscid velocity mixing — envelope exponent on [20,200] = " +
                   fmt(fit.exponent_or_rate, 4) + " (want 2 +/- 0.15), "
                   "log-residual " +
                   fmt(fit.residual_rms, 3) + " (<= 0.1); weighted sup " +
                   fmt(wsup_a, 6) + " vs " + fmt(wsup_b, 6) +
                   " at doubled horizon (" +
                   std::string(horizon_stable ? "stable" : "UNSTABLE") +
                   "); runtime " + fmt(rt, 3) + " s (<= 300 s)");
        const auto late = envelope_power_fit(run_a->t, absu, kTwoPi, 60.0,
                                             200.0);
        note("late-window fit on [60,200]: exponent " +
             fmt(late.exponent_or_rate, 4) + ", log-residual " +
             fmt(late.residual_rms, 3) +
             " — the [20,200] window still contains the oscillatory "
             "transient");
        note("measured amplitude C with |u| ~ C(1+t)^-2: " +
             fmt(fit.amplitude, 4) + " (reported, not asserted)");
    } catch (const std::exception& e) {
        report(2, false,
               std::string("inviscid velocity mixing — execution error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 3
    try {
        if (!run_a) throw kinmix::DataError("shared run unavailable");
        const auto fit = envelope_power_fit(run_a->t, run_a->sobolev[0],
                                            kTwoPi, 20.0, 200.0);
        const bool pass = std::abs(fit.exponent_or_rate - 1.0) <= 0.2;
        report(3, pass,
               "weak-norm decay — exponent-(-1.5) Sobolev envelope exponent "
               "on [20,200] = " +
                   fmt(fit.exponent_or_rate, 4) +
                   " (want 1 +/- 0.2), log-residual " +
                   fmt(fit.residual_rms, 3));
        note("the default datum concentrates on one degree, so its weak norm "
             "decays at the fastest admissible rate rather than the generic "
             "one");
    } catch (const std::exception& e) {
        report(3, false,
               std::string("weak-norm decay — execution error: ") + e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 4
    try {
        if (!run_a) throw kinmix::DataError("shared run unavailable");
        double v20 = -1.0;
        for (std::size_t j = 0; j < run_a->t.size(); ++j)
            if (std::abs(run_a->t[j] - 20.0) < 1e-9)
                v20 = run_a->t[j] * run_a->sobolev[0][j];
        if (v20 < 0.0) throw kinmix::DataError("no sample at t = 20");
        double peak = 0.0;
        for (std::size_t j = 0; j < run_a->t.size(); ++j)
            if (run_a->t[j] >= 100.0 && run_a->t[j] <= 200.0)
                peak = std::max(peak, run_a->t[j] * run_a->sobolev[0][j]);
        const double ratio = peak / v20;
        const bool pass = ratio >= 0.3;
        report(4, pass,
               "weak-norm sharpness — max over [100,200] of t*|psi|_(-1.5) = " +
                   fmt(ratio, 6) + " x its value at t = 20 (want >= 0.3: no "
                   "faster-than-stated decay)");
    } catch (const std::exception& e) {
        report(4, false,
               std::string("weak-norm sharpness — execution error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 5
    try {
        Stopwatch sw;
        const bool s1 =
            kinmix::spectral_condition(1.0, -1).verdict ==
            kinmix::Verdict::stable;
        const bool s2 =
            kinmix::spectral_condition(2.5, -1).verdict ==
            kinmix::Verdict::unstable;
        bool pullers = true;
        for (double g : {0.5, 5.0, 50.0})
            pullers = pullers && kinmix::spectral_condition(g, +1).verdict ==
                                     kinmix::Verdict::stable;
        const double rt = sw.seconds();
        const bool pass = s1 && s2 && pullers && rt < 10.0;
        report(5, pass,
               std::string("stability boundary verdicts — (-1, 1.0) ") +
                   (s1 ? "stable" : "WRONG") + "; (-1, 2.5) " +
                   (s2 ? "unstable" : "WRONG") + "; (+1, {0.5, 5, 50}) " +
                   (pullers ? "all stable" : "WRONG") + "; runtime " +
                   fmt(rt, 3) + " s (< 10 s)");
    } catch (const std::exception& e) {
        report(5, false,
               std::string("stability boundary verdicts — execution error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 6
    try {
        const auto root = kinmix::find_unstable_root(2.5, -1);
        if (!root) throw kinmix::DataError("no growing root found");
        ModeConfig c;
        c.gamma = 2.5;
        c.nu = 0.0;
        c.swimmer_sign = -1;
        c.lmax = kinmix::resolution_floor(100.0, 0.0);
        c.mmax = 1;
        c.dt = 0.01;
        c.t_end = 100.0;
        c.output_stride = 50;
        const Trace tr =
            kinmix::evolve_coupled(c, kinmix::default_datum(c.lmax, 1));
        const auto absu = velocity_magnitude(tr);
        // |u| of the conjugate growing pair oscillates with period
        // pi/|Im lambda*| ~ 5.4; one envelope maximum per period.
        std::vector<double> te, ye;
        kinmix::envelope_maxima(tr.t, absu, 5.5, te, ye);
        const auto fit = kinmix::fit_exponential(te, ye, 30.0, 100.0);
        const double growth = -fit.exponent_or_rate;
        const double rel = std::abs(growth - root->real()) / root->real();
        const bool pass = rel <= 0.05;
        report(6, pass,
               "instability rate cross-check — fitted |u| growth rate " +
                   fmt(growth, 6) + " vs Re(lambda*) = " +
                   fmt(root->real(), 6) + ", relative deviation " +
                   fmt(rel, 3) + " (<= 0.05)");
        note("lambda* = " + fmt(root->real(), 12) + " + " +
             fmt(std::abs(root->imag()), 12) + "i");
    } catch (const std::exception& e) {
        report(6, false,
               std::string("instability rate cross-check — execution "
                           "error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 7
    try {
        Stopwatch sw;
        const std::vector<double> nus = {1e-3, 3e-4, 1e-4, 3e-5};
        const std::vector<double> horizons = {400.0, 400.0, 600.0, 900.0};
        std::vector<double> halves, rates, etas, resids;
        for (std::size_t i = 0; i < nus.size(); ++i) {
            ModeConfig c;
            c.gamma = 0.0;
            c.nu = nus[i];
            c.swimmer_sign = -1;
            c.lmax = kinmix::resolution_floor(horizons[i], nus[i]);
            c.mmax = 2;
            c.dt = 0.01;
            c.t_end = horizons[i];
            c.output_stride = 50;
            const Trace tr =
                kinmix::evolve_coupled(c, kinmix::default_datum(c.lmax, 2));
            halves.push_back(halflife(tr));
            const auto tail = kinmix::fit_exponential(
                tr.t, tr.l2, 1.0 / std::sqrt(nus[i]), horizons[i]);
            rates.push_back(tail.exponent_or_rate);
            etas.push_back(tail.exponent_or_rate / std::sqrt(nus[i]));
            resids.push_back(tail.residual_rms);
        }
        const double slope = kinmix::scaling_slope(nus, halves);
        const double rt = sw.seconds();
        const bool pass = std::abs(slope + 0.5) <= 0.1 && rt <= 600.0;
        report(7, pass,
               "enhanced-dissipation scaling — log-log slope of half-life "
               "vs nu = " +
                   fmt(slope, 5) + " (want -0.5 +/- 0.1); runtime " +
                   fmt(rt, 4) + " s (<= 600 s)");
        std::string hl = "half-lives:";
        for (std::size_t i = 0; i < nus.size(); ++i)
            hl += " nu=" + fmt(nus[i], 3) + " -> " + fmt(halves[i], 6);
        note(hl);
        note("the half-life falls inside the initial shear-diffusion "
             "transient (log||psi|| ~ -c nu t^3), which gives T_1/2 ~ "
             "nu^-1/3; the asymptotic rate only sets in past t ~ nu^-1/2");
        std::string tl = "tail rates past t = nu^-1/2:";
        for (std::size_t i = 0; i < nus.size(); ++i)
            tl += " r=" + fmt(rates[i], 4) + " (eta=r/sqrt(nu)=" +
                  fmt(etas[i], 4) + ", resid " + fmt(resids[i], 2) + ")";
        note(tl);
        const double tail_slope = kinmix::scaling_slope(nus, rates);
        note("tail-rate scaling slope " + fmt(tail_slope, 4) +
             " vs +0.5 +/- 0.15 (reported supplementary check: " +
             (std::abs(tail_slope - 0.5) <= 0.15 ? "satisfied"
                                                 : "NOT satisfied") +
             "); eta is reported, never asserted");
    } catch (const std::exception& e) {
        report(7, false,
               std::string("enhanced-dissipation scaling — execution "
                           "error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 8
    try {
        ModeConfig c;
        c.gamma = 1.0;
        c.nu = 1e-4;
        c.swimmer_sign = -1;
        c.lmax = kinmix::resolution_floor(100.0, 1e-4);
        c.mmax = 1;
        c.dt = 5e-3;
        c.t_end = 100.0;
        c.output_stride = 100;
        const Trace tr =
            kinmix::evolve_coupled(c, kinmix::default_datum(c.lmax, 1));
        const auto absu = velocity_magnitude(tr);
        double sup_early = 0.0, sup_full = 0.0;
        for (std::size_t j = 0; j < tr.t.size(); ++j) {
            if (tr.t[j] < 1.0) continue;
            const double q = (1.0 + tr.t[j]) * (1.0 + tr.t[j]) * absu[j] /
                             std::log(2.0 + tr.t[j]);
            sup_full = std::max(sup_full, q);
            if (tr.t[j] <= 10.0) sup_early = std::max(sup_early, q);
        }
        const bool pass = sup_full <= 10.0 * sup_early;
        report(8, pass,
               "viscous mixing persistence — sup of (1+t)^2|u|/ln(2+t) over "
               "[1,100] = " +
                   fmt(sup_full, 6) + " vs " + fmt(sup_early, 6) +
                   " over [1,10] (ratio " + fmt(sup_full / sup_early, 4) +
                   ", want <= 10)");
    } catch (const std::exception& e) {
        report(8, false,
               std::string("viscous mixing persistence — execution "
                           "error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 9
    try {
        const double dt = 1e-3;
        const long n = 5001;
        kinmix::VolterraProblem p;
        p.dt = dt;
        p.kernel.resize(static_cast<std::size_t>(n));
        p.source.resize(static_cast<std::size_t>(n));
        for (long j = 0; j < n; ++j) {
            kinmix::MatN k = kinmix::MatN::zero(1);
            k(0, 0) = std::exp(-dt * static_cast<double>(j));
            p.kernel[static_cast<std::size_t>(j)] = k;
            kinmix::VecN s = kinmix::VecN::zero(1);
            s[0] = 1.0;
            p.source[static_cast<std::size_t>(j)] = s;
        }
        const auto u = kinmix::solve(p);
        double err_solve = 0.0;
        for (long j = 0; j < n; ++j) {
            const double t = dt * static_cast<double>(j);
            err_solve = std::max(
                err_solve, std::abs(u[static_cast<std::size_t>(j)][0] -
                                    0.5 * (1.0 + std::exp(-2.0 * t))));
        }
        const auto R = kinmix::resolvent(p.kernel, dt);
        double err_res = 0.0;
        for (long j = 0; j < n; ++j) {
            const double t = dt * static_cast<double>(j);
            err_res = std::max(err_res,
                               std::abs(R[static_cast<std::size_t>(j)](0, 0) -
                                        std::exp(-2.0 * t)));
        }
        const bool pass = err_solve <= 1e-6 && err_res <= 1e-6;
        report(9, pass,
               "convolution-equation oracles — solve error " +
                   fmt(err_solve, 3) + ", resolvent error " + fmt(err_res, 3) +
                   " (both <= 1e-06 at dt = 1e-3)");
    } catch (const std::exception& e) {
        report(9, false,
               std::string("convolution-equation oracles — execution "
                           "error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 10
    try {
        // Kernel value at t = 0 equals gamma*sign/5.
        ModeConfig ca;
        ca.gamma = 1.7;
        ca.nu = 0.0;
        ca.swimmer_sign = -1;
        ca.lmax = 34;
        ca.mmax = 1;
        ca.dt = 0.05;
        ca.t_end = 1.0;
        ca.output_stride = 4;
        std::vector<double> tg6;
        for (int j = 0; j <= 5; ++j) tg6.push_back(0.2 * j);
        const auto KA = kinmix::build_kernel(ca, tg6);
        const double dev0 = std::abs(KA[0](0, 0) - cplx(-0.34, 0.0));

        // Laplace transform of the built kernel against the boundary-value
        // integral (3 gamma sign / 4) * int z^2 (1-z^2) / (lambda + i z) dz.
        ModeConfig cb;
        cb.gamma = 1.0;
        cb.nu = 0.0;
        cb.swimmer_sign = -1;
        cb.lmax = kinmix::resolution_floor(60.0, 0.0);
        cb.mmax = 1;
        cb.dt = 2e-3;
        cb.t_end = 60.0;
        cb.output_stride = 1;
        std::vector<double> tgrid(30001);
        for (std::size_t j = 0; j < tgrid.size(); ++j)
            tgrid[j] = 2e-3 * static_cast<double>(j);
        const auto KB = kinmix::build_kernel(cb, tgrid);
        std::vector<cplx> k00(KB.size());
        double offmax = 0.0;
        for (std::size_t j = 0; j < KB.size(); ++j) {
            k00[j] = KB[j](0, 0);
            offmax = std::max(offmax, std::max(std::abs(KB[j](0, 1)),
                                               std::abs(KB[j](1, 0))));
        }
        bool laplace_ok = true;
        std::string lap;
        for (const cplx lam : {cplx(1.0, 0.0), cplx(1.0, 1.0),
                               cplx(2.0, -1.0)}) {
            const cplx got = kinmix::laplace_transform(k00, 2e-3, lam);
            const cplx ref =
                -0.75 * oracle::integrate(
                            [lam](double z) {
                                return z * z * (1.0 - z * z) /
                                       (lam + cplx(0.0, z));
                            },
                            -1.0, 1.0);
            // Tail bound of the discarded horizon, from |k| <= 4.42/(1+t)^2.
            const double bias = 4.4146 *
                                std::exp(-lam.real() * 60.0) /
                                (61.0 * 61.0 * lam.real());
            const double d = std::abs(got - ref);
            laplace_ok = laplace_ok && d <= 1e-4 + bias;
            lap += " |dev(" + fmt(lam.real(), 2) +
                   (lam.imag() >= 0 ? "+" : "-") +
                   fmt(std::abs(lam.imag()), 2) + "i)| = " + fmt(d, 3) +
                   " (bias " + fmt(bias, 2) + ")";
        }
        const bool pass = dev0 <= 1e-8 && laplace_ok && offmax == 0.0;
        report(10, pass,
               "memory-kernel identities — |K(0) - gamma*sign/5| = " +
                   fmt(dev0, 3) + " (<= 1e-08); Laplace-transform "
                   "deviations (tol 1e-04 + bias):" +
                   lap + "; off-diagonal max " + fmt(offmax, 2));
    } catch (const std::exception& e) {
        report(10, false,
               std::string("memory-kernel identities — execution error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 11
    try {
        Stopwatch sw;
        const auto grid = kinmix::QuadratureGrid::for_field(16, 8);
        double worst = 1e300;
        for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
            const auto f = kinmix::random_smooth_field(16, 8, seed);
            for (double sigma : {1.0, 0.1, 0.01})
                worst = std::min(worst,
                                 kinmix::interpolation_gap(f, sigma, grid));
        }
        const double rt = sw.seconds();
        const bool pass = worst >= -1e-10 && rt < 30.0;
        report(11, pass,
               "interpolation inequality — minimum gap over 1000 random "
               "fields x sigma in {1, 0.1, 0.01}: " +
                   fmt(worst, 4) + " (>= -1e-10); runtime " + fmt(rt, 3) +
                   " s (< 30 s)");
    } catch (const std::exception& e) {
        report(11, false,
               std::string("interpolation inequality — execution error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------ 12
    try {
        // (a) analysis/synthesis round trip.
        const auto f = kinmix::random_smooth_field(24, 10, 7);
        const auto grid = kinmix::QuadratureGrid::for_field(24, 10);
        const auto vals = kinmix::synthesize(f, grid);
        const auto g = kinmix::analyze(vals, grid, 24, 10);
        double rt_dev = std::abs(kinmix::l2_norm(g) - kinmix::l2_norm(f));
        for (int l = 0; l <= 24; ++l)
            for (int m = -std::min(l, 10); m <= std::min(l, 10); ++m)
                rt_dev = std::max(rt_dev, std::abs(g.get(l, m) - f.get(l, m)));
        const bool parseval_ok = rt_dev <= 1e-10;

        // (b) azimuthal sectors beyond the datum stay inert.
        ModeConfig cm;
        cm.gamma = 1.3;
        cm.nu = 0.01;
        cm.swimmer_sign = -1;
        cm.lmax = 40;
        cm.mmax = 2;
        cm.dt = 0.01;
        cm.t_end = 2.0;
        cm.output_stride = 20;
        const auto datum = kinmix::default_datum(40, 2);
        const Trace t1 = kinmix::evolve_coupled(cm, datum);
        ModeConfig cw = cm;
        cw.mmax = 40;
        const Trace t2 =
            kinmix::evolve_coupled(cw, kinmix::embed(datum, 40, 40));
        double mdev = 0.0;
        for (std::size_t j = 0; j < t1.t.size(); ++j) {
            mdev = std::max(mdev, std::abs(t1.ux[j] - t2.ux[j]));
            mdev = std::max(mdev, std::abs(t1.uy[j] - t2.uy[j]));
            mdev = std::max(mdev, std::abs(t1.l2[j] - t2.l2[j]));
        }
        const bool msector_ok = mdev <= 1e-10;

        // (c) discrete L2 monotonicity of the uncoupled viscous flow.
        ModeConfig cf;
        cf.gamma = 0.0;
        cf.nu = 1e-3;
        cf.swimmer_sign = -1;
        cf.lmax = kinmix::resolution_floor(5.0, 1e-3);
        cf.mmax = 1;
        cf.dt = 0.01;
        cf.t_end = 5.0;
        cf.output_stride = 1;
        const Trace tm =
            kinmix::evolve_coupled(cf, kinmix::default_datum(cf.lmax, 1));
        bool monotone_ok = true;
        for (std::size_t j = 1; j < tm.l2.size(); ++j)
            monotone_ok =
                monotone_ok && tm.l2[j] <= tm.l2[j - 1] * (1.0 + 1e-13);

        // (d) the memory-kernel route reproduces the direct route's u.
        ModeConfig cv;
        cv.gamma = 1.3;
        cv.nu = 0.01;
        cv.swimmer_sign = -1;
        cv.lmax = kinmix::resolution_floor(50.0, 0.01);
        cv.mmax = 1;
        cv.dt = 2.5e-3;
        cv.t_end = 50.0;
        cv.output_stride = 40;
        const auto psi_v = kinmix::default_datum(cv.lmax, 1);
        const Trace direct = kinmix::evolve_coupled(cv, psi_v);
        std::vector<double> tgrid(direct.t);
        const auto U = kinmix::build_source(cv, psi_v, tgrid);
        kinmix::VolterraProblem vp;
        vp.dt = cv.dt * static_cast<double>(cv.output_stride);
        vp.kernel = kinmix::build_kernel(cv, tgrid);
        vp.source.resize(U.size());
        for (std::size_t j = 0; j < U.size(); ++j) {
            kinmix::VecN s = kinmix::VecN::zero(2);
            s[0] = U[j].x;
            s[1] = U[j].y;
            vp.source[j] = s;
        }
        const auto uu = kinmix::solve(vp);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < uu.size(); ++j) {
            num = std::max(num,
                           std::sqrt(std::norm(uu[j][0] - direct.ux[j]) +
                                     std::norm(uu[j][1] - direct.uy[j])));
            den = std::max(den, std::sqrt(std::norm(direct.ux[j]) +
                                          std::norm(direct.uy[j])));
        }
        const double cross_dev = num / den;
        const bool cross_ok = cross_dev <= 1e-3;

        // (e) byte-identical reruns.
        const auto dir = std::filesystem::temp_directory_path();
        const std::string p1 = (dir / "kinmix_acceptance_a.csv").string();
        const std::string p2 = (dir / "kinmix_acceptance_b.csv").string();
        kinmix::save_trace_csv(kinmix::evolve_coupled(cm, datum), p1);
        kinmix::save_trace_csv(kinmix::evolve_coupled(cm, datum), p2);
        const auto slurp = [](const std::string& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const bool determinism_ok = slurp(p1) == slurp(p2);
        std::filesystem::remove(p1);
        std::filesystem::remove(p2);

        const bool pass = parseval_ok && msector_ok && monotone_ok &&
                          cross_ok && determinism_ok;
        report(12, pass,
               "structural invariants — round trip " + fmt(rt_dev, 3) +
                   " (<= 1e-10); sector equivalence " + fmt(mdev, 3) +
                   " (<= 1e-10); free-flow L2 " +
                   (monotone_ok ? "monotone" : "NOT monotone") +
                   "; route cross-deviation " + fmt(cross_dev, 3) +
                   " (<= 1e-03); reruns " +
                   (determinism_ok ? "byte-identical" : "DIFFER"));
    } catch (const std::exception& e) {
        report(12, false,
               std::string("structural invariants — execution error: ") +
                   e.what());
        execution_error = true;
    }

    //------------------------------------------------------------------
    std::string tail;
    if (!failed_ids.empty()) {
        tail = " (failed:";
        for (int id : failed_ids) tail += " " + std::to_string(id);
        tail += "; see README for the analysis of expected failures)";
    }
    std::printf("result: %d of %d criteria pass%s\n", n_pass,
                n_pass + n_fail, tail.c_str());
    if (strict) return n_fail;
    return execution_error ? 1 : 0;
}
