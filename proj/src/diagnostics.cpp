//============================================================================
// diagnostics.cpp — time-weighted energy functional, interpolation
// inequality, adapted vector-field norms, reduced oscillatory integrals,
// and decay/scaling fitters.
//============================================================================
#include "kinmix/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "kinmix/errors.hpp"

namespace kinmix {

namespace {
const double kPi = std::acos(-1.0);
}  // namespace

//----------------------------------------------------------------------------
// Energy functional.
//----------------------------------------------------------------------------

double EnergyConstants::a() const { return std::cbrt(b * b); }

double EnergyConstants::c() const { return 32.0 * b * b / a(); }

void EnergyConstants::validate() const {
    check(std::isfinite(b) && b > 0.0 && b < 1.0,
          "EnergyConstants: b must lie in (0, 1)");
}

double energy_from_norms(const EnergyConstants& ec, double nu, double t,
                         double l2, double grad, double mixed, double sinw) {
    ec.validate();
    check(std::isfinite(nu) && nu >= 0.0, "energy: nu must be >= 0");
    check(std::isfinite(t) && t >= 0.0, "energy: t must be >= 0");
    const double nt = nu * t;
    return 0.5 * (l2 * l2 + ec.a() * nt * grad * grad +
                  2.0 * ec.b * nt * t * mixed +
                  ec.c() * nt * t * t * sinw * sinw);
}

double energy(const SphericalField& f, double t, double nu,
              const EnergyConstants& ec, const QuadratureGrid& grid) {
    return energy_from_norms(ec, nu, t, l2_norm(f), grad_norm(f),
                             mixed_inner(f, grid),
                             sin_weighted_norm(f, grid));
}

//----------------------------------------------------------------------------
// Interpolation inequality gap.
//----------------------------------------------------------------------------

double interpolation_gap(const SphericalField& g, double sigma,
                         const QuadratureGrid& grid) {
    check<DomainError>(std::isfinite(sigma) && sigma > 0.0 && sigma <= 1.0,
                       "interpolation_gap: sigma must lie in (0, 1]");
    const double l2 = l2_norm(g);
    const double grad = grad_norm(g);
    const double sinw = sin_weighted_norm(g, grid);
    return 0.5 * sigma * grad * grad + 2.0 * sinw * sinw -
           std::sqrt(sigma) * l2 * l2;
}

//----------------------------------------------------------------------------
// Adapted vector-field coefficients.
//----------------------------------------------------------------------------

std::pair<cplx, cplx> alpha_beta(double nu, double t) {
    check(std::isfinite(nu) && nu >= 0.0, "alpha_beta: nu must be >= 0");
    check(std::isfinite(t) && t >= 0.0, "alpha_beta: t must be >= 0");
    if (nu == 0.0) return {cplx(1.0, 0.0), cplx(t, 0.0)};
    // Principal branch: sqrt(-2i nu) = sqrt(nu) (1 - i), Re > 0.
    const cplx r = std::sqrt(nu) * cplx(1.0, -1.0);
    const cplx rt = r * t;
    return {std::cosh(rt), std::sinh(rt) / r};
}

//----------------------------------------------------------------------------
// Polar cutoff.
//----------------------------------------------------------------------------

CutoffSpec::CutoffSpec() : theta1(0.5 * kPi), theta2(0.75 * kPi) {}

void CutoffSpec::validate() const {
    check(std::isfinite(theta1) && std::isfinite(theta2) && theta1 > 0.0 &&
              theta2 > theta1 && theta2 < kPi,
          "CutoffSpec: need 0 < theta1 < theta2 < pi");
}

double CutoffSpec::eval(double theta) const {
    if (theta <= theta1) return 1.0;
    if (theta >= theta2) return 0.0;
    // Quintic smoothstep blend: value and first two derivatives vanish at
    // both ends, so chi is C^2 on the sphere.
    const double s = (theta - theta1) / (theta2 - theta1);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

//----------------------------------------------------------------------------
// Adapted vector-field norms: X = alpha * grad(psi) + i beta * (grad cos)psi,
// i.e. X_theta = alpha d_theta psi - i beta sin(theta) psi and
// X_phi = alpha (d_phi psi)/sin(theta).
//----------------------------------------------------------------------------

VectorFieldNorms vector_field_norms(const SphericalField& f, double nu,
                                    double t, const CutoffSpec& cutoff,
                                    const QuadratureGrid& grid) {
    f.ensure_finite();
    cutoff.validate();
    check(grid.n_theta >= f.lmax + 2,
          "vector_field_norms: grid n_theta too small (need lmax+2)");
    check(grid.n_phi >= 2 * f.mmax + 1,
          "vector_field_norms: grid n_phi too small (need 2*mmax+1)");
    const auto [alpha, beta] = alpha_beta(nu, t);

    const std::vector<cplx> vpsi = synthesize(f, grid);
    const std::vector<cplx> vsdt = synthesize(apply_sin_dtheta(f), grid);
    SphericalField fphi(f.lmax, f.mmax);
    for (int l = 0; l <= f.lmax; ++l)
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m)
            fphi.at(l, m) = cplx(0.0, static_cast<double>(m)) * f.get(l, m);
    const std::vector<cplx> vdph = synthesize(fphi, grid);

    const double wphi = 2.0 * kPi / grid.n_phi;
    double full2 = 0.0, cut2 = 0.0, pmax = 0.0;
    for (int j = 0; j < grid.n_theta; ++j) {
        const double z = grid.z[j];
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double theta = std::acos(z);
        const double chi = cutoff.eval(theta);
        const bool in_pole_window = theta >= cutoff.theta2;
        const double wrow = grid.w[j] * wphi;
        for (int k = 0; k < grid.n_phi; ++k) {
            const std::size_t idx =
                static_cast<std::size_t>(j) * grid.n_phi + k;
            const cplx xth = alpha * (vsdt[idx] / s) -
                             cplx(0.0, 1.0) * beta * s * vpsi[idx];
            const cplx xph = alpha * vdph[idx] / s;
            const double m2 = std::norm(xth) + std::norm(xph);
            full2 += wrow * m2;
            cut2 += wrow * chi * chi * m2;
            if (in_pole_window) pmax = std::max(pmax, std::sqrt(m2));
        }
    }
    VectorFieldNorms out;
    out.cutoff_norm = std::sqrt(std::max(0.0, cut2));
    out.full_norm = std::sqrt(std::max(0.0, full2));
    out.pole_window_max = pmax;
    return out;
}

//----------------------------------------------------------------------------
// Reduced oscillatory integral by composite Clenshaw–Curtis panels.
//----------------------------------------------------------------------------

namespace {

constexpr int kCCOrder = 16;        // 17 nodes per panel
constexpr long kMaxPanels = 4096;

// Classic Clenshaw–Curtis nodes/weights on [-1, 1] (even order).
struct CCRule {
    std::array<double, kCCOrder + 1> x{};
    std::array<double, kCCOrder + 1> w{};
    CCRule() {
        for (int k = 0; k <= kCCOrder; ++k)
            x[k] = std::cos(kPi * k / kCCOrder);
        for (int k = 0; k <= kCCOrder; ++k) {
            double s = 1.0;
            for (int j = 1; j <= kCCOrder / 2; ++j) {
                const double bj = (j == kCCOrder / 2) ? 1.0 : 2.0;
                s -= bj * std::cos(2.0 * j * k * kPi / kCCOrder) /
                     (4.0 * j * j - 1.0);
            }
            const double ck = (k == 0 || k == kCCOrder) ? 0.5 : 1.0;
            w[k] = 2.0 * ck * s / kCCOrder;
        }
    }
};

}  // namespace

cplx oscillatory_integral(const SphericalField& F, double t) {
    F.ensure_finite();
    check(std::isfinite(t), "oscillatory_integral: t must be finite");
    static const CCRule cc;

    // Azimuthal averaging keeps only the m = 0 profile (with the 2*pi
    // weight): F0(z) = 2*pi * sum_l a_{l,0} Pbar_l(z).
    const int lmax = F.lmax;
    std::vector<cplx> a0(static_cast<std::size_t>(lmax) + 1);
    for (int l = 0; l <= lmax; ++l) a0[static_cast<std::size_t>(l)] = F.get(l, 0);

    std::vector<double> row(static_cast<std::size_t>(lmax) + 1);
    auto eval = [&](long panels) {
        cplx acc(0.0, 0.0);
        for (long p = 0; p < panels; ++p) {
            const double za = -1.0 + 2.0 * static_cast<double>(p) / panels;
            const double zb =
                -1.0 + 2.0 * static_cast<double>(p + 1) / panels;
            const double mid = 0.5 * (za + zb), half = 0.5 * (zb - za);
            for (int k = 0; k <= kCCOrder; ++k) {
                const double z = mid + half * cc.x[k];
                legendre_row(lmax, 0, z, row.data());
                cplx g(0.0, 0.0);
                for (int l = 0; l <= lmax; ++l)
                    g += a0[static_cast<std::size_t>(l)] *
                         row[static_cast<std::size_t>(l)];
                acc += (cc.w[k] * half) * (2.0 * kPi) * g *
                       std::exp(cplx(0.0, z * t));
            }
        }
        return acc;
    };

    // One panel per ~3 radians of phase, refined by doubling until two
    // consecutive levels agree.
    long panels = std::max<long>(4, std::lround(std::ceil(std::abs(t) / 3.0)));
    if (panels > kMaxPanels)
        throw ResolutionError(
            "oscillatory_integral: phase too fast for the panel budget",
            panels);
    cplx prev = eval(panels);
    for (;;) {
        const long next_panels = 2 * panels;
        if (next_panels > kMaxPanels)
            throw ResolutionError(
                "oscillatory_integral: panel refinement did not converge",
                next_panels);
        const cplx next = eval(next_panels);
        if (std::abs(next - prev) <= 1e-12 * std::max(1.0, std::abs(next)))
            return next;
        prev = next;
        panels = next_panels;
    }
}

//----------------------------------------------------------------------------
// Fitters.
//----------------------------------------------------------------------------

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x,
                      const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    check(sxx > 0.0, "fit: abscissae do not span the window");
    LineFit lf;
    lf.slope = sxy / sxx;
    lf.intercept = my - lf.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (lf.intercept + lf.slope * x[i]);
        ss += r * r;
    }
    lf.rms = std::sqrt(ss / static_cast<double>(n));
    return lf;
}

void check_fit_window(double t0, double t1) {
    check(std::isfinite(t0) && std::isfinite(t1) && t0 > 0.0 && t1 > t0,
          "fit: window must satisfy 0 < t0 < t1");
}

}  // namespace

std::string FitReport::to_json() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"channel\": \"%s\", \"window\": [%.17g, %.17g], "
                  "\"model\": \"%s\", \"exponent_or_rate\": %.17g, "
                  "\"amplitude\": %.17g, \"residual\": %.17g}",
                  channel.c_str(), t0, t1, model.c_str(), exponent_or_rate,
                  amplitude, residual_rms);
    return std::string(buf);
}

FitReport fit_power_law(const std::vector<double>& t,
                        const std::vector<double>& y, double t0, double t1,
                        bool log_correction) {
    check(t.size() == y.size(), "fit: t and y must have equal length");
    check_fit_window(t0, t1);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1) continue;
        double v = y[i];
        if (log_correction) v /= std::log(2.0 + t[i]);
        if (!(std::isfinite(v) && v > 0.0)) continue;
        xs.push_back(std::log1p(t[i]));
        ys.push_back(std::log(v));
    }
    check<InsufficientDataError>(
        xs.size() >= 8, "fit: need at least 8 positive samples in the window");
    const LineFit lf = least_squares(xs, ys);
    FitReport rep;
    rep.model = log_correction ? "power-log" : "power";
    rep.t0 = t0;
    rep.t1 = t1;
    rep.exponent_or_rate = -lf.slope;
    rep.amplitude = std::exp(lf.intercept);
    rep.residual_rms = lf.rms;
    return rep;
}

FitReport fit_exponential(const std::vector<double>& t,
                          const std::vector<double>& y, double t0,
                          double t1) {
    check(t.size() == y.size(), "fit: t and y must have equal length");
    check_fit_window(t0, t1);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1) continue;
        if (!(std::isfinite(y[i]) && y[i] > 0.0)) continue;
        xs.push_back(t[i]);
        ys.push_back(std::log(y[i]));
    }
    check<InsufficientDataError>(
        xs.size() >= 8, "fit: need at least 8 positive samples in the window");
    const LineFit lf = least_squares(xs, ys);
    FitReport rep;
    rep.model = "exponential";
    rep.t0 = t0;
    rep.t1 = t1;
    rep.exponent_or_rate = -lf.slope;
    rep.amplitude = std::exp(lf.intercept);
    rep.residual_rms = lf.rms;
    return rep;
}

double scaling_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
    check(x.size() == y.size() && x.size() >= 2,
          "scaling_slope: need at least two samples");
    std::vector<double> xs(x.size()), ys(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        check(std::isfinite(x[i]) && x[i] > 0.0 && std::isfinite(y[i]) &&
                  y[i] > 0.0,
              "scaling_slope: samples must be positive");
        xs[i] = std::log(x[i]);
        ys[i] = std::log(y[i]);
    }
    return least_squares(xs, ys).slope;
}

void envelope_maxima(const std::vector<double>& t,
                     const std::vector<double>& y, double window,
                     std::vector<double>& t_out, std::vector<double>& y_out) {
    check(t.size() == y.size(), "envelope_maxima: length mismatch");
    check(std::isfinite(window) && window > 0.0,
          "envelope_maxima: window must be positive");
    t_out.clear();
    y_out.clear();
    if (t.empty()) return;
    const double start = t.front();
    std::size_t i = 0;
    for (long bucket = 0; i < t.size(); ++bucket) {
        const double hi = start + (static_cast<double>(bucket) + 1.0) * window;
        bool any = false;
        double best = 0.0, bt = 0.0;
        while (i < t.size() && t[i] < hi) {
            const double v = std::abs(y[i]);
            if (!any || v > best) {
                best = v;
                bt = t[i];
                any = true;
            }
            ++i;
        }
        if (any) {
            t_out.push_back(bt);
            y_out.push_back(best);
        }
    }
}

}  // namespace kinmix
