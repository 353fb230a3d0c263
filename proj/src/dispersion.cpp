#include "kinmix/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace kinmix {

namespace {

const double kPi = std::acos(-1.0);

double weight_poly(double z) { return z * z * (1.0 - z * z); }

// ∫_{-1}^{1} z²(1-z²)/(z+b) dz for |b| > 1 (no principal value needed).
// The closed form loses ~|b|⁴ digits of cancellation for large |b|, so a
// tail series in 1/b takes over at |b| >= 4:
//     ∫ = Σ_{j>=0} 4 / ((2j+3)(2j+5)) · b^{-(2j+1)}.
double tail_integral(double b) {
    const double ab = std::abs(b);
    if (ab >= 4.0) {
        double acc = 0.0;
        double pw = 1.0 / b;
        for (int j = 0; j < 40; ++j) {
            const double term = 4.0 / ((2.0 * j + 3.0) * (2.0 * j + 5.0)) * pw;
            acc += term;
            if (std::abs(term) < 1e-18 * std::abs(acc)) break;
            pw /= b * b;
        }
        return acc;
    }
    const double u = b * b * b * b - b * b;
    double log_term = 0.0;
    if (u != 0.0) {
        log_term = u * std::log(std::abs(1.0 - b) / std::abs(1.0 + b));
    }
    return 2.0 * b * b * b - (4.0 / 3.0) * b + log_term;
}

// Adaptive Simpson quadrature for complex integrands on [a,b].
cplx simpson_rec(const std::function<cplx(double)>& f, double a, double b,
                 cplx fa, cplx fm, cplx fb, cplx whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const cplx flm = f(lm);
    const cplx frm = f(rm);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx delta = left + right - whole;
    // Roundoff floor: delta carries ~tens of ulps of noise from the five
    // weighted samples, and that noise scales with h exactly like the
    // halved tolerance does, so without a generous floor the recursion
    // can cascade to full depth wherever |f| is large.
    const double floor_tol = 2.5e-14 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, floor_tol) ||
        !(a < lm && lm < m && m < rm && rm < b)) {
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

cplx adaptive_simpson(const std::function<cplx(double)>& f, double a, double b,
                      double tol) {
    const double m = 0.5 * (a + b);
    const cplx fa = f(a), fm = f(m), fb = f(b);
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Integrate g over [-1,1], splitting at the near-singularity z = -Im λ when
// it falls inside the interval (keeps the adaptive recursion shallow).
cplx integrate_split(const std::function<cplx(double)>& g, double split,
                     double tol) {
    if (split > -0.999 && split < 0.999) {
        return adaptive_simpson(g, -1.0, split, 0.5 * tol) +
               adaptive_simpson(g, split, 1.0, 0.5 * tol);
    }
    return adaptive_simpson(g, -1.0, 1.0, tol);
}

void require_right_halfplane(cplx lambda) {
    check<DomainError>(std::isfinite(lambda.real()) &&
                           std::isfinite(lambda.imag()),
                       "lambda must be finite");
    check<DomainError>(lambda.real() > 0.0,
                       "lambda must lie in the open right half plane");
}

void require_sign(int swimmer_sign) {
    check(swimmer_sign == 1 || swimmer_sign == -1,
          "swimmer sign must be +1 or -1");
}

double pv_derivative(double b) {
    return 8.0 * b * b - 4.0 / 3.0 +
           (4.0 * b * b * b - 2.0 * b) *
               std::log((1.0 - b) / (1.0 + b));
}

struct CurveGrid {
    std::vector<double> b;
};

// Traversal of the compactified parameter line: negative tail from -B_max,
// tanh-stretched core across (-1,1) with linear refinement windows at the
// real-axis crossings ±b_c, positive tail out to +B_max.  The curve closes
// through F(±i·B_max) → 0 along the imaginary axis.
CurveGrid build_grid(int n_base, double b_c) {
    const double kXiMax = 18.0;
    const double kBMax = 200.0;
    const int n_core = 3 * n_base / 4;
    const int n_tail = n_base / 8;
    const int n_win = n_base / 16;
    const double win_half = 0.025;

    CurveGrid g;
    g.b.reserve(static_cast<std::size_t>(n_core + 2 * n_tail + 2 * n_win + 8));
    for (int k = 0; k < n_tail; ++k) {
        const double t = static_cast<double>(k) / n_tail;  // 0 .. <1
        g.b.push_back(-std::exp(std::log(kBMax) * (1.0 - t)));
    }
    std::vector<double> core;
    core.reserve(static_cast<std::size_t>(n_core + 2 * n_win));
    for (int k = 0; k <= n_core; ++k) {
        const double xi = -kXiMax + 2.0 * kXiMax * k / n_core;
        core.push_back(std::tanh(xi));
    }
    for (int s : {-1, 1}) {
        for (int k = 0; k <= n_win; ++k) {
            core.push_back(s * b_c - win_half +
                           2.0 * win_half * k / n_win + 1.3e-9);
        }
    }
    std::sort(core.begin(), core.end());
    g.b.insert(g.b.end(), core.begin(), core.end());
    for (int k = 0; k <= n_tail; ++k) {
        const double t = static_cast<double>(k) / n_tail;
        g.b.push_back(std::exp(std::log(kBMax) * t));
    }
    return g;
}

int winding_about(const std::vector<cplx>& F, cplx p, bool* well_defined) {
    double angle = 0.0;
    cplx prev = F.back() - p;  // closes the polygon
    *well_defined = true;
    for (const cplx& f : F) {
        const cplx cur = f - p;
        if (std::abs(cur) == 0.0 || std::abs(prev) == 0.0) {
            *well_defined = false;
            return 0;
        }
        angle += std::arg(cur / prev);
        prev = cur;
    }
    const double turns = angle / (2.0 * kPi);
    const int w = static_cast<int>(std::lround(turns));
    if (std::abs(turns - w) > 0.25) *well_defined = false;
    return w;
}

// One Newton solve of F(λ) = target with step damping that keeps the
// iterate in the open right half plane.
cplx newton_root(cplx lambda, cplx target) {
    cplx g = halfplane_F(lambda) - target;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(g) < 1e-13) return lambda;
        cplx step = g / halfplane_F_prime(lambda);
        cplx next = lambda - step;
        int halvings = 0;
        while (next.real() <= 0.0 && halvings < 60) {
            step *= 0.5;
            next = lambda - step;
            ++halvings;
        }
        lambda = next;
        g = halfplane_F(lambda) - target;
        // Quadrature noise bounds the attainable residual; once steps
        // stagnate at that floor the iterate will not improve further.
        if (std::abs(step) < 1e-12 * (1.0 + std::abs(lambda))) break;
    }
    if (std::abs(g) < 1e-10) return lambda;
    throw ConvergenceError(
        "root iteration did not converge; residual " +
            std::to_string(std::abs(g)),
        lambda);
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::stable:
            return "stable";
        case Verdict::unstable:
            return "unstable";
        case Verdict::marginal:
            return "marginal";
    }
    return "unknown";
}

double pv_integral(double b) {
    check<DomainError>(std::abs(b) < 1.0,
                       "principal value requires |b| < 1");
    const double u = b * b * b * b - b * b;
    double log_term = 0.0;
    if (u != 0.0) log_term = u * std::log((1.0 - b) / (1.0 + b));
    return 2.0 * b * b * b - (4.0 / 3.0) * b + log_term;
}

cplx boundary_F(double b) {
    check<DomainError>(std::isfinite(b), "orientation must be finite");
    if (b == 0.0) return cplx(0.0, 0.0);
    if (std::abs(b) < 1.0) {
        return cplx(-(3.0 * kPi / 4.0) * b * b * (1.0 - b * b),
                    0.75 * pv_integral(b));
    }
    return cplx(0.0, 0.75 * tail_integral(b));
}

cplx halfplane_F(cplx lambda) {
    require_right_halfplane(lambda);
    const double tol = 1e-13;
    const cplx val = integrate_split(
        [lambda](double z) {
            return weight_poly(z) / (lambda + cplx(0.0, 1.0) * z);
        },
        -lambda.imag(), tol);
    return -0.75 * val;
}

cplx halfplane_F_prime(cplx lambda) {
    require_right_halfplane(lambda);
    const double tol = 1e-13;
    const cplx val = integrate_split(
        [lambda](double z) {
            const cplx d = lambda + cplx(0.0, 1.0) * z;
            return weight_poly(z) / (d * d);
        },
        -lambda.imag(), tol);
    return 0.75 * val;
}

CriticalConstants find_bc() {
    double lo = 0.1, hi = 0.99;
    check<ConsistencyError>(pv_integral(lo) < 0.0 && pv_integral(hi) > 0.0,
                            "critical-orientation root is not bracketed");
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (pv_integral(mid) < 0.0 ? lo : hi) = mid;
    }
    double b = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        b -= pv_integral(b) / pv_derivative(b);
    }
    CriticalConstants cc;
    cc.b_c = b;
    cc.gamma_c = 4.0 / (3.0 * kPi * b * b * (1.0 - b * b));
    return cc;
}

DispersionScan spectral_condition(double gamma, int swimmer_sign) {
    check(std::isfinite(gamma) && gamma > 0.0, "coupling must be positive");
    require_sign(swimmer_sign);

    static const CriticalConstants cc = find_bc();
    const cplx point(static_cast<double>(swimmer_sign) / gamma, 0.0);

    DispersionScan scan;
    scan.gamma = gamma;
    scan.swimmer_sign = swimmer_sign;

    auto fill = [&scan](const CurveGrid& grid) {
        scan.b_samples = grid.b;
        scan.F_values.clear();
        scan.F_values.reserve(grid.b.size());
        for (double b : grid.b) scan.F_values.push_back(boundary_F(b));
    };
    fill(build_grid(4096, cc.b_c));

    // Marginal band first: distance from ε/Γ to the exact real-axis
    // crossings (0 and F(i b_c)) or to the sampled curve.  A pinned point
    // makes the winding integer meaningless, so decide this up front.
    const double crossing =
        -(3.0 * kPi / 4.0) * cc.b_c * cc.b_c * (1.0 - cc.b_c * cc.b_c);
    double dist = std::min(std::abs(point), std::abs(point - cplx(crossing)));
    for (const cplx& f : scan.F_values) {
        dist = std::min(dist, std::abs(f - point));
    }
    if (dist < 1e-8) {
        scan.verdict = Verdict::marginal;
        scan.winding_number = 0;
        return scan;
    }

    int winding = 0;
    bool stable_integer = false;
    bool have_prev = false;
    int prev_winding = 0;
    for (int n_base = 4096; n_base <= 65536; n_base *= 2) {
        if (n_base > 4096) fill(build_grid(n_base, cc.b_c));
        bool well_defined = true;
        winding = winding_about(scan.F_values, point, &well_defined);
        if (well_defined && have_prev && winding == prev_winding) {
            stable_integer = true;
            break;
        }
        have_prev = well_defined;
        prev_winding = winding;
    }
    check<ConsistencyError>(stable_integer,
                            "winding number failed to stabilize under "
                            "sample doubling");
    scan.winding_number = winding;

    scan.verdict = (winding == 0) ? Verdict::stable : Verdict::unstable;
    if (scan.verdict == Verdict::unstable) {
        const auto root = find_unstable_root(gamma, swimmer_sign);
        if (root.has_value()) {
            scan.roots.push_back(*root);
            if (std::abs(root->imag()) > 1e-10) {
                scan.roots.push_back(std::conj(*root));
            }
        }
    }
    return scan;
}

std::optional<cplx> find_unstable_root(double gamma, int swimmer_sign) {
    check(std::isfinite(gamma) && gamma > 0.0, "coupling must be positive");
    require_sign(swimmer_sign);
    if (swimmer_sign == +1) return std::nullopt;  // Re F <= 0 < 1/Γ always

    static const CriticalConstants cc = find_bc();
    if (gamma <= cc.gamma_c) return std::nullopt;

    // Continuation in Γ from just above threshold: the root emerges from the
    // boundary crossing i·b_c and moves continuously into the half plane.
    std::vector<double> stops;
    for (double g = cc.gamma_c * 1.02; g < gamma; g *= 2.0) stops.push_back(g);
    stops.push_back(gamma);

    cplx lambda(0.01, cc.b_c);
    for (double g : stops) {
        lambda = newton_root(lambda, cplx(-1.0 / g, 0.0));
    }
    check<ConsistencyError>(lambda.real() > 0.0,
                            "root iteration left the right half plane");
    return lambda;
}

}  // namespace kinmix
