//============================================================================
// harmonics.cpp — spherical-harmonic fields, quadrature and basic operators.
//
// The normalized Legendre functions are generated by the standard stable
// upward recurrences; Gauss–Legendre nodes by Newton iteration on P_n.
//============================================================================
#include "kinmix/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "kinmix/errors.hpp"

namespace kinmix {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kFourPi = 4.0 * kPi;

// Ladder coefficient A_{l,m} = sqrt((l²-m²)/((2l-1)(2l+1))):
//   cosθ·Y_l^m      = A_{l+1,m} Y_{l+1}^m + A_{l,m} Y_{l-1}^m
//   sinθ·∂_θ Y_l^m  = l·A_{l+1,m} Y_{l+1}^m − (l+1)·A_{l,m} Y_{l-1}^m
double ladder(int l, int m) {
    const double l2 = static_cast<double>(l) * l;
    const double m2 = static_cast<double>(m) * m;
    return std::sqrt((l2 - m2) / ((2.0 * l - 1.0) * (2.0 * l + 1.0)));
}

// Radial factor of Y_l^m for signed m: P̄_l^{|m|}(z), with the (-1)^m from
// Y_l^{-m} = (-1)^m conj(Y_l^m) folded in for negative m.
double signed_legendre_factor(int m) { return (m < 0 && (m & 1)) ? -1.0 : 1.0; }

// sqrt(2π/15): the degree-2 moment scale tying p_x p_z, p_y p_z to Y_2^{±1}.
const double kS215 = std::sqrt(2.0 * kPi / 15.0);
}  // namespace

//----------------------------------------------------------------------------
// SphericalField
//----------------------------------------------------------------------------
std::size_t field_storage_size(int lmax, int mmax) {
    std::size_t n = 0;
    for (int l = 0; l <= lmax; ++l) {
        n += 2 * static_cast<std::size_t>(std::min(l, mmax)) + 1;
    }
    return n;
}

SphericalField::SphericalField(int lmax_, int mmax_)
    : lmax(lmax_), mmax(mmax_) {
    check(lmax >= 0 && mmax >= 0, "field window must be nonnegative");
    coeffs.assign(field_storage_size(lmax, mmax), cplx(0.0, 0.0));
}

std::size_t SphericalField::index(int l, int m) const {
    check(l >= 0 && l <= lmax && std::abs(m) <= mcap(l),
          "coefficient index (l,m) outside the field window");
    std::size_t off = 0;
    for (int j = 0; j < l; ++j) {
        off += 2 * static_cast<std::size_t>(mcap(j)) + 1;
    }
    return off + static_cast<std::size_t>(m + mcap(l));
}

cplx SphericalField::get(int l, int m) const {
    if (l < 0 || l > lmax || std::abs(m) > mcap(l)) return {0.0, 0.0};
    return at(l, m);
}

void SphericalField::ensure_finite() const {
    for (const auto& c : coeffs) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw DataError("field contains non-finite coefficients");
        }
    }
}

SphericalField embed(const SphericalField& f, int lmax, int mmax) {
    SphericalField out(lmax, mmax);
    const int lcap = std::min(lmax, f.lmax);
    for (int l = 0; l <= lcap; ++l) {
        const int mc = std::min(out.mcap(l), f.mcap(l));
        for (int m = -mc; m <= mc; ++m) {
            out.at(l, m) = f.at(l, m);
        }
    }
    return out;
}

//----------------------------------------------------------------------------
// QuadratureGrid
//----------------------------------------------------------------------------
double QuadratureGrid::phi_step() const { return 2.0 * kPi / n_phi; }

double QuadratureGrid::weight_sum() const {
    double s = 0.0;
    for (double wj : w) s += wj;
    return s * 2.0 * kPi;
}

QuadratureGrid QuadratureGrid::build(int n_theta, int n_phi) {
    check(n_theta >= 1 && n_phi >= 1, "quadrature grid needs positive sizes");
    QuadratureGrid g;
    g.n_theta = n_theta;
    g.n_phi = n_phi;
    g.z.assign(n_theta, 0.0);
    g.w.assign(n_theta, 0.0);

    // Newton iteration for the roots of P_n, symmetric pairs filled together.
    const int n = n_theta;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 =
                    ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pn1 = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pn1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double weight = 2.0 / ((1.0 - x * x) * dp * dp);
        g.z[i] = -x;  // ascending order: most negative first
        g.w[i] = weight;
        g.z[n - 1 - i] = x;
        g.w[n - 1 - i] = weight;
    }
    if (std::abs(g.weight_sum() - kFourPi) > 1e-12 * kFourPi) {
        throw ConsistencyError("quadrature weights failed the 4π sum check");
    }
    return g;
}

QuadratureGrid QuadratureGrid::for_field(int lmax, int mmax, int margin) {
    return build(lmax + 1 + margin, 2 * mmax + 1 + 2 * margin);
}

//----------------------------------------------------------------------------
// Normalized Legendre functions
//----------------------------------------------------------------------------
void legendre_row(int lmax, int m, double z, double* out) {
    check(m >= 0 && lmax >= m, "legendre_row needs 0 <= m <= lmax");
    const double st = std::sqrt(std::max(0.0, 1.0 - z * z));
    // P̄_m^m by the diagonal recurrence (Condon–Shortley sign included).
    double pmm = std::sqrt(1.0 / kFourPi);
    for (int k = 1; k <= m; ++k) {
        pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * st;
    }
    out[0] = pmm;
    if (lmax == m) return;
    double pprev = pmm;
    double pcur = std::sqrt(2.0 * m + 3.0) * z * pmm;
    out[1] = pcur;
    for (int l = m + 2; l <= lmax; ++l) {
        const double l2 = static_cast<double>(l) * l;
        const double m2 = static_cast<double>(m) * m;
        const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
        const double lm1 = static_cast<double>(l - 1);
        const double b =
            std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
        const double pnext = a * (z * pcur - b * pprev);
        pprev = pcur;
        pcur = pnext;
        out[l - m] = pcur;
    }
}

namespace {
void require_grid(const QuadratureGrid& grid, int lmax, int mmax) {
    check(grid.n_theta >= lmax + 1,
          "grid n_theta too small for the requested degree (need lmax+1)");
    check(grid.n_phi >= 2 * mmax + 1,
          "grid n_phi too small for the requested order (need 2*mmax+1)");
}

// Radial profiles r_m(z_j) = Σ_l a_{lm} × (radial factor of Y_l^m), for all
// signed m; profiles[(m+mmax)*n_theta + j].
std::vector<cplx> radial_profiles(const SphericalField& f,
                                  const QuadratureGrid& grid) {
    const int lmax = f.lmax, mmax = f.mmax;
    std::vector<cplx> prof(static_cast<std::size_t>(2 * mmax + 1) *
                               grid.n_theta,
                           cplx(0.0, 0.0));
    std::vector<double> row(lmax + 1);
    for (int j = 0; j < grid.n_theta; ++j) {
        for (int am = 0; am <= mmax; ++am) {
            if (am > lmax) break;
            legendre_row(lmax, am, grid.z[j], row.data());
            cplx pos = 0.0, neg = 0.0;
            for (int l = am; l <= lmax; ++l) {
                if (am > f.mcap(l)) continue;
                pos += f.at(l, am) * row[l - am];
                if (am > 0) neg += f.at(l, -am) * row[l - am];
            }
            prof[static_cast<std::size_t>(am + mmax) * grid.n_theta + j] = pos;
            if (am > 0) {
                prof[static_cast<std::size_t>(mmax - am) * grid.n_theta + j] =
                    neg * signed_legendre_factor(-am);
            }
        }
    }
    return prof;
}
}  // namespace

std::vector<cplx> synthesize(const SphericalField& f,
                             const QuadratureGrid& grid) {
    require_grid(grid, f.lmax, f.mmax);
    f.ensure_finite();
    const int mmax = f.mmax;
    const auto prof = radial_profiles(f, grid);
    std::vector<cplx> values(static_cast<std::size_t>(grid.n_theta) *
                             grid.n_phi);
    for (int j = 0; j < grid.n_theta; ++j) {
        for (int k = 0; k < grid.n_phi; ++k) {
            cplx acc = 0.0;
            for (int m = -mmax; m <= mmax; ++m) {
                const cplx r =
                    prof[static_cast<std::size_t>(m + mmax) * grid.n_theta + j];
                if (r == cplx(0.0, 0.0)) continue;
                acc += r * std::exp(cplx(0.0, m * grid.phi(k)));
            }
            values[static_cast<std::size_t>(j) * grid.n_phi + k] = acc;
        }
    }
    return values;
}

SphericalField analyze(const std::vector<cplx>& values,
                       const QuadratureGrid& grid, int lmax, int mmax) {
    require_grid(grid, lmax, mmax);
    check(values.size() == static_cast<std::size_t>(grid.n_theta) * grid.n_phi,
          "value array does not match the grid");
    for (const auto& v : values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw DataError("analyze: non-finite grid values");
        }
    }
    // Azimuthal transform first: F_m(z_j) = (2π/n_phi) Σ_k f e^{-imφ_k}.
    SphericalField out(lmax, mmax);
    std::vector<cplx> fm(static_cast<std::size_t>(2 * mmax + 1) *
                         grid.n_theta);
    for (int j = 0; j < grid.n_theta; ++j) {
        for (int m = -mmax; m <= mmax; ++m) {
            cplx acc = 0.0;
            for (int k = 0; k < grid.n_phi; ++k) {
                acc += values[static_cast<std::size_t>(j) * grid.n_phi + k] *
                       std::exp(cplx(0.0, -m * grid.phi(k)));
            }
            fm[static_cast<std::size_t>(m + mmax) * grid.n_theta + j] =
                acc * grid.phi_step();
        }
    }
    std::vector<double> row(lmax + 1);
    for (int am = 0; am <= std::min(mmax, lmax); ++am) {
        for (int j = 0; j < grid.n_theta; ++j) {
            legendre_row(lmax, am, grid.z[j], row.data());
            for (int l = std::max(am, 0); l <= lmax; ++l) {
                if (am > out.mcap(l)) continue;
                const double pw = row[l - am] * grid.w[j];
                out.at(l, am) +=
                    pw * fm[static_cast<std::size_t>(am + mmax) *
                                grid.n_theta +
                            j];
                if (am > 0) {
                    out.at(l, -am) +=
                        pw * signed_legendre_factor(-am) *
                        fm[static_cast<std::size_t>(mmax - am) * grid.n_theta +
                           j];
                }
            }
        }
    }
    return out;
}

//----------------------------------------------------------------------------
// Elementary operators
//----------------------------------------------------------------------------
SphericalField apply_cos_multiply(const SphericalField& f) {
    SphericalField out(f.lmax + 1, f.mmax);
    for (int l = 0; l <= f.lmax; ++l) {
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            const cplx a = f.at(l, m);
            if (a == cplx(0.0, 0.0)) continue;
            out.at(l + 1, m) += ladder(l + 1, m) * a;
            if (l - 1 >= std::abs(m)) {
                out.at(l - 1, m) += ladder(l, m) * a;
            }
        }
    }
    return out;
}

SphericalField apply_laplacian(const SphericalField& f) {
    SphericalField out = f;
    for (int l = 0; l <= f.lmax; ++l) {
        const double ev = -static_cast<double>(l) * (l + 1.0);
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            out.at(l, m) *= ev;
        }
    }
    return out;
}

SphericalField apply_sin_dtheta(const SphericalField& f) {
    SphericalField out(f.lmax + 1, f.mmax);
    for (int l = 0; l <= f.lmax; ++l) {
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            const cplx a = f.at(l, m);
            if (a == cplx(0.0, 0.0)) continue;
            out.at(l + 1, m) += static_cast<double>(l) * ladder(l + 1, m) * a;
            if (l - 1 >= std::abs(m)) {
                out.at(l - 1, m) -= (l + 1.0) * ladder(l, m) * a;
            }
        }
    }
    return out;
}

double l2_norm(const SphericalField& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs) s += std::norm(c);
    return std::sqrt(s);
}

double sobolev_norm(const SphericalField& f, double s) {
    double acc = 0.0;
    for (int l = 0; l <= f.lmax; ++l) {
        const double wl = std::pow(1.0 + static_cast<double>(l) * (l + 1.0), s);
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            acc += wl * std::norm(f.at(l, m));
        }
    }
    return std::sqrt(acc);
}

double grad_norm(const SphericalField& f) {
    double acc = 0.0;
    for (int l = 0; l <= f.lmax; ++l) {
        const double wl = static_cast<double>(l) * (l + 1.0);
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            acc += wl * std::norm(f.at(l, m));
        }
    }
    return std::sqrt(acc);
}

double sin_weighted_norm(const SphericalField& f, const QuadratureGrid& grid) {
    const auto vals = synthesize(f, grid);
    double acc = 0.0;
    for (int j = 0; j < grid.n_theta; ++j) {
        const double wz = grid.w[j] * (1.0 - grid.z[j] * grid.z[j]);
        double slice = 0.0;
        for (int k = 0; k < grid.n_phi; ++k) {
            slice += std::norm(vals[static_cast<std::size_t>(j) * grid.n_phi +
                                    k]);
        }
        acc += wz * slice;
    }
    return std::sqrt(acc * grid.phi_step());
}

double mixed_inner(const SphericalField& f, const QuadratureGrid& grid) {
    const auto vf = synthesize(f, grid);
    const auto vs = synthesize(apply_sin_dtheta(f), grid);
    cplx acc = 0.0;
    for (int j = 0; j < grid.n_theta; ++j) {
        cplx slice = 0.0;
        for (int k = 0; k < grid.n_phi; ++k) {
            const std::size_t idx =
                static_cast<std::size_t>(j) * grid.n_phi + k;
            slice += vf[idx] * std::conj(vs[idx]);
        }
        acc += grid.w[j] * slice;
    }
    acc *= grid.phi_step();
    return -(cplx(0.0, 1.0) * acc).real();
}

//----------------------------------------------------------------------------
// Velocity moment and feedback projection
//----------------------------------------------------------------------------
VelocitySample velocity_from_field(const SphericalField& f, int swimmer_sign) {
    check(swimmer_sign == 1 || swimmer_sign == -1,
          "swimmer sign must be +1 or -1");
    check(f.lmax >= 2 && f.mmax >= 1,
          "velocity moment needs lmax >= 2 and mmax >= 1");
    const double eps = swimmer_sign;
    const cplx a_p = f.at(2, 1);
    const cplx a_m = f.at(2, -1);
    VelocitySample u;
    u.x = cplx(0.0, 1.0) * eps * kS215 * (a_m - a_p);
    u.y = eps * kS215 * (a_p + a_m);
    return u;
}

SphericalField l2bar_project(const VelocitySample& v, double gamma) {
    SphericalField out(2, 1);
    const cplx scale = cplx(0.0, 3.0 * gamma / kFourPi) * kS215;
    out.at(2, 1) = scale * (-v.x + cplx(0.0, 1.0) * v.y);
    out.at(2, -1) = scale * (v.x + cplx(0.0, 1.0) * v.y);
    return out;
}

//----------------------------------------------------------------------------
// Serialization (full binary64 round trip via %.17g)
//----------------------------------------------------------------------------
void save_field(const SphericalField& f, const std::string& path) {
    std::ofstream out(path);
    check<DataError>(static_cast<bool>(out),
                     "cannot open field file for writing: " + path);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%d\n", f.lmax, f.mmax);
    out << buf;
    for (int l = 0; l <= f.lmax; ++l) {
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            const cplx c = f.at(l, m);
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", l, m,
                          c.real(), c.imag());
            out << buf;
        }
    }
    check<DataError>(static_cast<bool>(out),
                     "write failure on field file: " + path);
}

SphericalField load_field(const std::string& path) {
    std::ifstream in(path);
    check<DataError>(static_cast<bool>(in),
                     "cannot open field file: " + path);
    std::string line;
    check<DataError>(static_cast<bool>(std::getline(in, line)),
                     "field file is empty: " + path);
    int lmax = -1, mmax = -1;
    check<DataError>(std::sscanf(line.c_str(), "%d,%d", &lmax, &mmax) == 2 &&
                         lmax >= 0 && mmax >= 0,
                     "bad field file header: " + path);
    SphericalField f(lmax, mmax);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int l = 0, m = 0;
        double re = 0.0, im = 0.0;
        check<DataError>(std::sscanf(line.c_str(), "%d,%d,%lg,%lg", &l, &m,
                                     &re, &im) == 4,
                         "bad field file row: " + line);
        f.at(l, m) = cplx(re, im);
        ++seen;
    }
    check<DataError>(seen == f.size(),
                     "field file row count does not match header: " + path);
    f.ensure_finite();
    return f;
}

SphericalField random_smooth_field(int lmax, int mmax, std::uint64_t seed) {
    SphericalField f(lmax, mmax);
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (int l = 0; l <= lmax; ++l) {
        const double amp = std::pow(1.0 + l, -4.0);
        for (int m = -f.mcap(l); m <= f.mcap(l); ++m) {
            f.at(l, m) = amp * std::exp(cplx(0.0, phase(eng)));
        }
    }
    return f;
}

}  // namespace kinmix
