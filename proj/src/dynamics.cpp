//============================================================================
// dynamics.cpp — advection–diffusion stepping per azimuthal sector, the
// coupled mode system with its rank-two velocity feedback, and Volterra
// kernel/source assembly.
//
// Each azimuthal index m evolves independently under the free flow.  In the
// degree direction the generator is tridiagonal: multiplication by cosθ
// couples neighboring degrees through the ladder factors
//   A_{l,m} = sqrt((l²−m²)/((2l−1)(2l+1))),
// and diffusion is diagonal with eigenvalue l(l+1).  One Crank–Nicolson step
// is a complex tridiagonal solve (Thomas algorithm) whose elimination
// coefficients depend only on the step size, so they are factored once per
// run.  At nu = 0 the step is an exact Cayley transform of a real symmetric
// matrix, hence norm-preserving to roundoff; with nu > 0 it contracts.
//============================================================================
#include "kinmix/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "kinmix/diagnostics.hpp"
#include "kinmix/errors.hpp"

namespace kinmix {
namespace {

const double kPi = std::acos(-1.0);
const double kS215 = std::sqrt(2.0 * kPi / 15.0);  // velocity moment weight
constexpr double kDivergeGuard = 1e12;             // |u| overflow stop

// Ladder factor A_{l,m} of the cosθ-multiplication recurrence.
double ladder(int l, int m) {
    const double num =
        static_cast<double>(l) * l - static_cast<double>(m) * m;
    if (num <= 0.0) return 0.0;
    return std::sqrt(num / ((2.0 * l - 1.0) * (2.0 * l + 1.0)));
}

// One azimuthal sector: coefficients a_l for l = |m| .. lmax.
struct Sector {
    int m = 0;
    int l0 = 0;            // first degree, |m|
    int n = 0;             // lmax - |m| + 1
    bool active = false;   // all-zero sectors are skipped
    std::vector<cplx> a;
    std::vector<double> lam;   // l(l+1)
    std::vector<double> offd;  // A_{l+1,m} linking a_l and a_{l+1}
    double offd_top = 0.0;     // A_{lmax+1,m}: spill of cosθ·ψ past lmax
};

// Crank–Nicolson data for one sector at one step size: the RHS operator
// (I − i(h/2)T − (h/2)νΛ) and the prefactored Thomas elimination of the LHS
// (I + i(h/2)T + (h/2)νΛ).
struct CNScheme {
    std::vector<cplx> o;     // LHS off-diagonal, i(h/2)A (zero if no advection)
    std::vector<double> rd;  // RHS diagonal, 1 − (h/2)νl(l+1)
    std::vector<cplx> cp;    // Thomas elimination multipliers
    std::vector<cplx> inv;   // inverse pivots
};

CNScheme build_scheme(const Sector& s, double nu, double h, bool advect) {
    CNScheme sch;
    const int n = s.n;
    sch.o.assign(n > 0 ? n - 1 : 0, cplx(0.0, 0.0));
    sch.rd.resize(n);
    sch.cp.assign(n, cplx(0.0, 0.0));
    sch.inv.resize(n);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) {
        const double x = 0.5 * h * nu * s.lam[i];
        d[i] = 1.0 + x;
        sch.rd[i] = 1.0 - x;
    }
    if (advect)
        for (int i = 0; i + 1 < n; ++i)
            sch.o[i] = cplx(0.0, 0.5 * h * s.offd[i]);
    sch.inv[0] = 1.0 / d[0];
    if (n > 1) sch.cp[0] = sch.o[0] * sch.inv[0];
    for (int i = 1; i < n; ++i) {
        const cplx denom = d[i] - sch.o[i - 1] * sch.cp[i - 1];
        sch.inv[i] = 1.0 / denom;
        if (i + 1 < n) sch.cp[i] = sch.o[i] * sch.inv[i];
    }
    return sch;
}

// Apply the RHS operator: w = (I − i(h/2)T − (h/2)νΛ) a.
void cn_rhs(const CNScheme& sch, const cplx* a, cplx* w, int n) {
    if (n == 1) {
        w[0] = sch.rd[0] * a[0];
        return;
    }
    w[0] = sch.rd[0] * a[0] - sch.o[0] * a[1];
    for (int i = 1; i + 1 < n; ++i)
        w[i] = sch.rd[i] * a[i] - sch.o[i - 1] * a[i - 1] - sch.o[i] * a[i + 1];
    w[n - 1] = sch.rd[n - 1] * a[n - 1] - sch.o[n - 2] * a[n - 2];
}

// Solve the prefactored LHS system in place.
void cn_solve(const CNScheme& sch, cplx* r, int n) {
    r[0] *= sch.inv[0];
    for (int i = 1; i < n; ++i)
        r[i] = (r[i] - sch.o[i - 1] * r[i - 1]) * sch.inv[i];
    for (int i = n - 2; i >= 0; --i) r[i] -= sch.cp[i] * r[i + 1];
}

class Marcher {
  public:
    Marcher(const SphericalField& f, double nu)
        : lmax_(f.lmax), mmax_(f.mmax), nu_(nu) {
        sec_.resize(2 * static_cast<std::size_t>(mmax_) + 1);
        for (int m = -mmax_; m <= mmax_; ++m) {
            Sector& s = sec_[static_cast<std::size_t>(m + mmax_)];
            s.m = m;
            s.l0 = std::abs(m);
            s.n = lmax_ - s.l0 + 1;
            s.a.resize(s.n);
            s.lam.resize(s.n);
            s.offd.assign(s.n > 0 ? s.n - 1 : 0, 0.0);
            double norm2 = 0.0;
            for (int i = 0; i < s.n; ++i) {
                const int l = s.l0 + i;
                s.a[i] = f.get(l, m);
                s.lam[i] = static_cast<double>(l) * (l + 1);
                if (i + 1 < s.n) s.offd[i] = ladder(l + 1, m);
                norm2 += std::norm(s.a[i]);
            }
            s.offd_top = ladder(lmax_ + 1, m);
            s.active = norm2 > 0.0;
        }
        w_.resize(static_cast<std::size_t>(lmax_) + 1);
    }

    void prepare(double dt, bool advect) {
        dt_ = dt;
        full_.clear();
        half_.clear();
        full_.reserve(sec_.size());
        half_.reserve(sec_.size());
        for (const Sector& s : sec_) {
            full_.push_back(build_scheme(s, nu_, dt, advect));
            half_.push_back(build_scheme(s, nu_, 0.5 * dt, advect));
        }
    }

    // One Crank–Nicolson step of the free semigroup on every active sector.
    void free_step() {
        for (std::size_t k = 0; k < sec_.size(); ++k) {
            Sector& s = sec_[k];
            if (!s.active) continue;
            cn_rhs(full_[k], s.a.data(), w_.data(), s.n);
            cn_solve(full_[k], w_.data(), s.n);
            std::copy(w_.begin(), w_.begin() + s.n, s.a.begin());
        }
    }

    VelocitySample velocity(int sign) const {
        const Sector& sp = sec_[static_cast<std::size_t>(mmax_ + 1)];
        const Sector& sm = sec_[static_cast<std::size_t>(mmax_ - 1)];
        const cplx ap = sp.a[1];  // coefficient (l, m) = (2, +1)
        const cplx am = sm.a[1];  // coefficient (l, m) = (2, −1)
        const double e = sign;
        VelocitySample u;
        u.x = cplx(0.0, 1.0) * e * kS215 * (am - ap);
        u.y = e * kS215 * (ap + am);
        return u;
    }

    // Full IMEX step: Crank–Nicolson transport plus explicit-midpoint
    // treatment of the rank-two feedback g(ψ) supported at (l,m) = (2,±1):
    //   ψ*      = CN_{dt/2} ψⁿ + (dt/2) g(ψⁿ)
    //   ψ^{n+1} = CN_{dt}  ψⁿ + dt · CN_{dt/2} g(ψ*).
    void coupled_step(double gamma, int sign) {
        const cplx fscale = cplx(0.0, 3.0 * gamma / (4.0 * kPi)) * kS215;
        const VelocitySample u0 = velocity(sign);
        const cplx gp0 = fscale * (-u0.x + cplx(0.0, 1.0) * u0.y);
        const cplx gm0 = fscale * (u0.x + cplx(0.0, 1.0) * u0.y);

        const std::size_t ip = static_cast<std::size_t>(mmax_ + 1);
        const std::size_t im = static_cast<std::size_t>(mmax_ - 1);
        const cplx star_p = half_entry2(ip) + 0.5 * dt_ * gp0;
        const cplx star_m = half_entry2(im) + 0.5 * dt_ * gm0;

        const double e = sign;
        VelocitySample us;
        us.x = cplx(0.0, 1.0) * e * kS215 * (star_m - star_p);
        us.y = e * kS215 * (star_p + star_m);
        const cplx gp = fscale * (-us.x + cplx(0.0, 1.0) * us.y);
        const cplx gm = fscale * (us.x + cplx(0.0, 1.0) * us.y);

        free_step();
        inject(ip, gp);
        inject(im, gm);
    }

    // Sample every trace channel from the current spectral state.
    void sample(Trace& tr, double t, int sign, const EnergyConstants& ec,
                const std::vector<std::vector<double>>& sob_weights) const {
        double l2sq = 0.0, gradsq = 0.0, cossq = 0.0;
        cplx mix(0.0, 0.0);
        std::vector<double> sob(sob_weights.size(), 0.0);
        for (const Sector& s : sec_) {
            if (!s.active) continue;
            for (int i = 0; i < s.n; ++i) {
                const double nn = std::norm(s.a[i]);
                l2sq += nn;
                gradsq += s.lam[i] * nn;
                const int l = s.l0 + i;
                for (std::size_t e = 0; e < sob.size(); ++e)
                    sob[e] += sob_weights[e][static_cast<std::size_t>(l)] * nn;
                cplx tv(0.0, 0.0);  // row of cosθ·ψ
                cplx sv(0.0, 0.0);  // row of sinθ∂θψ
                if (i > 0) {
                    tv += s.offd[i - 1] * s.a[i - 1];
                    sv += static_cast<double>(l - 1) * s.offd[i - 1] * s.a[i - 1];
                }
                if (i + 1 < s.n) {
                    tv += s.offd[i] * s.a[i + 1];
                    sv -= static_cast<double>(l + 2) * s.offd[i] * s.a[i + 1];
                }
                cossq += std::norm(tv);
                mix += s.a[i] * std::conj(sv);
            }
            // cosθ·ψ has one degree more than ψ; count the spilled row so
            // that ‖sinθψ‖² = ‖ψ‖² − ‖cosθψ‖² is exact, not truncated.
            cossq += std::norm(s.offd_top * s.a[s.n - 1]);
        }
        const double l2 = std::sqrt(l2sq);
        const double grad = std::sqrt(gradsq);
        const double sinw = std::sqrt(std::max(0.0, l2sq - cossq));
        const double mixed = mix.imag();
        const VelocitySample u = velocity(sign);

        tr.t.push_back(t);
        tr.ux.push_back(u.x);
        tr.uy.push_back(u.y);
        tr.l2.push_back(l2);
        tr.h1grad.push_back(grad);
        tr.sinw.push_back(sinw);
        tr.mixed_re.push_back(mixed);
        tr.energy.push_back(
            energy_from_norms(ec, nu_, t, l2, grad, mixed, sinw));
        for (std::size_t e = 0; e < sob.size(); ++e)
            tr.sobolev[e].push_back(std::sqrt(sob[e]));
    }

    SphericalField to_field() const {
        SphericalField out(lmax_, mmax_);
        for (const Sector& s : sec_)
            for (int i = 0; i < s.n; ++i) out.at(s.l0 + i, s.m) = s.a[i];
        return out;
    }

  private:
    // Value at degree 2 of a half step applied to one sector (predictor).
    cplx half_entry2(std::size_t k) {
        const Sector& s = sec_[k];
        if (!s.active) return cplx(0.0, 0.0);
        cn_rhs(half_[k], s.a.data(), w_.data(), s.n);
        cn_solve(half_[k], w_.data(), s.n);
        return w_[1];
    }

    // a += dt · CN_{dt/2}(g·e_{l=2}) for the sector's feedback amplitude g.
    void inject(std::size_t k, cplx g) {
        if (g == cplx(0.0, 0.0)) return;
        Sector& s = sec_[k];
        const CNScheme& sch = half_[k];
        std::fill(w_.begin(), w_.begin() + s.n, cplx(0.0, 0.0));
        w_[1] = sch.rd[1] * g;
        w_[0] = -sch.o[0] * g;
        if (s.n > 2) w_[2] = -sch.o[1] * g;
        cn_solve(sch, w_.data(), s.n);
        for (int i = 0; i < s.n; ++i) s.a[i] += dt_ * w_[i];
        s.active = true;
    }

    int lmax_, mmax_;
    double nu_;
    double dt_ = 0.0;
    std::vector<Sector> sec_;
    std::vector<CNScheme> full_, half_;
    mutable std::vector<cplx> w_;
};

// Shared entry validation for evolve/build: embeds the datum into the
// configured window.
SphericalField widen_datum(const ModeConfig& cfg, const SphericalField& psi) {
    psi.ensure_finite();
    check(psi.lmax <= cfg.lmax && psi.mmax <= cfg.mmax,
          "initial datum exceeds the configured coefficient window");
    return embed(psi, cfg.lmax, cfg.mmax);
}

// The sample grid must start at zero and advance by dt·output_stride.
void check_tgrid(const ModeConfig& cfg, const std::vector<double>& tgrid) {
    check(tgrid.size() >= 2, "sample grid needs at least two times");
    const double h = cfg.dt * static_cast<double>(cfg.output_stride);
    const double tol = 1e-9 * std::max(1.0, std::abs(tgrid.back()));
    check(std::abs(tgrid.front()) <= tol, "sample grid must start at t = 0");
    for (std::size_t j = 0; j < tgrid.size(); ++j)
        check(std::abs(tgrid[j] - h * static_cast<double>(j)) <= tol,
              "sample grid must be uniform with spacing dt*output_stride");
}

ModeConfig horizon_config(const ModeConfig& cfg,
                          const std::vector<double>& tgrid) {
    check(tgrid.size() >= 2, "sample grid needs at least two times");
    ModeConfig eff = cfg;
    eff.t_end = tgrid.back();
    eff.validate();
    check_tgrid(eff, tgrid);
    return eff;
}

}  // namespace

//----------------------------------------------------------------------------
// Configuration
//----------------------------------------------------------------------------
int resolution_floor(double t_end, double nu) {
    const double reach =
        nu > 0.0 ? std::min(1.5 * t_end, 4.0 / std::sqrt(nu)) : 1.5 * t_end;
    return static_cast<int>(std::ceil(reach - 1e-9)) + 32;
}

long ModeConfig::step_count() const {
    const long n = std::lround(t_end / dt);
    check(n >= 1 && std::abs(static_cast<double>(n) * dt - t_end) <=
                        1e-9 * std::max(1.0, std::abs(t_end)),
          "t_end must be a whole number of steps of size dt");
    return n;
}

void ModeConfig::validate() const {
    check(std::isfinite(gamma) && gamma >= 0.0,
          "coupling gamma must be finite and >= 0");
    check(std::isfinite(nu) && nu >= 0.0,
          "diffusion nu must be finite and >= 0");
    check(swimmer_sign == 1 || swimmer_sign == -1,
          "swimmer sign must be +1 or -1");
    check(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    check(dt <= 0.1, "dt must not exceed 0.1");
    check(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
    check(output_stride >= 1, "output stride must be >= 1");
    check(lmax >= 2, "lmax must be at least 2");
    check(mmax >= 1 && mmax <= lmax, "mmax must lie in [1, lmax]");
    for (double s : sobolev_exponents)
        check(std::isfinite(s), "Sobolev exponents must be finite");
    const long n = step_count();
    check(n % output_stride == 0,
          "output stride must divide the number of steps");
    const int floor = resolution_floor(t_end, nu);
    if (lmax < floor)
        throw ResolutionError(
            "lmax " + std::to_string(lmax) +
                " cannot resolve the degree content generated up to t_end; "
                "need at least " +
                std::to_string(floor),
            floor);
}

void PhysicalParams::validate() const {
    check(std::isfinite(swim_speed) && swim_speed > 0.0,
          "swim speed must be positive");
    check(std::isfinite(wavenumber) && wavenumber > 0.0,
          "wavenumber magnitude must be positive");
    check(std::isfinite(aspect_factor) && aspect_factor > 0.0 &&
              aspect_factor <= 1.0,
          "aspect factor must lie in (0, 1]");
    check(std::isfinite(stress_amplitude) && stress_amplitude != 0.0,
          "stress amplitude must be nonzero");
    check(std::isfinite(diffusion_phys) && diffusion_phys >= 0.0,
          "physical diffusion must be >= 0");
    check(std::isfinite(torus_size) && torus_size > 0.0,
          "torus size must be positive");
}

RescaledParams rescale(const PhysicalParams& p) {
    p.validate();
    RescaledParams r;
    const double speed_scale = p.swim_speed * p.wavenumber;
    r.gamma = p.aspect_factor * std::abs(p.stress_amplitude) / speed_scale;
    r.nu = p.diffusion_phys / speed_scale;
    r.swimmer_sign = p.stress_amplitude > 0.0 ? 1 : -1;
    return r;
}

//----------------------------------------------------------------------------
// Initial datum and elementary steps
//----------------------------------------------------------------------------
SphericalField default_datum(int lmax, int mmax) {
    check(lmax >= 2 && mmax >= 1 && mmax <= lmax,
          "standard datum needs lmax >= 2 and mmax in [1, lmax]");
    SphericalField f(lmax, mmax);
    f.at(2, 1) = cplx(-std::sqrt(0.5), 0.0);
    f.at(2, -1) = cplx(std::sqrt(0.5), 0.0);
    return f;
}

SphericalField step_semigroup(const SphericalField& f, double nu, double dt,
                              bool include_advection) {
    check(std::isfinite(nu) && nu >= 0.0,
          "diffusion nu must be finite and >= 0");
    check(std::isfinite(dt) && dt > 0.0 && dt <= 0.1,
          "dt must lie in (0, 0.1]");
    Marcher march(f, nu);
    march.prepare(dt, include_advection);
    march.free_step();
    return march.to_field();
}

int pointwise_required_ntheta(int lmax, double t) {
    return lmax + static_cast<int>(std::ceil(1.5 * std::abs(t))) + 16;
}

SphericalField pointwise_inviscid(const SphericalField& f, double t,
                                  const QuadratureGrid& grid) {
    f.ensure_finite();
    const int need = pointwise_required_ntheta(f.lmax, t);
    if (grid.n_theta < need)
        throw ResolutionError(
            "grid has " + std::to_string(grid.n_theta) +
                " polar rows but the oscillation needs " +
                std::to_string(need),
            need);
    const int need_phi = 2 * f.mmax + 2;
    if (grid.n_phi < need_phi)
        throw ResolutionError(
            "grid has " + std::to_string(grid.n_phi) +
                " azimuthal columns but the field needs " +
                std::to_string(need_phi),
            need_phi);

    std::vector<cplx> vals = synthesize(f, grid);
    for (int j = 0; j < grid.n_theta; ++j) {
        const cplx phase = std::exp(cplx(0.0, -t * grid.z[j]));
        cplx* row = vals.data() + static_cast<std::size_t>(j) * grid.n_phi;
        for (int k = 0; k < grid.n_phi; ++k) row[k] *= phase;
    }
    return analyze(vals, grid, grid.n_theta - 8, f.mmax);
}

//----------------------------------------------------------------------------
// Coupled evolution
//----------------------------------------------------------------------------
Trace evolve_coupled(const ModeConfig& cfg, const SphericalField& psi_in) {
    cfg.validate();
    check(l2_norm(psi_in) > 0.0, "initial datum must be nonzero");
    const SphericalField f = widen_datum(cfg, psi_in);

    Marcher march(f, cfg.nu);
    march.prepare(cfg.dt, true);

    const EnergyConstants ec;
    std::vector<std::vector<double>> sob_weights(cfg.sobolev_exponents.size());
    for (std::size_t e = 0; e < sob_weights.size(); ++e) {
        sob_weights[e].resize(static_cast<std::size_t>(cfg.lmax) + 1);
        for (int l = 0; l <= cfg.lmax; ++l)
            sob_weights[e][static_cast<std::size_t>(l)] = std::pow(
                1.0 + static_cast<double>(l) * (l + 1),
                cfg.sobolev_exponents[e]);
    }

    Trace tr;
    tr.sobolev_exponents = cfg.sobolev_exponents;
    tr.sobolev.resize(cfg.sobolev_exponents.size());
    march.sample(tr, 0.0, cfg.swimmer_sign, ec, sob_weights);

    const long n = cfg.step_count();
    for (long j = 1; j <= n; ++j) {
        if (cfg.gamma > 0.0)
            march.coupled_step(cfg.gamma, cfg.swimmer_sign);
        else
            march.free_step();
        const double t = cfg.dt * static_cast<double>(j);
        if (cfg.gamma > 0.0) {
            const VelocitySample u = march.velocity(cfg.swimmer_sign);
            const double mag2 = std::norm(u.x) + std::norm(u.y);
            if (!std::isfinite(mag2) ||
                mag2 > kDivergeGuard * kDivergeGuard) {
                march.sample(tr, t, cfg.swimmer_sign, ec, sob_weights);
                tr.diverged = true;
                tr.t_diverged = t;
                break;
            }
        }
        if (j % cfg.output_stride == 0)
            march.sample(tr, t, cfg.swimmer_sign, ec, sob_weights);
    }
    tr.final_field = march.to_field();
    return tr;
}

//----------------------------------------------------------------------------
// Volterra data
//----------------------------------------------------------------------------
std::vector<VelocitySample> build_source(const ModeConfig& cfg,
                                         const SphericalField& psi_in,
                                         const std::vector<double>& tgrid) {
    const ModeConfig eff = horizon_config(cfg, tgrid);
    const SphericalField f = widen_datum(eff, psi_in);

    Marcher march(f, eff.nu);
    march.prepare(eff.dt, true);
    std::vector<VelocitySample> out;
    out.reserve(tgrid.size());
    out.push_back(march.velocity(eff.swimmer_sign));
    for (std::size_t j = 1; j < tgrid.size(); ++j) {
        for (long s = 0; s < eff.output_stride; ++s) march.free_step();
        out.push_back(march.velocity(eff.swimmer_sign));
    }
    return out;
}

std::vector<MatN> build_kernel(const ModeConfig& cfg,
                               const std::vector<double>& tgrid) {
    const ModeConfig eff = horizon_config(cfg, tgrid);

    // One free run per velocity basis direction; columns of K are the
    // negated velocity responses of the projected feedback data.
    std::array<std::vector<VelocitySample>, 2> cols;
    for (int c = 0; c < 2; ++c) {
        VelocitySample basis;
        (c == 0 ? basis.x : basis.y) = cplx(1.0, 0.0);
        const SphericalField seed = l2bar_project(basis, eff.gamma);
        const SphericalField f = embed(seed, eff.lmax, eff.mmax);
        Marcher march(f, eff.nu);
        march.prepare(eff.dt, true);
        auto& col = cols[static_cast<std::size_t>(c)];
        col.reserve(tgrid.size());
        col.push_back(march.velocity(eff.swimmer_sign));
        for (std::size_t j = 1; j < tgrid.size(); ++j) {
            for (long s = 0; s < eff.output_stride; ++s) march.free_step();
            col.push_back(march.velocity(eff.swimmer_sign));
        }
    }

    // Verify isotropy before collapsing to the scalar form κ·I₂.
    double scale = 0.0, offmax = 0.0, diagdiff = 0.0;
    std::vector<cplx> kappa(tgrid.size());
    for (std::size_t j = 0; j < tgrid.size(); ++j) {
        const cplx k00 = -cols[0][j].x;
        const cplx k10 = -cols[0][j].y;
        const cplx k01 = -cols[1][j].x;
        const cplx k11 = -cols[1][j].y;
        scale = std::max({scale, std::abs(k00), std::abs(k11)});
        offmax = std::max({offmax, std::abs(k01), std::abs(k10)});
        diagdiff = std::max(diagdiff, std::abs(k00 - k11));
        kappa[j] = 0.5 * (k00 + k11);
    }
    check<ConsistencyError>(
        offmax <= 1e-8 * scale,
        "velocity response kernel lost isotropy: off-diagonal magnitude " +
            std::to_string(offmax) + " vs scale " + std::to_string(scale));
    check<ConsistencyError>(
        diagdiff <= 2e-8 * scale,
        "velocity response kernel lost isotropy: diagonal mismatch " +
            std::to_string(diagdiff) + " vs scale " + std::to_string(scale));

    std::vector<MatN> out(tgrid.size(), MatN::zero(2));
    for (std::size_t j = 0; j < tgrid.size(); ++j) {
        out[j](0, 0) = kappa[j];
        out[j](1, 1) = kappa[j];
    }
    return out;
}

cplx analytic_inviscid_kernel(double gamma, int swimmer_sign, double t) {
    check(swimmer_sign == 1 || swimmer_sign == -1,
          "swimmer sign must be +1 or -1");
    check(std::isfinite(gamma) && std::isfinite(t),
          "kernel arguments must be finite");
    const double s = std::abs(t);
    const double amp = 3.0 * gamma * static_cast<double>(swimmer_sign);
    if (s < 0.5) {
        // κ = 3Γε Σ (−1)^n s^{2n} / ((2n)!(2n+3)(2n+5)); terms fall below
        // 1e-18 well before n = 12 on |t| < 1/2.
        double sum = 0.0, pw = 1.0, fact = 1.0;
        for (int n = 0; n <= 12; ++n) {
            if (n > 0) {
                pw *= s * s;
                fact *= static_cast<double>(2 * n - 1) * (2 * n);
            }
            const double term =
                pw / (fact * (2.0 * n + 3.0) * (2.0 * n + 5.0));
            sum += (n % 2 == 0) ? term : -term;
            if (term < 1e-18) break;
        }
        return cplx(amp * sum, 0.0);
    }
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2, s5 = s4 * s;
    const double cs = std::cos(s), sn = std::sin(s);
    const double val = 0.5 * amp *
                       (-2.0 * cs / s2 + 10.0 * sn / s3 + 24.0 * cs / s4 -
                        24.0 * sn / s5);
    return cplx(val, 0.0);
}

//----------------------------------------------------------------------------
// Trace CSV
//----------------------------------------------------------------------------
void save_trace_csv(const Trace& tr, const std::string& path) {
    std::ofstream out(path);
    check<DataError>(static_cast<bool>(out),
                     "cannot open trace file for writing: " + path);
    out << "t,re_ux,im_ux,re_uy,im_uy,l2,h1grad,sinw,mixed_re,energy";
    char buf[40];
    for (double s : tr.sobolev_exponents) {
        std::snprintf(buf, sizeof(buf), "%g", s);
        out << ",sob_" << buf;
    }
    out << "\n";
    auto emit = [&](double v, bool last) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << (last ? "\n" : ",");
    };
    for (std::size_t j = 0; j < tr.t.size(); ++j) {
        emit(tr.t[j], false);
        emit(tr.ux[j].real(), false);
        emit(tr.ux[j].imag(), false);
        emit(tr.uy[j].real(), false);
        emit(tr.uy[j].imag(), false);
        emit(tr.l2[j], false);
        emit(tr.h1grad[j], false);
        emit(tr.sinw[j], false);
        emit(tr.mixed_re[j], false);
        emit(tr.energy[j], tr.sobolev.empty());
        for (std::size_t e = 0; e < tr.sobolev.size(); ++e)
            emit(tr.sobolev[e][j], e + 1 == tr.sobolev.size());
    }
    check<DataError>(static_cast<bool>(out),
                     "failed while writing trace file: " + path);
}

}  // namespace kinmix
