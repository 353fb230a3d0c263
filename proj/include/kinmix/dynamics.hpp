//============================================================================
// dynamics.hpp — time evolution of the orientation distribution for a single
// spatial wavenumber: the advection–diffusion semigroup (phase transport by
// e^{−it·cosθ} plus rotational diffusion), the coupled mode system with its
// rank-two velocity feedback, and assembly of the memory kernel and source
// for the equivalent Volterra formulation.
//
// Scheme: per-m Crank–Nicolson on the complex tridiagonal generator
// (cosθ-multiplication recurrence + diagonal Laplace–Beltrami), solved by the
// Thomas algorithm; the low-rank feedback enters through an explicit-midpoint
// IMEX layer, keeping the full step second order and unconditionally stable.
//============================================================================
#pragma once

#include <string>
#include <vector>

#include "kinmix/harmonics.hpp"
#include "kinmix/volterra.hpp"

namespace kinmix {

//----------------------------------------------------------------------------
// Minimum degree window for an evolution to time t_end at diffusion nu.
// Phase transport generates Legendre content of degree ≈ 1.5·t before
// diffusion damps it; with nu > 0 the reachable degree saturates near
// 4/sqrt(nu).  A fixed margin of 32 absorbs datum content and spectral tails.
//----------------------------------------------------------------------------
int resolution_floor(double t_end, double nu);

//----------------------------------------------------------------------------
// ModeConfig — dimensionless run parameters for one wavenumber.
//----------------------------------------------------------------------------
struct ModeConfig {
    double gamma = 0.0;      // feedback coupling, ≥ 0
    double nu = 0.0;         // rotational diffusion, ≥ 0
    int swimmer_sign = -1;   // sign of the dipolar response: +1 or −1
    int lmax = 2;            // spherical-harmonic degree window
    int mmax = 1;            // azimuthal window, 1 ≤ mmax ≤ lmax
    double dt = 1e-2;        // time step, 0 < dt ≤ 0.1
    double t_end = 1.0;      // horizon, an integer number of steps
    long output_stride = 1;  // record every this many steps
    std::vector<double> sobolev_exponents;  // extra trace channels

    // Throws ConfigError / ResolutionError (with the required lmax).
    void validate() const;
    long step_count() const;  // t_end / dt, validated integral
};

//----------------------------------------------------------------------------
// PhysicalParams — dimensional inputs reduced to (gamma, nu, sign) by the
// standard change of variables t → |k|U₀t.
//----------------------------------------------------------------------------
struct PhysicalParams {
    double swim_speed = 1.0;        // U₀ > 0
    double wavenumber = 1.0;        // |k| > 0
    double aspect_factor = 1.0;     // shape parameter in (0, 1]
    double stress_amplitude = -1.0; // signed dipole strength, ≠ 0
    double diffusion_phys = 0.0;    // rotational diffusion, ≥ 0
    double torus_size = 6.283185307179586;  // box period L > 0

    void validate() const;
};

struct RescaledParams {
    double gamma = 0.0;  // aspect·|stress| / (U₀|k|)
    double nu = 0.0;     // diffusion / (U₀|k|)
    int swimmer_sign = -1;
};

RescaledParams rescale(const PhysicalParams& p);

//----------------------------------------------------------------------------
// Trace — sampled run history.  All channels share the time grid; a diverged
// run is truncated at the overflow guard with `diverged` set and the final
// recorded time in `t_diverged`.  `final_field` is the last recorded state.
//----------------------------------------------------------------------------
struct Trace {
    std::vector<double> t;
    std::vector<cplx> ux, uy;        // velocity components
    std::vector<double> l2;          // ‖ψ‖
    std::vector<double> h1grad;      // ‖∇ψ‖
    std::vector<double> sinw;        // ‖sinθ·ψ‖
    std::vector<double> mixed_re;    // −Re ∫ i sinθ ψ conj(∂θψ)
    std::vector<double> energy;      // hypocoercive energy functional
    std::vector<double> sobolev_exponents;        // copied from the config
    std::vector<std::vector<double>> sobolev;     // one channel per exponent
    bool diverged = false;
    double t_diverged = 0.0;
    SphericalField final_field;
};

// CSV with header t,re_ux,im_ux,re_uy,im_uy,l2,h1grad,sinw,mixed_re,energy
// (plus sob_<s> columns), full binary64 round trip.
void save_trace_csv(const Trace& tr, const std::string& path);

//----------------------------------------------------------------------------
// Standard initial datum: the normalized lowest mode with a nonzero velocity
// moment, N·sinθcosθcosφ, i.e. coefficients ∓√½ at (l,m) = (2,±1).
//----------------------------------------------------------------------------
SphericalField default_datum(int lmax, int mmax);

//----------------------------------------------------------------------------
// One Crank–Nicolson step of the free semigroup (phase advection + diffusion).
// Norm-nonincreasing for nu ≥ 0 and exactly norm-preserving at nu = 0;
// azimuthal blocks evolve independently.  `include_advection = false` turns
// off the transport part (diagonal heat flow), used to pin the scheme against
// the exactly known diffusion decay.
//----------------------------------------------------------------------------
SphericalField step_semigroup(const SphericalField& f, double nu, double dt,
                              bool include_advection = true);

//----------------------------------------------------------------------------
// Exact inviscid transport: multiply by e^{−it·cosθ} on the grid and project
// back.  The grid must resolve the oscillation: n_theta at least
// pointwise_required_ntheta(f.lmax, t), else ResolutionError carrying the
// required count (likewise for the azimuthal direction, 2·mmax+2 columns).
//----------------------------------------------------------------------------
int pointwise_required_ntheta(int lmax, double t);
SphericalField pointwise_inviscid(const SphericalField& f, double t,
                                  const QuadratureGrid& grid);

//----------------------------------------------------------------------------
// Coupled evolution: free semigroup plus the rank-two velocity feedback,
// explicit-midpoint IMEX, sampled every output_stride steps.  A run whose
// velocity magnitude passes 10¹² stops at that step, records it, and returns
// the truncated trace flagged `diverged` (expected behavior above threshold).
//----------------------------------------------------------------------------
Trace evolve_coupled(const ModeConfig& cfg, const SphericalField& psi_in);

//----------------------------------------------------------------------------
// Volterra data.  Both require tgrid uniform, starting at 0, with spacing
// dt·output_stride; the config's degree window must be adequate for
// tgrid.back().
//
//   build_source:  U(t) = velocity of the freely transported datum.
//   build_kernel:  K(t)v = −velocity[e^{t·free}(feedback v)], assembled from
//                  two basis runs, verified isotropic (off-diagonals below
//                  1e-8 of the diagonal scale, else ConsistencyError) and
//                  stored exactly as κ(t)·I₂.
//----------------------------------------------------------------------------
std::vector<VelocitySample> build_source(const ModeConfig& cfg,
                                         const SphericalField& psi_in,
                                         const std::vector<double>& tgrid);
std::vector<MatN> build_kernel(const ModeConfig& cfg,
                               const std::vector<double>& tgrid);

//----------------------------------------------------------------------------
// Closed form of the inviscid memory kernel
//   κ(t) = (3·gamma·sign/4) ∫_{−1}^{1} z²(1−z²) e^{−izt} dz,
// real and even in t, κ(0) = gamma·sign/5, envelope (1+t)²κ bounded.
// Evaluated by a power series for |t| < 1/2 and the trigonometric
// antiderivative form beyond.
//----------------------------------------------------------------------------
cplx analytic_inviscid_kernel(double gamma, int swimmer_sign, double t);

}  // namespace kinmix
