//============================================================================
// diagnostics.hpp — quantitative verification tooling: the time-weighted
// hypocoercive energy functional, the spectral-gap interpolation inequality,
// adapted vector-field norms with a polar cutoff, a reduced 1-D oscillatory-
// integral evaluator, and decay/scaling fitters for trace channels.
//============================================================================
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kinmix/harmonics.hpp"

namespace kinmix {

//----------------------------------------------------------------------------
// EnergyConstants — weights of the augmented energy
//   E[ψ](t) = ½( ‖ψ‖² + aνt‖∇ψ‖² + 2bνt²·mixed_inner(ψ) + cνt³‖sinθψ‖² )
// with a = b^{2/3} and c = 32b²/a tied to the single small parameter b, so
// that 2b² ≤ ac holds automatically and E controls each term separately:
//   E ≥ ½( ‖ψ‖² + (aνt/2)‖∇ψ‖² + (cνt³/2)‖sinθψ‖² ).
//----------------------------------------------------------------------------
struct EnergyConstants {
    double b = 0.01;

    double a() const;  // b^{2/3}
    double c() const;  // 32 b² / a
    void validate() const;  // b finite and in (0, 1)
};

// Assemble E from precomputed norms (fast path used by evolution traces).
double energy_from_norms(const EnergyConstants& ec, double nu, double t,
                         double l2, double grad, double mixed, double sinw);

// Assemble E directly from a field (norms computed on the given grid).
double energy(const SphericalField& f, double t, double nu,
              const EnergyConstants& ec, const QuadratureGrid& grid);

//----------------------------------------------------------------------------
// Interpolation inequality:  σ^{1/2}‖g‖² ≤ (σ/2)‖∇g‖² + 2‖sinθ·g‖²  for
// σ ∈ (0,1].  Returns RHS − LHS, which must be ≥ 0 up to roundoff.
//----------------------------------------------------------------------------
double interpolation_gap(const SphericalField& g, double sigma,
                         const QuadratureGrid& grid);

//----------------------------------------------------------------------------
// Coefficients of the adapted (viscous) vector field
//   X = α(t)∇ψ + iβ(t)·(∇cosθ)ψ ,
//   α = cosh(√(−2iν)·t),  β = sinh(√(−2iν)·t)/√(−2iν)   (principal branch),
// with the exact inviscid limit (α,β) = (1, t) at ν = 0.  They satisfy
// α' = −2iνβ, β' = α.
//----------------------------------------------------------------------------
std::pair<cplx, cplx> alpha_beta(double nu, double t);

//----------------------------------------------------------------------------
// CutoffSpec — C² polar cutoff χ(θ): 1 on [0,θ₁], 0 on [θ₂,π], quintic blend
// between, keeping the south pole outside the support.
//----------------------------------------------------------------------------
struct CutoffSpec {
    double theta1;  // end of the χ ≡ 1 plateau
    double theta2;  // start of the χ ≡ 0 region

    CutoffSpec();   // defaults θ₁ = π/2, θ₂ = 3π/4
    void validate() const;  // 0 < θ₁ < θ₂ < π
    double eval(double theta) const;
};

struct VectorFieldNorms {
    double cutoff_norm = 0.0;      // ‖χX‖_{L²}
    double full_norm = 0.0;        // ‖X‖_{L²}
    double pole_window_max = 0.0;  // max |X| over θ ≥ θ₂ (the cut region)
};

// Evaluate X on the grid from spectral derivatives and return weighted norms.
VectorFieldNorms vector_field_norms(const SphericalField& f, double nu,
                                    double t, const CutoffSpec& cutoff,
                                    const QuadratureGrid& grid);

//----------------------------------------------------------------------------
// Oscillatory integral  I(t) = ∫_{S²} e^{i t cosθ} F dσ, reduced to the 1-D
// form I(t) = ∫_{−1}^{1} e^{izt} F₀(z) dz with F₀ the azimuthal average of F
// (carrying the 2π weight).  Evaluated by composite Clenshaw–Curtis panels,
// panel count growing with |t|.
//----------------------------------------------------------------------------
cplx oscillatory_integral(const SphericalField& F, double t);

//----------------------------------------------------------------------------
// Decay/scaling fitters.
//----------------------------------------------------------------------------
struct FitReport {
    std::string channel;        // label carried through to JSON
    std::string model;          // "power", "power-log", "exponential"
    double t0 = 0.0;            // fit window
    double t1 = 0.0;
    double exponent_or_rate = 0.0;  // p in (1+t)^{-p}, or r in e^{-rt}
    double amplitude = 0.0;     // prefactor C
    double residual_rms = 0.0;  // RMS residual in log space

    std::string to_json() const;
};

// Least squares of log y against log(1+t) on [t0,t1]; y ≤ 0 samples are
// dropped.  With log_correction the channel is divided by ln(2+t) first.
// Fewer than 8 usable points → InsufficientDataError.
FitReport fit_power_law(const std::vector<double>& t,
                        const std::vector<double>& y, double t0, double t1,
                        bool log_correction = false);

// Least squares of log y against t on [t0,t1]: y ≈ C e^{−r t}, returns r.
FitReport fit_exponential(const std::vector<double>& t,
                          const std::vector<double>& y, double t0, double t1);

// Slope of log y against log x (for scaling laws like T(ν) ∝ ν^s).
double scaling_slope(const std::vector<double>& x,
                     const std::vector<double>& y);

// Windowed maxima of an oscillatory channel: one (t, max|y|) sample per
// window of the given width, for envelope fitting.
void envelope_maxima(const std::vector<double>& t,
                     const std::vector<double>& y, double window,
                     std::vector<double>& t_out, std::vector<double>& y_out);

}  // namespace kinmix
