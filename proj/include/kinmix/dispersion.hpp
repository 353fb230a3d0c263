#pragma once
//============================================================================
// Penrose-style stability analysis for the coupled orientation dynamics.
//
// The memory kernel of the coupled system has Laplace transform
// -Γε F(λ) with the coupling-independent function
//
//     F(λ) = -(3/4) ∫_{-1}^{1} z²(1-z²) / (λ + iz) dz,     Re λ > 0,
//
// extended continuously to the imaginary axis λ = ib by the Plemelj formula:
//
//     F(ib) = -(3π/4) b²(1-b²) + (3i/4) PV∫ z²(1-z²)/(z+b) dz,   |b| < 1,
//     F(ib) = (3i/4) ∫ z²(1-z²)/(z+b) dz  (purely imaginary),    |b| ≥ 1.
//
// A growing mode exists iff F attains the value ε/Γ in the closed right half
// plane; by the argument principle this is decided by the winding number of
// the boundary curve b ↦ F(ib) about the point ε/Γ.  The curve crosses the
// real axis at 0 and at ±b_c (the root of the PV integral), which yields the
// critical coupling Γ_c = 4 / (3π b_c²(1-b_c²)) for pullers (ε = -1);
// pushers (ε = +1) are stable at every coupling since Re F ≤ 0.
//============================================================================

#include <complex>
#include <optional>
#include <vector>

#include "kinmix/errors.hpp"

namespace kinmix {

using cplx = std::complex<double>;

enum class Verdict { stable, unstable, marginal };

const char* verdict_name(Verdict v);

struct CriticalConstants {
    double b_c = 0.0;      // real-axis crossing orientation, in (0,1)
    double gamma_c = 0.0;  // 4 / (3π b_c²(1-b_c²))
};

struct DispersionScan {
    double gamma = 0.0;
    int swimmer_sign = 0;
    std::vector<double> b_samples;  // curve parameter, ordered traversal
    std::vector<cplx> F_values;     // F(i b) at the samples
    int winding_number = 0;
    Verdict verdict = Verdict::stable;
    std::vector<cplx> roots;  // right-half-plane solutions of F = ε/Γ
};

// Closed form of PV∫_{-1}^{1} z²(1-z²)/(z+b) dz for |b| < 1:
//     2b³ - (4/3)b + (b⁴-b²) log((1-b)/(1+b)).
// Throws DomainError for |b| >= 1.
double pv_integral(double b);

// F(ib) for any real b (both branches, continuous across |b| = 1).
cplx boundary_F(double b);

// F(λ) by adaptive quadrature; requires Re λ > 0 (DomainError otherwise).
cplx halfplane_F(cplx lambda);

// dF/dλ = (3/4) ∫ z²(1-z²)/(λ+iz)² dz, same domain restriction.
cplx halfplane_F_prime(cplx lambda);

// Root of the PV integral on (0,1) (bisection plus Newton polish) and the
// critical coupling derived from it.
CriticalConstants find_bc();

// Sample the boundary curve (tanh-stretched core, extra clustering at the
// real-axis crossings, geometric tails), compute the winding number about
// ε/Γ with sample doubling until the integer stabilizes, and report the
// verdict.  Points within 1e-8 of the curve give a marginal verdict.
DispersionScan spectral_condition(double gamma, int swimmer_sign);

// Damped-Newton solution of F(λ) = ε/Γ in Re λ > 0, continued in Γ from
// just above threshold for determinism.  Returns nothing when no growing
// mode exists (ε = +1, or Γ <= Γ_c).  Residual below 1e-10 or
// ConvergenceError carrying the last iterate.
std::optional<cplx> find_unstable_root(double gamma, int swimmer_sign);

}  // namespace kinmix
