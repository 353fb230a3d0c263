//============================================================================
// harmonics.hpp — scalar fields on the unit sphere in an orthonormal
// spherical-harmonic basis (Condon–Shortley phase), Gauss–Legendre × uniform
// azimuthal quadrature, and the elementary operators the model is built from:
// multiplication by cosθ, Laplace–Beltrami, sinθ∂θ, norms, the degree-2
// velocity moment and its adjoint feedback projection.
//============================================================================
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace kinmix {

using cplx = std::complex<double>;

//----------------------------------------------------------------------------
// SphericalField — coefficients a_{lm} for 0 ≤ l ≤ lmax, |m| ≤ min(l, mmax),
// stored l-major with m ascending.  ψ(p) = Σ a_{lm} Y_l^m(p), ∫|Y_l^m|² = 1.
//----------------------------------------------------------------------------
struct SphericalField {
    int lmax = 0;
    int mmax = 0;
    std::vector<cplx> coeffs;

    SphericalField() = default;
    SphericalField(int lmax_, int mmax_);

    int mcap(int l) const { return l < mmax ? l : mmax; }
    std::size_t index(int l, int m) const;  // bounds-checked
    cplx& at(int l, int m) { return coeffs[index(l, m)]; }
    const cplx& at(int l, int m) const { return coeffs[index(l, m)]; }
    // Read that tolerates out-of-window (l,m) by returning 0.
    cplx get(int l, int m) const;
    std::size_t size() const { return coeffs.size(); }
    void ensure_finite() const;  // throws DataError
};

// Storage length for a given (lmax, mmax) window.
std::size_t field_storage_size(int lmax, int mmax);

// Copy of `f` widened (or narrowed) to a new coefficient window.
SphericalField embed(const SphericalField& f, int lmax, int mmax);

//----------------------------------------------------------------------------
// QuadratureGrid — Gauss–Legendre nodes z_j = cosθ_j (ascending) with weights
// w_j (Σw_j = 2), uniform φ_k = 2πk/n_phi with weight 2π/n_phi.  Exact for
// the products used when n_theta ≥ lmax+1 and n_phi ≥ 2·mmax+1; quadratic
// forms with a sin²θ weight need n_theta ≥ lmax+2 (for_field adds a margin).
//----------------------------------------------------------------------------
struct QuadratureGrid {
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> z;  // Gauss–Legendre nodes, ascending
    std::vector<double> w;  // Gauss–Legendre weights

    double phi_step() const;
    double phi(int k) const { return phi_step() * k; }
    double weight_sum() const;  // == 4π within 1e-12 by construction

    static QuadratureGrid build(int n_theta, int n_phi);
    static QuadratureGrid for_field(int lmax, int mmax, int margin = 8);
};

//----------------------------------------------------------------------------
// VelocitySample — the two in-plane components of the fluid response in the
// frame where the wavevector points along e_z; the axial component vanishes
// identically (incompressibility projector).
//----------------------------------------------------------------------------
struct VelocitySample {
    cplx x{0.0, 0.0};
    cplx y{0.0, 0.0};
};

//----------------------------------------------------------------------------
// Normalized associated Legendre row: out[l-m] = P̄_l^m(z) for l = m..lmax,
// m ≥ 0, such that Y_l^m(θ,φ) = P̄_l^m(cosθ)·e^{imφ} (Condon–Shortley phase
// included).  For m < 0 use Y_l^{-m} = (-1)^m conj(Y_l^m).
//----------------------------------------------------------------------------
void legendre_row(int lmax, int m, double z, double* out);

// Grid evaluation values[j*n_phi + k] = ψ(θ_j, φ_k) and its inverse.
std::vector<cplx> synthesize(const SphericalField& f,
                             const QuadratureGrid& grid);
SphericalField analyze(const std::vector<cplx>& values,
                       const QuadratureGrid& grid, int lmax, int mmax);

// cosθ·ψ expressed in harmonics (output degree lmax+1).
SphericalField apply_cos_multiply(const SphericalField& f);
// Δ_sphere ψ (diagonal, eigenvalue -l(l+1)).
SphericalField apply_laplacian(const SphericalField& f);
// sinθ·∂_θ ψ expressed in harmonics (output degree lmax+1).
SphericalField apply_sin_dtheta(const SphericalField& f);

double l2_norm(const SphericalField& f);
// ( Σ (1+l(l+1))^s |a_{lm}|² )^{1/2}; s may be negative.
double sobolev_norm(const SphericalField& f, double s);
// ‖∇ψ‖ = ( Σ l(l+1)|a_{lm}|² )^{1/2}.
double grad_norm(const SphericalField& f);
// ‖sinθ·ψ‖ by grid quadrature of sin²θ|ψ|².
double sin_weighted_norm(const SphericalField& f, const QuadratureGrid& grid);
// -Re ∫ i·sinθ·ψ·conj(∂_θψ) dσ with the θ-derivative taken spectrally.
double mixed_inner(const SphericalField& f, const QuadratureGrid& grid);

// u = i·ε·P_⊥ ∫ ψ p (p·e) dp — reads only the (2,±1) coefficients.
VelocitySample velocity_from_field(const SphericalField& f, int swimmer_sign);
// p ↦ (3iΓ/4π)(p·e)(P_⊥p)·v as a field supported on (2,±1).
SphericalField l2bar_project(const VelocitySample& v, double gamma);

// Plain-text serialization: "lmax,mmax" header then one "l,m,re,im" row per
// coefficient, full binary64 round trip.
void save_field(const SphericalField& f, const std::string& path);
SphericalField load_field(const std::string& path);

// Seeded smooth test field: coefficients (1+l)^{-4} × unit-modulus noise,
// drawn l-major, m ascending (mt19937_64).
SphericalField random_smooth_field(int lmax, int mmax, std::uint64_t seed);

}  // namespace kinmix
