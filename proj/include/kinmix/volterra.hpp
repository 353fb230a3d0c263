#pragma once
//============================================================================
// Second-kind Volterra convolution equations with sampled kernels:
//
//     u(t) + (K * u)(t) = v(t),      (K * u)(t) = ∫_0^t K(t-s) u(s) ds,
//
// for small (n ≤ 3) complex matrix kernels on a uniform time grid.  The
// convolution is discretized with product-trapezoidal weights, giving a
// second-order one-step-recursive scheme.  Also provides the resolvent
// kernel R (solving R + K*R = K, so that u = v - R*v), Laplace transforms
// of sampled signals, and weighted sup-norm decay reports.
//============================================================================

#include <array>
#include <complex>
#include <vector>

#include "kinmix/errors.hpp"

namespace kinmix {

using cplx = std::complex<double>;

inline constexpr int kMaxBlock = 3;

// Dense complex matrix of dimension n in {1,2,3}, row-major fixed storage.
struct MatN {
    int n = 1;
    std::array<cplx, kMaxBlock * kMaxBlock> a{};

    static MatN zero(int n);
    static MatN identity(int n);

    cplx& operator()(int i, int j) { return a[i * n + j]; }
    const cplx& operator()(int i, int j) const { return a[i * n + j]; }
};

struct VecN {
    int n = 1;
    std::array<cplx, kMaxBlock> v{};

    static VecN zero(int n);

    cplx& operator[](int i) { return v[i]; }
    const cplx& operator[](int i) const { return v[i]; }

    double norm() const;
};

VecN mat_vec(const MatN& m, const VecN& x);

// Kernel and source sampled at t_j = j*dt, j = 0..N-1, with N >= 2.
struct VolterraProblem {
    double dt = 0.0;
    std::vector<MatN> kernel;
    std::vector<VecN> source;

    void validate() const;
};

// March the product-trapezoidal discretization:
//   (I + (dt/2) K_0) u_j = v_j - dt [ (1/2) K_j u_0 + sum_{0<i<j} K_{j-i} u_i ]
// with u_0 = v_0.  Throws Error if the constant step matrix is singular.
std::vector<VecN> solve(const VolterraProblem& problem);

// Resolvent kernel on the same grid: columns of R solve R + K*R = K.
std::vector<MatN> resolvent(const std::vector<MatN>& kernel, double dt);

// Trapezoid-rule Laplace transform of uniformly sampled data over the
// sampled horizon: dt * [ f_0/2 + sum f_j e^{-z t_j} + f_{N-1} e^{-z T}/2 ].
cplx laplace_transform(const std::vector<cplx>& samples, double dt, cplx z);

// Time weights used in decay diagnostics.  `power` is (1+t)^alpha and
// `power_log` is (1+t)^alpha / log(2+t); both require alpha > 1.
struct WeightSpec {
    enum class Kind { power, power_log };
    Kind kind = Kind::power;
    double alpha = 2.0;

    void validate() const;
    double eval(double t) const;
};

// Weighted sup-norm comparison of a response u against its source v:
//   ratio = sup_t w(t) |u(t)|  /  sup_t w(t) |v(t)|,
// over the full sampled horizon and over its first half.  The response is
// horizon stable when the full-horizon ratio exceeds the half-horizon one
// by less than 10%.
struct DecayReport {
    double ratio_full = 0.0;
    double ratio_half = 0.0;
    bool horizon_stable = false;
    bool degenerate = false;
};

DecayReport check_weighted_decay(const std::vector<VecN>& u,
                                 const std::vector<VecN>& v, double dt,
                                 const WeightSpec& weight);

}  // namespace kinmix
