#include "kinmix/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kinmix {

namespace {

constexpr double kSingularTol = 1e-14;

// LU factorization with partial pivoting for n <= 3, factored once per
// problem since the step matrix I + (dt/2) K_0 is constant.
struct SmallLU {
    int n = 1;
    std::array<cplx, kMaxBlock * kMaxBlock> lu{};
    std::array<int, kMaxBlock> perm{};

    static SmallLU factor(const MatN& m) {
        SmallLU f;
        f.n = m.n;
        f.lu = m.a;
        auto at = [&](int i, int j) -> cplx& { return f.lu[i * f.n + j]; };
        for (int i = 0; i < f.n; ++i) f.perm[i] = i;
        for (int c = 0; c < f.n; ++c) {
            int piv = c;
            for (int r = c + 1; r < f.n; ++r) {
                if (std::abs(at(r, c)) > std::abs(at(piv, c))) piv = r;
            }
            if (std::abs(at(piv, c)) < kSingularTol) {
                throw Error("step matrix I + (dt/2) K(0) is singular");
            }
            if (piv != c) {
                for (int j = 0; j < f.n; ++j) std::swap(at(c, j), at(piv, j));
                std::swap(f.perm[c], f.perm[piv]);
            }
            for (int r = c + 1; r < f.n; ++r) {
                const cplx factor = at(r, c) / at(c, c);
                at(r, c) = factor;
                for (int j = c + 1; j < f.n; ++j) at(r, j) -= factor * at(c, j);
            }
        }
        return f;
    }

    VecN apply(const VecN& b) const {
        VecN x = VecN::zero(n);
        for (int i = 0; i < n; ++i) x[i] = b.v[perm[i]];
        for (int i = 1; i < n; ++i) {
            for (int j = 0; j < i; ++j) x[i] -= lu[i * n + j] * x[j];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] -= lu[i * n + j] * x[j];
            x[i] /= lu[i * n + i];
        }
        return x;
    }
};

}  // namespace

MatN MatN::zero(int n) {
    check(n >= 1 && n <= kMaxBlock, "matrix dimension must be 1, 2, or 3");
    MatN m;
    m.n = n;
    return m;
}

MatN MatN::identity(int n) {
    MatN m = zero(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

VecN VecN::zero(int n) {
    check(n >= 1 && n <= kMaxBlock, "vector dimension must be 1, 2, or 3");
    VecN x;
    x.n = n;
    return x;
}

double VecN::norm() const {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::norm(v[i]);
    return std::sqrt(acc);
}

VecN mat_vec(const MatN& m, const VecN& x) {
    VecN y = VecN::zero(m.n);
    for (int i = 0; i < m.n; ++i) {
        cplx acc = 0.0;
        for (int j = 0; j < m.n; ++j) acc += m(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

void VolterraProblem::validate() const {
    check(std::isfinite(dt) && dt > 0.0, "time step must be positive");
    check(kernel.size() == source.size(),
          "kernel and source must be sampled on the same grid");
    check(kernel.size() >= 2, "need at least two time samples");
    const int n = kernel.front().n;
    check(n >= 1 && n <= kMaxBlock, "block dimension must be 1, 2, or 3");
    for (const auto& k : kernel) {
        check(k.n == n, "kernel samples must share one dimension");
    }
    for (const auto& s : source) {
        check(s.n == n, "source samples must match the kernel dimension");
    }
}

std::vector<VecN> solve(const VolterraProblem& problem) {
    problem.validate();
    const int n = problem.kernel.front().n;
    const std::size_t N = problem.kernel.size();
    const double dt = problem.dt;

    MatN lhs = MatN::identity(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            lhs(i, j) += 0.5 * dt * problem.kernel[0](i, j);
        }
    }
    const SmallLU lu = SmallLU::factor(lhs);

    std::vector<VecN> u(N, VecN::zero(n));
    u[0] = problem.source[0];

    if (n == 1) {
        // Scalar fast path: the history sum dominates the cost (O(N^2)).
        std::vector<cplx> ks(N), us(N);
        for (std::size_t j = 0; j < N; ++j) ks[j] = problem.kernel[j](0, 0);
        us[0] = u[0][0];
        for (std::size_t j = 1; j < N; ++j) {
            cplx acc = 0.5 * ks[j] * us[0];
            for (std::size_t i = 1; i < j; ++i) acc += ks[j - i] * us[i];
            VecN rhs = VecN::zero(1);
            rhs[0] = problem.source[j][0] - dt * acc;
            u[j] = lu.apply(rhs);
            us[j] = u[j][0];
        }
        return u;
    }

    for (std::size_t j = 1; j < N; ++j) {
        VecN acc = mat_vec(problem.kernel[j], u[0]);
        for (int i = 0; i < n; ++i) acc[i] *= 0.5;
        for (std::size_t i = 1; i < j; ++i) {
            const MatN& k = problem.kernel[j - i];
            const VecN& w = u[i];
            for (int r = 0; r < n; ++r) {
                cplx s = 0.0;
                for (int c = 0; c < n; ++c) s += k(r, c) * w[c];
                acc[r] += s;
            }
        }
        VecN rhs = VecN::zero(n);
        for (int i = 0; i < n; ++i) {
            rhs[i] = problem.source[j][i] - dt * acc[i];
        }
        u[j] = lu.apply(rhs);
    }
    return u;
}

std::vector<MatN> resolvent(const std::vector<MatN>& kernel, double dt) {
    check(!kernel.empty(), "kernel must be non-empty");
    const int n = kernel.front().n;
    std::vector<MatN> R(kernel.size(), MatN::zero(n));
    for (int c = 0; c < n; ++c) {
        VolterraProblem col;
        col.dt = dt;
        col.kernel = kernel;
        col.source.resize(kernel.size(), VecN::zero(n));
        for (std::size_t j = 0; j < kernel.size(); ++j) {
            for (int r = 0; r < n; ++r) col.source[j][r] = kernel[j](r, c);
        }
        const auto u = solve(col);
        for (std::size_t j = 0; j < kernel.size(); ++j) {
            for (int r = 0; r < n; ++r) R[j](r, c) = u[j][r];
        }
    }
    return R;
}

cplx laplace_transform(const std::vector<cplx>& samples, double dt, cplx z) {
    check(samples.size() >= 2, "need at least two samples");
    check(std::isfinite(dt) && dt > 0.0, "sample spacing must be positive");
    cplx acc = 0.5 * samples.front();
    for (std::size_t j = 1; j + 1 < samples.size(); ++j) {
        acc += samples[j] * std::exp(-z * (static_cast<double>(j) * dt));
    }
    acc += 0.5 * samples.back() *
           std::exp(-z * (static_cast<double>(samples.size() - 1) * dt));
    return acc * dt;
}

void WeightSpec::validate() const {
    check(std::isfinite(alpha) && alpha > 1.0,
          "weight exponent must exceed 1 for an integrable-tail comparison");
}

double WeightSpec::eval(double t) const {
    const double p = std::pow(1.0 + t, alpha);
    switch (kind) {
        case Kind::power:
            return p;
        case Kind::power_log:
            return p / std::log(2.0 + t);
    }
    throw ConfigError("unknown weight kind");
}

DecayReport check_weighted_decay(const std::vector<VecN>& u,
                                 const std::vector<VecN>& v, double dt,
                                 const WeightSpec& weight) {
    weight.validate();
    check(u.size() == v.size() && u.size() >= 2,
          "response and source must share a grid of at least two samples");
    check(std::isfinite(dt) && dt > 0.0, "sample spacing must be positive");

    const std::size_t half = u.size() / 2 + 1;
    double num_full = 0.0, den_full = 0.0, num_half = 0.0, den_half = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double w = weight.eval(static_cast<double>(j) * dt);
        const double wu = w * u[j].norm();
        const double wv = w * v[j].norm();
        num_full = std::max(num_full, wu);
        den_full = std::max(den_full, wv);
        if (j < half) {
            num_half = std::max(num_half, wu);
            den_half = std::max(den_half, wv);
        }
    }

    DecayReport rep;
    if (den_full <= 0.0 || den_half <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.ratio_full = num_full / den_full;
    rep.ratio_half = num_half / den_half;
    rep.horizon_stable = std::isfinite(rep.ratio_full) &&
                         rep.ratio_full <= 1.1 * rep.ratio_half;
    return rep;
}

}  // namespace kinmix
