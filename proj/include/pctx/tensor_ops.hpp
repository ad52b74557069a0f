#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

// Dense kernels shared by the numerics wrappers, the engine and the trainer.
// Templated on the scalar so the gradient checker can run the identical
// computation in double precision. Parallel loops cover output rows only;
// every element keeps a fixed reduction order.

namespace pctx::detail {

// c [m,n] = a [m,k] * b [k,n]
template <typename Real>
void matmul_ikj(const Real* a, const Real* b, Real* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        Real* crow = c + static_cast<size_t>(i) * n;
        std::fill(crow, crow + n, Real(0));
        const Real* arow = a + static_cast<size_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const Real aik = arow[kk];
            const Real* brow = b + static_cast<size_t>(kk) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

// c [k,n] += aT b with a [m,k], b [m,n]; weight-gradient shape
template <typename Real>
void matmul_at_b_accum(const Real* a, const Real* b, Real* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < k; ++i) {
        Real* crow = c + static_cast<size_t>(i) * n;
        for (int t = 0; t < m; ++t) {
            const Real ati = a[static_cast<size_t>(t) * k + i];
            const Real* brow = b + static_cast<size_t>(t) * n;
            for (int j = 0; j < n; ++j) crow[j] += ati * brow[j];
        }
    }
}

// c [m,k] = a bT with a [m,n], b [k,n]
template <typename Real>
void matmul_a_bt(const Real* a, const Real* b, Real* c, int m, int n, int k) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const Real* arow = a + static_cast<size_t>(i) * n;
        Real* crow = c + static_cast<size_t>(i) * k;
        for (int j = 0; j < k; ++j) {
            const Real* brow = b + static_cast<size_t>(j) * n;
            Real dot = Real(0);
            for (int x = 0; x < n; ++x) dot += arow[x] * brow[x];
            crow[j] = dot;
        }
    }
}

template <typename Real>
void rms_norm_fwd(const Real* x, const Real* gain, Real eps, Real* y, int n) {
    Real ms = Real(0);
    for (int i = 0; i < n; ++i) ms += x[i] * x[i];
    ms = ms / Real(n) + eps;
    const Real inv = Real(1) / std::sqrt(ms);
    for (int i = 0; i < n; ++i) y[i] = x[i] * gain[i] * inv;
}

// dgain accumulates; dx overwrites
template <typename Real>
void rms_norm_bwd(const Real* x, const Real* gain, Real eps, const Real* dy, Real* dx,
                  Real* dgain, int n) {
    Real ms = Real(0);
    for (int i = 0; i < n; ++i) ms += x[i] * x[i];
    ms = ms / Real(n) + eps;
    const Real r = std::sqrt(ms);
    const Real inv = Real(1) / r;
    Real proj = Real(0);  // sum_j gain_j * dy_j * x_j
    for (int i = 0; i < n; ++i) proj += gain[i] * dy[i] * x[i];
    const Real scale = proj / (r * r * r * Real(n));
    for (int i = 0; i < n; ++i) {
        dx[i] = gain[i] * dy[i] * inv - x[i] * scale;
        dgain[i] += dy[i] * x[i] * inv;
    }
}

// tanh-approximated gelu
template <typename Real>
Real gelu(Real x) {
    const Real c = Real(0.7978845608028654);  // sqrt(2/pi)
    const Real a = Real(0.044715);
    return Real(0.5) * x * (Real(1) + std::tanh(c * (x + a * x * x * x)));
}

template <typename Real>
Real gelu_derivative(Real x) {
    const Real c = Real(0.7978845608028654);
    const Real a = Real(0.044715);
    const Real t = std::tanh(c * (x + a * x * x * x));
    return Real(0.5) * (Real(1) + t) +
           Real(0.5) * x * (Real(1) - t * t) * c * (Real(1) + Real(3) * a * x * x);
}

// pairwise rotation by position * freq[i]; angles always in double
template <typename Real>
void rope_apply(Real* v, double position, std::span<const double> freqs, bool inverse = false) {
    for (size_t i = 0; i < freqs.size(); ++i) {
        const double angle = (inverse ? -position : position) * freqs[i];
        const Real c = static_cast<Real>(std::cos(angle));
        const Real s = static_cast<Real>(std::sin(angle));
        const Real x = v[2 * i];
        const Real y = v[2 * i + 1];
        v[2 * i] = x * c - y * s;
        v[2 * i + 1] = x * s + y * c;
    }
}

}  // namespace pctx::detail
