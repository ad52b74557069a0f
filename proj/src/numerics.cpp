#include "pctx/numerics.hpp"

#include <cmath>
#include <string>

#include "pctx/error.hpp"

namespace pctx {

RealMatrix RealMatrix::identity(int n) {
    RealMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0f;
    return m;
}

namespace {

void check_matmul_shapes(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul: inner dimensions differ (" + std::to_string(a.cols) +
                             " vs " + std::to_string(b.rows) + ")");
    }
}

// ikj order: for each output element the k-sum runs ascending, so the result
// does not depend on how rows are scheduled across threads.
inline void matmul_row(const RealMatrix& a, const RealMatrix& b, RealMatrix& c, int i) {
    float* crow = c.row(i);
    const float* arow = a.row(i);
    for (int k = 0; k < a.cols; ++k) {
        const float aik = arow[k];
        const float* brow = b.row(k);
        for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
}

inline void softmax_row(const RealMatrix& logits, RealMatrix& out, int r) {
    const float* in = logits.row(r);
    float* o = out.row(r);
    const int n = logits.cols;

    float maxv = kMaskedLogit;
    bool any = false;
    for (int j = 0; j < n; ++j) {
        if (!is_masked_logit(in[j])) {
            any = true;
            if (in[j] > maxv) maxv = in[j];
        }
    }
    if (!any) {
        throw DegenerateRowError("softmax_rows: row " + std::to_string(r) +
                                 " has every entry masked");
    }

    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        if (is_masked_logit(in[j])) continue;
        sum += std::exp(static_cast<double>(in[j]) - static_cast<double>(maxv));
    }
    for (int j = 0; j < n; ++j) {
        if (is_masked_logit(in[j])) {
            o[j] = 0.0f;
        } else {
            o[j] = static_cast<float>(
                std::exp(static_cast<double>(in[j]) - static_cast<double>(maxv)) / sum);
        }
    }
}

}  // namespace

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    check_matmul_shapes(a, b);
    RealMatrix c(a.rows, b.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
    return c;
}

RealMatrix softmax_rows(const RealMatrix& logits) {
    RealMatrix out(logits.rows, logits.cols);
    // Throwing out of a parallel region is undefined; scan for degenerate
    // rows up front.
    for (int r = 0; r < logits.rows; ++r) {
        bool any = false;
        const float* in = logits.row(r);
        for (int j = 0; j < logits.cols && !any; ++j) any = !is_masked_logit(in[j]);
        if (!any) {
            throw DegenerateRowError("softmax_rows: row " + std::to_string(r) +
                                     " has every entry masked");
        }
    }
#pragma omp parallel for schedule(static)
    for (int r = 0; r < logits.rows; ++r) softmax_row(logits, out, r);
    return out;
}

namespace reference {

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    check_matmul_shapes(a, b);
    RealMatrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
    return c;
}

RealMatrix softmax_rows(const RealMatrix& logits) {
    RealMatrix out(logits.rows, logits.cols);
    for (int r = 0; r < logits.rows; ++r) softmax_row(logits, out, r);
    return out;
}

}  // namespace reference

void rms_norm(std::span<const float> v, std::span<const float> gain, float eps,
              std::span<float> out) {
    if (v.size() != gain.size() || v.size() != out.size()) {
        throw DimensionError("rms_norm: length mismatch");
    }
    double ms = 0.0;
    for (float x : v) ms += static_cast<double>(x) * static_cast<double>(x);
    ms = ms / static_cast<double>(v.size()) + static_cast<double>(eps);
    const float scale = static_cast<float>(1.0 / std::sqrt(ms));
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * gain[i] * scale;
}

std::vector<float> rms_norm(std::span<const float> v, std::span<const float> gain, float eps) {
    std::vector<float> out(v.size());
    rms_norm(v, gain, eps, out);
    return out;
}

std::vector<double> rope_frequencies(const RotaryParams& params) {
    if (params.head_dim <= 0 || params.head_dim % 2 != 0) {
        throw ConfigError("rope: head_dim must be a positive even number");
    }
    if (!(params.base > 1.0f)) {
        throw ConfigError("rope: base must exceed 1");
    }
    std::vector<double> freqs(params.head_dim / 2);
    for (size_t i = 0; i < freqs.size(); ++i) {
        freqs[i] = std::pow(static_cast<double>(params.base),
                            -2.0 * static_cast<double>(i) / params.head_dim);
    }
    return freqs;
}

void rope_rotate_with(std::span<float> v, float position, std::span<const double> freqs) {
    for (size_t i = 0; i < freqs.size(); ++i) {
        const double angle = static_cast<double>(position) * freqs[i];
        const float c = static_cast<float>(std::cos(angle));
        const float s = static_cast<float>(std::sin(angle));
        const float a = v[2 * i];
        const float b = v[2 * i + 1];
        v[2 * i] = a * c - b * s;
        v[2 * i + 1] = a * s + b * c;
    }
}

void rope_rotate_inplace(std::span<float> v, float position, const RotaryParams& params) {
    if (static_cast<int>(v.size()) != params.head_dim) {
        throw DimensionError("rope_rotate: vector length differs from head_dim");
    }
    const auto freqs = rope_frequencies(params);
    rope_rotate_with(v, position, freqs);
}

std::vector<float> rope_rotate(std::span<const float> v, float position,
                               const RotaryParams& params) {
    std::vector<float> out(v.begin(), v.end());
    rope_rotate_inplace(out, position, params);
    return out;
}

}  // namespace pctx
