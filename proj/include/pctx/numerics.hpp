#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pctx {

// Finite stand-in for -inf logits; keeps NaNs out of masked softmax rows.
constexpr float kMaskedLogit = -1e30f;

inline bool is_masked_logit(float v) { return v <= -1e29f; }

// Row-major float32 matrix. All kernels accumulate in a fixed order so
// reruns (and any OpenMP thread count) produce bit-identical results.
struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<float> data;

    RealMatrix() = default;
    RealMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0f) {}

    static RealMatrix identity(int n);

    float* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const float* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
    float& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    float at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    bool operator==(const RealMatrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

struct RotaryParams {
    int head_dim = 0;   // must be even
    float base = 10000.0f;
};

// OpenMP-parallel kernels. Parallelism is over output rows only; each output
// element keeps its serial summation order.
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
RealMatrix softmax_rows(const RealMatrix& logits);

// Serial reference implementations, kept for kernel tests and the benchmark.
namespace reference {
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
RealMatrix softmax_rows(const RealMatrix& logits);
}  // namespace reference

void rms_norm(std::span<const float> v, std::span<const float> gain, float eps,
              std::span<float> out);
std::vector<float> rms_norm(std::span<const float> v, std::span<const float> gain, float eps);

// Per-pair angle i is position * base^(-2i/head_dim); positions may be
// non-integer.
void rope_rotate_inplace(std::span<float> v, float position, const RotaryParams& params);
std::vector<float> rope_rotate(std::span<const float> v, float position,
                               const RotaryParams& params);

// Frequency table so the engine does not recompute pow() per token.
std::vector<double> rope_frequencies(const RotaryParams& params);
void rope_rotate_with(std::span<float> v, float position, std::span<const double> freqs);

}  // namespace pctx
