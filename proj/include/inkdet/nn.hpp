// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace inkdet {

/// Channel-major activation block (c * h * w).
struct Tensor3 {
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int channels, int height, int width)
        : c(channels), h(height), w(width),
          data(static_cast<std::size_t>(channels) * height * width, 0.0) {}

    std::size_t size() const { return data.size(); }
    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }
    double& at(int ci, int y, int x) {
        return data[(static_cast<std::size_t>(ci) * h + y) * w + x];
    }
    double at(int ci, int y, int x) const {
        return data[(static_cast<std::size_t>(ci) * h + y) * w + x];
    }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

/// out[o,y,x] = b[o] + sum_{i,ky,kx} w[o,i,ky,kx] * in[i, y*stride+ky-pad, x*stride+kx-pad]
/// Weights are o-major: ((o * in_c + i) * k + ky) * k + kx.
void conv2d_forward(const Tensor3& in, const double* weights, const double* bias, int out_c,
                    int ksize, int stride, int pad, bool relu, Tensor3& out);

/// Accumulates into d_weights / d_bias / d_in (callers zero them per step).
/// `out` must be the forward result; when relu was applied the mask is
/// recovered from out > 0.
void conv2d_backward(const Tensor3& in, const double* weights, int out_c, int ksize, int stride,
                     int pad, bool relu, const Tensor3& out, const Tensor3& d_out,
                     double* d_weights, double* d_bias, Tensor3& d_in);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace inkdet
