// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/nn.hpp"

#include <algorithm>
#include <cmath>

namespace inkdet {

void conv2d_forward(const Tensor3& in, const double* weights, const double* bias, int out_c,
                    int ksize, int stride, int pad, bool relu, Tensor3& out) {
    const int oh = (in.h + 2 * pad - ksize) / stride + 1;
    const int ow = (in.w + 2 * pad - ksize) / stride + 1;
    if (out.c != out_c || out.h != oh || out.w != ow) out = Tensor3(out_c, oh, ow);

    for (int o = 0; o < out_c; ++o) {
        double* orow = out.ptr() + static_cast<std::size_t>(o) * oh * ow;
        const double b = bias[o];
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double acc = b;
                const int iy0 = y * stride - pad;
                const int ix0 = x * stride - pad;
                for (int i = 0; i < in.c; ++i) {
                    const double* iplane = in.ptr() + static_cast<std::size_t>(i) * in.h * in.w;
                    const double* wk =
                        weights + ((static_cast<std::size_t>(o) * in.c + i) * ksize) * ksize;
                    for (int ky = 0; ky < ksize; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= in.h) continue;
                        const double* irow = iplane + static_cast<std::size_t>(iy) * in.w;
                        const double* wrow = wk + static_cast<std::size_t>(ky) * ksize;
                        for (int kx = 0; kx < ksize; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            acc += wrow[kx] * irow[ix];
                        }
                    }
                }
                orow[static_cast<std::size_t>(y) * ow + x] = relu ? std::max(acc, 0.0) : acc;
            }
        }
    }
}

void conv2d_backward(const Tensor3& in, const double* weights, int out_c, int ksize, int stride,
                     int pad, bool relu, const Tensor3& out, const Tensor3& d_out,
                     double* d_weights, double* d_bias, Tensor3& d_in) {
    const int oh = out.h;
    const int ow = out.w;
    if (d_in.c != in.c || d_in.h != in.h || d_in.w != in.w) d_in = Tensor3(in.c, in.h, in.w);

    for (int o = 0; o < out_c; ++o) {
        const double* oplane = out.ptr() + static_cast<std::size_t>(o) * oh * ow;
        const double* gplane = d_out.ptr() + static_cast<std::size_t>(o) * oh * ow;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double g = gplane[static_cast<std::size_t>(y) * ow + x];
                if (g == 0.0) continue;
                if (relu && oplane[static_cast<std::size_t>(y) * ow + x] <= 0.0) continue;
                d_bias[o] += g;
                const int iy0 = y * stride - pad;
                const int ix0 = x * stride - pad;
                for (int i = 0; i < in.c; ++i) {
                    const double* iplane = in.ptr() + static_cast<std::size_t>(i) * in.h * in.w;
                    double* diplane = d_in.ptr() + static_cast<std::size_t>(i) * in.h * in.w;
                    const std::size_t wbase =
                        ((static_cast<std::size_t>(o) * in.c + i) * ksize) * ksize;
                    for (int ky = 0; ky < ksize; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= in.h) continue;
                        for (int kx = 0; kx < ksize; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            const std::size_t widx = wbase + static_cast<std::size_t>(ky) * ksize + kx;
                            const std::size_t iidx = static_cast<std::size_t>(iy) * in.w + ix;
                            d_weights[widx] += g * iplane[iidx];
                            diplane[iidx] += g * weights[widx];
                        }
                    }
                }
            }
        }
    }
}

} // namespace inkdet
