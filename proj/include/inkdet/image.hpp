// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace inkdet {

/// Planar RGB raster, values in [0, 1], channel-major layout
/// (c * h * w + y * w + x). Planar matches the conv input layout so training
/// never reshuffles pixels.
struct Image {
    int h = 0;
    int w = 0;
    std::vector<double> data; // 3 * h * w

    Image() = default;
    Image(int height, int width, double fill = 0.0)
        : h(height), w(width), data(static_cast<std::size_t>(3) * height * width, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * h + y) * w + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * h + y) * w + x];
    }
};

/// 8-bit binary PPM (P6). Quantization rounds half away from zero.
void save_ppm(const Image& img, const std::string& path);
Image load_ppm(const std::string& path);

Image resize_bilinear(const Image& src, int out_h, int out_w);

/// Rectangle outline, clipped to the raster. Coordinates are corner-form pixels.
void draw_rect(Image& img, double x1, double y1, double x2, double y2, double r, double g,
               double b, int thickness = 1);

/// 3x5 bitmap digits; supports "0123456789.". Used for score tags on renders.
void draw_label(Image& img, int x, int y, const std::string& text, double r, double g, double b);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

} // namespace inkdet
