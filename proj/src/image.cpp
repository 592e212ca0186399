// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "inkdet/errors.hpp"

namespace inkdet {

void save_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_ppm: cannot open " + path);
    out << "P6\n" << img.w << " " << img.h << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(img.w) * 3);
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = clamp01(img.at(c, y, x));
                row[static_cast<std::size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("save_ppm: write failed for " + path);
}

namespace {

int read_ppm_token(std::istream& in) {
    // Skips whitespace and '#' comments between header tokens.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF) throw IoError("load_ppm: truncated header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

} // namespace

Image load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_ppm: cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '6') throw IoError("load_ppm: not a P6 file: " + path);
    const int w = read_ppm_token(in);
    const int h = read_ppm_token(in);
    const int maxval = read_ppm_token(in);
    if (w <= 0 || h <= 0 || maxval != 255) throw IoError("load_ppm: unsupported header in " + path);

    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw IoError("load_ppm: truncated pixel data in " + path);
    }
    Image img(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t base = (static_cast<std::size_t>(y) * w + x) * 3;
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = raw[base + c] / 255.0;
            }
        }
    }
    return img;
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
    Image dst(out_h, out_w);
    if (src.h == out_h && src.w == out_w) {
        dst.data = src.data;
        return dst;
    }
    const double sy = static_cast<double>(src.h) / out_h;
    const double sx = static_cast<double>(src.w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.h - 1);
        const int y1 = std::min(y0 + 1, src.h - 1);
        const double wy = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < out_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.w - 1);
            const int x1 = std::min(x0 + 1, src.w - 1);
            const double wx = std::clamp(fx - x0, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                const double top = src.at(c, y0, x0) * (1.0 - wx) + src.at(c, y0, x1) * wx;
                const double bot = src.at(c, y1, x0) * (1.0 - wx) + src.at(c, y1, x1) * wx;
                dst.at(c, y, x) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return dst;
}

namespace {

void fill_span(Image& img, int y0, int y1, int x0, int x1, double r, double g, double b) {
    y0 = std::max(y0, 0);
    x0 = std::max(x0, 0);
    y1 = std::min(y1, img.h - 1);
    x1 = std::min(x1, img.w - 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            img.at(0, y, x) = r;
            img.at(1, y, x) = g;
            img.at(2, y, x) = b;
        }
    }
}

} // namespace

void draw_rect(Image& img, double x1, double y1, double x2, double y2, double r, double g,
               double b, int thickness) {
    const int ix1 = static_cast<int>(std::lround(x1));
    const int iy1 = static_cast<int>(std::lround(y1));
    const int ix2 = static_cast<int>(std::lround(x2));
    const int iy2 = static_cast<int>(std::lround(y2));
    const int t = std::max(1, thickness);
    fill_span(img, iy1, iy1 + t - 1, ix1, ix2, r, g, b);           // top
    fill_span(img, iy2 - t + 1, iy2, ix1, ix2, r, g, b);           // bottom
    fill_span(img, iy1, iy2, ix1, ix1 + t - 1, r, g, b);           // left
    fill_span(img, iy1, iy2, ix2 - t + 1, ix2, r, g, b);           // right
}

namespace {

// 3x5 glyphs, row-major bits (msb = leftmost of 3).
struct Glyph {
    char ch;
    unsigned char rows[5];
};

constexpr Glyph kGlyphs[] = {
    {'0', {0b111, 0b101, 0b101, 0b101, 0b111}},
    {'1', {0b010, 0b110, 0b010, 0b010, 0b111}},
    {'2', {0b111, 0b001, 0b111, 0b100, 0b111}},
    {'3', {0b111, 0b001, 0b111, 0b001, 0b111}},
    {'4', {0b101, 0b101, 0b111, 0b001, 0b001}},
    {'5', {0b111, 0b100, 0b111, 0b001, 0b111}},
    {'6', {0b111, 0b100, 0b111, 0b101, 0b111}},
    {'7', {0b111, 0b001, 0b010, 0b010, 0b010}},
    {'8', {0b111, 0b101, 0b111, 0b101, 0b111}},
    {'9', {0b111, 0b101, 0b111, 0b001, 0b111}},
    {'.', {0b000, 0b000, 0b000, 0b000, 0b010}},
};

const Glyph* find_glyph(char ch) {
    for (const auto& g : kGlyphs) {
        if (g.ch == ch) return &g;
    }
    return nullptr;
}

} // namespace

void draw_label(Image& img, int x, int y, const std::string& text, double r, double g, double b) {
    int cx = x;
    for (char ch : text) {
        const Glyph* gl = find_glyph(ch);
        if (gl != nullptr) {
            for (int gy = 0; gy < 5; ++gy) {
                for (int gx = 0; gx < 3; ++gx) {
                    if ((gl->rows[gy] >> (2 - gx)) & 1) {
                        const int px = cx + gx;
                        const int py = y + gy;
                        if (px >= 0 && px < img.w && py >= 0 && py < img.h) {
                            img.at(0, py, px) = r;
                            img.at(1, py, px) = g;
                            img.at(2, py, px) = b;
                        }
                    }
                }
            }
        }
        cx += 4;
    }
}

} // namespace inkdet
