// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "inkdet/datapipe.hpp"
#include "inkdet/errors.hpp"
#include "inkdet/rng.hpp"

namespace inkdet {

namespace {

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx <= 0.0 ? 0.0 : d / mx;
    if (d <= 0.0) {
        h = 0.0;
    } else if (mx == r) {
        h = 60.0 * std::fmod((g - b) / d, 6.0);
    } else if (mx == g) {
        h = 60.0 * ((b - r) / d + 2.0);
    } else {
        h = 60.0 * ((r - g) / d + 4.0);
    }
    if (h < 0.0) h += 360.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    const double c = v * s;
    const double hp = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0) / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1) {
        r1 = c; g1 = x;
    } else if (hp < 2) {
        r1 = x; g1 = c;
    } else if (hp < 3) {
        g1 = c; b1 = x;
    } else if (hp < 4) {
        g1 = x; b1 = c;
    } else if (hp < 5) {
        r1 = x; b1 = c;
    } else {
        r1 = c; b1 = x;
    }
    const double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

double luminance(const Image& img, int y, int x) {
    return 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
}

Image posterize(const Image& in, int levels) {
    Image out = in;
    const double L = std::max(2, levels) - 1.0;
    for (double& v : out.data) v = std::round(clamp01(v) * L) / L;
    return out;
}

// Darkens Sobel edges; the procedural stand-in for ink outlines.
Image edge_overlay(const Image& in, double strength) {
    Image out = in;
    for (int y = 1; y + 1 < in.h; ++y) {
        for (int x = 1; x + 1 < in.w; ++x) {
            const double gx = luminance(in, y - 1, x + 1) + 2 * luminance(in, y, x + 1) +
                              luminance(in, y + 1, x + 1) - luminance(in, y - 1, x - 1) -
                              2 * luminance(in, y, x - 1) - luminance(in, y + 1, x - 1);
            const double gy = luminance(in, y + 1, x - 1) + 2 * luminance(in, y + 1, x) +
                              luminance(in, y + 1, x + 1) - luminance(in, y - 1, x - 1) -
                              2 * luminance(in, y - 1, x) - luminance(in, y - 1, x + 1);
            const double m = std::min(1.0, std::sqrt(gx * gx + gy * gy));
            const double k = 1.0 - strength * m;
            for (int c = 0; c < 3; ++c) out.at(c, y, x) = clamp01(in.at(c, y, x) * k);
        }
    }
    return out;
}

Image tint(const Image& in, double kr, double kg, double kb) {
    Image out = in;
    for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
            out.at(0, y, x) = clamp01(in.at(0, y, x) * kr);
            out.at(1, y, x) = clamp01(in.at(1, y, x) * kg);
            out.at(2, y, x) = clamp01(in.at(2, y, x) * kb);
        }
    }
    return out;
}

Image saturate(const Image& in, double factor) {
    Image out = in;
    for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
            double h, s, v;
            rgb_to_hsv(in.at(0, y, x), in.at(1, y, x), in.at(2, y, x), h, s, v);
            s = clamp01(s * factor);
            double r, g, b;
            hsv_to_rgb(h, s, v, r, g, b);
            out.at(0, y, x) = r;
            out.at(1, y, x) = g;
            out.at(2, y, x) = b;
        }
    }
    return out;
}

Image box_blur(const Image& in) {
    Image out = in;
    for (int c = 0; c < 3; ++c) {
        for (int y = 1; y + 1 < in.h; ++y) {
            for (int x = 1; x + 1 < in.w; ++x) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) acc += in.at(c, y + dy, x + dx);
                }
                out.at(c, y, x) = acc / 9.0;
            }
        }
    }
    return out;
}

Image halftone(const Image& in) {
    Image out = in;
    for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
            if (y % 3 == 1 && x % 3 == 1 && luminance(in, y, x) < 0.55) {
                for (int c = 0; c < 3; ++c) out.at(c, y, x) *= 0.35;
            }
        }
    }
    return out;
}

StyleTransform procedural(const std::string& name,
                          std::function<Image(const Image&)> fn) {
    StyleTransform t;
    t.name = name;
    t.apply = [fn = std::move(fn)](const Image& img, const std::string&, std::uint64_t) {
        return fn(img);
    };
    return t;
}

} // namespace

StyleBank make_procedural_bank(StyleMode mode, int top_k) {
    StyleBank bank;
    bank.mode = mode;
    bank.top_k = top_k;
    // Ranked: the first five slots are the strongest flattening/outlining
    // variants and back the top_k mode.
    bank.transforms = {
        procedural("whitebox", [](const Image& i) { return edge_overlay(posterize(i, 5), 0.55); }),
        procedural("hosoda", [](const Image& i) { return edge_overlay(posterize(i, 4), 0.65); }),
        procedural("kh",
                   [](const Image& i) { return saturate(edge_overlay(posterize(i, 6), 0.45), 1.2); }),
        procedural("hayao",
                   [](const Image& i) { return tint(edge_overlay(posterize(i, 5), 0.5), 1.06, 1.02, 0.95); }),
        procedural("shinkai",
                   [](const Image& i) { return tint(edge_overlay(posterize(i, 6), 0.4), 0.95, 1.0, 1.1); }),
        procedural("miyazaki",
                   [](const Image& i) { return tint(edge_overlay(posterize(i, 5), 0.5), 0.97, 1.08, 0.97); }),
        procedural("as", [](const Image& i) { return halftone(edge_overlay(posterize(i, 5), 0.4)); }),
        procedural("vangogh", [](const Image& i) { return posterize(hue_rotate(i, 25.0), 4); }),
        procedural("cezanne",
                   [](const Image& i) { return tint(posterize(i, 3), 1.08, 1.0, 0.9); }),
        procedural("monet", [](const Image& i) { return saturate(box_blur(i), 0.75); }),
        procedural("paprika", [](const Image& i) { return edge_overlay(posterize(i, 2), 0.7); }),
    };
    return bank;
}

StyleBank make_single_style_bank(const std::string& slot_name) {
    StyleBank all = make_procedural_bank(StyleMode::single);
    for (auto& t : all.transforms) {
        if (t.name == slot_name) {
            StyleBank bank;
            bank.mode = StyleMode::single;
            bank.transforms = {std::move(t)};
            return bank;
        }
    }
    throw ConfigError("unknown style slot: " + slot_name);
}

StyleTransform make_precomputed_style(const std::string& name, const std::string& dir) {
    StyleTransform t;
    t.name = name;
    t.apply = [dir](const Image& img, const std::string& id, std::uint64_t) {
        if (id.empty()) return img;
        const std::filesystem::path p = std::filesystem::path(dir) / (id + ".ppm");
        if (!std::filesystem::exists(p)) return img;
        Image styled = load_ppm(p.string());
        if (styled.h != img.h || styled.w != img.w) styled = resize_bilinear(styled, img.h, img.w);
        return styled;
    };
    return t;
}

Image apply_style_for_id(const Image& img, const std::string& id, const StyleBank& bank,
                         std::uint64_t seed) {
    if (bank.mode == StyleMode::none) return img;
    if (bank.transforms.empty()) throw ContractError("apply_style: empty style bank");

    std::size_t pool = bank.transforms.size();
    if (bank.mode == StyleMode::single) {
        pool = 1;
    } else if (bank.mode == StyleMode::top_k) {
        pool = std::min<std::size_t>(std::max(bank.top_k, 1), pool);
    }
    Rng rng(derive_seed(seed, 0x57171eULL));
    const std::size_t pick = pool == 1 ? 0 : rng.uniform_int(pool);
    return bank.transforms[pick].apply(img, id, seed);
}

Image apply_style(const Image& img, const StyleBank& bank, std::uint64_t seed) {
    return apply_style_for_id(img, "", bank, seed);
}

Image hue_rotate(const Image& img, double degrees) {
    // Linear rotation about the gray axis (the standard huerotate matrix);
    // one mat3 per image instead of an HSV roundtrip per pixel.
    const double c = std::cos(degrees * M_PI / 180.0);
    const double s = std::sin(degrees * M_PI / 180.0);
    const double m[3][3] = {
        {0.213 + c * 0.787 - s * 0.213, 0.715 - c * 0.715 - s * 0.715,
         0.072 - c * 0.072 + s * 0.928},
        {0.213 - c * 0.213 + s * 0.143, 0.715 + c * 0.285 + s * 0.140,
         0.072 - c * 0.072 - s * 0.283},
        {0.213 - c * 0.213 - s * 0.787, 0.715 - c * 0.715 + s * 0.715,
         0.072 + c * 0.928 + s * 0.072},
    };
    Image out = img;
    const std::size_t n = static_cast<std::size_t>(img.h) * img.w;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = img.data[i];
        const double g = img.data[n + i];
        const double b = img.data[2 * n + i];
        out.data[i] = clamp01(m[0][0] * r + m[0][1] * g + m[0][2] * b);
        out.data[n + i] = clamp01(m[1][0] * r + m[1][1] * g + m[1][2] * b);
        out.data[2 * n + i] = clamp01(m[2][0] * r + m[2][1] * g + m[2][2] * b);
    }
    return out;
}

} // namespace inkdet
