// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "inkdet/datapipe.hpp"
#include "inkdet/errors.hpp"
#include "inkdet/rng.hpp"

namespace inkdet {

AugmentationPolicy AugmentationPolicy::disabled() {
    AugmentationPolicy p;
    p.enabled = false;
    p.hflip_prob = 0.0;
    p.vflip_prob = 0.0;
    p.color_shift_deg = 0.0;
    p.shear_deg = 0.0;
    p.mosaic_prob = 0.0;
    p.gaussian_noise_sigma = 0.0;
    p.crop_scale_min = 1.0;
    p.crop_scale_max = 1.0;
    return p;
}

AugmentationPolicy schedule_augmentation(int epoch, int total_epochs,
                                         const AugmentationPolicy& policy, int window) {
    if (epoch < 0 || epoch >= total_epochs) {
        throw ContractError("schedule_augmentation: epoch out of range");
    }
    if (epoch < window || epoch >= total_epochs - window) return AugmentationPolicy::disabled();
    return policy;
}

AnnotatedImage hflip(const AnnotatedImage& a) {
    AnnotatedImage out = a;
    const int w = a.image.w;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < a.image.h; ++y) {
            for (int x = 0; x < w; ++x) out.image.at(c, y, x) = a.image.at(c, y, w - 1 - x);
        }
    }
    for (Box& b : out.face_boxes) b.cx = w - b.cx;
    for (Box& b : out.body_boxes) b.cx = w - b.cx;
    return out;
}

AnnotatedImage vflip(const AnnotatedImage& a) {
    AnnotatedImage out = a;
    const int h = a.image.h;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < a.image.w; ++x) out.image.at(c, y, x) = a.image.at(c, h - 1 - y, x);
        }
    }
    for (Box& b : out.face_boxes) b.cy = h - b.cy;
    for (Box& b : out.body_boxes) b.cy = h - b.cy;
    return out;
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return img;
    Image out = img;
    Rng rng(derive_seed(seed, 0x9015eULL));
    for (double& v : out.data) v = clamp01(v + rng.normal(0.0, sigma));
    return out;
}

namespace {

std::vector<Box> shear_boxes(const std::vector<Box>& boxes, double t, double ch, int w, int h) {
    std::vector<Box> out;
    for (const Box& b : boxes) {
        const Corners c = to_corner(b);
        // x offsets at the two box rows; bbox of the sheared corners.
        const double o1 = t * (c.y1 - ch);
        const double o2 = t * (c.y2 - ch);
        const double x1 = std::clamp(c.x1 + std::min(o1, o2), 0.0, static_cast<double>(w));
        const double x2 = std::clamp(c.x2 + std::max(o1, o2), 0.0, static_cast<double>(w));
        const double y1 = std::clamp(c.y1, 0.0, static_cast<double>(h));
        const double y2 = std::clamp(c.y2, 0.0, static_cast<double>(h));
        if (x2 > x1 && y2 > y1) out.push_back(from_corner(x1, y1, x2, y2));
    }
    return out;
}

} // namespace

AnnotatedImage shear_horizontal(const AnnotatedImage& a, double degrees) {
    const double t = std::tan(degrees * M_PI / 180.0);
    const double ch = a.image.h / 2.0;
    AnnotatedImage out = a;
    out.image = Image(a.image.h, a.image.w);
    for (int y = 0; y < a.image.h; ++y) {
        const double off = t * (y + 0.5 - ch);
        for (int x = 0; x < a.image.w; ++x) {
            const double sx = x - off;
            const int x0 = static_cast<int>(std::floor(sx));
            const double f = sx - x0;
            for (int c = 0; c < 3; ++c) {
                const double v0 = (x0 >= 0 && x0 < a.image.w) ? a.image.at(c, y, x0) : 0.0;
                const double v1 = (x0 + 1 >= 0 && x0 + 1 < a.image.w) ? a.image.at(c, y, x0 + 1) : 0.0;
                out.image.at(c, y, x) = v0 * (1.0 - f) + v1 * f;
            }
        }
    }
    out.face_boxes = shear_boxes(a.face_boxes, t, ch, a.image.w, a.image.h);
    out.body_boxes = shear_boxes(a.body_boxes, t, ch, a.image.w, a.image.h);
    out.body_animal_flags.clear();
    return out;
}

namespace {

// Clip boxes to a window, drop below the visibility floor, then apply the
// translate+scale into the output frame.
std::vector<Box> transport_boxes(const std::vector<Box>& boxes, double wx0, double wy0, double wx1,
                                 double wy1, double scale_x, double scale_y, double min_visible) {
    std::vector<Box> out;
    for (const Box& b : boxes) {
        const Corners c = to_corner(b);
        const double x1 = std::max(c.x1, wx0);
        const double y1 = std::max(c.y1, wy0);
        const double x2 = std::min(c.x2, wx1);
        const double y2 = std::min(c.y2, wy1);
        if (!(x2 > x1) || !(y2 > y1)) continue;
        if ((x2 - x1) * (y2 - y1) < min_visible * b.area()) continue;
        out.push_back(from_corner((x1 - wx0) * scale_x, (y1 - wy0) * scale_y, (x2 - wx0) * scale_x,
                                  (y2 - wy0) * scale_y));
    }
    return out;
}

} // namespace

AnnotatedImage crop_resize(const AnnotatedImage& a, int x0, int y0, int side) {
    if (side <= 0 || x0 < 0 || y0 < 0 || x0 + side > a.image.w || y0 + side > a.image.h) {
        throw ContractError("crop_resize: window outside image");
    }
    AnnotatedImage out = a;
    Image window(side, side);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) window.at(c, y, x) = a.image.at(c, y0 + y, x0 + x);
        }
    }
    out.image = resize_bilinear(window, a.image.h, a.image.w);
    const double sx = static_cast<double>(a.image.w) / side;
    const double sy = static_cast<double>(a.image.h) / side;
    out.face_boxes = transport_boxes(a.face_boxes, x0, y0, x0 + side, y0 + side, sx, sy, 0.25);
    out.body_boxes = transport_boxes(a.body_boxes, x0, y0, x0 + side, y0 + side, sx, sy, 0.25);
    out.body_animal_flags.clear();
    return out;
}

AnnotatedImage augment_weak(const AnnotatedImage& a, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x3eacULL));
    return rng.bernoulli(0.5) ? hflip(a) : a;
}

AnnotatedImage augment_strong_tail(const AnnotatedImage& a, std::uint64_t seed,
                                   const AugmentationPolicy& policy) {
    Rng rng(derive_seed(seed, 0x7a11ULL));
    AnnotatedImage out = a;
    out.image = add_gaussian_noise(out.image, policy.gaussian_noise_sigma, rng.next_u64());
    if (policy.color_shift_deg > 0.0) {
        out.image = hue_rotate(out.image,
                               rng.uniform(-policy.color_shift_deg, policy.color_shift_deg));
    }

    const int S = std::min(out.image.h, out.image.w);
    const bool had_labels = !out.face_boxes.empty() || !out.body_boxes.empty();
    for (int attempt = 0; attempt < 5; ++attempt) {
        const double area = rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
        const int side = std::max(8, static_cast<int>(std::lround(S * std::sqrt(area))));
        if (side >= S) break; // identity crop
        const int x0 = static_cast<int>(rng.uniform_int(out.image.w - side + 1));
        const int y0 = static_cast<int>(rng.uniform_int(out.image.h - side + 1));
        AnnotatedImage cropped = crop_resize(out, x0, y0, side);
        if (had_labels && cropped.face_boxes.empty() && cropped.body_boxes.empty()) {
            continue; // crop lost every label; retry with a fresh draw
        }
        return cropped;
    }
    return out;
}

AnnotatedImage augment_strong(const AnnotatedImage& a, std::uint64_t seed,
                              const AugmentationPolicy& policy) {
    return augment_strong_tail(augment_weak(a, seed), derive_seed(seed, 0x5774ULL), policy);
}

AnnotatedImage apply_stage1_augmentation(const AnnotatedImage& a, const AugmentationPolicy& policy,
                                         std::uint64_t seed) {
    if (!policy.enabled) return a;
    Rng rng(derive_seed(seed, 0x517aULL));
    AnnotatedImage out = a;
    if (rng.bernoulli(policy.hflip_prob)) out = hflip(out);
    if (rng.bernoulli(policy.vflip_prob)) out = vflip(out);
    if (policy.color_shift_deg > 0.0) {
        out.image = hue_rotate(out.image, rng.uniform(-policy.color_shift_deg, policy.color_shift_deg));
    }
    if (policy.shear_deg > 0.0) {
        out = shear_horizontal(out, rng.uniform(-policy.shear_deg, policy.shear_deg));
    }
    return out;
}

AnnotatedImage mosaic(const std::vector<AnnotatedImage>& imgs, int out_size, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x305a1cULL));
    // Split point jittered within the middle 50% of each axis.
    const int cx = static_cast<int>(std::lround(out_size * rng.uniform(0.25, 0.75)));
    const int cy = static_cast<int>(std::lround(out_size * rng.uniform(0.25, 0.75)));
    return mosaic_at(imgs, out_size, cx, cy);
}

AnnotatedImage mosaic_at(const std::vector<AnnotatedImage>& imgs, int out_size, int cx, int cy) {
    if (imgs.size() != 4) throw ContractError("mosaic: exactly 4 images required");

    AnnotatedImage out;
    out.image = Image(out_size, out_size);
    out.source = imgs.front().source;
    out.id = imgs.front().id + "_mosaic";

    struct Quad {
        int x0, y0, x1, y1;
    };
    const Quad quads[4] = {{0, 0, cx, cy}, {cx, 0, out_size, cy}, {0, cy, cx, out_size},
                           {cx, cy, out_size, out_size}};

    for (int q = 0; q < 4; ++q) {
        const AnnotatedImage* src = &imgs[q];
        AnnotatedImage scaled;
        const int qw = quads[q].x1 - quads[q].x0;
        const int qh = quads[q].y1 - quads[q].y0;
        if (qw <= 0 || qh <= 0) continue;
        if (src->image.w < qw || src->image.h < qh) {
            // Source smaller than its quadrant: upscale to cover first.
            scaled = *src;
            const double k = std::max(static_cast<double>(qw) / src->image.w,
                                      static_cast<double>(qh) / src->image.h);
            const int nw = static_cast<int>(std::ceil(src->image.w * k));
            const int nh = static_cast<int>(std::ceil(src->image.h * k));
            scaled.image = resize_bilinear(src->image, nh, nw);
            const double sx = static_cast<double>(nw) / src->image.w;
            const double sy = static_cast<double>(nh) / src->image.h;
            for (Box& b : scaled.face_boxes) {
                b = Box{b.cx * sx, b.cy * sy, b.w * sx, b.h * sy};
            }
            for (Box& b : scaled.body_boxes) {
                b = Box{b.cx * sx, b.cy * sy, b.w * sx, b.h * sy};
            }
            src = &scaled;
        }
        // Center-aligned window of quadrant size.
        const int wx0 = (src->image.w - qw) / 2;
        const int wy0 = (src->image.h - qh) / 2;
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < qh; ++y) {
                for (int x = 0; x < qw; ++x) {
                    out.image.at(c, quads[q].y0 + y, quads[q].x0 + x) =
                        src->image.at(c, wy0 + y, wx0 + x);
                }
            }
        }
        auto place = [&](const std::vector<Box>& boxes, std::vector<Box>& dst) {
            std::vector<Box> moved =
                transport_boxes(boxes, wx0, wy0, wx0 + qw, wy0 + qh, 1.0, 1.0, 0.25);
            for (Box& b : moved) {
                b.cx += quads[q].x0;
                b.cy += quads[q].y0;
                dst.push_back(b);
            }
        };
        place(src->face_boxes, out.face_boxes);
        place(src->body_boxes, out.body_boxes);
    }
    out.body_animal_flags.clear();
    return out;
}

} // namespace inkdet
