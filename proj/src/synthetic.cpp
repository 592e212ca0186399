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

// Deterministic per-pixel value noise; independent of raster order.
double hash_noise(std::uint64_t seed, int x, int y, int tag) {
    std::uint64_t z = seed ^ (static_cast<std::uint64_t>(x) * 0x9e3779b97f4a7c15ull) ^
                      (static_cast<std::uint64_t>(y) * 0xc2b2ae3d27d4eb4full) ^
                      (static_cast<std::uint64_t>(tag) * 0x165667b19e3779f9ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

struct Rgb {
    double r, g, b;
};

// Squarish-superellipse body test; < 1 means inside.
double body_field(const CharacterSpec& ch, double x, double y) {
    const double nx = (x - ch.body_cx) / (ch.body_w / 2.0);
    const double ny = (y - ch.body_cy) / (ch.body_h / 2.0);
    return nx * nx * nx * nx + ny * ny * ny * ny;
}

double face_field(const CharacterSpec& ch, double x, double y) {
    const double nx = (x - ch.face_cx) / (ch.face_w / 2.0);
    const double ny = (y - ch.face_cy) / (ch.face_h / 2.0);
    return nx * nx + ny * ny;
}

double coverage(const std::function<double(double, double)>& field, int x, int y, double grow) {
    // 2x2 supersampled inside-coverage; grow > 1 inflates the shape.
    int hits = 0;
    for (int sy = 0; sy < 2; ++sy) {
        for (int sx = 0; sx < 2; ++sx) {
            const double px = x + 0.25 + 0.5 * sx;
            const double py = y + 0.25 + 0.5 * sy;
            if (field(px, py) < grow) ++hits;
        }
    }
    return hits / 4.0;
}

void blend(Image& img, int x, int y, const Rgb& c, double alpha) {
    if (alpha <= 0.0) return;
    img.at(0, y, x) = clamp01(img.at(0, y, x) * (1.0 - alpha) + c.r * alpha);
    img.at(1, y, x) = clamp01(img.at(1, y, x) * (1.0 - alpha) + c.g * alpha);
    img.at(2, y, x) = clamp01(img.at(2, y, x) * (1.0 - alpha) + c.b * alpha);
}

Rgb hsv(double h, double s, double v) {
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
    return {r1 + m, g1 + m, b1 + m};
}

} // namespace

SceneGraph sample_scene(int image_size, double animal_prob, double tiny_face_prob,
                        std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x5ce9eULL));
    SceneGraph scene;
    scene.drawing_substyle = static_cast<int>(rng.uniform_int(4));

    const double S = image_size;
    const int n_chars = 1 + static_cast<int>(rng.uniform_int(2));
    for (int i = 0; i < n_chars; ++i) {
        CharacterSpec ch;
        for (int attempt = 0; attempt < 8; ++attempt) {
            ch.body_h = S * rng.uniform(0.42, 0.68);
            ch.body_w = ch.body_h * rng.uniform(0.45, 0.65);
            ch.body_cx = rng.uniform(ch.body_w / 2.0 + 2.0, S - ch.body_w / 2.0 - 2.0);
            ch.body_cy = rng.uniform(ch.body_h / 2.0 + 2.0, S - ch.body_h / 2.0 - 2.0);
            bool clash = false;
            for (const auto& other : scene.characters) {
                const Box a{ch.body_cx, ch.body_cy, ch.body_w, ch.body_h};
                const Box b{other.body_cx, other.body_cy, other.body_w, other.body_h};
                if (iou(a, b) > 0.2) {
                    clash = true;
                    break;
                }
            }
            if (!clash) break;
        }
        ch.animal = rng.bernoulli(animal_prob);
        ch.tiny_face = rng.bernoulli(tiny_face_prob);
        if (ch.tiny_face) {
            ch.face_w = 1.0;
            ch.face_h = 1.0;
        } else {
            ch.face_w = ch.body_w * rng.uniform(0.62, 0.85);
            ch.face_h = ch.face_w * rng.uniform(0.9, 1.15);
        }
        ch.face_cx = ch.body_cx + ch.body_w * rng.uniform(-0.05, 0.05);
        // the head pokes above the torso so its silhouette stays visible
        ch.face_cy = ch.body_cy - ch.body_h / 2.0 + ch.face_h * rng.uniform(0.25, 0.4);
        // Keep every shape strictly inside the canvas.
        ch.face_cx = std::clamp(ch.face_cx, ch.face_w / 2.0 + 1.0, S - ch.face_w / 2.0 - 1.0);
        ch.face_cy = std::clamp(ch.face_cy, ch.face_h / 2.0 + 1.0, S - ch.face_h / 2.0 - 1.0);
        scene.characters.push_back(ch);
    }
    return scene;
}

AnnotatedImage render_scene(const SceneGraph& scene, int image_size, bool drawing_style,
                            std::uint64_t seed, const std::string& id) {
    const int S = image_size;
    Rng rng(derive_seed(seed, 0xd5a17ULL));
    AnnotatedImage out;
    out.id = id;
    out.source = drawing_style ? ImageSource::drawing : ImageSource::natural;
    out.image = Image(S, S);
    Image& img = out.image;

    const int sub = scene.drawing_substyle;

    // --- background ---
    if (drawing_style) {
        static const Rgb kBg[4] = {{0.91, 0.88, 0.78}, {0.97, 0.96, 0.94}, {1.0, 1.0, 1.0},
                                   {0.75, 0.85, 0.9}};
        const Rgb bg = kBg[sub];
        for (int y = 0; y < S; ++y) {
            for (int x = 0; x < S; ++x) blend(img, x, y, bg, 1.0);
        }
        if (sub == 0) {
            // ground band
            const int gy = static_cast<int>(S * 0.8);
            for (int y = gy; y < S; ++y) {
                for (int x = 0; x < S; ++x) blend(img, x, y, {0.8, 0.72, 0.5}, 1.0);
            }
        }
    } else {
        const double sky_h = rng.uniform(190.0, 230.0);
        const double gnd_h = rng.uniform(60.0, 110.0);
        for (int y = 0; y < S; ++y) {
            const double t = static_cast<double>(y) / S;
            const Rgb sky = hsv(sky_h, 0.35, 0.85);
            const Rgb gnd = hsv(gnd_h, 0.45, 0.5);
            for (int x = 0; x < S; ++x) {
                Rgb c{sky.r * (1 - t) + gnd.r * t, sky.g * (1 - t) + gnd.g * t,
                      sky.b * (1 - t) + gnd.b * t};
                c.r = clamp01(c.r + 0.14 * (hash_noise(seed, x, y, 1) - 0.5));
                c.g = clamp01(c.g + 0.14 * (hash_noise(seed, x, y, 2) - 0.5));
                c.b = clamp01(c.b + 0.14 * (hash_noise(seed, x, y, 3) - 0.5));
                blend(img, x, y, c, 1.0);
            }
        }
    }

    // --- background distractors (no annotations) ---
    const int n_distract = static_cast<int>(rng.uniform_int(3));
    for (int d = 0; d < n_distract; ++d) {
        const double dw = S * rng.uniform(0.08, 0.2);
        const double dh = S * rng.uniform(0.2, 0.45);
        const double dx = rng.uniform(dw, S - dw);
        const double dy = rng.uniform(dh, S - dh);
        const Rgb dc = drawing_style ? (sub == 2 ? Rgb{0.55, 0.55, 0.55}
                                                 : hsv(rng.uniform(0.0, 360.0), 0.5, 0.55))
                                     : hsv(rng.uniform(20.0, 140.0), 0.5, 0.45);
        // Thin triangular wedge (tree/rock silhouette).
        for (int y = static_cast<int>(dy - dh / 2); y < static_cast<int>(dy + dh / 2); ++y) {
            if (y < 0 || y >= S) continue;
            const double t = (y - (dy - dh / 2)) / dh;
            const double half = 0.5 * dw * t;
            for (int x = static_cast<int>(dx - half); x <= static_cast<int>(dx + half); ++x) {
                if (x < 0 || x >= S) continue;
                double shade = 1.0;
                if (!drawing_style) shade = 0.8 + 0.3 * hash_noise(seed, x, y, 7 + d);
                blend(img, x, y, {dc.r * shade, dc.g * shade, dc.b * shade}, 0.9);
            }
        }
    }

    // --- characters ---
    for (std::size_t ci = 0; ci < scene.characters.size(); ++ci) {
        const CharacterSpec& ch = scene.characters[ci];
        const double body_hue = rng.uniform(0.0, 360.0);
        Rgb body_fill, face_fill, line{0.08, 0.07, 0.1};
        double outline = 0.0; // relative inflation of the outline shell
        if (drawing_style) {
            switch (sub) {
            case 0:
                body_fill = hsv(body_hue, 0.8, 0.75);
                face_fill = {0.98, 0.85, 0.72};
                outline = 0.3;
                break;
            case 1:
                body_fill = hsv(body_hue, 0.35, 0.92);
                face_fill = {0.99, 0.9, 0.82};
                line = {0.25, 0.22, 0.28};
                outline = 0.16;
                break;
            case 2: // monochrome manga
                body_fill = {0.97, 0.97, 0.97};
                face_fill = {1.0, 1.0, 1.0};
                line = {0.02, 0.02, 0.02};
                outline = 0.3;
                break;
            default:
                body_fill = hsv(body_hue, 0.9, 0.85);
                face_fill = {0.95, 0.8, 0.66};
                outline = 0.0;
                break;
            }
        } else {
            body_fill = hsv(body_hue, 0.6, 0.5);
            face_fill = {0.93, 0.76, 0.58};
        }

        auto bf = [&](double x, double y) { return body_field(ch, x, y); };
        auto ff = [&](double x, double y) { return face_field(ch, x, y); };

        const Corners bb = to_corner(Box{ch.body_cx, ch.body_cy, ch.body_w, ch.body_h});
        const Corners fb = to_corner(Box{ch.face_cx, ch.face_cy, ch.face_w, ch.face_h});
        const int x0 = std::max(0, static_cast<int>(std::min(bb.x1, fb.x1)) - 2);
        const int x1 = std::min(S - 1, static_cast<int>(std::max(bb.x2, fb.x2)) + 2);
        const int y0 = std::max(0, static_cast<int>(std::min(bb.y1, fb.y1)) - 2);
        const int y1 = std::min(S - 1, static_cast<int>(std::max(bb.y2, fb.y2)) + 2);

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                // outline shell first, fills on top
                if (outline > 0.0) {
                    const double ob = coverage(bf, x, y, 1.0 + outline);
                    if (ob > 0.0) blend(img, x, y, line, ob);
                }
                double cb = coverage(bf, x, y, 1.0);
                if (cb > 0.0) {
                    Rgb c = body_fill;
                    if (!drawing_style) {
                        const double sh = 0.72 + 0.28 * (x - bb.x1) / std::max(1.0, ch.body_w) +
                                          0.18 * (hash_noise(seed, x, y, 11) - 0.5);
                        c = {clamp01(c.r * sh), clamp01(c.g * sh), clamp01(c.b * sh)};
                    } else if (sub == 2 && ((x % 3 == 1 && y % 3 == 1))) {
                        c = {0.55, 0.55, 0.55}; // screentone dots
                    }
                    blend(img, x, y, c, cb);
                }
                if (!ch.tiny_face) {
                    if (outline > 0.0) {
                        const double of = coverage(ff, x, y, 1.0 + outline);
                        if (of > 0.0) blend(img, x, y, line, of);
                    }
                    const double cf = coverage(ff, x, y, 1.0);
                    if (cf > 0.0) {
                        Rgb c = face_fill;
                        if (!drawing_style) {
                            const double rr = ff(x + 0.5, y + 0.5);
                            const double sh = 1.0 - 0.25 * rr +
                                              0.1 * (hash_noise(seed, x, y, 13) - 0.5);
                            c = {clamp01(c.r * sh), clamp01(c.g * sh), clamp01(c.b * sh)};
                        }
                        blend(img, x, y, c, cf);
                    }
                }
            }
        }

        // Face features and ears stay inside the face ellipse.
        if (!ch.tiny_face) {
            auto dot = [&](double cx, double cy, double rad, const Rgb& c) {
                const int dx0 = std::max(0, static_cast<int>(cx - rad - 1));
                const int dx1 = std::min(S - 1, static_cast<int>(cx + rad + 1));
                const int dy0 = std::max(0, static_cast<int>(cy - rad - 1));
                const int dy1 = std::min(S - 1, static_cast<int>(cy + rad + 1));
                for (int y = dy0; y <= dy1; ++y) {
                    for (int x = dx0; x <= dx1; ++x) {
                        const double dd = (x + 0.5 - cx) * (x + 0.5 - cx) +
                                          (y + 0.5 - cy) * (y + 0.5 - cy);
                        if (dd <= rad * rad) blend(img, x, y, c, 1.0);
                    }
                }
            };
            const Rgb feat = drawing_style ? line : Rgb{0.12, 0.08, 0.08};
            const double er = std::max(1.1, 0.11 * ch.face_w);
            dot(ch.face_cx - 0.25 * ch.face_w, ch.face_cy - 0.08 * ch.face_h, er, feat);
            dot(ch.face_cx + 0.25 * ch.face_w, ch.face_cy - 0.08 * ch.face_h, er, feat);
            // mouth bar
            const int mw = std::max(1, static_cast<int>(0.3 * ch.face_w));
            const int my = static_cast<int>(ch.face_cy + 0.28 * ch.face_h);
            for (int x = static_cast<int>(ch.face_cx) - mw / 2;
                 x <= static_cast<int>(ch.face_cx) + mw / 2; ++x) {
                if (x >= 0 && x < S && my >= 0 && my < S) blend(img, x, my, feat, 1.0);
            }
            if (ch.animal) {
                // inner-ear dots near the top of the face
                dot(ch.face_cx - 0.3 * ch.face_w, ch.face_cy - 0.36 * ch.face_h, er * 1.2, body_fill);
                dot(ch.face_cx + 0.3 * ch.face_w, ch.face_cy - 0.36 * ch.face_h, er * 1.2, body_fill);
            }
        }

        // Analytic boxes straight from the scene graph.
        out.face_boxes.push_back(Box{ch.face_cx, ch.face_cy, ch.face_w, ch.face_h});
        const double ux1 = std::min(bb.x1, fb.x1);
        const double uy1 = std::min(bb.y1, fb.y1);
        const double ux2 = std::max(bb.x2, fb.x2);
        const double uy2 = std::max(bb.y2, fb.y2);
        out.body_boxes.push_back(from_corner(std::clamp(ux1, 0.0, static_cast<double>(S)),
                                             std::clamp(uy1, 0.0, static_cast<double>(S)),
                                             std::clamp(ux2, 0.0, static_cast<double>(S)),
                                             std::clamp(uy2, 0.0, static_cast<double>(S))));
        out.body_animal_flags.push_back(ch.animal ? 1 : 0);
    }
    return out;
}

SyntheticCorpus generate_synthetic_corpus(const CorpusSpec& spec, std::uint64_t seed) {
    SyntheticCorpus corpus;
    struct SplitDef {
        Dataset* out;
        const char* tag;
        int count;
        bool drawing;
        bool labeled;
        std::uint64_t salt;
    };
    SplitDef splits[] = {
        {&corpus.natural_train, "nat", spec.natural_train, false, true, 0x101},
        {&corpus.drawing_unlabeled, "unl", spec.drawing_unlabeled, true, false, 0x202},
        {&corpus.drawing_labeled_train, "dtr", spec.drawing_labeled_train, true, true, 0x303},
        {&corpus.drawing_dev, "dev", spec.drawing_dev, true, true, 0x404},
        {&corpus.drawing_test, "tst", spec.drawing_test, true, true, 0x505},
    };
    for (const auto& sp : splits) {
        for (int i = 0; i < sp.count; ++i) {
            const std::uint64_t s = derive_seed(seed, sp.salt, static_cast<std::uint64_t>(i));
            // Faces below the tiny-face cut appear only in the natural pool,
            // where the stage-1 filter handles them.
            const double tiny = sp.drawing ? 0.0 : spec.tiny_face_prob;
            const SceneGraph scene = sample_scene(spec.image_size, spec.animal_prob, tiny, s);
            AnnotatedImage a = render_scene(scene, spec.image_size, sp.drawing, s,
                                            std::string(sp.tag) + "_" + std::to_string(i));
            if (!sp.labeled) {
                a.face_boxes.clear();
                a.body_boxes.clear();
                a.body_animal_flags.clear();
            }
            sp.out->push_back(std::move(a));
        }
    }
    return corpus;
}

void save_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_coco_dataset(corpus.natural_train, (fs::path(dir) / "natural_train").string());
    save_coco_dataset(corpus.drawing_unlabeled, (fs::path(dir) / "drawing_unlabeled").string());
    save_coco_dataset(corpus.drawing_labeled_train,
                      (fs::path(dir) / "drawing_labeled_train").string());
    save_coco_dataset(corpus.drawing_dev, (fs::path(dir) / "drawing_dev").string());
    save_coco_dataset(corpus.drawing_test, (fs::path(dir) / "drawing_test").string());
}

} // namespace inkdet
