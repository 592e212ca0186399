// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "inkdet/datapipe.hpp"
#include "inkdet/errors.hpp"
#include "inkdet/rng.hpp"

using namespace inkdet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Image flat_image(int h, int w, double r, double g, double b) {
    Image img(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            img.at(0, y, x) = r;
            img.at(1, y, x) = g;
            img.at(2, y, x) = b;
        }
    }
    return img;
}

// Pixel-mask transport oracle: rasterize the box, transform the mask with
// the same geometry, and return the bbox of the surviving pixels.
Box mask_bbox(const std::vector<std::vector<bool>>& mask) {
    int x1 = 1 << 20, y1 = 1 << 20, x2 = -1, y2 = -1;
    for (int y = 0; y < static_cast<int>(mask.size()); ++y) {
        for (int x = 0; x < static_cast<int>(mask[y].size()); ++x) {
            if (mask[y][x]) {
                x1 = std::min(x1, x);
                y1 = std::min(y1, y);
                x2 = std::max(x2, x);
                y2 = std::max(y2, y);
            }
        }
    }
    REQUIRE(x2 >= x1);
    return from_corner(x1, y1, x2 + 1, y2 + 1);
}

std::vector<std::vector<bool>> rasterize(const Box& b, int h, int w) {
    std::vector<std::vector<bool>> mask(h, std::vector<bool>(w, false));
    const Corners c = to_corner(b);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            mask[y][x] = px >= c.x1 && px < c.x2 && py >= c.y1 && py < c.y2;
        }
    }
    return mask;
}

} // namespace

TEST_CASE("annotation loader golden fixture") {
    TempDir tmp("inkdet_coco_fixture");
    fs::create_directories(tmp.path / "images");
    // 3 images / 5 boxes, hand-written without the loader
    const char* json = R"({
      "info": {"source": "drawing"},
      "images": [
        {"id": 1, "file_name": "a.ppm", "width": 32, "height": 32},
        {"id": 2, "file_name": "b.ppm", "width": 32, "height": 32},
        {"id": 3, "file_name": "c.ppm", "width": 32, "height": 32}
      ],
      "annotations": [
        {"id": 1, "image_id": 1, "category_id": 2, "bbox": [4, 6, 8, 10]},
        {"id": 2, "image_id": 1, "category_id": 1, "bbox": [2, 2, 20, 28]},
        {"id": 3, "image_id": 2, "category_id": 1, "bbox": [0, 0, 16, 16]},
        {"id": 4, "image_id": 2, "category_id": 3, "bbox": [10, 10, 12, 12]},
        {"id": 5, "image_id": 3, "category_id": 2, "bbox": [8, 8, 6, 6]}
      ],
      "categories": [
        {"id": 1, "name": "person"}, {"id": 2, "name": "face"}, {"id": 3, "name": "dog"}
      ]
    })";
    std::ofstream(tmp.path / "annotations.json") << json;
    for (const char* f : {"a.ppm", "b.ppm", "c.ppm"}) {
        save_ppm(flat_image(32, 32, 0.5, 0.5, 0.5), (tmp.path / "images" / f).string());
    }

    const auto cats = load_categories((tmp.path / "annotations.json").string());
    REQUIRE(cats.size() == 3);
    const std::set<int> bodies = animals_as_bodies(cats, true);
    CHECK(bodies == std::set<int>{1, 3});

    const Dataset ds = load_coco_annotations((tmp.path / "annotations.json").string(),
                                             (tmp.path / "images").string(), bodies);
    REQUIRE(ds.size() == 3);
    CHECK(ds[0].source == ImageSource::drawing);
    REQUIRE(ds[0].face_boxes.size() == 1);
    // corner [4,6,8,10] -> center (8, 11), size (8, 10)
    CHECK(ds[0].face_boxes[0].cx == doctest::Approx(8.0));
    CHECK(ds[0].face_boxes[0].cy == doctest::Approx(11.0));
    CHECK(ds[0].face_boxes[0].w == doctest::Approx(8.0));
    CHECK(ds[0].face_boxes[0].h == doctest::Approx(10.0));
    REQUIRE(ds[0].body_boxes.size() == 1);
    REQUIRE(ds[1].body_boxes.size() == 2); // person + dog
    CHECK(ds[1].body_animal_flags == std::vector<std::uint8_t>{0, 1});
    CHECK(ds[2].face_boxes.size() == 1);
    CHECK(ds[2].body_boxes.empty());

    // excluding animals drops the dog box
    const Dataset no_animals = load_coco_annotations((tmp.path / "annotations.json").string(),
                                                     (tmp.path / "images").string(),
                                                     animals_as_bodies(cats, false));
    CHECK(no_animals[1].body_boxes.size() == 1);
}

TEST_CASE("loader edge cases") {
    TempDir tmp("inkdet_coco_edge");
    fs::create_directories(tmp.path / "images");

    // empty annotation list -> empty-boxed dataset
    std::ofstream(tmp.path / "annotations.json")
        << R"({"images": [], "annotations": [], "categories": []})";
    CHECK(load_coco_annotations((tmp.path / "annotations.json").string(),
                                (tmp.path / "images").string(), {})
              .empty());

    // missing image file -> record skipped with a warning
    std::ofstream(tmp.path / "annotations.json") << R"({
      "images": [{"id": 1, "file_name": "gone.ppm", "width": 8, "height": 8},
                  {"id": 2, "file_name": "here.ppm", "width": 8, "height": 8}],
      "annotations": [], "categories": []})";
    save_ppm(flat_image(8, 8, 1, 1, 1), (tmp.path / "images" / "here.ppm").string());
    const Dataset ds = load_coco_annotations((tmp.path / "annotations.json").string(),
                                             (tmp.path / "images").string(), {});
    CHECK(ds.size() == 1);

    // malformed file -> hard error
    std::ofstream(tmp.path / "annotations.json") << "{not json";
    CHECK_THROWS_AS(load_coco_annotations((tmp.path / "annotations.json").string(),
                                          (tmp.path / "images").string(), {}),
                    DataError);
}

TEST_CASE("save/load dataset roundtrip") {
    TempDir tmp("inkdet_roundtrip");
    Dataset ds;
    AnnotatedImage a;
    a.image = flat_image(16, 16, 0.25, 0.5, 0.75);
    a.face_boxes = {{8, 8, 4, 4}};
    a.body_boxes = {{8, 10, 10, 12}, {4, 4, 6, 6}};
    a.body_animal_flags = {0, 1};
    a.source = ImageSource::drawing;
    a.id = "img_0";
    ds.push_back(a);
    save_coco_dataset(ds, tmp.path.string());

    const auto cats = load_categories((tmp.path / "annotations.json").string());
    const Dataset back = load_coco_annotations((tmp.path / "annotations.json").string(),
                                               (tmp.path / "images").string(),
                                               animals_as_bodies(cats, true));
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == "img_0");
    CHECK(back[0].face_boxes.size() == 1);
    CHECK(back[0].body_boxes.size() == 2);
    CHECK(back[0].body_animal_flags == std::vector<std::uint8_t>{0, 1});
    CHECK(back[0].face_boxes[0].cx == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("tiny-face filter") {
    Dataset ds;
    AnnotatedImage big;
    big.image = Image(500, 1000); // min side 500, threshold 10
    big.face_boxes = {{100, 100, 8, 6}}; // max side 8 < 10
    big.id = "discard";
    ds.push_back(big);

    AnnotatedImage boundary;
    boundary.image = Image(500, 1000);
    boundary.face_boxes = {{100, 100, 10, 6}}; // max side exactly 10: kept
    boundary.id = "keep";
    ds.push_back(boundary);

    AnnotatedImage faceless;
    faceless.image = Image(500, 1000);
    faceless.id = "faceless";
    ds.push_back(faceless);

    const Dataset out = filter_small_faces(ds, 0.02);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id == "keep");
    CHECK(out[1].id == "faceless");

    // idempotent
    const Dataset again = filter_small_faces(out, 0.02);
    CHECK(again.size() == out.size());
}

TEST_CASE("animals_as_bodies category mapping") {
    const std::vector<Category> person_only = {{1, "person"}};
    CHECK(animals_as_bodies(person_only, true) == std::set<int>{1});

    const std::vector<Category> mixed = {{1, "person"}, {2, "dog"}, {3, "cat"}, {4, "chair"}};
    CHECK(animals_as_bodies(mixed, true) == std::set<int>{1, 2, 3});
    CHECK(animals_as_bodies(mixed, false) == std::set<int>{1});
}

TEST_CASE("style bank modes") {
    const Image img = flat_image(16, 16, 0.3, 0.6, 0.9);

    // none: identity, bit-exact
    const StyleBank none = make_procedural_bank(StyleMode::none);
    CHECK(apply_style(img, none, 7).data == img.data);

    // single transform: always that one
    StyleBank single;
    single.mode = StyleMode::single;
    single.transforms.push_back({"mark", [](const Image& in, const std::string&, std::uint64_t) {
                                     Image out = in;
                                     out.data[0] = 0.123;
                                     return out;
                                 }});
    for (int s = 0; s < 10; ++s) CHECK(apply_style(img, single, s).data[0] == 0.123);

    // determinism and shape preservation across all 11 procedural slots
    const StyleBank all = make_procedural_bank(StyleMode::all);
    CHECK(all.transforms.size() == 11);
    for (const auto& t : all.transforms) {
        const Image a = t.apply(img, "", 5);
        const Image b = t.apply(img, "", 5);
        CHECK(a.h == img.h);
        CHECK(a.w == img.w);
        CHECK(a.data == b.data);
    }
}

TEST_CASE("style pick frequencies are uniform within 3 sigma") {
    StyleBank bank;
    bank.mode = StyleMode::all;
    for (int i = 0; i < 11; ++i) {
        bank.transforms.push_back(
            {"slot" + std::to_string(i), [i](const Image& in, const std::string&, std::uint64_t) {
                 Image out = in;
                 out.data[0] = i;
                 return out;
             }});
    }
    const Image img = flat_image(2, 2, 0, 0, 0);
    std::vector<int> counts(11, 0);
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        const Image out = apply_style(img, bank, s);
        ++counts[static_cast<int>(out.data[0])];
    }
    const double p = 1.0 / 11.0;
    const double mean = draws * p;
    const double sigma = std::sqrt(draws * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - mean) <= 3.0 * sigma);

    // top_k draws only from the first k slots
    bank.mode = StyleMode::top_k;
    bank.top_k = 5;
    for (int s = 0; s < 500; ++s) {
        const Image out = apply_style(img, bank, s);
        CHECK(out.data[0] < 5.0);
    }
}

TEST_CASE("precomputed style directory") {
    TempDir tmp("inkdet_precomp");
    Image styled = flat_image(8, 8, 1.0, 0.0, 0.0);
    save_ppm(styled, (tmp.path / "img7.ppm").string());

    const StyleTransform t = make_precomputed_style("pre", tmp.path.string());
    const Image in = flat_image(8, 8, 0.0, 1.0, 0.0);
    const Image hit = t.apply(in, "img7", 0);
    CHECK(hit.at(0, 0, 0) == doctest::Approx(1.0));
    CHECK(hit.at(1, 0, 0) == doctest::Approx(0.0));
    const Image miss = t.apply(in, "other", 0);
    CHECK(miss.data == in.data);
}

TEST_CASE("flip transports boxes and is an involution") {
    AnnotatedImage a;
    a.image = flat_image(16, 24, 0.2, 0.4, 0.6);
    a.image.at(0, 3, 5) = 0.9;
    a.face_boxes = {{6, 4, 4, 4}};
    a.body_boxes = {{10, 9, 8, 10}};

    const AnnotatedImage f = hflip(a);
    CHECK(f.face_boxes[0].cx == doctest::Approx(24 - 6));
    CHECK(f.face_boxes[0].cy == doctest::Approx(4));
    const AnnotatedImage ff = hflip(f);
    CHECK(ff.image.data == a.image.data);
    CHECK(ff.face_boxes[0].cx == a.face_boxes[0].cx);

    const AnnotatedImage v = vflip(a);
    CHECK(v.face_boxes[0].cy == doctest::Approx(16 - 4));
    CHECK(vflip(v).image.data == a.image.data);
}

TEST_CASE("photometric ops move no boxes") {
    AnnotatedImage a;
    a.image = flat_image(16, 16, 0.5, 0.5, 0.5);
    a.face_boxes = {{8, 8, 4, 4}};
    a.body_boxes = {{8, 8, 10, 12}};

    AugmentationPolicy p;
    p.crop_scale_min = 1.0; // disable the crop
    p.crop_scale_max = 1.0;
    const AnnotatedImage out = augment_strong_tail(a, 3, p);
    REQUIRE(out.face_boxes.size() == 1);
    CHECK(out.face_boxes[0].cx == a.face_boxes[0].cx);
    CHECK(out.face_boxes[0].w == a.face_boxes[0].w);
    CHECK(out.body_boxes[0].h == a.body_boxes[0].h);
}

TEST_CASE("crop transports boxes against the affine oracle") {
    AnnotatedImage a;
    a.image = flat_image(32, 32, 0.1, 0.2, 0.3);
    a.face_boxes = {{16, 16, 8, 8}};
    a.body_boxes = {{6, 6, 8, 8}}; // partially outside the window below

    const AnnotatedImage c = crop_resize(a, 8, 8, 16); // window [8,24)^2, scale x2
    REQUIRE(c.face_boxes.size() == 1);
    CHECK(c.face_boxes[0].cx == doctest::Approx((16 - 8) * 2.0));
    CHECK(c.face_boxes[0].w == doctest::Approx(16.0));
    // body box [2,10]^2 clipped to [8,10]^2: 4 of 64 pixels visible -> dropped
    CHECK(c.body_boxes.empty());
}

TEST_CASE("label transport matches the pixel-mask oracle") {
    // The oracle inverse-maps a 32x supersampled output raster through the
    // geometric op and takes the bbox of hits, so quantization is ~1/32 px
    // and any residual disagreement is a genuine transport error.
    Rng rng(17);
    const int S = 64;
    const int K = 32;

    auto oracle_bbox = [&](const Box& src, const std::function<bool(double, double, double&,
                                                                    double&)>& invmap) {
        double x1 = 1e18, y1 = 1e18, x2 = -1e18, y2 = -1e18;
        const Corners c = to_corner(src);
        for (int fy = 0; fy < S * K; ++fy) {
            for (int fx = 0; fx < S * K; ++fx) {
                const double px = (fx + 0.5) / K;
                const double py = (fy + 0.5) / K;
                double sx, sy;
                if (!invmap(px, py, sx, sy)) continue;
                if (sx >= c.x1 && sx < c.x2 && sy >= c.y1 && sy < c.y2) {
                    x1 = std::min(x1, px);
                    y1 = std::min(y1, py);
                    x2 = std::max(x2, px);
                    y2 = std::max(y2, py);
                }
            }
        }
        REQUIRE(x2 > x1);
        return from_corner(x1, y1, x2, y2);
    };

    for (int t = 0; t < 8; ++t) {
        AnnotatedImage a;
        a.image = flat_image(S, S, 0.5, 0.5, 0.5);
        const Box b{rng.uniform(22, 42), rng.uniform(22, 42), rng.uniform(32, 40),
                    rng.uniform(32, 40)};
        a.face_boxes = {b};

        // hflip
        {
            const AnnotatedImage f = hflip(a);
            const Box want = oracle_bbox(b, [&](double px, double py, double& sx, double& sy) {
                sx = S - px;
                sy = py;
                return true;
            });
            CHECK(iou(f.face_boxes[0], want) >= 0.99);
        }
        // crop+resize: window [8, 56), scale 64/48
        {
            const AnnotatedImage c = crop_resize(a, 8, 8, 48);
            if (!c.face_boxes.empty()) {
                const double scale = static_cast<double>(S) / 48.0;
                const Box want = oracle_bbox(b, [&](double px, double py, double& sx, double& sy) {
                    sx = 8.0 + px / scale;
                    sy = 8.0 + py / scale;
                    return sx >= 8.0 && sx < 56.0 && sy >= 8.0 && sy < 56.0;
                });
                CHECK(iou(c.face_boxes[0], want) >= 0.99);
            }
        }
        // shear
        {
            const double deg = rng.uniform(-10.0, 10.0);
            const AnnotatedImage sh = shear_horizontal(a, deg);
            if (!sh.face_boxes.empty()) {
                const double tn = std::tan(deg * M_PI / 180.0);
                const Box want = oracle_bbox(b, [&](double px, double py, double& sx, double& sy) {
                    sx = px - tn * (py - S / 2.0);
                    sy = py;
                    return true;
                });
                CHECK(iou(sh.face_boxes[0], want) >= 0.95);
            }
        }
    }
}

TEST_CASE("mosaic at an even split places centered boxes at quadrant centers") {
    const int S = 32;
    std::vector<AnnotatedImage> parts;
    for (int i = 0; i < 4; ++i) {
        AnnotatedImage a;
        a.image = flat_image(S, S, 0.2 * i, 0.5, 0.5);
        a.face_boxes = {{16, 16, 8, 8}};
        a.id = "p" + std::to_string(i);
        parts.push_back(a);
    }
    const AnnotatedImage m = mosaic_at(parts, S, 16, 16);
    REQUIRE(m.face_boxes.size() == 4);
    // quadrant centers: (8,8), (24,8), (8,24), (24,24)
    std::set<std::pair<int, int>> centers;
    for (const Box& b : m.face_boxes) {
        CHECK(b.w == doctest::Approx(8.0));
        centers.insert({static_cast<int>(b.cx), static_cast<int>(b.cy)});
    }
    CHECK(centers == std::set<std::pair<int, int>>{{8, 8}, {24, 8}, {8, 24}, {24, 24}});
}

TEST_CASE("mosaic clips straddling boxes and drops low visibility") {
    const int S = 32;
    std::vector<AnnotatedImage> parts;
    for (int i = 0; i < 4; ++i) {
        AnnotatedImage a;
        a.image = flat_image(S, S, 0.5, 0.5, 0.5);
        parts.push_back(a);
    }
    // quadrant 0 window with even split is [8,24)^2 of the source
    // box wholly inside the window -> exactly one transformed copy
    parts[0].face_boxes = {{12, 12, 4, 4}};
    // box straddling the window edge: [6,14]x[14,18]; visible 2/8 of width
    // -> visible area 25% exactly, kept at the boundary? strictly-less rule
    parts[1].face_boxes = {{10, 16, 8, 4}};
    // box far outside the window -> dropped entirely
    parts[2].face_boxes = {{2, 2, 4, 4}};

    const AnnotatedImage m = mosaic_at(parts, S, 16, 16);
    REQUIRE(m.face_boxes.size() == 2);
    CHECK(m.face_boxes[0].cx == doctest::Approx(12 - 8 + 0));
    // straddler: source visible [8,14]x[14,18] -> 6x4 of 8x4 = 75% visible
    CHECK(m.face_boxes[1].w == doctest::Approx(6.0));

    CHECK_THROWS_AS(mosaic_at({parts[0]}, S, 16, 16), ContractError);
}

TEST_CASE("augmentation schedule windows") {
    AugmentationPolicy p;
    CHECK_FALSE(schedule_augmentation(0, 350, p).enabled);
    CHECK_FALSE(schedule_augmentation(14, 350, p).enabled);
    CHECK(schedule_augmentation(15, 350, p).enabled);
    CHECK(schedule_augmentation(170, 350, p).enabled);
    CHECK(schedule_augmentation(334, 350, p).enabled);
    CHECK_FALSE(schedule_augmentation(335, 350, p).enabled);
    CHECK_FALSE(schedule_augmentation(340, 350, p).enabled);
    CHECK_THROWS_AS(schedule_augmentation(350, 350, p), ContractError);
    // custom window for desk-scale epochs
    CHECK(schedule_augmentation(3, 12, p, 2).enabled);
    CHECK_FALSE(schedule_augmentation(1, 12, p, 2).enabled);
}

TEST_CASE("subset sampler") {
    Dataset ds;
    for (int i = 0; i < 40; ++i) {
        AnnotatedImage a;
        a.image = Image(4, 4);
        a.id = "im" + std::to_string(i);
        ds.push_back(a);
    }
    const Dataset all = subset_sampler(ds, std::nullopt, 3);
    CHECK(all.size() == 40);

    const Dataset s1 = subset_sampler(ds, 8, 5);
    const Dataset s2 = subset_sampler(ds, 8, 5);
    REQUIRE(s1.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(s1[i].id == s2[i].id);

    // distinct seeds give distinct subsets (overwhelming probability)
    std::set<std::set<std::string>> seen;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::set<std::string> ids;
        for (const auto& a : subset_sampler(ds, 8, seed)) ids.insert(a.id);
        seen.insert(ids);
    }
    CHECK(seen.size() == 5);

    CHECK_THROWS_AS(subset_sampler(ds, 41, 0), DataError);
}

TEST_CASE("synthetic corpus contract") {
    CorpusSpec spec;
    spec.natural_train = 10;
    spec.drawing_unlabeled = 4;
    spec.drawing_labeled_train = 4;
    spec.drawing_dev = 3;
    spec.drawing_test = 3;

    const SyntheticCorpus c1 = generate_synthetic_corpus(spec, 99);
    CHECK(c1.natural_train.size() == 10);
    for (const auto& a : c1.natural_train) {
        CHECK(!a.body_boxes.empty());
        for (const Box& b : a.body_boxes) {
            const Corners cb = to_corner(b);
            CHECK(cb.x1 >= 0.0);
            CHECK(cb.y1 >= 0.0);
            CHECK(cb.x2 <= a.image.w);
            CHECK(cb.y2 <= a.image.h);
        }
    }
    for (const auto& a : c1.drawing_unlabeled) {
        CHECK(a.face_boxes.empty());
        CHECK(a.body_boxes.empty());
    }

    // byte-identical regeneration
    const SyntheticCorpus c2 = generate_synthetic_corpus(spec, 99);
    REQUIRE(c2.natural_train.size() == c1.natural_train.size());
    for (std::size_t i = 0; i < c1.natural_train.size(); ++i) {
        CHECK(c1.natural_train[i].image.data == c2.natural_train[i].image.data);
    }

    // distinct id spaces
    std::set<std::string> ids;
    for (const Dataset* d : {&c1.natural_train, &c1.drawing_unlabeled, &c1.drawing_labeled_train,
                             &c1.drawing_dev, &c1.drawing_test}) {
        for (const auto& a : *d) CHECK(ids.insert(a.id).second);
    }
}

TEST_CASE("rendered faces match the scene graph") {
    // rasterize the face ellipse from the analytic spec; its bbox must match
    // the emitted face box to within a pixel
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SceneGraph scene = sample_scene(64, 0.0, 0.0, seed);
        const AnnotatedImage img = render_scene(scene, 64, true, seed, "t");
        REQUIRE(img.face_boxes.size() == scene.characters.size());
        for (std::size_t i = 0; i < scene.characters.size(); ++i) {
            const CharacterSpec& ch = scene.characters[i];
            double x1 = 1e9, y1 = 1e9, x2 = -1e9, y2 = -1e9;
            for (int y = 0; y < 64; ++y) {
                for (int x = 0; x < 64; ++x) {
                    const double nx = (x + 0.5 - ch.face_cx) / (ch.face_w / 2);
                    const double ny = (y + 0.5 - ch.face_cy) / (ch.face_h / 2);
                    if (nx * nx + ny * ny < 1.0) {
                        x1 = std::min(x1, static_cast<double>(x));
                        y1 = std::min(y1, static_cast<double>(y));
                        x2 = std::max(x2, static_cast<double>(x + 1));
                        y2 = std::max(y2, static_cast<double>(y + 1));
                    }
                }
            }
            const Box& fb = img.face_boxes[i];
            const Corners c = to_corner(fb);
            CHECK(std::abs(c.x1 - x1) <= 1.5);
            CHECK(std::abs(c.y1 - y1) <= 1.5);
            CHECK(std::abs(c.x2 - x2) <= 1.5);
            CHECK(std::abs(c.y2 - y2) <= 1.5);
        }
    }
}

TEST_CASE("ppm roundtrip") {
    TempDir tmp("inkdet_ppm");
    Image img(5, 7);
    Rng rng(3);
    for (double& v : img.data) v = std::round(rng.uniform() * 255.0) / 255.0;
    save_ppm(img, (tmp.path / "x.ppm").string());
    const Image back = load_ppm((tmp.path / "x.ppm").string());
    REQUIRE(back.h == 5);
    REQUIRE(back.w == 7);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-9));
    }
}
