// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inkdet/errors.hpp"
#include "inkdet/geometry.hpp"
#include "inkdet/rng.hpp"

using namespace inkdet;

namespace {

// Independent greedy oracle: operates on corner-form area arithmetic only.
std::vector<std::size_t> nms_oracle(const std::vector<ScoredBox>& boxes, double thresh) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return boxes[a].score > boxes[b].score;
    });
    auto pair_iou = [&](std::size_t i, std::size_t j) {
        const Box& a = boxes[i].box;
        const Box& b = boxes[j].box;
        const double ix1 = std::max(a.cx - a.w / 2, b.cx - b.w / 2);
        const double iy1 = std::max(a.cy - a.h / 2, b.cy - b.h / 2);
        const double ix2 = std::min(a.cx + a.w / 2, b.cx + b.w / 2);
        const double iy2 = std::min(a.cy + a.h / 2, b.cy + b.h / 2);
        const double iw = std::max(0.0, ix2 - ix1);
        const double ih = std::max(0.0, iy2 - iy1);
        const double inter = iw * ih;
        return inter / (a.w * a.h + b.w * b.h - inter);
    };
    std::vector<std::size_t> kept;
    std::vector<bool> dead(boxes.size(), false);
    for (std::size_t i : order) {
        if (dead[i]) continue;
        kept.push_back(i);
        for (std::size_t j : order) {
            if (!dead[j] && j != i && pair_iou(i, j) > thresh) dead[j] = true;
        }
    }
    return kept;
}

Box random_box(Rng& rng, double span = 20.0) {
    const double w = rng.uniform(0.5, span / 2);
    const double h = rng.uniform(0.5, span / 2);
    return Box{rng.uniform(0.0, span), rng.uniform(0.0, span), w, h};
}

} // namespace

TEST_CASE("iou basics") {
    const Box a{1.0, 1.0, 2.0, 2.0};
    CHECK(iou(a, a) == doctest::Approx(1.0));

    const Box far{100.0, 100.0, 2.0, 2.0};
    CHECK(iou(a, far) == 0.0);

    // corner-form (0,0,2,2) vs (1,0,3,2): inter 2, union 6
    const Box b = from_corner(0, 0, 2, 2);
    const Box c = from_corner(1, 0, 3, 2);
    CHECK(iou(b, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // touching edges is zero overlap
    const Box d = from_corner(2, 0, 4, 2);
    CHECK(iou(b, d) == 0.0);
}

TEST_CASE("iou symmetry and range over random boxes") {
    Rng rng(42);
    for (int i = 0; i < 500; ++i) {
        const Box a = random_box(rng);
        const Box b = random_box(rng);
        const double ab = iou(a, b);
        CHECK(ab == iou(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(iou(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("corner conversion") {
    const Box b{1.0, 1.0, 2.0, 2.0};
    const Corners c = to_corner(b);
    CHECK(c.x1 == 0.0);
    CHECK(c.y1 == 0.0);
    CHECK(c.x2 == 2.0);
    CHECK(c.y2 == 2.0);

    CHECK_THROWS_AS(from_corner(0, 0, 0, 1), ContractError);
    CHECK_THROWS_AS(from_corner(0, 0, 1, 0), ContractError);
}

TEST_CASE("corner roundtrip is exact for dyadic boxes") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        // dyadic rationals: k / 64 with k < 2^16
        auto dyadic = [&] { return static_cast<double>(rng.uniform_int(1 << 16)) / 64.0; };
        const Box b{dyadic(), dyadic(), dyadic() + 1.0 / 64.0, dyadic() + 1.0 / 64.0};
        const Corners c = to_corner(b);
        const Box r = from_corner(c.x1, c.y1, c.x2, c.y2);
        CHECK(r.cx == b.cx);
        CHECK(r.cy == b.cy);
        CHECK(r.w == b.w);
        CHECK(r.h == b.h);
    }
}

TEST_CASE("nms basics") {
    const ScoredBox lone{{5, 5, 2, 2}, 0.7, Klass::face};
    const auto kept = nms({lone}, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.7);

    // two identical boxes: higher score wins
    const ScoredBox hi{{5, 5, 2, 2}, 0.9, Klass::face};
    const ScoredBox lo{{5, 5, 2, 2}, 0.8, Klass::face};
    const auto kept2 = nms({lo, hi}, 0.5);
    REQUIRE(kept2.size() == 1);
    CHECK(kept2[0].score == 0.9);
}

TEST_CASE("nms rejects mixed classes") {
    const ScoredBox f{{5, 5, 2, 2}, 0.9, Klass::face};
    const ScoredBox b{{5, 5, 2, 2}, 0.8, Klass::body};
    CHECK_THROWS_AS(nms({f, b}, 0.5), ContractError);
}

TEST_CASE("nms chained overlaps match the greedy oracle") {
    // a suppresses b; b would have suppressed c, so c survives
    const ScoredBox a{{0, 0, 4, 4}, 0.9, Klass::face};
    const ScoredBox b{{1.2, 0, 4, 4}, 0.8, Klass::face};
    const ScoredBox c{{3.4, 0, 4, 4}, 0.7, Klass::face};
    const std::vector<ScoredBox> in = {a, b, c};
    const auto kept = nms(in, 0.4);
    const auto oracle = nms_oracle(in, 0.4);
    REQUIRE(kept.size() == oracle.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        CHECK(kept[i].score == in[oracle[i]].score);
    }
    CHECK(kept.size() == 2);
}

TEST_CASE("nms equals the brute-force oracle on 1000 random instances") {
    Rng rng(1234);
    for (int inst = 0; inst < 1000; ++inst) {
        const std::size_t n = 1 + rng.uniform_int(20);
        std::vector<ScoredBox> boxes;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores force ties; tie-break must stay by index
            const double score = std::floor(rng.uniform() * 8.0) / 8.0;
            boxes.push_back({random_box(rng, 12.0), score, Klass::body});
        }
        const double thresh = rng.uniform(0.1, 0.9);
        const auto kept = nms(boxes, thresh);
        const auto oracle = nms_oracle(boxes, thresh);
        REQUIRE(kept.size() == oracle.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            CHECK(kept[i].box.cx == boxes[oracle[i]].box.cx);
            CHECK(kept[i].score == boxes[oracle[i]].score);
        }
        // contract: sorted by descending score, kept pairs below threshold
        for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i - 1].score >= kept[i].score);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = i + 1; j < kept.size(); ++j) {
                CHECK(iou(kept[i].box, kept[j].box) <= thresh);
            }
        }
    }
}
