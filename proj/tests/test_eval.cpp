// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inkdet/errors.hpp"
#include "inkdet/eval.hpp"
#include "inkdet/rng.hpp"

using namespace inkdet;

namespace {

Box random_box(Rng& rng, double span = 40.0) {
    return Box{rng.uniform(4.0, span), rng.uniform(4.0, span), rng.uniform(2.0, 12.0),
               rng.uniform(2.0, 12.0)};
}

// Brute-force greedy matching replay, straight from the rule text.
std::vector<bool> match_oracle(const std::vector<ScoredBox>& preds, const std::vector<Box>& gts,
                               double thresh) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
    std::vector<bool> used(gts.size(), false);
    std::vector<bool> tp(preds.size(), false);
    for (std::size_t pi : order) {
        int best = -1;
        double best_iou = thresh; // must reach the threshold
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g]) continue;
            const double v = iou(preds[pi].box, gts[g]);
            if (v > best_iou || (best < 0 && v >= thresh && v >= best_iou)) {
                best = static_cast<int>(g);
                best_iou = v;
            }
        }
        if (best >= 0) {
            used[best] = true;
            tp[pi] = true;
        }
    }
    return tp;
}

// Exhaustive PR enumeration: precision/recall at every rank prefix of the
// globally sorted pool, right-to-left precision envelope, rectangle sum.
double ap_oracle(const std::vector<EvalSample>& samples, double thresh) {
    struct E {
        double score;
        std::string img;
        std::size_t idx;
        bool tp;
    };
    std::vector<E> pool;
    std::size_t n_gt = 0;
    for (const auto& s : samples) {
        n_gt += s.gts.size();
        const auto tp = match_oracle(s.preds, s.gts, thresh);
        for (std::size_t i = 0; i < s.preds.size(); ++i) {
            pool.push_back({s.preds[i].score, s.image_id, i, tp[i]});
        }
    }
    REQUIRE(n_gt > 0);
    if (pool.empty()) return 0.0;
    std::sort(pool.begin(), pool.end(), [](const E& a, const E& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.img != b.img) return a.img < b.img;
        return a.idx < b.idx;
    });
    const std::size_t n = pool.size();
    std::vector<double> prec(n), rec(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pool[i].tp) ++tp;
        prec[i] = double(tp) / double(i + 1);
        rec[i] = double(tp) / double(n_gt);
    }
    double ap = 0.0;
    double prev_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // interpolated precision at this recall: max precision at any
        // prefix with recall >= rec[i]
        double pmax = 0.0;
        for (std::size_t j = i; j < n; ++j) pmax = std::max(pmax, prec[j]);
        ap += (rec[i] - prev_r) * pmax;
        prev_r = rec[i];
    }
    return ap;
}

std::vector<EvalSample> random_instance(Rng& rng, int n_images, int max_preds, int max_gts,
                                        bool ensure_gt = true) {
    std::vector<EvalSample> samples;
    for (int i = 0; i < n_images; ++i) {
        EvalSample s;
        s.image_id = "img" + std::to_string(i);
        const int n_gt = static_cast<int>(rng.uniform_int(max_gts + 1));
        for (int g = 0; g < n_gt; ++g) s.gts.push_back(random_box(rng));
        const int n_pred = static_cast<int>(rng.uniform_int(max_preds + 1));
        for (int p = 0; p < n_pred; ++p) {
            // half the predictions hug a ground truth, half roam free
            Box b = random_box(rng);
            if (!s.gts.empty() && rng.bernoulli(0.5)) {
                const Box& g = s.gts[rng.uniform_int(s.gts.size())];
                b = Box{g.cx + rng.uniform(-2, 2), g.cy + rng.uniform(-2, 2),
                        g.w * rng.uniform(0.8, 1.2), g.h * rng.uniform(0.8, 1.2)};
            }
            // quantized scores force cross-image ties
            const double score = std::floor(rng.uniform() * 16.0) / 16.0;
            s.preds.push_back({b, score, Klass::face});
        }
        samples.push_back(std::move(s));
    }
    if (ensure_gt) {
        bool any = false;
        for (const auto& s : samples) any = any || !s.gts.empty();
        if (!any) samples[0].gts.push_back(random_box(rng));
    }
    return samples;
}

} // namespace

TEST_CASE("matching basics") {
    const Box gt{10, 10, 6, 6};
    const std::vector<ScoredBox> one = {{gt, 0.9, Klass::face}};
    auto m = match_detections(one, {gt}, 0.5);
    REQUIRE(m.size() == 1);
    CHECK(m[0].matched);

    // two predictions on one gt: the higher score wins the match
    const std::vector<ScoredBox> two = {{gt, 0.7, Klass::face}, {gt, 0.9, Klass::face}};
    m = match_detections(two, {gt}, 0.5);
    REQUIRE(m.size() == 2);
    CHECK(m[0].pred_index == 1); // processed first (higher score)
    CHECK(m[0].matched);
    CHECK_FALSE(m[1].matched);
}

TEST_CASE("matching equals the brute-force oracle on 1000 random instances") {
    Rng rng(2024);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n_pred = rng.uniform_int(20);
        const std::size_t n_gt = rng.uniform_int(8);
        std::vector<ScoredBox> preds;
        std::vector<Box> gts;
        for (std::size_t g = 0; g < n_gt; ++g) gts.push_back(random_box(rng));
        for (std::size_t p = 0; p < n_pred; ++p) {
            Box b = random_box(rng);
            if (!gts.empty() && rng.bernoulli(0.6)) {
                const Box& g = gts[rng.uniform_int(gts.size())];
                b = Box{g.cx + rng.uniform(-3, 3), g.cy + rng.uniform(-3, 3),
                        g.w * rng.uniform(0.7, 1.3), g.h * rng.uniform(0.7, 1.3)};
            }
            preds.push_back({b, std::floor(rng.uniform() * 8.0) / 8.0, Klass::face});
        }
        const auto got = match_detections(preds, gts, 0.5);
        const auto want = match_oracle(preds, gts, 0.5);
        REQUIRE(got.size() == preds.size());
        for (const auto& r : got) CHECK(r.matched == want[r.pred_index]);
    }
}

TEST_CASE("average precision endpoints") {
    const Box g1{10, 10, 6, 6}, g2{30, 30, 8, 8};
    // perfect detections, no false positives
    std::vector<EvalSample> perfect = {
        {"a", {{g1, 0.9, Klass::face}}, {g1}},
        {"b", {{g2, 0.8, Klass::face}}, {g2}},
    };
    CHECK(average_precision(perfect) == doctest::Approx(1.0));

    // no detections but gts present
    std::vector<EvalSample> none = {{"a", {}, {g1}}};
    CHECK(average_precision(none) == 0.0);

    // no ground truth anywhere: undefined recall
    std::vector<EvalSample> no_gt = {{"a", {{g1, 0.9, Klass::face}}, {}}};
    CHECK_THROWS_AS(average_precision(no_gt), ContractError);
}

TEST_CASE("average precision on a worked 4-pred/2-gt instance") {
    const Box g1{10, 10, 6, 6}, g2{30, 30, 8, 8};
    const Box miss{50, 50, 6, 6};
    std::vector<EvalSample> samples = {
        {"a",
         {{g1, 0.95, Klass::face}, {miss, 0.9, Klass::face}, {g2, 0.6, Klass::face}},
         {g1, g2}},
        {"b", {{miss, 0.5, Klass::face}}, {}},
    };
    // ranks: 0.95 TP -> P=1, R=.5 ; 0.9 FP -> P=.5 ; 0.6 TP -> P=2/3, R=1 ; 0.5 FP
    // envelope: [1, 2/3, 2/3, .5] -> AP = .5*1 + .5*(2/3)
    const double want = 0.5 * 1.0 + 0.5 * (2.0 / 3.0);
    CHECK(average_precision(samples) == doctest::Approx(want).epsilon(1e-12));
    CHECK(average_precision(samples) == doctest::Approx(ap_oracle(samples, 0.5)).epsilon(1e-12));
}

TEST_CASE("average precision equals the exhaustive oracle on 200 random instances") {
    Rng rng(777);
    for (int t = 0; t < 200; ++t) {
        const auto samples = random_instance(rng, 1 + rng.uniform_int(4), 6, 3);
        const double got = average_precision(samples);
        const double want = ap_oracle(samples, 0.5);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("ap is invariant under monotone score transforms") {
    Rng rng(888);
    for (int t = 0; t < 40; ++t) {
        auto samples = random_instance(rng, 3, 6, 3);
        const double base = average_precision(samples);

        auto transformed = samples;
        for (auto& s : transformed) {
            for (auto& p : s.preds) p.score = 0.2 + 0.6 * std::pow(p.score, 3.0);
        }
        CHECK(average_precision(transformed) == doctest::Approx(base).epsilon(1e-12));

        // shuffled prediction lists decode to the same ranking
        auto shuffled = samples;
        for (auto& s : shuffled) {
            for (std::size_t i = s.preds.size(); i > 1; --i) {
                std::swap(s.preds[i - 1], s.preds[rng.uniform_int(i)]);
            }
        }
        // note: shuffling can reorder equal scores within an image; the
        // matcher resolves those by index, so only assert when scores are
        // pairwise distinct within each image
        bool distinct = true;
        for (const auto& s : samples) {
            for (std::size_t i = 0; i < s.preds.size() && distinct; ++i) {
                for (std::size_t j = i + 1; j < s.preds.size(); ++j) {
                    if (s.preds[i].score == s.preds[j].score) {
                        distinct = false;
                        break;
                    }
                }
            }
        }
        if (distinct) {
            CHECK(average_precision(shuffled) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("appending strictly-lower-scored duplicates never increases ap") {
    Rng rng(999);
    for (int t = 0; t < 40; ++t) {
        auto samples = random_instance(rng, 2, 5, 3);
        double min_score = 1.0;
        for (const auto& s : samples) {
            for (const auto& p : s.preds) min_score = std::min(min_score, p.score);
        }
        const double base = average_precision(samples);
        auto extended = samples;
        for (auto& s : extended) {
            const std::size_t orig = s.preds.size();
            for (std::size_t i = 0; i < orig; ++i) {
                ScoredBox dup = s.preds[i];
                dup.score = min_score * rng.uniform(0.1, 0.8) - 0.001;
                if (dup.score < 0.0) dup.score = 0.0;
                s.preds.push_back(dup);
            }
        }
        CHECK(average_precision(extended) <= base + 1e-12);
    }
}

TEST_CASE("aggregate_runs statistics") {
    auto rep = [](double ap) {
        APReport r;
        r.mean_ap = ap;
        return r;
    };
    // identical runs: zero spread
    const AggregateReport same = aggregate_runs({rep(0.4), rep(0.4), rep(0.4)});
    CHECK(same.mean == doctest::Approx(0.4));
    CHECK(same.stddev == doctest::Approx(0.0));

    // {1..5}%: mean 3%, population stddev sqrt(2)%
    const AggregateReport spread =
        aggregate_runs({rep(0.01), rep(0.02), rep(0.03), rep(0.04), rep(0.05)});
    CHECK(spread.mean == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(spread.stddev == doctest::Approx(std::sqrt(2.0) / 100.0).epsilon(1e-12));
    CHECK(spread.n_runs == 5);

    // single-dataset ap_diff: 49.81 - 49.05 = 0.76
    const AggregateReport diff = aggregate_runs(
        {rep(0.4905)}, std::vector<std::pair<double, double>>{{49.81, 49.05}});
    REQUIRE(diff.ap_diff.has_value());
    CHECK(*diff.ap_diff == doctest::Approx(0.76).epsilon(1e-9));

    CHECK_THROWS_AS(aggregate_runs({}), ContractError);
}
