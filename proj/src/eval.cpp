// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inkdet/errors.hpp"

namespace inkdet {

std::vector<MatchResult> match_detections(const std::vector<ScoredBox>& preds,
                                          const std::vector<Box>& gts, double iou_thresh) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

    std::vector<bool> gt_used(gts.size(), false);
    std::vector<MatchResult> out;
    out.reserve(preds.size());
    for (std::size_t pi : order) {
        double best_iou = 0.0;
        std::size_t best_gt = gts.size();
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_used[gi]) continue;
            const double v = iou(preds[pi].box, gts[gi]);
            if (v > best_iou) {
                best_iou = v;
                best_gt = gi;
            }
        }
        MatchResult r;
        r.pred_index = pi;
        if (best_gt < gts.size() && best_iou >= iou_thresh) {
            gt_used[best_gt] = true;
            r.matched = true;
        }
        out.push_back(r);
    }
    return out;
}

double average_precision(const std::vector<EvalSample>& samples, double iou_thresh) {
    std::size_t n_gt = 0;
    for (const auto& s : samples) n_gt += s.gts.size();
    if (n_gt == 0) throw ContractError("average_precision: no ground truth boxes");

    struct Entry {
        double score;
        std::size_t sample;
        std::size_t pred_index;
        bool tp;
    };
    std::vector<Entry> pool;
    for (std::size_t si = 0; si < samples.size(); ++si) {
        const auto matches = match_detections(samples[si].preds, samples[si].gts, iou_thresh);
        for (const auto& m : matches) {
            pool.push_back({samples[si].preds[m.pred_index].score, si, m.pred_index, m.matched});
        }
    }
    if (pool.empty()) return 0.0;

    std::sort(pool.begin(), pool.end(), [&](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (samples[a.sample].image_id != samples[b.sample].image_id) {
            return samples[a.sample].image_id < samples[b.sample].image_id;
        }
        return a.pred_index < b.pred_index;
    });

    std::vector<double> precision(pool.size());
    std::vector<double> recall(pool.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].tp) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    }
    // Monotone envelope from the right, then all-points area.
    for (std::size_t i = precision.size() - 1; i-- > 0;) {
        precision[i] = std::max(precision[i], precision[i + 1]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

AggregateReport aggregate_runs(
    const std::vector<APReport>& reports,
    const std::optional<std::vector<std::pair<double, double>>>& best_and_score_per_dataset) {
    if (reports.empty()) throw ContractError("aggregate_runs: no reports");
    AggregateReport agg;
    agg.n_runs = reports.size();
    double sum = 0.0;
    for (const auto& r : reports) sum += r.mean_ap;
    agg.mean = sum / static_cast<double>(reports.size());
    double var = 0.0;
    for (const auto& r : reports) {
        const double d = r.mean_ap - agg.mean;
        var += d * d;
    }
    agg.stddev = std::sqrt(var / static_cast<double>(reports.size()));
    if (best_and_score_per_dataset.has_value()) {
        if (best_and_score_per_dataset->empty()) {
            throw ContractError("aggregate_runs: empty per-dataset maxima");
        }
        double diff = 0.0;
        for (const auto& [best, score] : *best_and_score_per_dataset) diff += best - score;
        agg.ap_diff = diff / static_cast<double>(best_and_score_per_dataset->size());
    }
    return agg;
}

APReport evaluate_detector(const Network& net, const DetectorParams& params, const Dataset& dataset,
                           const EvalSettings& settings, std::uint64_t run_seed) {
    std::vector<EvalSample> face_samples, body_samples;
    for (const auto& a : dataset) {
        const Detections det =
            net.predict(params, a.image, settings.conf_thresh, settings.nms_thresh);
        face_samples.push_back({a.id, det.face, a.face_boxes});
        body_samples.push_back({a.id, det.body, a.body_boxes});
    }
    APReport rep;
    rep.n_images = dataset.size();
    rep.run_seed = run_seed;
    double sum = 0.0;
    int classes = 0;
    auto score_class = [&](Klass k, const std::vector<EvalSample>& s) {
        std::size_t n_gt = 0;
        for (const auto& e : s) n_gt += e.gts.size();
        if (n_gt == 0) return; // class absent from this split
        const double ap = average_precision(s, settings.iou_thresh);
        rep.per_class_ap[k] = ap;
        sum += ap;
        ++classes;
    };
    score_class(Klass::face, face_samples);
    score_class(Klass::body, body_samples);
    rep.mean_ap = classes > 0 ? sum / classes : 0.0;
    return rep;
}

} // namespace inkdet
