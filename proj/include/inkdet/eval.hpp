// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inkdet/datapipe.hpp"
#include "inkdet/detector.hpp"
#include "inkdet/geometry.hpp"

namespace inkdet {

/// Predictions and ground truth for one image, one class.
struct EvalSample {
    std::string image_id;
    std::vector<ScoredBox> preds;
    std::vector<Box> gts;
};

struct MatchResult {
    std::size_t pred_index = 0; // index into the input prediction list
    bool matched = false;
};

/// Greedy single-match assignment at the given IoU threshold. Predictions are
/// processed in descending score (ties by input index); each matches the
/// highest-IoU unmatched ground truth with IoU >= thresh, or none. Results
/// come back in processing order.
std::vector<MatchResult> match_detections(const std::vector<ScoredBox>& preds,
                                          const std::vector<Box>& gts, double iou_thresh = 0.5);

/// AP at the fixed IoU threshold: area under the monotone
/// (interpolated-precision) PR curve over the global score ranking, ties
/// broken by image id then prediction index. Zero ground truth throws
/// (undefined recall); gts without predictions give 0.
double average_precision(const std::vector<EvalSample>& samples, double iou_thresh = 0.5);

struct APReport {
    std::map<Klass, double> per_class_ap;
    double mean_ap = 0.0;
    std::size_t n_images = 0;
    std::uint64_t run_seed = 0;
};

struct AggregateReport {
    double mean = 0.0;
    double stddev = 0.0; // population
    std::size_t n_runs = 0;
    std::optional<double> ap_diff;
};

/// Mean/stddev of mean_ap across runs (the five-run protocol); ap_diff is the
/// mean over datasets of (per-dataset maximum - this experiment's score) when
/// maxima are supplied.
AggregateReport aggregate_runs(const std::vector<APReport>& reports,
                               const std::optional<std::vector<std::pair<double, double>>>&
                                   best_and_score_per_dataset = std::nullopt);

/// Detection-eval defaults: a low score floor keeps the PR curve complete.
struct EvalSettings {
    double conf_thresh = 0.05;
    double nms_thresh = 0.45;
    double iou_thresh = 0.5;
};

/// Runs the detector over a labeled dataset and scores both classes.
APReport evaluate_detector(const Network& net, const DetectorParams& params,
                           const Dataset& dataset, const EvalSettings& settings = {},
                           std::uint64_t run_seed = 0);

} // namespace inkdet
