// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "inkdet/detector.hpp"
#include "inkdet/geometry.hpp"

namespace inkdet {

/// Gate thresholds and hard-example mining knobs for the self-supervised
/// confidence loss. With ct_pos_thresh = 0 and ct_neg_thresh = 1 the gated
/// loss degenerates to plain binary cross-entropy.
struct OhemConfig {
    double ct_pos_thresh = 0.5;
    double ct_neg_thresh = 0.5;
    int neg_pos_ratio = 3;
    int min_neg = 16;
};

struct LossBreakdown {
    double conf = 0.0;
    double reg = 0.0;
    double total = 0.0;
    double beta = 0.0;
};

/// total = conf + beta * reg, exactly.
LossBreakdown total_loss(double conf, double reg, double beta);

/// 0.5*e^2 for e < 1, e - 0.5 otherwise, e = |gt - pred|.
double smooth_l1(double gt, double pred);
double smooth_l1_grad(double gt, double pred); // d/dpred

/// Probabilities are clamped to [1e-7, 1-1e-7] before any log.
double clamp_prob(double p);

/// Confidence loss of a single box proposal:
///   -p * ct_pos * log(p_hat) - (1-p) * ct_neg * log(1 - p_hat)
/// where ct_pos = [p_hat >= ct_pos_thresh] and ct_neg = [p_hat <= ct_neg_thresh].
/// Gate indicators are constants in the backward pass.
double gated_conf_loss(int p, double p_hat, const OhemConfig& cfg);
double gated_conf_loss_grad(int p, double p_hat, const OhemConfig& cfg); // d/dp_hat

/// Focal-modulated binary cross-entropy, the stage-2 ablation baseline.
/// alpha in (0,1) applies the usual class balancing (alpha for positives,
/// 1-alpha for negatives); any other alpha disables balancing, so
/// gamma_focal = 0 yields plain BCE.
double focal_conf_loss(int p, double p_hat, double alpha, double gamma_focal);
double focal_conf_loss_grad(int p, double p_hat, double alpha, double gamma_focal);

/// Keeps every positive plus the max(neg_pos_ratio*|positives|, min_neg)
/// highest-loss negatives (ties broken by index). Returns sorted indices.
std::vector<std::size_t> select_hard_examples(const std::vector<double>& per_candidate_losses,
                                              const std::vector<std::size_t>& positives,
                                              const OhemConfig& cfg);

/// Center-sampling assignment: a box goes to the pyramid level whose size
/// range (input-scaled 0-64, 64-128, 128-inf at a 256 reference) contains
/// max(w, h); the positive cell is the one containing its center. First box
/// to claim a cell keeps it.
struct CellTarget {
    int level = 0;
    int index = 0; // row * w + col within the level grid
    int gt = 0;    // index into the ground-truth list
    EncodedBox target{};
};

struct Assignment {
    std::vector<CellTarget> positives;
    // Flat candidate indexing: level grids concatenated in level order.
    std::vector<std::size_t> positive_flat;
    std::vector<std::size_t> level_offsets; // per level start into flat index
    std::size_t total_cells = 0;
};

Assignment assign_targets(const std::vector<Box>& gts, const HeadOutput& shape,
                          const DetectorConfig& cfg);

struct DetectionLossResult {
    LossBreakdown loss;
    HeadGrad grad;        // d loss.total / d output grids
    int num_positive = 0;
    int num_selected = 0; // candidates contributing to the confidence term
};

/// Stage-1/3 loss: binary cross-entropy averaged over every grid cell plus
/// smooth-L1 on encoded targets averaged over positive cells (summed over the
/// four box coordinates per cell). pos_weight > 1 upweights positive cells,
/// which calibrates confidences high enough for pseudo-labeling at desk
/// scale; 1 is the plain loss.
DetectionLossResult supervised_detection_loss(const HeadOutput& out, const std::vector<Box>& gts,
                                              const DetectorConfig& cfg, double beta,
                                              double pos_weight = 1.0);

/// Stage-2 loss: gated confidence loss averaged over the OHEM-selected
/// candidate subset plus the same positives-only regression term.
DetectionLossResult ohem_detection_loss(const HeadOutput& out, const std::vector<Box>& gts,
                                        const DetectorConfig& cfg, const OhemConfig& ohem,
                                        double beta);

/// Ablation baseline: focal confidence loss over all cells, no subset
/// selection, same regression term.
DetectionLossResult focal_detection_loss(const HeadOutput& out, const std::vector<Box>& gts,
                                         const DetectorConfig& cfg, double alpha,
                                         double gamma_focal, double beta);

} // namespace inkdet
