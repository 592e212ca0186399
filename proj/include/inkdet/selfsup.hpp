// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inkdet/checkpoint.hpp"
#include "inkdet/datapipe.hpp"
#include "inkdet/detector.hpp"
#include "inkdet/eval.hpp"
#include "inkdet/losses.hpp"

namespace inkdet {

enum class Stage2Loss { gated_ohem, focal };

/// Stage-2 trainer configuration. phi == nullopt means "never reset".
struct SelfSupConfig {
    std::optional<std::uint64_t> phi = 500; // student reset period
    double d = 0.9996;                      // EMA keep rate
    double beta = 2.0;                      // regression loss coefficient
    double c_teac = 0.65;                   // teacher confidence floor for pseudo labels
    double ct_pos_thresh = 0.5;
    double ct_neg_thresh = 0.5;
    double lr = 1e-4;
    double momentum_gamma = 0.0; // 0 = plain SGD
    double pseudo_nms_thresh = 0.4;
    std::uint64_t max_iterations = 2000;
    std::uint64_t eval_interval = 100;
    // Candidate checkpoints must beat the init's dev AP by this much before
    // they replace it (early-stopping min-delta); 0 keeps the pure argmax.
    double min_ap_gain = 0.0;
    Stage2Loss loss = Stage2Loss::gated_ohem;
    double focal_alpha = 0.25;
    double focal_gamma = 2.0;
    OhemConfig ohem_mining; // ratio/floor knobs; thresholds come from above

    OhemConfig ohem() const {
        OhemConfig o = ohem_mining;
        o.ct_pos_thresh = ct_pos_thresh;
        o.ct_neg_thresh = ct_neg_thresh;
        return o;
    }

    void validate() const;
};

/// Teacher predictions that survived the confidence floor and NMS; ground
/// truth for the student step.
struct PseudoLabelSet {
    std::vector<Box> face_boxes;
    std::vector<Box> body_boxes;
    std::vector<double> source_scores; // faces first, then bodies
};

struct TrainerState {
    DetectorParams teacher;
    DetectorParams student;
    std::uint64_t iteration = 0; // completed steps
    std::uint64_t rng_seed = 0;
    std::vector<double> momentum; // student momentum buffer, zeroed on reset
};

TrainerState make_trainer_state(const DetectorParams& init, std::uint64_t seed);

/// Eq.-style EMA merge: teacher <- d * teacher + (1 - d) * student,
/// elementwise. The teacher never takes part in any backward pass. Layout
/// mismatch throws.
DetectorParams ema_update(const DetectorParams& teacher, const DetectorParams& student, double d);

/// Copies teacher weights into the student (and clears momentum) whenever the
/// completed-step counter is a positive multiple of phi. No-op for "never".
void maybe_reset_student(TrainerState& state, const std::optional<std::uint64_t>& phi);

/// One SGD move: p -= lr * g, or classic momentum v = gamma*v + g, p -= lr*v.
/// Non-finite gradients abort with NumericError naming the first bad index.
void sgd_step(std::vector<double>& params, const std::vector<double>& grads, double lr,
              double momentum_gamma, std::vector<double>& velocity);

/// Decode + confidence floor + per-class NMS on a weakly augmented image.
PseudoLabelSet generate_pseudo_labels(const Network& net, const DetectorParams& teacher,
                                      const Image& image, const SelfSupConfig& cfg);

/// One teacher-student iteration:
///   weak-augment -> teacher pseudo labels -> strong tail with transported
///   labels -> student loss on the alternating head -> SGD on the student ->
///   EMA merge -> periodic reset; iteration advances by one.
LossBreakdown selfsup_step(TrainerState& state, const Network& net, const AnnotatedImage& raw,
                           const SelfSupConfig& cfg);

struct CurvePoint {
    std::uint64_t iteration = 0;
    APReport teacher;
    APReport student;
    LossBreakdown loss;
};

struct Stage2Result {
    Checkpoint best;               // teacher with the best dev mean AP
    double best_dev_ap = 0.0;
    std::uint64_t best_iteration = 0;
    std::vector<CurvePoint> curve;
};

using StepObserver = std::function<void(const TrainerState&)>;

/// Full stage-2 run over a uniform random unlabeled stream. Teacher and
/// student are both evaluated on the labeled dev split every eval_interval
/// iterations (including iteration 0), and the teacher checkpoint with the
/// best dev mean AP is returned together with both AP curves.
Stage2Result run_stage2(const DetectorParams& init, const Dataset& unlabeled, const Dataset& dev,
                        const SelfSupConfig& cfg, std::uint64_t seed,
                        const EvalSettings& eval_settings = {},
                        const StepObserver& observer = nullptr);

/// Curve log I/O: tab-separated with a fixed header, one row per eval point.
void write_curve_log(const std::vector<CurvePoint>& curve, const std::string& path);
std::vector<CurvePoint> read_curve_log(const std::string& path);

} // namespace inkdet
