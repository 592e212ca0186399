// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inkdet/checkpoint.hpp"
#include "inkdet/datapipe.hpp"
#include "inkdet/detector.hpp"
#include "inkdet/eval.hpp"

namespace inkdet {

/// Supervised training options shared by the pre-training and fine-tuning
/// stages. Stage 1 plugs in a style bank; stage 3 runs with mode none.
struct SupervisedOptions {
    int epochs = 20;
    int batch_size = 8;   // paper protocol: 16
    double lr = 1e-3;     // paper value for both supervised stages
    int warmup_epochs = 10; // linear ramp to lr; 0 restores the fixed schedule
    double momentum = 0.9;
    double pos_weight = 4.0; // positive-cell BCE weight; 1 = plain loss
    double beta = 2.0;
    StyleBank style_bank;
    AugmentationPolicy augmentation;
    int no_aug_window = 15;
    int eval_every_epochs = 1;
    EvalSettings eval_settings;
    std::string stage_tag = "stage1";
};

struct EpochLogPoint {
    int epoch = 0;
    double train_loss = 0.0;
    APReport dev;
};

struct SupervisedResult {
    Checkpoint best;
    double best_dev_ap = 0.0;
    int best_epoch = -1; // -1 when epochs == 0 (init passthrough)
    std::vector<EpochLogPoint> log;
};

/// Deterministic supervised loop: per-epoch seeded shuffle, per-image style
/// pick and augmentation seeds, head alternation by optimizer-step parity,
/// plain momentum SGD, best checkpoint by dev mean AP.
SupervisedResult train_supervised(const DetectorParams& init, const Dataset& train,
                                  const Dataset& dev, const SupervisedOptions& options,
                                  std::uint64_t seed);

void write_epoch_log(const std::vector<EpochLogPoint>& log, const std::string& path);

/// Scales the raster and boxes to a square side (no-op when already there).
AnnotatedImage resize_annotated(const AnnotatedImage& a, int size);

} // namespace inkdet
