// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inkdet/checkpoint.hpp"
#include "inkdet/config.hpp"
#include "inkdet/datapipe.hpp"
#include "inkdet/selfsup.hpp"
#include "inkdet/train.hpp"

namespace inkdet {

// Exit codes: 0 ok, 2 config, 3 data/io, 4 numeric failure, 5 contract/other.
enum ExitCode {
    exit_ok = 0,
    exit_config = 2,
    exit_data = 3,
    exit_numeric = 4,
    exit_contract = 5,
};

/// Resolves output_dir against the INKDET_OUTPUT_ROOT environment override
/// (the only environment knob) and creates it.
std::string resolve_output_dir(const std::string& dir);

/// Loads data.<role> as a dataset; honors data.include_animals.
Dataset load_split(const RunConfig& cfg, const std::string& role_key, bool required);

// In-process pipelines, shared by the CLI verbs and the test harnesses.

/// Stage 1: tiny-face filter, style-mixed supervised pre-training on the
/// natural split, best checkpoint by drawing-dev AP.
SupervisedResult run_stage1_pipeline(const RunConfig& cfg, const Dataset& natural_train,
                                     const Dataset& dev, std::uint64_t seed);

/// Stage 2: teacher-student self-supervision from an init checkpoint.
Stage2Result run_stage2_pipeline(const RunConfig& cfg, const DetectorParams& init,
                                 const Dataset& unlabeled, const Dataset& dev, std::uint64_t seed);

struct Stage3Result {
    SupervisedResult train;
    APReport test_report;
};

/// Stage 3: subset-sampled fine-tuning on labeled drawings, test-split report.
Stage3Result run_stage3_pipeline(const RunConfig& cfg, const DetectorParams& init,
                                 const Dataset& drawing_train, const Dataset& dev,
                                 const Dataset& test, std::uint64_t seed);

// CLI verbs. Each returns an ExitCode and writes artifacts under output_dir.
int cmd_gen_synthetic(const RunConfig& cfg, const std::string& output_dir);
int cmd_stage1(const RunConfig& cfg, const std::string& output_dir);
int cmd_stage2(const RunConfig& cfg, const std::string& init_ckpt, const std::string& output_dir);
int cmd_stage3(const RunConfig& cfg, const std::string& init_ckpt, const std::string& output_dir);
int cmd_eval(const RunConfig& cfg, const std::string& ckpt_path, const std::string& output_dir);
int cmd_grid(const RunConfig& cfg, const std::string& stage, const std::string& init_ckpt,
             const std::string& output_dir, bool resume);
int cmd_render(const RunConfig& cfg, const std::string& ckpt_path,
               const std::vector<std::string>& images, const std::string& output_dir);
int cmd_plot(const std::vector<std::string>& curve_logs, const std::string& output_dir);

} // namespace inkdet
