// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inkdet/geometry.hpp"
#include "inkdet/image.hpp"
#include "inkdet/nn.hpp"

namespace inkdet {

/// Tiny anchor-free detector: a strided conv pyramid shared by two
/// single-class heads (face, body). The pyramid stem downsamples by 4, then
/// one stage per configured stride halves the resolution, so the stride list
/// is pinned to 8, 16, 32, ... by construction.
struct DetectorConfig {
    int input_size = 256;
    std::vector<int> strides = {8, 16, 32};
    double width_mult = 1.0;
    double depth_mult = 1.0;
    int num_heads = 2;
    int base_channels = 16;

    int channels() const;
    int blocks_per_stage() const;
    void validate() const; // throws ContractError on bad geometry

    bool operator==(const DetectorConfig&) const = default;
};

struct SegmentRange {
    std::string name;
    std::size_t offset = 0;
    std::size_t count = 0;

    bool operator==(const SegmentRange&) const = default;
};

struct LayerSpec {
    std::string name;    // e.g. "backbone.stage1.b0", "head_face.l2.conf_out"
    std::string segment; // backbone | neck | head_face | head_body
    int in_c = 0;
    int out_c = 0;
    int ksize = 0;
    int stride = 1;
    int pad = 0;
    bool relu = false;
    std::size_t w_off = 0;
    std::size_t w_count = 0;
    std::size_t b_off = 0;
    std::size_t b_count = 0;

    bool operator==(const LayerSpec&) const = default;
};

/// Flat parameter layout derived from a DetectorConfig. Segment names and
/// ordering are stable across save/load: backbone, neck, head_face, head_body.
class ParamLayout {
public:
    static ParamLayout make(const DetectorConfig& cfg);

    std::size_t total() const { return total_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    const std::vector<SegmentRange>& segments() const { return segments_; }
    const LayerSpec& layer(const std::string& name) const;
    const SegmentRange& segment(const std::string& name) const;

    bool operator==(const ParamLayout&) const = default;

private:
    std::vector<LayerSpec> layers_;
    std::vector<SegmentRange> segments_;
    std::size_t total_ = 0;
};

/// Flat ordered parameter vector plus the config that defines its layout.
struct DetectorParams {
    DetectorConfig config;
    std::vector<double> values;
};

/// Fan-in-scaled uniform conv weights, zero biases, confidence output biases
/// at logit(0.01) so an untrained net predicts near-background everywhere.
DetectorParams init_params(const DetectorConfig& cfg, std::uint64_t seed);

/// Per-stride prediction grid for one class: confidence logits plus box
/// regression planes (dx, dy, log-w, log-h), each h*w, reg plane-major.
struct LevelOutput {
    int stride = 0;
    int h = 0;
    int w = 0;
    std::vector<double> conf;
    std::vector<double> reg;
};

struct HeadOutput {
    Klass klass = Klass::face;
    std::vector<LevelOutput> levels;
};

/// Gradient of a scalar loss w.r.t. one head's output grids; shapes mirror
/// HeadOutput.
struct LevelGrad {
    std::vector<double> conf;
    std::vector<double> reg;
};
using HeadGrad = std::vector<LevelGrad>;

/// Activations captured by forward_trace for the backward pass.
struct ForwardTrace {
    Klass klass = Klass::face;
    std::vector<Tensor3> slots;
};

struct Detections {
    std::vector<ScoredBox> face;
    std::vector<ScoredBox> body;
};

class Network {
public:
    explicit Network(DetectorConfig cfg);

    const DetectorConfig& config() const { return cfg_; }
    const ParamLayout& layout() const { return layout_; }

    /// Deterministic single-image forward for klass' head. The image must be
    /// input_size x input_size with values in [0, 1].
    HeadOutput forward(const DetectorParams& params, const Image& image, Klass klass) const;

    /// Forward that also captures activations for backward().
    HeadOutput forward_trace(const DetectorParams& params, const Image& image, Klass klass,
                             ForwardTrace& trace) const;

    /// Accumulates dLoss/dParams into grads (size layout().total()) given the
    /// output-grid gradient. Only the traced head and the shared trunk receive
    /// gradient; the other head's segment is untouched.
    void backward(const DetectorParams& params, const ForwardTrace& trace, const HeadGrad& d_out,
                  std::vector<double>& grads) const;

    /// forward -> decode -> score filter -> per-class NMS for both heads.
    Detections predict(const DetectorParams& params, const Image& image, double conf_thresh,
                       double nms_thresh) const;

private:
    struct Step {
        int layer = 0; // index into layout_.layers()
        int in_slot = 0;
        int out_slot = 0;
    };

    void run_plan(const DetectorParams& params, const Image& image, Klass klass,
                  std::vector<Tensor3>& slots) const;
    HeadOutput collect_output(Klass klass, const std::vector<Tensor3>& slots) const;

    DetectorConfig cfg_;
    ParamLayout layout_;
    std::vector<Step> shared_plan_;
    std::vector<Step> head_plan_[2];
    std::vector<int> neck_slots_;    // per level
    std::vector<int> conf_slots_;    // per level (shared between heads)
    std::vector<int> reg_slots_;     // per level
    int n_slots_ = 0;
};

/// Grid location (row, col) plus stride decode:
///   score = sigmoid(logit), cx = (col+dx)*stride, cy = (row+dy)*stride,
///   w = exp(lw)*stride, h = exp(lh)*stride, box clipped to image bounds.
/// Boxes clipped to zero area are dropped.
std::vector<ScoredBox> decode(const HeadOutput& out, const DetectorConfig& cfg);

/// Inverse of the decode formula at a given cell; used to build regression
/// targets. Returns {dx, dy, lw, lh}.
struct EncodedBox {
    double dx, dy, lw, lh;
};
EncodedBox encode_box(const Box& b, int row, int col, int stride);

/// Head trained at this optimizer step: even iterations face, odd body.
Klass alternate_head(std::uint64_t iteration);

} // namespace inkdet
