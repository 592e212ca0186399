// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/detector.hpp"

#include <algorithm>
#include <cmath>

#include "inkdet/errors.hpp"
#include "inkdet/rng.hpp"

namespace inkdet {

int DetectorConfig::channels() const {
    return std::max(4, static_cast<int>(std::lround(base_channels * width_mult)));
}

int DetectorConfig::blocks_per_stage() const {
    return std::max(1, static_cast<int>(std::lround(depth_mult)));
}

void DetectorConfig::validate() const {
    if (num_heads != 2) throw ContractError("DetectorConfig: num_heads must be 2");
    if (strides.empty() || strides.size() > 4) {
        throw ContractError("DetectorConfig: need 1..4 pyramid strides");
    }
    for (std::size_t i = 0; i < strides.size(); ++i) {
        if (strides[i] != (8 << i)) {
            throw ContractError("DetectorConfig: stride list must be 8,16,32,... (pyramid halves "
                                "per stage); got " +
                                std::to_string(strides[i]) + " at level " + std::to_string(i));
        }
    }
    const int max_stride = strides.back();
    if (input_size <= 0 || input_size % max_stride != 0) {
        throw ContractError("DetectorConfig: input_size must be a positive multiple of " +
                            std::to_string(max_stride));
    }
}

namespace {

struct LayoutBuilder {
    std::vector<LayerSpec> layers;
    std::size_t cursor = 0;

    int add(const std::string& name, const std::string& segment, int in_c, int out_c, int ksize,
            int stride, int pad, bool relu) {
        LayerSpec l;
        l.name = name;
        l.segment = segment;
        l.in_c = in_c;
        l.out_c = out_c;
        l.ksize = ksize;
        l.stride = stride;
        l.pad = pad;
        l.relu = relu;
        l.w_count = static_cast<std::size_t>(out_c) * in_c * ksize * ksize;
        l.b_count = static_cast<std::size_t>(out_c);
        l.w_off = cursor;
        cursor += l.w_count;
        l.b_off = cursor;
        cursor += l.b_count;
        layers.push_back(std::move(l));
        return static_cast<int>(layers.size()) - 1;
    }
};

} // namespace

ParamLayout ParamLayout::make(const DetectorConfig& cfg) {
    cfg.validate();
    const int C = cfg.channels();
    const int nb = cfg.blocks_per_stage();
    const int levels = static_cast<int>(cfg.strides.size());

    ParamLayout out;
    LayoutBuilder b;

    auto begin_segment = [&](const std::string& name) {
        out.segments_.push_back({name, b.cursor, 0});
    };
    auto end_segment = [&]() { out.segments_.back().count = b.cursor - out.segments_.back().offset; };

    const int C0 = std::max(4, C / 2);

    begin_segment("backbone");
    // thin full-resolution tap first; small faces die in an immediate
    // downsample, but full-width convs at full resolution dominate the budget
    b.add("backbone.stem0", "backbone", 3, C0, 3, 1, 1, true);
    b.add("backbone.stem1", "backbone", C0, C, 3, 2, 1, true);
    b.add("backbone.stem2", "backbone", C, C, 3, 2, 1, true);
    for (int s = 0; s < levels; ++s) {
        for (int blk = 0; blk < nb; ++blk) {
            b.add("backbone.stage" + std::to_string(s) + ".b" + std::to_string(blk), "backbone", C,
                  C, 3, blk == 0 ? 2 : 1, 1, true);
        }
    }
    end_segment();

    begin_segment("neck");
    for (int s = 0; s < levels; ++s) {
        b.add("neck.l" + std::to_string(s), "neck", C, C, 1, 1, 0, true);
    }
    end_segment();

    for (const char* head : {"head_face", "head_body"}) {
        begin_segment(head);
        for (int s = 0; s < levels; ++s) {
            const std::string base = std::string(head) + ".l" + std::to_string(s) + ".";
            b.add(base + "conf_trunk", head, C, C, 3, 1, 1, true);
            b.add(base + "conf_out", head, C, 1, 1, 1, 0, false);
            b.add(base + "reg_trunk", head, C, C, 3, 1, 1, true);
            b.add(base + "reg_out", head, C, 4, 1, 1, 0, false);
        }
        end_segment();
    }

    out.layers_ = std::move(b.layers);
    out.total_ = b.cursor;
    return out;
}

const LayerSpec& ParamLayout::layer(const std::string& name) const {
    for (const auto& l : layers_) {
        if (l.name == name) return l;
    }
    throw ContractError("ParamLayout: no layer named " + name);
}

const SegmentRange& ParamLayout::segment(const std::string& name) const {
    for (const auto& s : segments_) {
        if (s.name == name) return s;
    }
    throw ContractError("ParamLayout: no segment named " + name);
}

DetectorParams init_params(const DetectorConfig& cfg, std::uint64_t seed) {
    const ParamLayout layout = ParamLayout::make(cfg);
    DetectorParams p;
    p.config = cfg;
    p.values.assign(layout.total(), 0.0);

    // logit(0.01): background prior for untrained confidence outputs.
    const double conf_bias = std::log(0.01 / 0.99);

    Rng rng(derive_seed(seed, 0x1f1fULL));
    for (const auto& l : layout.layers()) {
        // Deliberately smaller than the He bound: the plain-SGD loop needs the
        // gentle warmup, larger inits collapse into a bias-only fit.
        const double a = 1.0 / std::sqrt(static_cast<double>(l.in_c) * l.ksize * l.ksize);
        for (std::size_t i = 0; i < l.w_count; ++i) {
            p.values[l.w_off + i] = rng.uniform(-a, a);
        }
        const bool is_conf_out = l.name.size() > 8 && l.name.rfind("conf_out") == l.name.size() - 8;
        for (std::size_t i = 0; i < l.b_count; ++i) {
            p.values[l.b_off + i] = is_conf_out ? conf_bias : 0.0;
        }
    }
    return p;
}

Network::Network(DetectorConfig cfg) : cfg_(std::move(cfg)), layout_(ParamLayout::make(cfg_)) {
    const int levels = static_cast<int>(cfg_.strides.size());
    const int nb = cfg_.blocks_per_stage();

    auto layer_index = [&](const std::string& name) {
        const auto& layers = layout_.layers();
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].name == name) return static_cast<int>(i);
        }
        throw ContractError("Network: missing layer " + name);
    };

    int next_slot = 1; // slot 0 is the input image
    auto step = [&](std::vector<Step>& plan, const std::string& name, int in_slot) {
        plan.push_back({layer_index(name), in_slot, next_slot});
        return next_slot++;
    };

    int cur = step(shared_plan_, "backbone.stem0", 0);
    cur = step(shared_plan_, "backbone.stem1", cur);
    cur = step(shared_plan_, "backbone.stem2", cur);
    std::vector<int> feat_slots;
    for (int s = 0; s < levels; ++s) {
        for (int blk = 0; blk < nb; ++blk) {
            cur = step(shared_plan_, "backbone.stage" + std::to_string(s) + ".b" + std::to_string(blk),
                       cur);
        }
        feat_slots.push_back(cur);
    }
    for (int s = 0; s < levels; ++s) {
        neck_slots_.push_back(step(shared_plan_, "neck.l" + std::to_string(s), feat_slots[s]));
    }

    // Both heads reuse the same slot indices; only one head runs per forward.
    const int head_slot_base = next_slot;
    for (int h = 0; h < 2; ++h) {
        next_slot = head_slot_base;
        const char* head = h == 0 ? "head_face" : "head_body";
        for (int s = 0; s < levels; ++s) {
            const std::string base = std::string(head) + ".l" + std::to_string(s) + ".";
            const int trunk = step(head_plan_[h], base + "conf_trunk", neck_slots_[s]);
            const int conf = step(head_plan_[h], base + "conf_out", trunk);
            const int rtrunk = step(head_plan_[h], base + "reg_trunk", neck_slots_[s]);
            const int reg = step(head_plan_[h], base + "reg_out", rtrunk);
            if (h == 0) {
                conf_slots_.push_back(conf);
                reg_slots_.push_back(reg);
            }
        }
    }
    n_slots_ = next_slot;
}

void Network::run_plan(const DetectorParams& params, const Image& image, Klass klass,
                       std::vector<Tensor3>& slots) const {
    if (image.h != cfg_.input_size || image.w != cfg_.input_size) {
        throw ContractError("forward: image is " + std::to_string(image.w) + "x" +
                            std::to_string(image.h) + ", expected " +
                            std::to_string(cfg_.input_size) + " square");
    }
    if (params.values.size() != layout_.total()) {
        throw ContractError("forward: parameter vector size mismatch");
    }

    slots.assign(n_slots_, Tensor3());
    Tensor3& in = slots[0];
    in = Tensor3(3, image.h, image.w);
    in.data = image.data;

    auto run = [&](const std::vector<Step>& plan) {
        for (const auto& st : plan) {
            const LayerSpec& l = layout_.layers()[st.layer];
            conv2d_forward(slots[st.in_slot], params.values.data() + l.w_off,
                           params.values.data() + l.b_off, l.out_c, l.ksize, l.stride, l.pad,
                           l.relu, slots[st.out_slot]);
        }
    };
    run(shared_plan_);
    run(head_plan_[klass == Klass::face ? 0 : 1]);
}

HeadOutput Network::collect_output(Klass klass, const std::vector<Tensor3>& slots) const {
    HeadOutput out;
    out.klass = klass;
    for (std::size_t s = 0; s < cfg_.strides.size(); ++s) {
        const Tensor3& conf = slots[conf_slots_[s]];
        const Tensor3& reg = slots[reg_slots_[s]];
        LevelOutput lvl;
        lvl.stride = cfg_.strides[s];
        lvl.h = conf.h;
        lvl.w = conf.w;
        lvl.conf = conf.data;
        lvl.reg = reg.data;
        out.levels.push_back(std::move(lvl));
    }
    return out;
}

HeadOutput Network::forward(const DetectorParams& params, const Image& image, Klass klass) const {
    std::vector<Tensor3> slots;
    run_plan(params, image, klass, slots);
    return collect_output(klass, slots);
}

HeadOutput Network::forward_trace(const DetectorParams& params, const Image& image, Klass klass,
                                  ForwardTrace& trace) const {
    trace.klass = klass;
    run_plan(params, image, klass, trace.slots);
    return collect_output(klass, trace.slots);
}

void Network::backward(const DetectorParams& params, const ForwardTrace& trace,
                       const HeadGrad& d_out, std::vector<double>& grads) const {
    if (grads.size() != layout_.total()) {
        throw ContractError("backward: gradient vector size mismatch");
    }
    if (d_out.size() != cfg_.strides.size()) {
        throw ContractError("backward: level count mismatch");
    }

    std::vector<Tensor3> d_slots(n_slots_);
    for (int i = 0; i < n_slots_; ++i) {
        const Tensor3& a = trace.slots[i];
        d_slots[i] = Tensor3(a.c, a.h, a.w);
    }
    for (std::size_t s = 0; s < cfg_.strides.size(); ++s) {
        Tensor3& dc = d_slots[conf_slots_[s]];
        Tensor3& dr = d_slots[reg_slots_[s]];
        if (d_out[s].conf.size() != dc.size() || d_out[s].reg.size() != dr.size()) {
            throw ContractError("backward: output grad shape mismatch at level " +
                                std::to_string(s));
        }
        dc.data = d_out[s].conf;
        dr.data = d_out[s].reg;
    }

    auto run_back = [&](const std::vector<Step>& plan) {
        for (auto it = plan.rbegin(); it != plan.rend(); ++it) {
            const LayerSpec& l = layout_.layers()[it->layer];
            conv2d_backward(trace.slots[it->in_slot], params.values.data() + l.w_off, l.out_c,
                            l.ksize, l.stride, l.pad, l.relu, trace.slots[it->out_slot],
                            d_slots[it->out_slot], grads.data() + l.w_off, grads.data() + l.b_off,
                            d_slots[it->in_slot]);
        }
    };
    run_back(head_plan_[trace.klass == Klass::face ? 0 : 1]);
    run_back(shared_plan_);
}

Detections Network::predict(const DetectorParams& params, const Image& image, double conf_thresh,
                            double nms_thresh) const {
    Detections det;
    for (Klass k : {Klass::face, Klass::body}) {
        const HeadOutput out = forward(params, image, k);
        std::vector<ScoredBox> boxes = decode(out, cfg_);
        std::vector<ScoredBox> keep;
        for (const auto& sb : boxes) {
            if (sb.score >= conf_thresh) keep.push_back(sb);
        }
        auto& dst = k == Klass::face ? det.face : det.body;
        dst = nms(keep, nms_thresh);
    }
    return det;
}

std::vector<ScoredBox> decode(const HeadOutput& out, const DetectorConfig& cfg) {
    std::vector<ScoredBox> boxes;
    const double S = cfg.input_size;
    for (const auto& lvl : out.levels) {
        const int n = lvl.h * lvl.w;
        for (int row = 0; row < lvl.h; ++row) {
            for (int col = 0; col < lvl.w; ++col) {
                const int idx = row * lvl.w + col;
                const double score = sigmoid(lvl.conf[idx]);
                const double dx = lvl.reg[idx];
                const double dy = lvl.reg[n + idx];
                const double lw = lvl.reg[2 * n + idx];
                const double lh = lvl.reg[3 * n + idx];
                const double cx = (col + dx) * lvl.stride;
                const double cy = (row + dy) * lvl.stride;
                const double w = std::exp(lw) * lvl.stride;
                const double h = std::exp(lh) * lvl.stride;
                // Clip in corner form; drop anything that collapses.
                const double x1 = std::clamp(cx - w / 2.0, 0.0, S);
                const double y1 = std::clamp(cy - h / 2.0, 0.0, S);
                const double x2 = std::clamp(cx + w / 2.0, 0.0, S);
                const double y2 = std::clamp(cy + h / 2.0, 0.0, S);
                if (!(x2 > x1) || !(y2 > y1)) continue;
                boxes.push_back({from_corner(x1, y1, x2, y2), score, out.klass});
            }
        }
    }
    return boxes;
}

EncodedBox encode_box(const Box& b, int row, int col, int stride) {
    if (!b.valid()) throw ContractError("encode_box: invalid box");
    return {b.cx / stride - col, b.cy / stride - row, std::log(b.w / stride),
            std::log(b.h / stride)};
}

Klass alternate_head(std::uint64_t iteration) {
    return iteration % 2 == 0 ? Klass::face : Klass::body;
}

} // namespace inkdet
