// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "inkdet/errors.hpp"
#include "inkdet/losses.hpp"
#include "inkdet/rng.hpp"
#include "inkdet/selfsup.hpp"

namespace inkdet {

AnnotatedImage resize_annotated(const AnnotatedImage& a, int size) {
    if (a.image.h == size && a.image.w == size) return a;
    AnnotatedImage out = a;
    const double sx = static_cast<double>(size) / a.image.w;
    const double sy = static_cast<double>(size) / a.image.h;
    out.image = resize_bilinear(a.image, size, size);
    for (Box& b : out.face_boxes) b = Box{b.cx * sx, b.cy * sy, b.w * sx, b.h * sy};
    for (Box& b : out.body_boxes) b = Box{b.cx * sx, b.cy * sy, b.w * sx, b.h * sy};
    return out;
}

namespace {

// One stylized copy per image per run ("random selection per each image"),
// fixed up front like an offline stylized dataset.
Dataset prepare_training_set(const Dataset& train, const SupervisedOptions& opts, int input_size,
                             std::uint64_t seed) {
    Dataset prepared;
    prepared.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        AnnotatedImage a = resize_annotated(train[i], input_size);
        if (opts.style_bank.mode != StyleMode::none && a.source == ImageSource::natural) {
            a.image = apply_style_for_id(a.image, a.id, opts.style_bank,
                                         derive_seed(seed, 0x57caULL, i));
        }
        prepared.push_back(std::move(a));
    }
    return prepared;
}

// Mosaic + geometric chain for one training sample.
AnnotatedImage build_sample(const Dataset& prepared, std::size_t idx,
                            const AugmentationPolicy& policy, int input_size,
                            std::uint64_t img_seed) {
    Rng rng(derive_seed(img_seed, 0xba7cULL));
    AnnotatedImage sample;
    if (policy.enabled && prepared.size() >= 4 && rng.bernoulli(policy.mosaic_prob)) {
        std::vector<AnnotatedImage> parts;
        parts.push_back(prepared[idx]);
        for (int j = 0; j < 3; ++j) {
            parts.push_back(prepared[rng.uniform_int(prepared.size())]);
        }
        sample = mosaic(parts, input_size, derive_seed(img_seed, 0x30ULL));
    } else {
        sample = prepared[idx];
    }
    return apply_stage1_augmentation(sample, policy, derive_seed(img_seed, 0xa6ULL));
}

} // namespace

SupervisedResult train_supervised(const DetectorParams& init, const Dataset& train,
                                  const Dataset& dev, const SupervisedOptions& options,
                                  std::uint64_t seed) {
    if (train.empty()) throw DataError("train_supervised: empty training dataset");

    const Network net(init.config);
    DetectorParams params = init;
    std::vector<double> velocity(params.values.size(), 0.0);
    std::vector<double> grads(params.values.size(), 0.0);
    const Dataset prepared = prepare_training_set(train, options, init.config.input_size, seed);

    SupervisedResult result;
    result.best.params = init;
    result.best.stage = options.stage_tag;
    result.best_dev_ap = -1.0;

    std::uint64_t global_step = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const AugmentationPolicy policy = schedule_augmentation(
            epoch, options.epochs, options.augmentation, options.no_aug_window);

        std::vector<std::size_t> order(train.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(seed, 0xe60cULL, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
        }

        const double lr = options.warmup_epochs > 0
                              ? options.lr * std::min(1.0, (epoch + 1.0) / options.warmup_epochs)
                              : options.lr;
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t end = std::min(order.size(), start + options.batch_size);
            const Klass k = alternate_head(global_step);
            std::fill(grads.begin(), grads.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t bi = start; bi < end; ++bi) {
                const std::uint64_t img_seed =
                    derive_seed(seed, static_cast<std::uint64_t>(epoch), order[bi]);
                const AnnotatedImage sample = build_sample(prepared, order[bi], policy,
                                                           init.config.input_size, img_seed);
                const std::vector<Box>& gts =
                    k == Klass::face ? sample.face_boxes : sample.body_boxes;
                ForwardTrace trace;
                const HeadOutput out = net.forward_trace(params, sample.image, k, trace);
                const DetectionLossResult res = supervised_detection_loss(
                    out, gts, init.config, options.beta, options.pos_weight);
                batch_loss += res.loss.total;
                // Mean over the batch: scale this image's output grads.
                HeadGrad scaled = res.grad;
                const double inv = 1.0 / static_cast<double>(end - start);
                for (auto& lvl : scaled) {
                    for (double& v : lvl.conf) v *= inv;
                    for (double& v : lvl.reg) v *= inv;
                }
                net.backward(params, trace, scaled, grads);
            }
            sgd_step(params.values, grads, lr, options.momentum, velocity);
            epoch_loss += batch_loss / static_cast<double>(end - start);
            ++n_batches;
            ++global_step;
        }

        EpochLogPoint pt;
        pt.epoch = epoch;
        pt.train_loss = n_batches > 0 ? epoch_loss / static_cast<double>(n_batches) : 0.0;
        const bool eval_now = !dev.empty() && (epoch % std::max(1, options.eval_every_epochs) == 0 ||
                                               epoch == options.epochs - 1);
        if (eval_now) {
            pt.dev = evaluate_detector(net, params, dev, options.eval_settings, seed);
            if (pt.dev.mean_ap > result.best_dev_ap) {
                result.best_dev_ap = pt.dev.mean_ap;
                result.best_epoch = epoch;
                result.best.params = params;
                result.best.iteration = global_step;
            }
        }
        result.log.push_back(pt);
    }

    if (options.epochs == 0 || result.best_epoch < 0) {
        // No epochs or no eval points: hand back the final weights.
        result.best.params = options.epochs == 0 ? init : params;
        result.best.iteration = global_step;
        if (result.best_dev_ap < 0.0) result.best_dev_ap = 0.0;
    }
    return result;
}

void write_epoch_log(const std::vector<EpochLogPoint>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_epoch_log: cannot open " + path);
    out << "epoch\ttrain_loss\tdev_ap_face\tdev_ap_body\tdev_map\n";
    out.precision(17);
    auto cls = [](const APReport& r, Klass k) {
        const auto it = r.per_class_ap.find(k);
        return it == r.per_class_ap.end() ? 0.0 : it->second;
    };
    for (const auto& p : log) {
        out << p.epoch << '\t' << p.train_loss << '\t' << cls(p.dev, Klass::face) << '\t'
            << cls(p.dev, Klass::body) << '\t' << p.dev.mean_ap << '\n';
    }
}

} // namespace inkdet
