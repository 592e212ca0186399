// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inkdet/errors.hpp"

namespace inkdet {

LossBreakdown total_loss(double conf, double reg, double beta) {
    return {conf, reg, conf + beta * reg, beta};
}

double smooth_l1(double gt, double pred) {
    const double e = std::abs(gt - pred);
    return e < 1.0 ? 0.5 * e * e : e - 0.5;
}

double smooth_l1_grad(double gt, double pred) {
    const double d = pred - gt;
    if (std::abs(d) < 1.0) return d;
    return d > 0.0 ? 1.0 : -1.0;
}

double clamp_prob(double p) {
    constexpr double eps = 1e-7;
    return std::clamp(p, eps, 1.0 - eps);
}

double gated_conf_loss(int p, double p_hat, const OhemConfig& cfg) {
    p_hat = clamp_prob(p_hat);
    const int ct_pos = p_hat >= cfg.ct_pos_thresh ? 1 : 0;
    const int ct_neg = p_hat <= cfg.ct_neg_thresh ? 1 : 0;
    return -p * ct_pos * std::log(p_hat) - (1 - p) * ct_neg * std::log(1.0 - p_hat);
}

double gated_conf_loss_grad(int p, double p_hat, const OhemConfig& cfg) {
    p_hat = clamp_prob(p_hat);
    const int ct_pos = p_hat >= cfg.ct_pos_thresh ? 1 : 0;
    const int ct_neg = p_hat <= cfg.ct_neg_thresh ? 1 : 0;
    double g = 0.0;
    if (p == 1 && ct_pos) g += -1.0 / p_hat;
    if (p == 0 && ct_neg) g += 1.0 / (1.0 - p_hat);
    return g;
}

namespace {

double focal_alpha_t(int p, double alpha) {
    if (alpha > 0.0 && alpha < 1.0) return p == 1 ? alpha : 1.0 - alpha;
    return 1.0;
}

} // namespace

double focal_conf_loss(int p, double p_hat, double alpha, double gamma_focal) {
    p_hat = clamp_prob(p_hat);
    const double pt = p == 1 ? p_hat : 1.0 - p_hat;
    return -focal_alpha_t(p, alpha) * std::pow(1.0 - pt, gamma_focal) * std::log(pt);
}

double focal_conf_loss_grad(int p, double p_hat, double alpha, double gamma_focal) {
    p_hat = clamp_prob(p_hat);
    const double at = focal_alpha_t(p, alpha);
    const double pt = p == 1 ? p_hat : 1.0 - p_hat;
    const double dpt_dphat = p == 1 ? 1.0 : -1.0;
    // d/dpt of -(1-pt)^g log(pt)
    double dpt;
    if (gamma_focal == 0.0) {
        dpt = -1.0 / pt;
    } else {
        dpt = gamma_focal * std::pow(1.0 - pt, gamma_focal - 1.0) * std::log(pt) -
              std::pow(1.0 - pt, gamma_focal) / pt;
    }
    return at * dpt * dpt_dphat;
}

std::vector<std::size_t> select_hard_examples(const std::vector<double>& per_candidate_losses,
                                              const std::vector<std::size_t>& positives,
                                              const OhemConfig& cfg) {
    std::vector<bool> is_pos(per_candidate_losses.size(), false);
    for (std::size_t p : positives) {
        if (p >= per_candidate_losses.size()) {
            throw ContractError("select_hard_examples: positive index out of range");
        }
        is_pos[p] = true;
    }

    std::vector<std::size_t> negatives;
    negatives.reserve(per_candidate_losses.size());
    for (std::size_t i = 0; i < per_candidate_losses.size(); ++i) {
        if (!is_pos[i]) negatives.push_back(i);
    }
    std::stable_sort(negatives.begin(), negatives.end(), [&](std::size_t a, std::size_t b) {
        return per_candidate_losses[a] > per_candidate_losses[b];
    });

    const std::size_t quota = std::max(static_cast<std::size_t>(cfg.neg_pos_ratio) * positives.size(),
                                       static_cast<std::size_t>(cfg.min_neg));
    const std::size_t n_neg = std::min(quota, negatives.size());

    std::vector<std::size_t> selected(positives.begin(), positives.end());
    selected.insert(selected.end(), negatives.begin(), negatives.begin() + n_neg);
    std::sort(selected.begin(), selected.end());
    return selected;
}

Assignment assign_targets(const std::vector<Box>& gts, const HeadOutput& shape,
                          const DetectorConfig& cfg) {
    Assignment asg;
    const int levels = static_cast<int>(shape.levels.size());

    asg.level_offsets.resize(levels);
    std::size_t cells = 0;
    for (int l = 0; l < levels; ++l) {
        asg.level_offsets[l] = cells;
        cells += static_cast<std::size_t>(shape.levels[l].h) * shape.levels[l].w;
    }
    asg.total_cells = cells;

    // Size ranges scaled from the 256-pixel reference grid.
    const double scale = cfg.input_size / 256.0;
    auto level_for = [&](const Box& b) {
        const double side = std::max(b.w, b.h);
        for (int l = 0; l < levels - 1; ++l) {
            if (side < 64.0 * (1 << l) * scale) return l;
        }
        return levels - 1;
    };

    std::vector<int> owner(cells, -1);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const Box& b = gts[g];
        if (!b.valid()) throw ContractError("assign_targets: invalid ground-truth box");
        const int l = level_for(b);
        const LevelOutput& lvl = shape.levels[l];
        const int col = std::clamp(static_cast<int>(b.cx / lvl.stride), 0, lvl.w - 1);
        const int row = std::clamp(static_cast<int>(b.cy / lvl.stride), 0, lvl.h - 1);
        // Center cell only. A 3x3 neighborhood asks adjacent cells for dx
        // values a full cell apart, which this receptive field cannot
        // express; the fit then settles on the mean and every neighbor emits
        // an off-center box.
        const int idx = row * lvl.w + col;
        const std::size_t flat = asg.level_offsets[l] + idx;
        if (owner[flat] != -1) continue;
        owner[flat] = static_cast<int>(g);
        CellTarget t;
        t.level = l;
        t.index = idx;
        t.gt = static_cast<int>(g);
        t.target = encode_box(b, row, col, lvl.stride);
        asg.positives.push_back(t);
        asg.positive_flat.push_back(flat);
    }
    std::sort(asg.positive_flat.begin(), asg.positive_flat.end());
    return asg;
}

namespace {

HeadGrad zero_grad_like(const HeadOutput& out) {
    HeadGrad g(out.levels.size());
    for (std::size_t l = 0; l < out.levels.size(); ++l) {
        g[l].conf.assign(out.levels[l].conf.size(), 0.0);
        g[l].reg.assign(out.levels[l].reg.size(), 0.0);
    }
    return g;
}

// Adds the positives-only regression term and its gradient. Returns the mean
// over positive cells of the per-cell coordinate sum.
double regression_term(const HeadOutput& out, const Assignment& asg, double beta, HeadGrad& grad) {
    if (asg.positives.empty()) return 0.0;
    double reg_sum = 0.0;
    const double wcell = beta / static_cast<double>(asg.positives.size());
    for (const auto& t : asg.positives) {
        const LevelOutput& lvl = out.levels[t.level];
        const int n = lvl.h * lvl.w;
        const double pred[4] = {lvl.reg[t.index], lvl.reg[n + t.index], lvl.reg[2 * n + t.index],
                                lvl.reg[3 * n + t.index]};
        const double tgt[4] = {t.target.dx, t.target.dy, t.target.lw, t.target.lh};
        for (int k = 0; k < 4; ++k) {
            reg_sum += smooth_l1(tgt[k], pred[k]);
            grad[t.level].reg[k * n + t.index] += wcell * smooth_l1_grad(tgt[k], pred[k]);
        }
    }
    return reg_sum / static_cast<double>(asg.positives.size());
}

} // namespace

DetectionLossResult supervised_detection_loss(const HeadOutput& out, const std::vector<Box>& gts,
                                              const DetectorConfig& cfg, double beta,
                                              double pos_weight) {
    const Assignment asg = assign_targets(gts, out, cfg);
    DetectionLossResult res;
    res.grad = zero_grad_like(out);
    res.num_positive = static_cast<int>(asg.positives.size());
    res.num_selected = static_cast<int>(asg.total_cells);

    std::vector<bool> is_pos(asg.total_cells, false);
    for (std::size_t f : asg.positive_flat) is_pos[f] = true;

    double conf_sum = 0.0;
    const double wconf = 1.0 / static_cast<double>(asg.total_cells);
    for (std::size_t l = 0; l < out.levels.size(); ++l) {
        const LevelOutput& lvl = out.levels[l];
        const std::size_t base = asg.level_offsets[l];
        for (std::size_t i = 0; i < lvl.conf.size(); ++i) {
            const int p = is_pos[base + i] ? 1 : 0;
            const double ph = clamp_prob(sigmoid(lvl.conf[i]));
            const double cw = p == 1 ? pos_weight : 1.0;
            conf_sum += cw * (p == 1 ? -std::log(ph) : -std::log(1.0 - ph));
            res.grad[l].conf[i] = wconf * cw * (ph - p);
        }
    }
    const double conf = conf_sum * wconf;
    const double reg = regression_term(out, asg, beta, res.grad);
    res.loss = total_loss(conf, reg, beta);
    return res;
}

DetectionLossResult ohem_detection_loss(const HeadOutput& out, const std::vector<Box>& gts,
                                        const DetectorConfig& cfg, const OhemConfig& ohem,
                                        double beta) {
    const Assignment asg = assign_targets(gts, out, cfg);
    DetectionLossResult res;
    res.grad = zero_grad_like(out);
    res.num_positive = static_cast<int>(asg.positives.size());

    std::vector<bool> is_pos(asg.total_cells, false);
    for (std::size_t f : asg.positive_flat) is_pos[f] = true;

    std::vector<double> cand_loss(asg.total_cells, 0.0);
    std::vector<double> cand_phat(asg.total_cells, 0.0);
    for (std::size_t l = 0; l < out.levels.size(); ++l) {
        const LevelOutput& lvl = out.levels[l];
        const std::size_t base = asg.level_offsets[l];
        for (std::size_t i = 0; i < lvl.conf.size(); ++i) {
            const double ph = clamp_prob(sigmoid(lvl.conf[i]));
            cand_phat[base + i] = ph;
            cand_loss[base + i] = gated_conf_loss(is_pos[base + i] ? 1 : 0, ph, ohem);
        }
    }

    const std::vector<std::size_t> selected =
        select_hard_examples(cand_loss, asg.positive_flat, ohem);
    res.num_selected = static_cast<int>(selected.size());

    double conf = 0.0;
    if (!selected.empty()) {
        const double wsel = 1.0 / static_cast<double>(selected.size());
        double conf_sum = 0.0;
        // selected is sorted, so the level cursor only moves forward.
        std::size_t l = 0;
        for (std::size_t f : selected) {
            while (l + 1 < asg.level_offsets.size() && f >= asg.level_offsets[l + 1]) ++l;
            const std::size_t i = f - asg.level_offsets[l];
            const int p = is_pos[f] ? 1 : 0;
            const double ph = cand_phat[f];
            conf_sum += cand_loss[f];
            // Gates are constants in backward; d/dlogit of the open-gate terms.
            double dz = 0.0;
            if (p == 1 && ph >= ohem.ct_pos_thresh) dz = ph - 1.0;
            if (p == 0 && ph <= ohem.ct_neg_thresh) dz = ph;
            res.grad[l].conf[i] += wsel * dz;
        }
        conf = conf_sum * wsel;
    }

    const double reg = regression_term(out, asg, beta, res.grad);
    res.loss = total_loss(conf, reg, beta);
    return res;
}

DetectionLossResult focal_detection_loss(const HeadOutput& out, const std::vector<Box>& gts,
                                         const DetectorConfig& cfg, double alpha,
                                         double gamma_focal, double beta) {
    const Assignment asg = assign_targets(gts, out, cfg);
    DetectionLossResult res;
    res.grad = zero_grad_like(out);
    res.num_positive = static_cast<int>(asg.positives.size());
    res.num_selected = static_cast<int>(asg.total_cells);

    std::vector<bool> is_pos(asg.total_cells, false);
    for (std::size_t f : asg.positive_flat) is_pos[f] = true;

    double conf_sum = 0.0;
    const double wconf = 1.0 / static_cast<double>(asg.total_cells);
    for (std::size_t l = 0; l < out.levels.size(); ++l) {
        const LevelOutput& lvl = out.levels[l];
        const std::size_t base = asg.level_offsets[l];
        for (std::size_t i = 0; i < lvl.conf.size(); ++i) {
            const int p = is_pos[base + i] ? 1 : 0;
            const double ph = clamp_prob(sigmoid(lvl.conf[i]));
            conf_sum += focal_conf_loss(p, ph, alpha, gamma_focal);
            res.grad[l].conf[i] =
                wconf * focal_conf_loss_grad(p, ph, alpha, gamma_focal) * ph * (1.0 - ph);
        }
    }
    const double conf = conf_sum * wconf;
    const double reg = regression_term(out, asg, beta, res.grad);
    res.loss = total_loss(conf, reg, beta);
    return res;
}

} // namespace inkdet
