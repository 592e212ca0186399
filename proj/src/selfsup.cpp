// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/selfsup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "inkdet/errors.hpp"
#include "inkdet/rng.hpp"

namespace inkdet {

void SelfSupConfig::validate() const {
    if (d < 0.0 || d > 1.0) throw ConfigError("selfsup: d must lie in [0,1]");
    if (phi.has_value() && *phi < 1) throw ConfigError("selfsup: phi must be >= 1 or never");
    if (momentum_gamma < 0.0 || momentum_gamma >= 1.0) {
        throw ConfigError("selfsup: momentum_gamma must lie in [0,1)");
    }
    if (c_teac < 0.0 || c_teac > 1.0) throw ConfigError("selfsup: c_teac must lie in [0,1]");
    if (ct_pos_thresh < 0.0 || ct_pos_thresh > 1.0 || ct_neg_thresh < 0.0 || ct_neg_thresh > 1.0) {
        throw ConfigError("selfsup: confidence thresholds must lie in [0,1]");
    }
    if (pseudo_nms_thresh < 0.0 || pseudo_nms_thresh > 1.0) {
        throw ConfigError("selfsup: pseudo_nms_thresh must lie in [0,1]");
    }
}

TrainerState make_trainer_state(const DetectorParams& init, std::uint64_t seed) {
    TrainerState st;
    st.teacher = init;
    st.student = init;
    st.iteration = 0;
    st.rng_seed = seed;
    st.momentum.assign(init.values.size(), 0.0);
    return st;
}

DetectorParams ema_update(const DetectorParams& teacher, const DetectorParams& student, double d) {
    if (teacher.values.size() != student.values.size() ||
        ParamLayout::make(teacher.config) != ParamLayout::make(student.config)) {
        throw ContractError("ema_update: teacher/student layout mismatch");
    }
    if (d == 1.0) return teacher;
    if (d == 0.0) return student;
    DetectorParams out = teacher;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = d * teacher.values[i] + (1.0 - d) * student.values[i];
    }
    return out;
}

void maybe_reset_student(TrainerState& state, const std::optional<std::uint64_t>& phi) {
    if (!phi.has_value()) return;
    if (state.iteration >= 1 && state.iteration % *phi == 0) {
        state.student = state.teacher;
        std::fill(state.momentum.begin(), state.momentum.end(), 0.0);
    }
}

void sgd_step(std::vector<double>& params, const std::vector<double>& grads, double lr,
              double momentum_gamma, std::vector<double>& velocity) {
    if (grads.size() != params.size()) throw ContractError("sgd_step: gradient size mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericError("sgd_step: non-finite gradient at index " + std::to_string(i));
        }
    }
    if (momentum_gamma == 0.0) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
        return;
    }
    if (velocity.size() != params.size()) velocity.assign(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum_gamma * velocity[i] + grads[i];
        params[i] -= lr * velocity[i];
    }
}

PseudoLabelSet generate_pseudo_labels(const Network& net, const DetectorParams& teacher,
                                      const Image& image, const SelfSupConfig& cfg) {
    PseudoLabelSet out;
    for (Klass k : {Klass::face, Klass::body}) {
        const HeadOutput head = net.forward(teacher, image, k);
        std::vector<ScoredBox> cands;
        for (const ScoredBox& sb : decode(head, net.config())) {
            if (sb.score >= cfg.c_teac) cands.push_back(sb);
        }
        for (const ScoredBox& sb : nms(cands, cfg.pseudo_nms_thresh)) {
            (k == Klass::face ? out.face_boxes : out.body_boxes).push_back(sb.box);
            out.source_scores.push_back(sb.score);
        }
    }
    return out;
}

LossBreakdown selfsup_step(TrainerState& state, const Network& net, const AnnotatedImage& raw,
                           const SelfSupConfig& cfg) {
    const std::uint64_t it = state.iteration + 1; // 1-based index of this step
    const std::uint64_t step_seed = derive_seed(state.rng_seed, 0xabcdULL, it);

    // Teacher sees the weakly augmented image; labels in that frame.
    AnnotatedImage weak_in = raw;
    weak_in.face_boxes.clear();
    weak_in.body_boxes.clear();
    const AnnotatedImage weak = augment_weak(weak_in, step_seed);
    const PseudoLabelSet pseudo = generate_pseudo_labels(net, state.teacher, weak.image, cfg);

    // Student sees the heavy tail of the same frame, labels transported.
    AnnotatedImage labeled = weak;
    labeled.face_boxes = pseudo.face_boxes;
    labeled.body_boxes = pseudo.body_boxes;
    const AnnotatedImage strong = augment_strong_tail(labeled, derive_seed(step_seed, 0x5774ULL));

    // Alternating heads: even steps face, odd steps body (0-based parity of
    // the completed-step counter).
    const Klass k = alternate_head(state.iteration);
    const std::vector<Box>& gts = k == Klass::face ? strong.face_boxes : strong.body_boxes;

    ForwardTrace trace;
    const HeadOutput out = net.forward_trace(state.student, strong.image, k, trace);
    DetectionLossResult res;
    if (cfg.loss == Stage2Loss::gated_ohem) {
        res = ohem_detection_loss(out, gts, net.config(), cfg.ohem(), cfg.beta);
    } else {
        res = focal_detection_loss(out, gts, net.config(), cfg.focal_alpha, cfg.focal_gamma,
                                   cfg.beta);
    }

    std::vector<double> grads(state.student.values.size(), 0.0);
    net.backward(state.student, trace, res.grad, grads);
    sgd_step(state.student.values, grads, cfg.lr, cfg.momentum_gamma, state.momentum);

    state.teacher = ema_update(state.teacher, state.student, cfg.d);
    state.iteration = it;
    maybe_reset_student(state, cfg.phi);
    return res.loss;
}

Stage2Result run_stage2(const DetectorParams& init, const Dataset& unlabeled, const Dataset& dev,
                        const SelfSupConfig& cfg, std::uint64_t seed,
                        const EvalSettings& eval_settings, const StepObserver& observer) {
    cfg.validate();
    if (unlabeled.empty()) throw DataError("run_stage2: empty unlabeled stream");

    const Network net(init.config);
    TrainerState state = make_trainer_state(init, seed);

    Stage2Result result;
    result.best.params = init;
    result.best.stage = "stage2";
    result.best.iteration = 0;

    LossBreakdown last_loss{};
    double init_ap = 0.0;
    auto eval_point = [&](std::uint64_t iter) {
        CurvePoint pt;
        pt.iteration = iter;
        pt.teacher = evaluate_detector(net, state.teacher, dev, eval_settings, seed);
        pt.student = evaluate_detector(net, state.student, dev, eval_settings, seed);
        pt.loss = last_loss;
        result.curve.push_back(pt);
        if (iter == 0) {
            init_ap = pt.teacher.mean_ap;
            result.best_dev_ap = init_ap;
            return;
        }
        if (pt.teacher.mean_ap > result.best_dev_ap &&
            pt.teacher.mean_ap >= init_ap + cfg.min_ap_gain) {
            result.best_dev_ap = pt.teacher.mean_ap;
            result.best_iteration = iter;
            result.best.params = state.teacher;
            result.best.iteration = iter;
        }
    };

    if (!dev.empty()) eval_point(0);

    Rng pick(derive_seed(seed, 0x91c4ULL));
    for (std::uint64_t i = 0; i < cfg.max_iterations; ++i) {
        const AnnotatedImage& img = unlabeled[pick.uniform_int(unlabeled.size())];
        last_loss = selfsup_step(state, net, img, cfg);
        if (observer) observer(state);
        if (!dev.empty() && cfg.eval_interval > 0 && state.iteration % cfg.eval_interval == 0) {
            eval_point(state.iteration);
        }
    }
    return result;
}

void write_curve_log(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_curve_log: cannot open " + path);
    out << "iteration\tteacher_ap_face\tteacher_ap_body\tteacher_map\t"
           "student_ap_face\tstudent_ap_body\tstudent_map\tloss_conf\tloss_reg\tloss_total\n";
    auto cls = [](const APReport& r, Klass k) {
        const auto it = r.per_class_ap.find(k);
        return it == r.per_class_ap.end() ? 0.0 : it->second;
    };
    out.precision(17);
    for (const auto& p : curve) {
        out << p.iteration << '\t' << cls(p.teacher, Klass::face) << '\t'
            << cls(p.teacher, Klass::body) << '\t' << p.teacher.mean_ap << '\t'
            << cls(p.student, Klass::face) << '\t' << cls(p.student, Klass::body) << '\t'
            << p.student.mean_ap << '\t' << p.loss.conf << '\t' << p.loss.reg << '\t'
            << p.loss.total << '\n';
    }
}

std::vector<CurvePoint> read_curve_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_curve_log: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("read_curve_log: empty log " + path);
    std::vector<CurvePoint> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        CurvePoint p;
        double tf, tb, tm, sf, sb, sm;
        ss >> p.iteration >> tf >> tb >> tm >> sf >> sb >> sm >> p.loss.conf >> p.loss.reg >>
            p.loss.total;
        if (!ss) throw DataError("read_curve_log: malformed row in " + path);
        p.teacher.per_class_ap[Klass::face] = tf;
        p.teacher.per_class_ap[Klass::body] = tb;
        p.teacher.mean_ap = tm;
        p.student.per_class_ap[Klass::face] = sf;
        p.student.per_class_ap[Klass::body] = sb;
        p.student.mean_ap = sm;
        out.push_back(p);
    }
    return out;
}

} // namespace inkdet
