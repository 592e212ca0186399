// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "inkdet/errors.hpp"
#include "inkdet/plot.hpp"

namespace inkdet {

namespace fs = std::filesystem;

std::string resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_relative()) {
        const char* root = std::getenv("INKDET_OUTPUT_ROOT");
        if (root != nullptr && root[0] != '\0') p = fs::path(root) / p;
    }
    fs::create_directories(p);
    return p.string();
}

Dataset load_split(const RunConfig& cfg, const std::string& role_key, bool required) {
    const std::string dir = cfg.get(role_key);
    if (dir.empty()) {
        if (required) throw DataError(role_key + " is required for this stage");
        return {};
    }
    const std::string ann = (fs::path(dir) / "annotations.json").string();
    const std::string img_root = (fs::path(dir) / "images").string();
    const auto cats = load_categories(ann);
    const std::set<int> bodies = animals_as_bodies(cats, cfg.get_bool("data.include_animals"));
    Dataset ds = load_coco_annotations(ann, img_root, bodies);
    if (required && ds.empty()) throw DataError(role_key + ": no usable images in " + dir);
    return ds;
}

SupervisedResult run_stage1_pipeline(const RunConfig& cfg, const Dataset& natural_train,
                                     const Dataset& dev, std::uint64_t seed) {
    if (natural_train.empty()) throw DataError("stage1: empty training dataset");
    const Dataset filtered =
        filter_small_faces(natural_train, cfg.get_double("data.small_face_ratio"));
    if (filtered.empty()) throw DataError("stage1: tiny-face filter removed every image");
    const DetectorParams init = init_params(cfg.detector(), seed);
    return train_supervised(init, filtered, dev, cfg.supervised("stage1"), seed);
}

Stage2Result run_stage2_pipeline(const RunConfig& cfg, const DetectorParams& init,
                                 const Dataset& unlabeled, const Dataset& dev,
                                 std::uint64_t seed) {
    return run_stage2(init, unlabeled, dev, cfg.selfsup(), seed, cfg.eval_settings());
}

Stage3Result run_stage3_pipeline(const RunConfig& cfg, const DetectorParams& init,
                                 const Dataset& drawing_train, const Dataset& dev,
                                 const Dataset& test, std::uint64_t seed) {
    const Dataset subset = subset_sampler(drawing_train, cfg.subset_n(), seed);
    if (subset.empty()) throw DataError("stage3: empty fine-tuning subset");
    Stage3Result out;
    out.train = train_supervised(init, subset, dev, cfg.supervised("stage3"), seed);
    const Network net(out.train.best.params.config);
    out.test_report =
        evaluate_detector(net, out.train.best.params, test, cfg.eval_settings(), seed);
    return out;
}

namespace {

std::string ap_row(const APReport& r) {
    std::ostringstream ss;
    ss.precision(17);
    auto cls = [&](Klass k) {
        const auto it = r.per_class_ap.find(k);
        return it == r.per_class_ap.end() ? 0.0 : it->second;
    };
    ss << cls(Klass::face) << '\t' << cls(Klass::body) << '\t' << r.mean_ap;
    return ss.str();
}

void write_ap_report(const APReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "ap_face\tap_body\tmean_ap\tn_images\n";
    out << ap_row(r) << '\t' << r.n_images << "\n";
}

} // namespace

int cmd_gen_synthetic(const RunConfig& cfg, const std::string& output_dir) {
    const std::string dir = resolve_output_dir(output_dir);
    const SyntheticCorpus corpus =
        generate_synthetic_corpus(cfg.corpus_spec(), cfg.get_int("seed"));
    save_corpus(corpus, dir);
    cfg.write_echo((fs::path(dir) / "config_echo.txt").string());
    std::cout << "synthetic corpus written to " << dir << ": natural_train="
              << corpus.natural_train.size() << " drawing_unlabeled=" << corpus.drawing_unlabeled.size()
              << " drawing_labeled_train=" << corpus.drawing_labeled_train.size()
              << " drawing_dev=" << corpus.drawing_dev.size()
              << " drawing_test=" << corpus.drawing_test.size() << "\n";
    return exit_ok;
}

int cmd_stage1(const RunConfig& cfg, const std::string& output_dir) {
    const std::string dir = resolve_output_dir(output_dir);
    const std::uint64_t seed = cfg.get_int("seed");
    const Dataset train = load_split(cfg, "data.natural_train", true);
    const Dataset dev = load_split(cfg, "data.drawing_dev", false);
    const SupervisedResult res = run_stage1_pipeline(cfg, train, dev, seed);
    save_checkpoint(res.best, (fs::path(dir) / "stage1.ckpt").string());
    write_epoch_log(res.log, (fs::path(dir) / "epoch_log.tsv").string());
    cfg.write_echo((fs::path(dir) / "config_echo.txt").string());
    std::cout << "stage1 best dev mAP " << res.best_dev_ap << " at epoch " << res.best_epoch
              << "; checkpoint " << (fs::path(dir) / "stage1.ckpt").string() << "\n";
    return exit_ok;
}

int cmd_stage2(const RunConfig& cfg, const std::string& init_ckpt, const std::string& output_dir) {
    const std::string dir = resolve_output_dir(output_dir);
    const std::uint64_t seed = cfg.get_int("seed");
    const Checkpoint init = load_checkpoint(init_ckpt);
    const Dataset unlabeled = load_split(cfg, "data.drawing_unlabeled", true);
    const Dataset dev = load_split(cfg, "data.drawing_dev", true);
    Stage2Result res = run_stage2_pipeline(cfg, init.params, unlabeled, dev, seed);
    save_checkpoint(res.best, (fs::path(dir) / "stage2.ckpt").string());
    write_curve_log(res.curve, (fs::path(dir) / "curve_log.tsv").string());
    cfg.write_echo((fs::path(dir) / "config_echo.txt").string());
    std::cout << "stage2 best dev mAP " << res.best_dev_ap << " at iteration "
              << res.best_iteration << "; checkpoint " << (fs::path(dir) / "stage2.ckpt").string()
              << "\n";
    return exit_ok;
}

int cmd_stage3(const RunConfig& cfg, const std::string& init_ckpt, const std::string& output_dir) {
    const std::string dir = resolve_output_dir(output_dir);
    const std::uint64_t seed = cfg.get_int("seed");
    const Checkpoint init = load_checkpoint(init_ckpt);
    const Dataset train = load_split(cfg, "data.drawing_train", true);
    const Dataset dev = load_split(cfg, "data.drawing_dev", false);
    const Dataset test = load_split(cfg, "data.drawing_test", true);
    const Stage3Result res = run_stage3_pipeline(cfg, init.params, train, dev, test, seed);
    save_checkpoint(res.train.best, (fs::path(dir) / "stage3.ckpt").string());
    write_epoch_log(res.train.log, (fs::path(dir) / "epoch_log.tsv").string());
    write_ap_report(res.test_report, (fs::path(dir) / "ap_report.tsv").string());
    cfg.write_echo((fs::path(dir) / "config_echo.txt").string());
    std::cout << "stage3 test mAP " << res.test_report.mean_ap << "; checkpoint "
              << (fs::path(dir) / "stage3.ckpt").string() << "\n";
    return exit_ok;
}

int cmd_eval(const RunConfig& cfg, const std::string& ckpt_path, const std::string& output_dir) {
    const std::string dir = resolve_output_dir(output_dir);
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Dataset test = load_split(cfg, "data.drawing_test", true);
    const Network net(ckpt.params.config);
    const APReport rep =
        evaluate_detector(net, ckpt.params, test, cfg.eval_settings(), cfg.get_int("seed"));
    write_ap_report(rep, (fs::path(dir) / "ap_report.tsv").string());
    std::cout << "ap_face\tap_body\tmean_ap\n" << ap_row(rep) << "\n";
    return exit_ok;
}

namespace {

// One grid point: per-seed pipeline runs aggregated into a report row.
AggregateReport run_grid_point(const RunConfig& cfg, const std::string& stage,
                               const std::string& init_ckpt, const Dataset& a, const Dataset& b,
                               const Dataset& c) {
    std::vector<APReport> reports;
    for (const std::uint64_t seed : cfg.seeds()) {
        APReport rep;
        if (stage == "stage1") {
            const SupervisedResult r = run_stage1_pipeline(cfg, a, b, seed);
            rep.mean_ap = r.best_dev_ap;
            rep.run_seed = seed;
        } else if (stage == "stage2") {
            const Checkpoint init = load_checkpoint(init_ckpt);
            const Stage2Result r = run_stage2_pipeline(cfg, init.params, a, b, seed);
            rep.mean_ap = r.best_dev_ap;
            rep.run_seed = seed;
        } else if (stage == "stage3") {
            const Checkpoint init = load_checkpoint(init_ckpt);
            const Stage3Result r = run_stage3_pipeline(cfg, init.params, a, b, c, seed);
            rep = r.test_report;
        } else {
            throw ConfigError("grid: unknown stage " + stage);
        }
        reports.push_back(rep);
    }
    return aggregate_runs(reports);
}

} // namespace

int cmd_grid(const RunConfig& cfg, const std::string& stage, const std::string& init_ckpt,
             const std::string& output_dir, bool resume) {
    const std::string dir = resolve_output_dir(output_dir);
    const std::vector<RunConfig> points = cfg.expand_grid();
    cfg.write_echo((fs::path(dir) / "config_echo.txt").string());

    // Datasets are shared across points; load once.
    Dataset a, b, c;
    if (stage == "stage1") {
        a = load_split(cfg, "data.natural_train", true);
        b = load_split(cfg, "data.drawing_dev", true);
    } else if (stage == "stage2") {
        a = load_split(cfg, "data.drawing_unlabeled", true);
        b = load_split(cfg, "data.drawing_dev", true);
    } else {
        a = load_split(cfg, "data.drawing_train", true);
        b = load_split(cfg, "data.drawing_dev", false);
        c = load_split(cfg, "data.drawing_test", true);
    }

    std::vector<std::string> axis_keys;
    for (const auto& [k, v] : cfg.grid_axes()) axis_keys.push_back(k);

    std::vector<AggregateReport> results(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "point_%03zu", i);
        const fs::path pdir = fs::path(dir) / name;
        fs::create_directories(pdir);
        const fs::path marker = pdir / "result.json";
        if (resume && fs::exists(marker)) {
            std::ifstream in(marker);
            nlohmann::json j;
            in >> j;
            results[i].mean = j.at("mean").get<double>();
            results[i].stddev = j.at("stddev").get<double>();
            results[i].n_runs = j.at("n_runs").get<std::size_t>();
            continue;
        }
        points[i].write_echo((pdir / "config_echo.txt").string());
        results[i] = run_grid_point(points[i], stage, init_ckpt, a, b, c);
        nlohmann::json j{{"mean", results[i].mean},
                         {"stddev", results[i].stddev},
                         {"n_runs", results[i].n_runs}};
        std::ofstream out(marker);
        out << j.dump(1) << "\n";
    }

    // AP Diff against the best point, in percentage points.
    double best = 0.0;
    for (const auto& r : results) best = std::max(best, r.mean);
    std::vector<std::string> header = {"point"};
    header.insert(header.end(), axis_keys.begin(), axis_keys.end());
    header.insert(header.end(), {"mean_ap", "stddev", "n_runs", "ap_diff"});
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (const auto& k : axis_keys) row.push_back(points[i].get(k));
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", results[i].mean);
        row.push_back(buf);
        std::snprintf(buf, sizeof(buf), "%.6f", results[i].stddev);
        row.push_back(buf);
        row.push_back(std::to_string(results[i].n_runs));
        std::snprintf(buf, sizeof(buf), "%.6f", (best - results[i].mean) * 100.0);
        row.push_back(buf);
        rows.push_back(std::move(row));
    }
    write_table((fs::path(dir) / "grid_report.tsv").string(), header, rows);
    std::cout << "grid report: " << (fs::path(dir) / "grid_report.tsv").string() << " ("
              << points.size() << " points)\n";
    return exit_ok;
}

int cmd_render(const RunConfig& cfg, const std::string& ckpt_path,
               const std::vector<std::string>& images, const std::string& output_dir) {
    const std::string dir = resolve_output_dir(output_dir);
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Network net(ckpt.params.config);
    const double conf = cfg.get_double("render.conf_thresh");
    const double nms_t = cfg.get_double("render.nms_thresh");
    const int S = ckpt.params.config.input_size;

    for (const std::string& path : images) {
        Image img;
        try {
            img = load_ppm(path);
        } catch (const IoError& e) {
            std::cerr << "warning: " << e.what() << "\n";
            continue;
        }
        const Image net_in = resize_bilinear(img, S, S);
        const Detections det = net.predict(ckpt.params, net_in, conf, nms_t);
        const double sx = static_cast<double>(img.w) / S;
        const double sy = static_cast<double>(img.h) / S;
        auto draw = [&](const std::vector<ScoredBox>& boxes, double r, double g, double b) {
            for (const auto& sb : boxes) {
                const Corners cn = to_corner(sb.box);
                draw_rect(img, cn.x1 * sx, cn.y1 * sy, cn.x2 * sx, cn.y2 * sy, r, g, b, 1);
                char label[16];
                std::snprintf(label, sizeof(label), "%.2f", sb.score);
                draw_label(img, static_cast<int>(cn.x1 * sx) + 2, static_cast<int>(cn.y1 * sy) + 2,
                           label, r, g, b);
            }
        };
        draw(det.face, 1.0, 0.15, 0.15);
        draw(det.body, 0.15, 0.3, 1.0);
        const fs::path out_path = fs::path(dir) / (fs::path(path).stem().string() + "_det.ppm");
        save_ppm(img, out_path.string());
    }
    return exit_ok;
}

int cmd_plot(const std::vector<std::string>& curve_logs, const std::string& output_dir) {
    if (curve_logs.empty()) throw DataError("plot: no curve logs given");
    const std::string dir = resolve_output_dir(output_dir);

    for (Klass k : {Klass::face, Klass::body}) {
        std::vector<PlotSeries> series;
        for (const std::string& log_path : curve_logs) {
            const std::vector<CurvePoint> curve = read_curve_log(log_path);
            if (curve.empty()) throw DataError("plot: empty curve log " + log_path);
            const std::string stem = fs::path(log_path).parent_path().filename().string().empty()
                                         ? fs::path(log_path).stem().string()
                                         : fs::path(log_path).parent_path().filename().string();
            PlotSeries teacher{stem + ":teacher", {}};
            PlotSeries student{stem + ":student", {}};
            for (const auto& p : curve) {
                teacher.points.push_back({static_cast<double>(p.iteration),
                                          p.teacher.per_class_ap.count(k) ? p.teacher.per_class_ap.at(k) : 0.0});
                student.points.push_back({static_cast<double>(p.iteration),
                                          p.student.per_class_ap.count(k) ? p.student.per_class_ap.at(k) : 0.0});
            }
            series.push_back(std::move(teacher));
            series.push_back(std::move(student));
        }
        const std::string name = std::string("curves_") + klass_name(k) + ".svg";
        write_svg_plot((fs::path(dir) / name).string(),
                       std::string("dev AP (") + klass_name(k) + ")", "iteration", "AP", series);
    }
    std::cout << "figures written to " << dir << "\n";
    return exit_ok;
}

} // namespace inkdet
