// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inkdet/cli.hpp"
#include "inkdet/errors.hpp"

namespace {

inkdet::RunConfig build_config(const std::string& config_path,
                               const std::vector<std::string>& overrides, long long seed,
                               const std::string& output_dir) {
    inkdet::RunConfig cfg =
        config_path.empty() ? inkdet::RunConfig() : inkdet::RunConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw inkdet::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    if (!output_dir.empty()) cfg.set("output_dir", output_dir);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"inkdet: face/body detector pre-training pipeline for drawings"};
    app.require_subcommand(1);

    std::string config_path, output_dir, init_ckpt, ckpt, stage = "stage2";
    std::vector<std::string> overrides, images, curves;
    long long seed = -1;
    bool resume = false;
    bool show_schema = false;

    app.add_flag("--help-config", show_schema, "print the config schema and exit");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file");
        sub->add_option("--set", overrides, "override a config key (key=value), repeatable");
        sub->add_option("--seed", seed, "override the base seed");
        sub->add_option("--output-dir", output_dir, "artifact directory");
    };

    CLI::App* gen = app.add_subcommand("gen-synthetic", "generate the synthetic corpus");
    add_common(gen);
    CLI::App* s1 = app.add_subcommand("stage1", "style-mixed supervised pre-training");
    add_common(s1);
    CLI::App* s2 = app.add_subcommand("stage2", "teacher-student self-supervised pre-training");
    add_common(s2);
    s2->add_option("--init", init_ckpt, "stage-1 checkpoint to start from")->required();
    CLI::App* s3 = app.add_subcommand("stage3", "limited-data fine-tuning");
    add_common(s3);
    s3->add_option("--init", init_ckpt, "checkpoint to fine-tune")->required();
    CLI::App* ev = app.add_subcommand("eval", "AP report for a checkpoint");
    add_common(ev);
    ev->add_option("--checkpoint", ckpt, "checkpoint to evaluate")->required();
    CLI::App* gr = app.add_subcommand("grid", "experiment grid over config axes");
    add_common(gr);
    gr->add_option("--stage", stage, "stage1|stage2|stage3 (default stage2)");
    gr->add_option("--init", init_ckpt, "init checkpoint for stage2/stage3 grids");
    gr->add_flag("--resume", resume, "reuse completed grid points");
    CLI::App* rd = app.add_subcommand("render", "draw detections on images");
    add_common(rd);
    rd->add_option("--checkpoint", ckpt, "checkpoint to run")->required();
    rd->add_option("--images", images, "input .ppm files")->required();
    CLI::App* pl = app.add_subcommand("plot", "teacher/student AP curve figures");
    add_common(pl);
    pl->add_option("--curves", curves, "curve_log.tsv files")->required();

    CLI11_PARSE(app, argc, argv);

    if (show_schema) {
        std::cout << inkdet::RunConfig::describe_schema();
        return inkdet::exit_ok;
    }

    try {
        const inkdet::RunConfig cfg = build_config(config_path, overrides, seed, output_dir);
        const std::string out = cfg.get("output_dir");
        if (gen->parsed()) return inkdet::cmd_gen_synthetic(cfg, out);
        if (s1->parsed()) return inkdet::cmd_stage1(cfg, out);
        if (s2->parsed()) return inkdet::cmd_stage2(cfg, init_ckpt, out);
        if (s3->parsed()) return inkdet::cmd_stage3(cfg, init_ckpt, out);
        if (ev->parsed()) return inkdet::cmd_eval(cfg, ckpt, out);
        if (gr->parsed()) return inkdet::cmd_grid(cfg, stage, init_ckpt, out, resume);
        if (rd->parsed()) return inkdet::cmd_render(cfg, ckpt, images, out);
        if (pl->parsed()) return inkdet::cmd_plot(curves, out);
        std::cerr << "no subcommand\n";
        return inkdet::exit_config;
    } catch (const inkdet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return inkdet::exit_config;
    } catch (const inkdet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return inkdet::exit_data;
    } catch (const inkdet::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return inkdet::exit_data;
    } catch (const inkdet::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return inkdet::exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return inkdet::exit_contract;
    }
}
