// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "inkdet/cli.hpp"
#include "inkdet/errors.hpp"
#include "inkdet/train.hpp"

using namespace inkdet;

namespace {

DetectorConfig tiny_config() {
    DetectorConfig c;
    c.input_size = 64;
    c.width_mult = 0.5;
    return c;
}

SyntheticCorpus small_corpus(std::uint64_t seed = 5) {
    CorpusSpec spec;
    spec.natural_train = 32;
    spec.drawing_unlabeled = 8;
    spec.drawing_labeled_train = 24;
    spec.drawing_dev = 10;
    spec.drawing_test = 10;
    spec.tiny_face_prob = 0.0;
    return generate_synthetic_corpus(spec, seed);
}

} // namespace

TEST_CASE("zero-epoch training returns the init") {
    const SyntheticCorpus corpus = small_corpus();
    const DetectorParams init = init_params(tiny_config(), 3);
    SupervisedOptions opts;
    opts.epochs = 0;
    const SupervisedResult res =
        train_supervised(init, corpus.natural_train, corpus.drawing_dev, opts, 1);
    CHECK(res.best.params.values == init.values);
    CHECK(res.best_epoch == -1);
    CHECK(res.log.empty());
}

TEST_CASE("empty training set is rejected") {
    const DetectorParams init = init_params(tiny_config(), 3);
    SupervisedOptions opts;
    CHECK_THROWS_AS(train_supervised(init, {}, {}, opts, 1), DataError);
}

TEST_CASE("training reduces the loss and logs every epoch") {
    const SyntheticCorpus corpus = small_corpus();
    const DetectorParams init = init_params(tiny_config(), 7);
    SupervisedOptions opts;
    opts.epochs = 6;
    opts.batch_size = 8;
    const SupervisedResult res =
        train_supervised(init, corpus.drawing_labeled_train, corpus.drawing_dev, opts, 2);
    REQUIRE(res.log.size() == 6);
    CHECK(res.log.back().train_loss < res.log.front().train_loss);
    CHECK(res.best_epoch >= 0);
    CHECK(res.best.stage == "stage1");

    const std::string path = "/tmp/inkdet_epoch_log_test.tsv";
    write_epoch_log(res.log, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch\ttrain_loss\tdev_ap_face\tdev_ap_body\tdev_map");
    int rows = 0;
    for (std::string line; std::getline(in, line);) rows += line.empty() ? 0 : 1;
    CHECK(rows == 6);
    std::filesystem::remove(path);
}

TEST_CASE("fixed seeds reproduce training bit for bit") {
    const SyntheticCorpus corpus = small_corpus();
    const DetectorParams init = init_params(tiny_config(), 9);
    SupervisedOptions opts;
    opts.epochs = 3;
    opts.batch_size = 8;
    opts.style_bank = make_procedural_bank(StyleMode::all);

    const SupervisedResult a =
        train_supervised(init, corpus.natural_train, corpus.drawing_dev, opts, 4);
    const SupervisedResult b =
        train_supervised(init, corpus.natural_train, corpus.drawing_dev, opts, 4);
    CHECK(a.best.params.values == b.best.params.values);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].train_loss == b.log[i].train_loss);
        CHECK(a.log[i].dev.mean_ap == b.log[i].dev.mean_ap);
    }

    // a different seed diverges
    const SupervisedResult c =
        train_supervised(init, corpus.natural_train, corpus.drawing_dev, opts, 5);
    CHECK(c.best.params.values != a.best.params.values);
}

TEST_CASE("augmented path stays deterministic") {
    const SyntheticCorpus corpus = small_corpus();
    const DetectorParams init = init_params(tiny_config(), 13);
    SupervisedOptions opts;
    opts.epochs = 2;
    opts.batch_size = 8;
    opts.no_aug_window = 0; // augmentation active from epoch 0
    opts.augmentation.mosaic_prob = 0.6;
    const SupervisedResult a =
        train_supervised(init, corpus.drawing_labeled_train, corpus.drawing_dev, opts, 6);
    const SupervisedResult b =
        train_supervised(init, corpus.drawing_labeled_train, corpus.drawing_dev, opts, 6);
    CHECK(a.best.params.values == b.best.params.values);
}

TEST_CASE("resize_annotated scales boxes with the raster") {
    AnnotatedImage a;
    a.image = Image(32, 32, 0.5);
    a.face_boxes = {{16, 8, 8, 4}};
    const AnnotatedImage r = resize_annotated(a, 64);
    CHECK(r.image.h == 64);
    CHECK(r.face_boxes[0].cx == doctest::Approx(32.0));
    CHECK(r.face_boxes[0].cy == doctest::Approx(16.0));
    CHECK(r.face_boxes[0].w == doctest::Approx(16.0));
    CHECK(r.face_boxes[0].h == doctest::Approx(8.0));
}

TEST_CASE("stage pipelines compose") {
    const SyntheticCorpus corpus = small_corpus(21);

    RunConfig rc;
    rc.set("train.epochs", "4");
    rc.set("train.batch_size", "8");
    rc.set("style.mode", "all");

    const SupervisedResult s1 =
        run_stage1_pipeline(rc, corpus.natural_train, corpus.drawing_dev, 3);
    CHECK(s1.best.stage == "stage1");

    rc.set("selfsup.iterations", "60");
    rc.set("selfsup.eval_interval", "30");
    rc.set("selfsup.d", "0.996");
    const Stage2Result s2 =
        run_stage2_pipeline(rc, s1.best.params, corpus.drawing_unlabeled, corpus.drawing_dev, 3);
    CHECK(s2.curve.size() == 3); // init + 2 eval points
    CHECK(s2.best.stage == "stage2");

    rc.set("train.subset_n", "16");
    rc.set("train.epochs", "2");
    const Stage3Result s3 = run_stage3_pipeline(rc, s2.best.params, corpus.drawing_labeled_train,
                                                corpus.drawing_dev, corpus.drawing_test, 3);
    CHECK(s3.test_report.n_images == corpus.drawing_test.size());

    // stage3 with zero epochs and the full set: test AP equals a direct eval
    rc.set("train.subset_n", "all");
    rc.set("train.epochs", "0");
    const Stage3Result s3z = run_stage3_pipeline(rc, s1.best.params, corpus.drawing_labeled_train,
                                                 corpus.drawing_dev, corpus.drawing_test, 3);
    const Network net(s1.best.params.config);
    const APReport direct =
        evaluate_detector(net, s1.best.params, corpus.drawing_test, rc.eval_settings(), 3);
    CHECK(s3z.test_report.mean_ap == doctest::Approx(direct.mean_ap).epsilon(1e-12));
}
