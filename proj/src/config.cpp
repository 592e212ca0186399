// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "inkdet/errors.hpp"

namespace inkdet {

namespace {

enum class FieldType { integer, real, boolean, text, list };

struct Field {
    const char* key;
    FieldType type;
    const char* def;
    const char* doc;
};

// Desk-scale defaults; the paper's protocol values are noted per key and
// remain reachable through the same switches.
const Field kSchema[] = {
    {"seed", FieldType::integer, "1", "base RNG seed"},
    {"seeds", FieldType::list, "1,2,3,4,5", "seed list for multi-run protocols (5-run averaging)"},
    {"output_dir", FieldType::text, "runs/out", "artifact directory"},

    {"detector.input_size", FieldType::integer, "64", "square input side (multiple of max stride)"},
    {"detector.strides", FieldType::list, "8,16,32", "pyramid strides, pinned to 8,16,32,..."},
    {"detector.width_mult", FieldType::real, "0.5", "channel multiplier over base_channels"},
    {"detector.depth_mult", FieldType::real, "1.0", "conv blocks per pyramid stage"},
    {"detector.base_channels", FieldType::integer, "16", "channel count at width_mult 1"},
    {"detector.num_heads", FieldType::integer, "2", "single-class heads (face, body); fixed at 2"},

    {"data.natural_train", FieldType::text, "", "labeled natural-style split directory"},
    {"data.drawing_unlabeled", FieldType::text, "", "unlabeled drawing split directory"},
    {"data.drawing_train", FieldType::text, "", "labeled drawing train split directory"},
    {"data.drawing_dev", FieldType::text, "", "labeled drawing dev split directory"},
    {"data.drawing_test", FieldType::text, "", "labeled drawing test split directory"},
    {"data.include_animals", FieldType::boolean, "true",
     "count animal categories as bodies (the No Animals variant sets false)"},
    {"data.small_face_ratio", FieldType::real, "0.02",
     "tiny-face discard threshold vs min image side"},

    {"style.mode", FieldType::text, "none", "none | single | top_k | all"},
    {"style.single", FieldType::text, "whitebox", "slot name for style.mode=single"},
    {"style.top_k", FieldType::integer, "5", "bank prefix size for style.mode=top_k"},
    {"style.precomputed_dir", FieldType::text, "",
     "directory of pre-stylized images by id; overrides procedural slots"},

    {"train.epochs", FieldType::integer, "12", "supervised epochs (paper: 350)"},
    {"train.batch_size", FieldType::integer, "8", "images per optimizer step (paper: 16)"},
    {"train.lr", FieldType::real, "0.001", "supervised learning rate (paper value)"},
    {"train.warmup_epochs", FieldType::integer, "10",
     "linear learning-rate ramp; 0 restores the paper's fixed schedule"},
    {"train.pos_weight", FieldType::real, "4.0",
     "confidence BCE weight on positive cells; 1 is the plain loss"},
    {"train.momentum", FieldType::real, "0.9", "supervised SGD momentum"},
    {"train.beta", FieldType::real, "2.0", "regression loss coefficient"},
    {"train.no_aug_window", FieldType::integer, "15",
     "augmentation-free epochs at both ends (paper: 15 of 350)"},
    {"train.eval_every", FieldType::integer, "1", "dev evaluation period in epochs"},
    {"train.subset_n", FieldType::text, "all",
     "stage-3 sample size: 64, 128, 256, 512, 1024 or all"},

    {"aug.enabled", FieldType::boolean, "true", "master switch inside the augmentation window"},
    {"aug.hflip_prob", FieldType::real, "0.5", "horizontal flip probability"},
    {"aug.vflip_prob", FieldType::real, "0.5", "vertical flip probability"},
    {"aug.color_shift_deg", FieldType::real, "20", "hue rotation bound in degrees (paper: 20)"},
    {"aug.shear_deg", FieldType::real, "10", "horizontal shear bound in degrees"},
    {"aug.mosaic_prob", FieldType::real, "0.5", "4-image mosaic probability"},
    {"aug.noise_sigma", FieldType::real, "0.03", "gaussian noise sigma (strong augmentation)"},
    {"aug.crop_min", FieldType::real, "0.6", "random crop minimum area fraction"},
    {"aug.crop_max", FieldType::real, "1.0", "random crop maximum area fraction"},

    {"selfsup.phi", FieldType::text, "500", "student reset period in iterations, or never"},
    {"selfsup.d", FieldType::real, "0.9996", "EMA keep rate (paper value)"},
    {"selfsup.beta", FieldType::real, "2.0", "regression coefficient (paper value)"},
    {"selfsup.c_teac", FieldType::real, "0.65", "teacher pseudo-label confidence floor"},
    {"selfsup.ct_pos", FieldType::real, "0.5", "positive gate threshold (paper final: 0.5)"},
    {"selfsup.ct_neg", FieldType::real, "0.5", "negative gate threshold (paper final: 0.5)"},
    {"selfsup.lr", FieldType::real, "0.0001", "stage-2 learning rate (paper value)"},
    {"selfsup.gamma", FieldType::real, "0.0", "SGD momentum; 0 keeps the plain-SGD contract"},
    {"selfsup.pseudo_nms", FieldType::real, "0.4", "NMS threshold for pseudo labels"},
    {"selfsup.iterations", FieldType::integer, "2000", "stage-2 iterations (paper: 10000)"},
    {"selfsup.eval_interval", FieldType::integer, "100", "dev evaluation period in iterations"},
    {"selfsup.min_ap_gain", FieldType::real, "0",
     "dev-AP margin a candidate must add over the init before it becomes the best checkpoint"},
    {"selfsup.loss", FieldType::text, "ohem", "ohem | focal (focal is the ablation baseline)"},
    {"selfsup.focal_alpha", FieldType::real, "0.25", "focal balancing term"},
    {"selfsup.focal_gamma", FieldType::real, "2.0", "focal modulation exponent"},
    {"selfsup.neg_pos_ratio", FieldType::integer, "3", "hard negatives per positive"},
    {"selfsup.min_neg", FieldType::integer, "16", "hard-negative floor when positives are scarce"},

    {"eval.conf_thresh", FieldType::real, "0.05", "score floor before NMS during evaluation"},
    {"eval.nms_thresh", FieldType::real, "0.45", "evaluation NMS threshold"},
    {"eval.iou", FieldType::real, "0.5", "matching IoU (the protocol fixes 0.5)"},

    {"gen.image_size", FieldType::integer, "64", "synthetic canvas side"},
    {"gen.natural_train", FieldType::integer, "96", "synthetic natural train images"},
    {"gen.drawing_unlabeled", FieldType::integer, "64", "synthetic unlabeled drawings"},
    {"gen.drawing_train", FieldType::integer, "96", "synthetic labeled drawing train images"},
    {"gen.drawing_dev", FieldType::integer, "24", "synthetic drawing dev images"},
    {"gen.drawing_test", FieldType::integer, "32", "synthetic drawing test images"},
    {"gen.animal_prob", FieldType::real, "0.25", "animal character probability"},
    {"gen.tiny_face_prob", FieldType::real, "0.06", "sub-threshold face probability (natural)"},

    {"grid.max_points", FieldType::integer, "64", "hard cap on grid expansion"},

    {"render.conf_thresh", FieldType::real, "0.65", "render score floor (paper visual setting)"},
    {"render.nms_thresh", FieldType::real, "0.4", "render NMS threshold (paper visual setting)"},
};

const Field* find_field(const std::string& key) {
    for (const auto& f : kSchema) {
        if (key == f.key) return &f;
    }
    return nullptr;
}

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

void check_value(const Field& f, const std::string& value) {
    auto fail = [&](const char* want) {
        throw ConfigError(std::string(f.key) + ": expected " + want + ", got '" + value + "'");
    };
    switch (f.type) {
    case FieldType::integer: {
        std::size_t pos = 0;
        try {
            (void)std::stoll(value, &pos);
        } catch (...) {
            fail("an integer");
        }
        if (pos != value.size()) fail("an integer");
        break;
    }
    case FieldType::real: {
        std::size_t pos = 0;
        try {
            (void)std::stod(value, &pos);
        } catch (...) {
            fail("a number");
        }
        if (pos != value.size()) fail("a number");
        break;
    }
    case FieldType::boolean:
        if (value != "true" && value != "false") fail("true or false");
        break;
    case FieldType::text:
    case FieldType::list:
        break;
    }
}

} // namespace

RunConfig::RunConfig() {
    for (const auto& f : kSchema) values_[f.key] = f.def;
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return from_text(ss.str());
    } catch (ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    constexpr const char* kAxisPrefix = "grid.axes.";
    if (key.rfind(kAxisPrefix, 0) == 0) {
        const std::string target = key.substr(std::string(kAxisPrefix).size());
        const Field* f = find_field(target);
        if (f == nullptr) throw ConfigError("grid axis over unknown key: " + target);
        std::vector<std::string> vals;
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            check_value(*f, item);
            vals.push_back(item);
        }
        if (vals.empty()) throw ConfigError("grid axis " + target + " has no values");
        axes_[target] = std::move(vals);
        return;
    }
    const Field* f = find_field(key);
    if (f == nullptr) throw ConfigError("unknown config key: " + key);
    check_value(*f, value);
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
}

int RunConfig::get_int(const std::string& key) const {
    return static_cast<int>(std::stoll(get(key)));
}

double RunConfig::get_double(const std::string& key) const { return std::stod(get(key)); }

bool RunConfig::get_bool(const std::string& key) const { return get(key) == "true"; }

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    for (const auto& [k, vals] : axes_) {
        out << "grid.axes." << k << " = ";
        for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << vals[i];
        out << "\n";
    }
    return out.str();
}

void RunConfig::write_echo(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("write_echo: cannot open " + path);
    out << echo();
}

DetectorConfig RunConfig::detector() const {
    DetectorConfig d;
    d.input_size = get_int("detector.input_size");
    d.strides.clear();
    for (const auto& s : get_list("detector.strides")) d.strides.push_back(std::stoi(s));
    d.width_mult = get_double("detector.width_mult");
    d.depth_mult = get_double("detector.depth_mult");
    d.base_channels = get_int("detector.base_channels");
    d.num_heads = get_int("detector.num_heads");
    d.validate();
    return d;
}

SelfSupConfig RunConfig::selfsup() const {
    SelfSupConfig s;
    const std::string phi = get("selfsup.phi");
    if (phi == "never" || phi == "Never") {
        s.phi = std::nullopt;
    } else {
        try {
            s.phi = static_cast<std::uint64_t>(std::stoull(phi));
        } catch (...) {
            throw ConfigError("selfsup.phi: expected an iteration count or never");
        }
    }
    s.d = get_double("selfsup.d");
    s.beta = get_double("selfsup.beta");
    s.c_teac = get_double("selfsup.c_teac");
    s.ct_pos_thresh = get_double("selfsup.ct_pos");
    s.ct_neg_thresh = get_double("selfsup.ct_neg");
    s.lr = get_double("selfsup.lr");
    s.momentum_gamma = get_double("selfsup.gamma");
    s.pseudo_nms_thresh = get_double("selfsup.pseudo_nms");
    s.max_iterations = static_cast<std::uint64_t>(get_int("selfsup.iterations"));
    s.eval_interval = static_cast<std::uint64_t>(get_int("selfsup.eval_interval"));
    s.min_ap_gain = get_double("selfsup.min_ap_gain");
    const std::string loss = get("selfsup.loss");
    if (loss == "ohem") {
        s.loss = Stage2Loss::gated_ohem;
    } else if (loss == "focal") {
        s.loss = Stage2Loss::focal;
    } else {
        throw ConfigError("selfsup.loss: expected ohem or focal");
    }
    s.focal_alpha = get_double("selfsup.focal_alpha");
    s.focal_gamma = get_double("selfsup.focal_gamma");
    s.ohem_mining.neg_pos_ratio = get_int("selfsup.neg_pos_ratio");
    s.ohem_mining.min_neg = get_int("selfsup.min_neg");
    s.validate();
    return s;
}

AugmentationPolicy RunConfig::augmentation() const {
    AugmentationPolicy p;
    p.enabled = get_bool("aug.enabled");
    p.hflip_prob = get_double("aug.hflip_prob");
    p.vflip_prob = get_double("aug.vflip_prob");
    p.color_shift_deg = get_double("aug.color_shift_deg");
    p.shear_deg = get_double("aug.shear_deg");
    p.mosaic_prob = get_double("aug.mosaic_prob");
    p.gaussian_noise_sigma = get_double("aug.noise_sigma");
    p.crop_scale_min = get_double("aug.crop_min");
    p.crop_scale_max = get_double("aug.crop_max");
    return p;
}

EvalSettings RunConfig::eval_settings() const {
    EvalSettings e;
    e.conf_thresh = get_double("eval.conf_thresh");
    e.nms_thresh = get_double("eval.nms_thresh");
    e.iou_thresh = get_double("eval.iou");
    return e;
}

StyleBank RunConfig::style_bank() const {
    const std::string mode = get("style.mode");
    const std::string pre_dir = get("style.precomputed_dir");
    if (!pre_dir.empty() && mode != "none") {
        StyleBank bank;
        bank.mode = StyleMode::single;
        bank.transforms = {make_precomputed_style("precomputed", pre_dir)};
        return bank;
    }
    if (mode == "none") return make_procedural_bank(StyleMode::none);
    if (mode == "all") return make_procedural_bank(StyleMode::all);
    if (mode == "top_k") return make_procedural_bank(StyleMode::top_k, get_int("style.top_k"));
    if (mode == "single") return make_single_style_bank(get("style.single"));
    throw ConfigError("style.mode: expected none, single, top_k or all");
}

SupervisedOptions RunConfig::supervised(const std::string& stage_tag) const {
    SupervisedOptions o;
    o.epochs = get_int("train.epochs");
    o.batch_size = get_int("train.batch_size");
    o.lr = get_double("train.lr");
    o.warmup_epochs = get_int("train.warmup_epochs");
    o.pos_weight = get_double("train.pos_weight");
    o.momentum = get_double("train.momentum");
    o.beta = get_double("train.beta");
    o.no_aug_window = get_int("train.no_aug_window");
    o.eval_every_epochs = get_int("train.eval_every");
    o.augmentation = augmentation();
    o.eval_settings = eval_settings();
    o.stage_tag = stage_tag;
    o.style_bank = stage_tag == "stage1" ? style_bank() : make_procedural_bank(StyleMode::none);
    if (o.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (o.epochs < 0) throw ConfigError("train.epochs must be >= 0");
    return o;
}

CorpusSpec RunConfig::corpus_spec() const {
    CorpusSpec c;
    c.image_size = get_int("gen.image_size");
    c.natural_train = get_int("gen.natural_train");
    c.drawing_unlabeled = get_int("gen.drawing_unlabeled");
    c.drawing_labeled_train = get_int("gen.drawing_train");
    c.drawing_dev = get_int("gen.drawing_dev");
    c.drawing_test = get_int("gen.drawing_test");
    c.animal_prob = get_double("gen.animal_prob");
    c.tiny_face_prob = get_double("gen.tiny_face_prob");
    return c;
}

std::optional<std::size_t> RunConfig::subset_n() const {
    const std::string n = get("train.subset_n");
    if (n == "all") return std::nullopt;
    try {
        return static_cast<std::size_t>(std::stoull(n));
    } catch (...) {
        throw ConfigError("train.subset_n: expected a count or all");
    }
}

std::vector<std::uint64_t> RunConfig::seeds() const {
    std::vector<std::uint64_t> out;
    for (const auto& s : get_list("seeds")) out.push_back(std::stoull(s));
    if (out.empty()) throw ConfigError("seeds: at least one seed required");
    return out;
}

std::vector<RunConfig> RunConfig::expand_grid() const {
    std::size_t total = 1;
    const std::size_t cap = static_cast<std::size_t>(get_int("grid.max_points"));
    for (const auto& [k, vals] : axes_) {
        total *= vals.size();
        if (total > cap) {
            throw ConfigError("grid expands to " + std::to_string(total) + "+ points, cap is " +
                              std::to_string(cap));
        }
    }
    std::vector<RunConfig> points;
    points.reserve(total);
    RunConfig base = *this;
    base.axes_.clear();
    points.push_back(base);
    for (const auto& [key, vals] : axes_) {
        std::vector<RunConfig> next;
        next.reserve(points.size() * vals.size());
        for (const auto& p : points) {
            for (const auto& v : vals) {
                RunConfig q = p;
                q.set(key, v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

std::string RunConfig::describe_schema() {
    std::ostringstream out;
    for (const auto& f : kSchema) {
        out << f.key << " (default " << (f.def[0] ? f.def : "<empty>") << ") - " << f.doc << "\n";
    }
    return out.str();
}

} // namespace inkdet
