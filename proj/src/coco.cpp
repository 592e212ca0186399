// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "inkdet/datapipe.hpp"
#include "inkdet/errors.hpp"
#include "inkdet/rng.hpp"

namespace inkdet {

namespace fs = std::filesystem;
using nlohmann::json;

const char* source_name(ImageSource s) {
    switch (s) {
    case ImageSource::natural: return "natural";
    case ImageSource::drawing: return "drawing";
    default: return "synthetic";
    }
}

ImageSource source_from_name(const std::string& name) {
    if (name == "natural") return ImageSource::natural;
    if (name == "drawing") return ImageSource::drawing;
    if (name == "synthetic") return ImageSource::synthetic;
    throw DataError("unknown image source: " + name);
}

namespace {

// Center-form box from a corner-anchored [x, y, w, h] record, clipped to the
// raster. Returns nullopt for degenerate results.
std::optional<Box> box_from_xywh(double x, double y, double w, double h, int img_w, int img_h) {
    const double x1 = std::clamp(x, 0.0, static_cast<double>(img_w));
    const double y1 = std::clamp(y, 0.0, static_cast<double>(img_h));
    const double x2 = std::clamp(x + w, 0.0, static_cast<double>(img_w));
    const double y2 = std::clamp(y + h, 0.0, static_cast<double>(img_h));
    if (!(x2 > x1) || !(y2 > y1)) return std::nullopt;
    return from_corner(x1, y1, x2, y2);
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed annotation file " + path + ": " + e.what());
    }
}

} // namespace

std::vector<Category> load_categories(const std::string& annotation_file) {
    const json root = parse_json_file(annotation_file);
    std::vector<Category> cats;
    if (!root.contains("categories")) return cats;
    for (const auto& c : root.at("categories")) {
        cats.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
    }
    return cats;
}

std::set<int> animals_as_bodies(const std::vector<Category>& categories, bool include_animals) {
    static const std::set<std::string> kAnimals = {"dog",      "cat",  "bird",  "horse",
                                                   "sheep",    "cow",  "bear",  "elephant",
                                                   "zebra",    "giraffe"};
    std::set<int> out;
    for (const auto& c : categories) {
        if (c.name == "person") out.insert(c.id);
        if (include_animals && kAnimals.count(c.name) > 0) out.insert(c.id);
    }
    return out;
}

Dataset load_coco_annotations(const std::string& annotation_file, const std::string& image_root,
                              const std::set<int>& body_categories) {
    const json root = parse_json_file(annotation_file);
    if (!root.contains("images") || !root.contains("annotations")) {
        throw DataError(annotation_file + ": missing images/annotations arrays");
    }

    ImageSource source = ImageSource::synthetic;
    if (root.contains("info") && root.at("info").contains("source")) {
        source = source_from_name(root.at("info").at("source").get<std::string>());
    }

    std::set<int> face_categories;
    std::set<int> animal_ids;
    if (root.contains("categories")) {
        std::vector<Category> cats;
        for (const auto& c : root.at("categories")) {
            cats.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
            if (cats.back().name == "face") face_categories.insert(cats.back().id);
        }
        const std::set<int> with = animals_as_bodies(cats, true);
        const std::set<int> without = animals_as_bodies(cats, false);
        for (int id : with) {
            if (without.count(id) == 0) animal_ids.insert(id);
        }
    }

    struct Record {
        std::string file_name;
        std::string id;
        int w = 0, h = 0;
        std::vector<Box> faces, bodies;
        std::vector<std::uint8_t> body_flags;
    };
    std::map<std::int64_t, Record> records; // ordered for reproducible output
    for (const auto& im : root.at("images")) {
        Record r;
        r.file_name = im.at("file_name").get<std::string>();
        r.w = im.at("width").get<int>();
        r.h = im.at("height").get<int>();
        const auto image_id = im.at("id").get<std::int64_t>();
        r.id = im.contains("name") ? im.at("name").get<std::string>() : std::to_string(image_id);
        records[image_id] = std::move(r);
    }

    for (const auto& an : root.at("annotations")) {
        const auto image_id = an.at("image_id").get<std::int64_t>();
        auto it = records.find(image_id);
        if (it == records.end()) {
            std::cerr << "warning: annotation for unknown image id " << image_id << ", skipped\n";
            continue;
        }
        const auto& bbox = an.at("bbox");
        const int cat = an.at("category_id").get<int>();
        auto b = box_from_xywh(bbox.at(0).get<double>(), bbox.at(1).get<double>(),
                               bbox.at(2).get<double>(), bbox.at(3).get<double>(), it->second.w,
                               it->second.h);
        if (!b) {
            std::cerr << "warning: degenerate box on image " << image_id << ", skipped\n";
            continue;
        }
        if (face_categories.count(cat) > 0) {
            it->second.faces.push_back(*b);
        } else if (body_categories.count(cat) > 0) {
            it->second.bodies.push_back(*b);
            it->second.body_flags.push_back(animal_ids.count(cat) > 0 ? 1 : 0);
        }
    }

    Dataset out;
    for (auto& [image_id, r] : records) {
        const fs::path path = fs::path(image_root) / r.file_name;
        if (!fs::exists(path)) {
            std::cerr << "warning: missing image " << path.string() << ", record skipped\n";
            continue;
        }
        AnnotatedImage a;
        try {
            a.image = load_ppm(path.string());
        } catch (const IoError& e) {
            std::cerr << "warning: " << e.what() << ", record skipped\n";
            continue;
        }
        a.face_boxes = std::move(r.faces);
        a.body_boxes = std::move(r.bodies);
        a.body_animal_flags = std::move(r.body_flags);
        a.source = source;
        a.id = r.id;
        out.push_back(std::move(a));
    }
    return out;
}

void save_coco_dataset(const Dataset& dataset, const std::string& dir) {
    const fs::path base(dir);
    fs::create_directories(base / "images");

    json images = json::array();
    json annotations = json::array();
    const json categories = json::array({json{{"id", 1}, {"name", "person"}},
                                         json{{"id", 2}, {"name", "face"}},
                                         json{{"id", 3}, {"name", "dog"}}});

    std::int64_t next_ann = 1;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const AnnotatedImage& a = dataset[i];
        const std::string file_name = a.id + ".ppm";
        save_ppm(a.image, (base / "images" / file_name).string());
        images.push_back({{"id", static_cast<std::int64_t>(i) + 1},
                          {"name", a.id},
                          {"file_name", file_name},
                          {"width", a.image.w},
                          {"height", a.image.h}});
        auto emit = [&](const Box& b, int cat) {
            const Corners c = to_corner(b);
            annotations.push_back({{"id", next_ann++},
                                   {"image_id", static_cast<std::int64_t>(i) + 1},
                                   {"category_id", cat},
                                   {"bbox", {c.x1, c.y1, b.w, b.h}},
                                   {"area", b.w * b.h}});
        };
        for (const Box& b : a.face_boxes) emit(b, 2);
        for (std::size_t bi = 0; bi < a.body_boxes.size(); ++bi) {
            const bool animal = bi < a.body_animal_flags.size() && a.body_animal_flags[bi] != 0;
            emit(a.body_boxes[bi], animal ? 3 : 1);
        }
    }

    const ImageSource src = dataset.empty() ? ImageSource::synthetic : dataset.front().source;
    const json root{{"info", {{"source", source_name(src)}}},
                    {"images", images},
                    {"annotations", annotations},
                    {"categories", categories}};
    std::ofstream out(base / "annotations.json");
    if (!out) throw IoError("save_coco_dataset: cannot write " + (base / "annotations.json").string());
    out << root.dump(1) << "\n";
}

Dataset filter_small_faces(const Dataset& dataset, double ratio) {
    Dataset out;
    for (const auto& a : dataset) {
        const double min_side = std::min(a.image.h, a.image.w);
        bool drop = false;
        for (const Box& f : a.face_boxes) {
            if (std::max(f.w, f.h) < ratio * min_side) {
                drop = true;
                break;
            }
        }
        if (!drop) out.push_back(a);
    }
    return out;
}

Dataset subset_sampler(const Dataset& dataset, std::optional<std::size_t> n, std::uint64_t seed) {
    if (!n.has_value()) return dataset;
    if (*n > dataset.size()) {
        throw DataError("subset_sampler: requested " + std::to_string(*n) + " of " +
                        std::to_string(dataset.size()) + " images");
    }
    // Partial Fisher-Yates over an index vector.
    std::vector<std::size_t> idx(dataset.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_seed(seed, 0x5ab5e7ULL));
    Dataset out;
    out.reserve(*n);
    for (std::size_t i = 0; i < *n; ++i) {
        const std::size_t j = i + rng.uniform_int(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.push_back(dataset[idx[i]]);
    }
    return out;
}

} // namespace inkdet
