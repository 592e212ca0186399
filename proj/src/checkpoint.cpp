// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "inkdet/errors.hpp"

namespace inkdet {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'K', 'C', 'K', 'P', 'T', '1'};

nlohmann::json config_to_json(const DetectorConfig& c) {
    return nlohmann::json{{"input_size", c.input_size},
                          {"strides", c.strides},
                          {"width_mult", c.width_mult},
                          {"depth_mult", c.depth_mult},
                          {"num_heads", c.num_heads},
                          {"base_channels", c.base_channels}};
}

DetectorConfig config_from_json(const nlohmann::json& j) {
    DetectorConfig c;
    c.input_size = j.at("input_size").get<int>();
    c.strides = j.at("strides").get<std::vector<int>>();
    c.width_mult = j.at("width_mult").get<double>();
    c.depth_mult = j.at("depth_mult").get<double>();
    c.num_heads = j.at("num_heads").get<int>();
    c.base_channels = j.at("base_channels").get<int>();
    return c;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const ParamLayout layout = ParamLayout::make(ckpt.params.config);
    if (ckpt.params.values.size() != layout.total()) {
        throw ContractError("save_checkpoint: parameter vector does not match config layout");
    }

    nlohmann::json segments = nlohmann::json::array();
    for (const auto& s : layout.segments()) {
        segments.push_back({{"name", s.name}, {"offset", s.offset}, {"count", s.count}});
    }
    nlohmann::json header{{"format", "inkdet-checkpoint"},
                          {"detector", config_to_json(ckpt.params.config)},
                          {"iteration", ckpt.iteration},
                          {"stage", ckpt.stage},
                          {"segments", segments},
                          {"param_count", ckpt.params.values.size()}};
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    out.write(reinterpret_cast<const char*>(ckpt.params.values.data()),
              static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)));
    if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("load_checkpoint: bad magic in " + path);
    }
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen == 0 || hlen > (1u << 20)) throw IoError("load_checkpoint: bad header length");
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("load_checkpoint: truncated header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(htext);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_checkpoint: header parse failure: " + std::string(e.what()));
    }

    Checkpoint ckpt;
    ckpt.params.config = config_from_json(header.at("detector"));
    ckpt.iteration = header.at("iteration").get<std::uint64_t>();
    ckpt.stage = header.at("stage").get<std::string>();

    const ParamLayout layout = ParamLayout::make(ckpt.params.config);
    const auto count = header.at("param_count").get<std::size_t>();
    if (count != layout.total()) {
        throw IoError("load_checkpoint: parameter count " + std::to_string(count) +
                      " does not match layout " + std::to_string(layout.total()));
    }
    ckpt.params.values.resize(count);
    in.read(reinterpret_cast<char*>(ckpt.params.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
        throw IoError("load_checkpoint: truncated parameter data in " + path);
    }
    return ckpt;
}

} // namespace inkdet
