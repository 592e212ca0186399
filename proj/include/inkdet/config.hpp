// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inkdet/datapipe.hpp"
#include "inkdet/detector.hpp"
#include "inkdet/eval.hpp"
#include "inkdet/selfsup.hpp"
#include "inkdet/train.hpp"

namespace inkdet {

/// Flat "key = value" run configuration with a closed schema: unknown keys
/// are rejected (a silent typo inside an ablation grid is the failure mode
/// this guards against). grid.axes.<known-key> entries declare grid axes.
class RunConfig {
public:
    RunConfig(); // all defaults

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    void set(const std::string& key, const std::string& value); // validates key + value
    const std::string& get(const std::string& key) const;

    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;

    /// Serialized sorted key=value echo; reparsing reproduces this config.
    std::string echo() const;
    void write_echo(const std::string& path) const;

    // Typed views over the flat table.
    DetectorConfig detector() const;
    SelfSupConfig selfsup() const;
    AugmentationPolicy augmentation() const;
    SupervisedOptions supervised(const std::string& stage_tag) const;
    EvalSettings eval_settings() const;
    CorpusSpec corpus_spec() const;
    StyleBank style_bank() const;
    std::optional<std::size_t> subset_n() const; // "all" -> nullopt
    std::vector<std::uint64_t> seeds() const;

    const std::map<std::string, std::vector<std::string>>& grid_axes() const { return axes_; }

    /// Cartesian product of the grid axes over this base config; refuses to
    /// expand beyond grid.max_points with the offending count.
    std::vector<RunConfig> expand_grid() const;

    /// Human-readable schema dump (key, default, doc) for --help-config.
    static std::string describe_schema();

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> axes_;
};

} // namespace inkdet
