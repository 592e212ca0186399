// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "inkdet/detector.hpp"

namespace inkdet {

/// Self-describing checkpoint: config echo, named parameter segments, the
/// iteration counter, and a stage tag. Parameter bytes round-trip exactly.
struct Checkpoint {
    DetectorParams params;
    std::uint64_t iteration = 0;
    std::string stage = "init"; // init | stage1 | stage2 | stage3
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace inkdet
