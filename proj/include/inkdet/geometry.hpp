// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace inkdet {

/// Detection class. Each detector head predicts exactly one of these.
enum class Klass { face = 0, body = 1 };

inline const char* klass_name(Klass k) { return k == Klass::face ? "face" : "body"; }

/// Axis-aligned box in center form. Width and height are strictly positive.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool valid() const { return w > 0.0 && h > 0.0; }
    double area() const { return w * h; }
};

struct Corners {
    double x1, y1, x2, y2;
};

/// A class-tagged detection with confidence in [0, 1].
struct ScoredBox {
    Box box;
    double score = 0.0;
    Klass klass = Klass::face;
};

Corners to_corner(const Box& b);

/// Inverse of to_corner. Throws ContractError when x2 <= x1 or y2 <= y1.
Box from_corner(double x1, double y1, double x2, double y2);

/// Intersection over union. Touching edges count as zero intersection.
double iou(const Box& a, const Box& b);

/// Greedy non-maximum suppression over a single class. Keeps the
/// highest-score box, suppresses everything with IoU > iou_thresh against it,
/// repeats. Equal scores are broken by input index so runs are reproducible.
/// Output is sorted by descending score. Mixed-class input throws.
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_thresh);

} // namespace inkdet
