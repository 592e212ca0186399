// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#include "inkdet/geometry.hpp"

#include <algorithm>
#include <numeric>

#include "inkdet/errors.hpp"

namespace inkdet {

Corners to_corner(const Box& b) {
    return {b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0};
}

Box from_corner(double x1, double y1, double x2, double y2) {
    if (!(x2 > x1) || !(y2 > y1)) {
        throw ContractError("from_corner: degenerate box (" + std::to_string(x1) + "," +
                            std::to_string(y1) + "," + std::to_string(x2) + "," +
                            std::to_string(y2) + ")");
    }
    return Box{(x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1};
}

double iou(const Box& a, const Box& b) {
    if (!a.valid() || !b.valid()) {
        throw ContractError("iou: invalid box");
    }
    const Corners ca = to_corner(a);
    const Corners cb = to_corner(b);
    const double iw = std::min(ca.x2, cb.x2) - std::max(ca.x1, cb.x1);
    const double ih = std::min(ca.y2, cb.y2) - std::max(ca.y1, cb.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_thresh) {
    if (candidates.empty()) return {};
    const Klass k = candidates.front().klass;
    for (const auto& c : candidates) {
        if (c.klass != k) throw ContractError("nms: mixed-class candidate list");
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].score > candidates[b].score;
    });

    std::vector<ScoredBox> kept;
    std::vector<bool> suppressed(candidates.size(), false);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(candidates[i]);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (suppressed[j]) continue;
            if (iou(candidates[i].box, candidates[j].box) > iou_thresh) suppressed[j] = true;
        }
    }
    return kept;
}

} // namespace inkdet
