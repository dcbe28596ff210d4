// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/nms.hpp"

#include <algorithm>
#include <numeric>

#include "voxdet/error.hpp"

namespace voxdet {

std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

std::vector<std::size_t> nms_indices(std::span<const Detection> dets, double iou_threshold,
                                     std::size_t max_out) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("nms: IoU threshold must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!(dets[i].score >= 0.0 && dets[i].score <= 1.0)) {
      throw ConfigError("nms: score of detection " + std::to_string(i) + " is outside [0, 1]");
    }
  }

  const std::vector<std::size_t> order = score_order(dets);
  std::vector<bool> suppressed(dets.size(), false);
  std::vector<std::size_t> keep;

  for (std::size_t pos = 0; pos < order.size() && keep.size() < max_out; ++pos) {
    const std::size_t i = order[pos];
    if (suppressed[i]) {
      continue;
    }
    keep.push_back(i);
    for (std::size_t q = pos + 1; q < order.size(); ++q) {
      const std::size_t j = order[q];
      if (!suppressed[j] && dets[j].label == dets[i].label &&
          iou(dets[i].box, dets[j].box) > iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return keep;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold,
                           std::size_t max_out) {
  std::vector<Detection> out;
  for (std::size_t i : nms_indices(dets, iou_threshold, max_out)) {
    out.push_back(dets[i]);
  }
  return out;
}

}  // namespace voxdet
