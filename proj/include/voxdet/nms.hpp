// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VOXDET_NMS_HPP
#define VOXDET_NMS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

struct Detection {
  Box3 box;
  double score = 0.0;  ///< in [0, 1]
  int label = 0;
};

inline constexpr double kDefaultNmsIou = 0.1;

/// Greedy per-label NMS. Detections are visited by descending score (input
/// order on ties); a detection is dropped when its IoU with an already kept
/// detection of the same label is strictly greater than `iou_threshold`.
/// Returns at most `max_out` detections in visiting order.
///
/// Throws ConfigError unless 0 < iou_threshold < 1 and every score is in [0, 1].
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold = kDefaultNmsIou,
                           std::size_t max_out = 100);

/// Same as nms() but returns the kept input indices.
std::vector<std::size_t> nms_indices(std::span<const Detection> dets, double iou_threshold,
                                     std::size_t max_out);

/// Input indices sorted by descending score, stable on ties.
std::vector<std::size_t> score_order(std::span<const Detection> dets);

}  // namespace voxdet

#endif  // VOXDET_NMS_HPP
