// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file matching.hpp
 * @brief ATSS anchor assignment and hard-negative selection.
 *
 * For each ground truth, ATSS takes the top_k anchors per pyramid level
 * whose centers are nearest to the gt center, computes their IoUs with the
 * gt, and sets an adaptive threshold t = mean + std (population std). A
 * candidate becomes positive if its IoU >= t and its center lies strictly
 * inside the gt box. An anchor positive for several gts keeps the gt with
 * the highest IoU (lower gt index on ties). Everything else is negative.
 */

#ifndef VOXDET_MATCHING_HPP
#define VOXDET_MATCHING_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "voxdet/anchors.hpp"
#include "voxdet/geometry.hpp"

namespace voxdet {

inline constexpr int kDefaultAtssTopK = 9;
inline constexpr double kDefaultNegativeRatio = 3.0;

/// Per-anchor label: a gt index >= 0 for positives, or one of these.
inline constexpr std::int32_t kNegative = -1;
inline constexpr std::int32_t kIgnored = -2;

struct GtMatchStats {
  std::size_t candidates = 0;
  double iou_mean = 0.0;
  double iou_std = 0.0;
  double threshold = 0.0;
  std::size_t positives = 0;  ///< after conflict resolution
};

struct MatchResult {
  std::vector<std::int32_t> labels;
  std::vector<GtMatchStats> per_gt;

  std::size_t positive_count() const noexcept;
  std::size_t negative_count() const noexcept;
  /// Number of gts that ended with zero positive anchors.
  std::size_t unmatched_gt_count() const noexcept;
  bool is_positive(std::size_t anchor) const { return labels.at(anchor) >= 0; }
};

/// Throws ConfigError if top_k < 1 or the grid is empty.
MatchResult atss_match(const AnchorGrid& anchors, std::span<const Box3> gts,
                       int top_k = kDefaultAtssTopK);

/// Picks the highest-scoring negative anchors, ties broken by lower anchor
/// index. Count = min(cap, floor(ratio * positives), available negatives);
/// with zero positives it is min(cap, available negatives).
/// Throws ConfigError if scores and labels differ in length.
std::vector<std::size_t> sample_hard_negatives(const MatchResult& match,
                                               std::span<const double> scores,
                                               double ratio = kDefaultNegativeRatio,
                                               std::size_t cap = 256);

}  // namespace voxdet

#endif  // VOXDET_MATCHING_HPP
