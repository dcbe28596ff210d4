// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxdet/error.hpp"

namespace voxdet {

std::size_t MatchResult::positive_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](std::int32_t l) { return l >= 0; }));
}

std::size_t MatchResult::negative_count() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNegative));
}

std::size_t MatchResult::unmatched_gt_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      per_gt.begin(), per_gt.end(), [](const GtMatchStats& s) { return s.positives == 0; }));
}

namespace {

// Indices of the top_k anchors of one level nearest to `c`, ordered by
// (distance, index).
std::vector<std::size_t> nearest_in_level(const AnchorGrid& grid, std::size_t slot, const Vec3& c,
                                          std::size_t top_k) {
  const std::size_t begin = grid.level_begin(slot);
  const std::size_t end = grid.level_end(slot);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const Vec3 a = grid.center(i);
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d += (a[k] - c[k]) * (a[k] - c[k]);
    dist.emplace_back(d, i);
  }
  const std::size_t n = std::min(top_k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n), dist.end());
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace

MatchResult atss_match(const AnchorGrid& anchors, std::span<const Box3> gts, int top_k) {
  if (top_k < 1) {
    throw ConfigError("atss_match: top_k must be >= 1");
  }
  if (anchors.empty()) {
    throw ConfigError("atss_match: anchor grid is empty");
  }

  MatchResult result;
  result.labels.assign(anchors.size(), kNegative);
  result.per_gt.resize(gts.size());
  std::vector<double> best_iou(anchors.size(), -1.0);

  for (std::size_t g = 0; g < gts.size(); ++g) {
    const Box3& gt = gts[g];
    const Vec3 gc = gt.center();

    std::vector<std::size_t> cand;
    for (std::size_t slot = 0; slot < anchors.levels().size(); ++slot) {
      auto near = nearest_in_level(anchors, slot, gc, static_cast<std::size_t>(top_k));
      cand.insert(cand.end(), near.begin(), near.end());
    }

    std::vector<double> ious(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) ious[i] = iou(anchors.box(cand[i]), gt);

    GtMatchStats& st = result.per_gt[g];
    st.candidates = cand.size();
    if (!cand.empty()) {
      const double n = static_cast<double>(cand.size());
      double mean = 0.0;
      for (double v : ious) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : ious) var += (v - mean) * (v - mean);
      st.iou_mean = mean;
      st.iou_std = std::sqrt(var / n);
      st.threshold = st.iou_mean + st.iou_std;
    }

    for (std::size_t i = 0; i < cand.size(); ++i) {
      const std::size_t a = cand[i];
      if (ious[i] < st.threshold || !strictly_contains(gt, anchors.center(a))) {
        continue;
      }
      // Strict > keeps the lower gt index on equal IoU.
      if (ious[i] > best_iou[a]) {
        best_iou[a] = ious[i];
        result.labels[a] = static_cast<std::int32_t>(g);
      }
    }
  }

  for (std::int32_t l : result.labels) {
    if (l >= 0) ++result.per_gt[static_cast<std::size_t>(l)].positives;
  }
  return result;
}

std::vector<std::size_t> sample_hard_negatives(const MatchResult& match,
                                               std::span<const double> scores, double ratio,
                                               std::size_t cap) {
  if (scores.size() != match.labels.size()) {
    throw ConfigError("sample_hard_negatives: " + std::to_string(scores.size()) +
                      " scores for " + std::to_string(match.labels.size()) + " anchors");
  }
  if (!(ratio > 0.0)) {
    throw ConfigError("sample_hard_negatives: ratio must be positive");
  }
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < match.labels.size(); ++i) {
    if (match.labels[i] == kNegative) neg.push_back(i);
  }
  const std::size_t pos = match.positive_count();
  std::size_t want = cap;
  if (pos > 0) {
    want = std::min(cap, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(pos))));
  }
  want = std::min(want, neg.size());

  std::partial_sort(neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(want), neg.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  neg.resize(want);
  return neg;
}

}  // namespace voxdet
