// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file metrics.hpp
 * @brief Detection evaluation: AP, AR, FROC and size-stratified reports.
 *
 * Matching is greedy and one-to-one per scan. Detections are visited by
 * descending score (input order on ties) and each takes the unmatched gt of
 * the same label with the highest IoU, provided that IoU >= the threshold.
 * A single detection can therefore satisfy at most one gt.
 *
 * Ground truths can be flagged as ignore regions. A detection only falls
 * back to an ignored gt when no regular gt qualifies; such detections are
 * neither TP nor FP.
 */

#ifndef VOXDET_METRICS_HPP
#define VOXDET_METRICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "voxdet/geometry.hpp"
#include "voxdet/nms.hpp"

namespace voxdet {

struct GroundTruth {
  Box3 box;
  int label = 0;
};

struct ScanGroundTruth {
  std::string scan_id;
  Vec3 spacing_mm{1.0, 1.0, 1.0};
  std::vector<GroundTruth> gts;
};

struct ScanDetections {
  std::string scan_id;
  std::vector<Detection> dets;
};

enum class Outcome { TruePositive, FalsePositive, Ignored };

struct DetRecord {
  std::size_t scan = 0;   ///< index into MatchTable::scan_ids
  std::size_t det = 0;    ///< index into that scan's detection list
  std::size_t rank = 0;   ///< position in the scan's score order
  double score = 0.0;
  Outcome outcome = Outcome::FalsePositive;
  int gt = -1;            ///< matched gt index within the scan, -1 if none
};

struct MatchTable {
  std::vector<std::string> scan_ids;
  /// All detections, ordered by descending score; ties by scan, then rank.
  std::vector<DetRecord> records;
  std::size_t n_gt = 0;  ///< non-ignored ground truths
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t ignored = 0;

  std::size_t n_scans() const noexcept { return scan_ids.size(); }
  /// TP/FP flags in record order, ignored records dropped.
  std::vector<bool> flags() const;
};

/// Per-scan ignore masks, parallel to the gt lists. Empty means none ignored.
using IgnoreMasks = std::vector<std::vector<bool>>;

/// Scans are keyed by scan_id: gt scans first (in order), then detection
/// scans without gts. Throws DuplicateScanId if an id repeats within either
/// list, ConfigError if iou_t is outside (0, 1].
MatchTable match_detections(const std::vector<ScanDetections>& dets,
                            const std::vector<ScanGroundTruth>& gts, double iou_t,
                            const IgnoreMasks& ignore = {});

/// All-points interpolated AP over score-ordered TP/FP flags. Empty when
/// n_gt is zero; 0 when there are no detections.
std::optional<double> average_precision(const std::vector<bool>& flags, std::size_t n_gt);
std::optional<double> average_precision(const MatchTable& table);

inline constexpr std::size_t kDefaultMaxDet = 100;

/// Recall counting only TPs ranked within the top max_det of their scan.
std::optional<double> average_recall(const MatchTable& table, std::size_t max_det = kDefaultMaxDet);

struct FrocPoint {
  double fp_per_scan = 0.0;
  double sensitivity = 0.0;
  double score_threshold = 0.0;  ///< +inf for the empty operating point
};

struct FrocResult {
  /// Operating points after admitting each distinct score, starting at (0, 0).
  std::vector<FrocPoint> curve;
  std::vector<double> fp_axis;
  /// Best sensitivity reachable at <= fp_axis[i] FP per scan. Empty when no gts.
  std::vector<double> sensitivity;
};

std::vector<double> default_froc_axis();

/// Throws ConfigError unless fp_axis is positive and strictly ascending.
FrocResult froc(const MatchTable& table, const std::vector<double>& fp_axis);
FrocResult froc(const std::vector<ScanDetections>& dets, const std::vector<ScanGroundTruth>& gts,
                double iou_t, const std::vector<double>& fp_axis);

// -- size groups ----------------------------------------------------------------

/// Index of the group for a volume: the number of edges <= vol_cm3.
std::size_t size_group(double vol_cm3, const std::vector<double>& edges_cm3);
/// "<1", "[1-10]", ..., ">50" style names for edges {1, 10, 50}.
std::vector<std::string> size_group_names(const std::vector<double>& edges_cm3);

struct ThresholdReport {
  double iou_threshold = 0.0;
  std::optional<double> ap;
  std::optional<double> ar;
  std::size_t n_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t ignored = 0;
};

struct SizeGroupReport {
  std::string name;
  double lo_cm3 = 0.0;   ///< inclusive
  double hi_cm3 = 0.0;   ///< exclusive, +inf for the last group
  std::vector<ThresholdReport> thresholds;
};

ThresholdReport threshold_report(const MatchTable& table, double iou_t, std::size_t max_det);

/// One report per size group. Inside a group, gts of other groups become
/// ignore regions. Throws ConfigError unless edges are positive and ascending.
std::vector<SizeGroupReport> size_stratified(const std::vector<ScanDetections>& dets,
                                             const std::vector<ScanGroundTruth>& gts,
                                             const std::vector<double>& iou_thresholds,
                                             const std::vector<double>& edges_cm3,
                                             std::size_t max_det = kDefaultMaxDet);

struct EvalConfig {
  std::vector<double> iou_thresholds{0.1, 0.3};
  std::size_t max_det = kDefaultMaxDet;
  std::vector<double> size_edges_cm3{1.0, 10.0, 50.0};
  double froc_iou = 0.1;
  std::vector<double> froc_fp_axis = default_froc_axis();
};

struct EvalReport {
  std::size_t n_scans = 0;
  std::vector<ThresholdReport> thresholds;
  double froc_iou = 0.0;
  FrocResult froc;
  std::vector<SizeGroupReport> size_groups;
};

EvalReport evaluate(const std::vector<ScanDetections>& dets, const std::vector<ScanGroundTruth>& gts,
                    const EvalConfig& config = {});

}  // namespace voxdet

#endif  // VOXDET_METRICS_HPP
