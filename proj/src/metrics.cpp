// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "voxdet/error.hpp"

namespace voxdet {

std::vector<bool> MatchTable::flags() const {
  std::vector<bool> out;
  out.reserve(records.size());
  for (const DetRecord& r : records) {
    if (r.outcome != Outcome::Ignored) out.push_back(r.outcome == Outcome::TruePositive);
  }
  return out;
}

namespace {

void check_threshold(double iou_t) {
  if (!(iou_t > 0.0 && iou_t <= 1.0)) {
    throw ConfigError("IoU threshold must lie in (0, 1]");
  }
}

// Picks the unmatched gt (same label, matching ignore state) with the highest
// IoU >= iou_t; lower index wins ties. Returns -1 if none qualifies.
int best_gt(const Detection& d, const ScanGroundTruth& scan, const std::vector<bool>& taken,
            const std::vector<bool>* ignore, bool want_ignored, double iou_t) {
  int best = -1;
  double best_iou = -1.0;
  for (std::size_t g = 0; g < scan.gts.size(); ++g) {
    const bool ig = ignore != nullptr && !ignore->empty() && (*ignore)[g];
    if (taken[g] || ig != want_ignored || scan.gts[g].label != d.label) {
      continue;
    }
    const double v = iou(d.box, scan.gts[g].box);
    if (v >= iou_t && v > best_iou) {
      best_iou = v;
      best = static_cast<int>(g);
    }
  }
  return best;
}

}  // namespace

MatchTable match_detections(const std::vector<ScanDetections>& dets,
                            const std::vector<ScanGroundTruth>& gts, double iou_t,
                            const IgnoreMasks& ignore) {
  check_threshold(iou_t);
  if (!ignore.empty() && ignore.size() != gts.size()) {
    throw ConfigError("match_detections: ignore masks must parallel the gt scans");
  }

  MatchTable table;
  std::unordered_map<std::string, std::size_t> gt_index, det_index;
  for (std::size_t s = 0; s < gts.size(); ++s) {
    if (!gt_index.emplace(gts[s].scan_id, s).second) {
      throw DuplicateScanId("duplicate scan id '" + gts[s].scan_id + "' in ground truth");
    }
    table.scan_ids.push_back(gts[s].scan_id);
  }
  for (std::size_t s = 0; s < dets.size(); ++s) {
    if (!det_index.emplace(dets[s].scan_id, s).second) {
      throw DuplicateScanId("duplicate scan id '" + dets[s].scan_id + "' in detections");
    }
    if (!gt_index.contains(dets[s].scan_id)) table.scan_ids.push_back(dets[s].scan_id);
  }

  static const ScanGroundTruth kEmpty{};
  for (std::size_t s = 0; s < table.scan_ids.size(); ++s) {
    const std::string& id = table.scan_ids[s];
    const auto git = gt_index.find(id);
    const ScanGroundTruth& scan = git == gt_index.end() ? kEmpty : gts[git->second];
    const std::vector<bool>* mask =
        (git == gt_index.end() || ignore.empty()) ? nullptr : &ignore[git->second];
    if (mask != nullptr && !mask->empty() && mask->size() != scan.gts.size()) {
      throw ConfigError("match_detections: ignore mask size mismatch for scan '" + id + "'");
    }
    for (std::size_t g = 0; g < scan.gts.size(); ++g) {
      if (mask == nullptr || mask->empty() || !(*mask)[g]) ++table.n_gt;
    }

    const auto dit = det_index.find(id);
    if (dit == det_index.end()) continue;
    const std::vector<Detection>& list = dets[dit->second].dets;

    std::vector<bool> taken(scan.gts.size(), false);
    const std::vector<std::size_t> order = score_order(list);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const Detection& d = list[order[rank]];
      DetRecord rec{s, order[rank], rank, d.score, Outcome::FalsePositive, -1};
      int g = best_gt(d, scan, taken, mask, false, iou_t);
      if (g >= 0) {
        rec.outcome = Outcome::TruePositive;
      } else if (mask != nullptr) {
        g = best_gt(d, scan, taken, mask, true, iou_t);
        if (g >= 0) rec.outcome = Outcome::Ignored;
      }
      if (g >= 0) {
        taken[static_cast<std::size_t>(g)] = true;
        rec.gt = g;
      }
      table.records.push_back(rec);
    }
  }

  // Records are already in (scan, rank) order; a stable sort keeps that as
  // the tie-break.
  std::stable_sort(table.records.begin(), table.records.end(),
                   [](const DetRecord& a, const DetRecord& b) { return a.score > b.score; });
  for (const DetRecord& r : table.records) {
    switch (r.outcome) {
      case Outcome::TruePositive:
        ++table.tp;
        break;
      case Outcome::FalsePositive:
        ++table.fp;
        break;
      case Outcome::Ignored:
        ++table.ignored;
        break;
    }
  }
  table.fn = table.n_gt - table.tp;
  return table;
}

std::optional<double> average_precision(const std::vector<bool>& flags, std::size_t n_gt) {
  if (n_gt == 0) return std::nullopt;
  const std::size_t n = flags.size();
  if (n == 0) return 0.0;

  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

std::optional<double> average_precision(const MatchTable& table) {
  return average_precision(table.flags(), table.n_gt);
}

std::optional<double> average_recall(const MatchTable& table, std::size_t max_det) {
  if (table.n_gt == 0) return std::nullopt;
  std::size_t tp = 0;
  for (const DetRecord& r : table.records) {
    if (r.outcome == Outcome::TruePositive && r.rank < max_det) ++tp;
  }
  return static_cast<double>(tp) / static_cast<double>(table.n_gt);
}

std::vector<double> default_froc_axis() {
  return {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
}

FrocResult froc(const MatchTable& table, const std::vector<double>& fp_axis) {
  for (std::size_t i = 0; i < fp_axis.size(); ++i) {
    if (!(fp_axis[i] > 0.0) || (i > 0 && !(fp_axis[i] > fp_axis[i - 1]))) {
      throw ConfigError("froc: FP axis must be positive and strictly ascending");
    }
  }
  FrocResult out;
  out.fp_axis = fp_axis;
  const double scans = static_cast<double>(std::max<std::size_t>(table.n_scans(), 1));
  const double n_gt = static_cast<double>(table.n_gt);
  auto sens = [&](std::size_t tp) { return table.n_gt == 0 ? 0.0 : static_cast<double>(tp) / n_gt; };

  out.curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  const auto& recs = table.records;
  for (std::size_t i = 0; i < recs.size();) {
    const double score = recs[i].score;
    for (; i < recs.size() && recs[i].score == score; ++i) {
      if (recs[i].outcome == Outcome::TruePositive) ++tp;
      if (recs[i].outcome == Outcome::FalsePositive) ++fp;
    }
    out.curve.push_back({static_cast<double>(fp) / scans, sens(tp), score});
  }

  if (table.n_gt > 0) {
    for (double f : fp_axis) {
      double best = 0.0;
      for (const FrocPoint& p : out.curve) {
        if (p.fp_per_scan <= f) best = std::max(best, p.sensitivity);
      }
      out.sensitivity.push_back(best);
    }
  }
  return out;
}

FrocResult froc(const std::vector<ScanDetections>& dets, const std::vector<ScanGroundTruth>& gts,
                double iou_t, const std::vector<double>& fp_axis) {
  return froc(match_detections(dets, gts, iou_t), fp_axis);
}

namespace {

void check_edges(const std::vector<double>& edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!(edges[i] > 0.0) || (i > 0 && !(edges[i] > edges[i - 1]))) {
      throw ConfigError("size bins must be positive and strictly ascending");
    }
  }
}

std::string format_edge(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::size_t size_group(double vol_cm3, const std::vector<double>& edges_cm3) {
  return static_cast<std::size_t>(
      std::upper_bound(edges_cm3.begin(), edges_cm3.end(), vol_cm3) - edges_cm3.begin());
}

std::vector<std::string> size_group_names(const std::vector<double>& edges_cm3) {
  std::vector<std::string> names;
  if (edges_cm3.empty()) {
    names.push_back("all");
    return names;
  }
  names.push_back("<" + format_edge(edges_cm3.front()));
  for (std::size_t i = 1; i < edges_cm3.size(); ++i) {
    names.push_back("[" + format_edge(edges_cm3[i - 1]) + "-" + format_edge(edges_cm3[i]) + "]");
  }
  names.push_back(">" + format_edge(edges_cm3.back()));
  return names;
}

ThresholdReport threshold_report(const MatchTable& table, double iou_t, std::size_t max_det) {
  ThresholdReport r;
  r.iou_threshold = iou_t;
  r.ap = average_precision(table);
  r.ar = average_recall(table, max_det);
  r.n_gt = table.n_gt;
  r.tp = table.tp;
  r.fp = table.fp;
  r.fn = table.fn;
  r.ignored = table.ignored;
  return r;
}

std::vector<SizeGroupReport> size_stratified(const std::vector<ScanDetections>& dets,
                                             const std::vector<ScanGroundTruth>& gts,
                                             const std::vector<double>& iou_thresholds,
                                             const std::vector<double>& edges_cm3,
                                             std::size_t max_det) {
  check_edges(edges_cm3);
  const std::vector<std::string> names = size_group_names(edges_cm3);

  std::vector<std::vector<std::size_t>> group(gts.size());
  for (std::size_t s = 0; s < gts.size(); ++s) {
    for (const GroundTruth& g : gts[s].gts) {
      group[s].push_back(size_group(physical_volume_cm3(g.box, gts[s].spacing_mm), edges_cm3));
    }
  }

  std::vector<SizeGroupReport> out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    SizeGroupReport rep;
    rep.name = names[k];
    rep.lo_cm3 = k == 0 ? 0.0 : edges_cm3[k - 1];
    rep.hi_cm3 = k < edges_cm3.size() ? edges_cm3[k] : std::numeric_limits<double>::infinity();

    IgnoreMasks mask(gts.size());
    for (std::size_t s = 0; s < gts.size(); ++s) {
      for (std::size_t g : group[s]) mask[s].push_back(g != k);
    }
    for (double t : iou_thresholds) {
      rep.thresholds.push_back(threshold_report(match_detections(dets, gts, t, mask), t, max_det));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

EvalReport evaluate(const std::vector<ScanDetections>& dets, const std::vector<ScanGroundTruth>& gts,
                    const EvalConfig& config) {
  EvalReport report;
  for (double t : config.iou_thresholds) {
    const MatchTable table = match_detections(dets, gts, t);
    report.n_scans = table.n_scans();
    report.thresholds.push_back(threshold_report(table, t, config.max_det));
  }
  report.froc_iou = config.froc_iou;
  const MatchTable froc_table = match_detections(dets, gts, config.froc_iou);
  report.n_scans = froc_table.n_scans();
  report.froc = froc(froc_table, config.froc_fp_axis);
  report.size_groups =
      size_stratified(dets, gts, config.iou_thresholds, config.size_edges_cm3, config.max_det);
  return report;
}

}  // namespace voxdet
