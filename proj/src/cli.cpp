// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "voxdet/anchors.hpp"
#include "voxdet/annotation.hpp"
#include "voxdet/detail/random.hpp"
#include "voxdet/error.hpp"
#include "voxdet/io.hpp"
#include "voxdet/losses.hpp"
#include "voxdet/matching.hpp"
#include "voxdet/metrics.hpp"
#include "voxdet/nms.hpp"

namespace voxdet {

namespace {

using ojson = nlohmann::ordered_json;

enum class Format { Table, Structured };

Box3 box_from_corners(const std::vector<double>& c) {
  return Box3({c[0], c[1], c[2]}, {c[3], c[4], c[5]});
}

BoxParam param_from_list(const std::vector<double>& c) {
  BoxParam p{{c[0], c[1], c[2]}, {c[3], c[4], c[5]}};
  p.validate();
  return p;
}

VolumeMeta meta_from(const std::vector<std::int64_t>& shape, const std::vector<double>& spacing) {
  VolumeMeta m;
  for (int i = 0; i < 3; ++i) {
    m.shape[i] = shape[static_cast<std::size_t>(i)];
    m.spacing_mm[i] = spacing[static_cast<std::size_t>(i)];
  }
  m.validate();
  return m;
}

std::string fixed(double v, int prec = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

// -- subcommand bodies ------------------------------------------------------------

void cmd_iou(std::ostream& out, Format fmt, const std::vector<double>& a, const std::vector<double>& b) {
  const Box3 ba = box_from_corners(a);
  const Box3 bb = box_from_corners(b);
  const double v = iou(ba, bb);
  if (fmt == Format::Structured) {
    ojson j;
    j["iou"] = v;
    j["intersection"] = intersection_volume(ba, bb);
    j["volume_a"] = volume(ba);
    j["volume_b"] = volume(bb);
    out << j.dump(2) << "\n";
  } else {
    out << "iou " << std::setprecision(17) << v << "\n";
  }
}

void cmd_loss(std::ostream& out, Format fmt, const std::string& kind_name,
              const std::vector<double>& pred_v, const std::vector<double>& gt_v, double beta) {
  const LossKind kind = parse_loss_kind(kind_name);
  const BoxParam pred = param_from_list(pred_v);
  const BoxParam gt = param_from_list(gt_v);
  const LossValue lv = evaluate_loss(kind, pred, gt, beta, true);
  std::optional<VcIouTerms> terms;
  if (kind != LossKind::SmoothL1) terms = vciou_terms(pred, gt);

  if (fmt == Format::Structured) {
    ojson j;
    j["loss"] = std::string(to_string(kind));
    j["value"] = lv.value;
    j["gradient"] = *lv.gradient;
    if (terms) {
      j["iou"] = terms->iou;
      j["distance_ratio"] = terms->distance_ratio;
      j["v"] = terms->v;
      j["alpha"] = terms->alpha;
    }
    out << j.dump(2) << "\n";
    return;
  }
  out << to_string(kind) << " " << std::setprecision(17) << lv.value << "\n";
  static const char* names[] = {"cz", "cy", "cx", "d", "h", "w"};
  for (int i = 0; i < 6; ++i) {
    out << "  d/d" << names[i] << " " << (*lv.gradient)[static_cast<std::size_t>(i)] << "\n";
  }
  if (terms) {
    out << "  iou " << terms->iou << "\n  rho2/c2 " << terms->distance_ratio << "\n  v "
        << terms->v << "\n  alpha " << terms->alpha << "\n";
  }
}

// Random overlapping pair away from face coincidences.
std::pair<BoxParam, BoxParam> random_pair(detail::Rng& rng) {
  BoxParam gt, pred;
  for (int a = 0; a < 3; ++a) {
    gt.center[a] = rng.uniform(-20.0, 20.0);
    gt.size[a] = rng.uniform(2.0, 30.0);
    pred.center[a] = gt.center[a] + rng.uniform(-0.4, 0.4) * gt.size[a];
    pred.size[a] = gt.size[a] * rng.uniform(0.5, 2.0);
  }
  return {pred, gt};
}

void cmd_grad_check(std::ostream& out, Format fmt, int pairs, std::uint64_t seed, double step,
                    double beta) {
  struct Row {
    LossKind kind;
    double max_err = 0.0;
    std::size_t checked = 0;
    std::size_t kinks = 0;
  };
  std::vector<Row> rows{{LossKind::SmoothL1}, {LossKind::DIoU}, {LossKind::VCIoU}};
  for (Row& row : rows) {
    detail::Rng rng(seed);
    for (int i = 0; i < pairs; ++i) {
      const auto [pred, gt] = random_pair(rng);
      try {
        const GradCheckResult r = gradient_check(row.kind, pred, gt, step, beta);
        row.max_err = std::max(row.max_err, r.max_rel_error);
        ++row.checked;
      } catch (const NonDifferentiablePoint&) {
        ++row.kinks;
      }
    }
  }
  if (fmt == Format::Structured) {
    ojson arr = ojson::array();
    for (const Row& r : rows) {
      ojson j;
      j["loss"] = std::string(to_string(r.kind));
      j["pairs_checked"] = r.checked;
      j["non_differentiable"] = r.kinks;
      j["max_rel_error"] = r.max_err;
      arr.push_back(j);
    }
    out << arr.dump(2) << "\n";
    return;
  }
  out << std::left << std::setw(12) << "loss" << std::right << std::setw(10) << "checked"
      << std::setw(8) << "kinks" << std::setw(16) << "max rel error" << "\n";
  for (const Row& r : rows) {
    out << std::left << std::setw(12) << to_string(r.kind) << std::right << std::setw(10)
        << r.checked << std::setw(8) << r.kinks << std::setw(16) << sci(r.max_err) << "\n";
  }
}

std::string index3(const Index3& v) {
  return std::to_string(v[0]) + "x" + std::to_string(v[1]) + "x" + std::to_string(v[2]);
}

void cmd_anchors_gen(std::ostream& out, Format fmt, const std::string& config_path,
                     const std::vector<std::int64_t>& shape, const std::vector<double>& spacing,
                     const std::string& out_path) {
  const AnchorConfig cfg = read_anchor_config(config_path);
  const VolumeMeta meta = meta_from(shape, spacing);
  const auto levels = schedule_from_config(cfg, meta);
  const AnchorGrid grid = generate_anchors(levels, meta);

  if (!out_path.empty()) {
    ScanBoxes sb{"anchors", meta.spacing_mm, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Anchor a = grid.at(i);
      sb.boxes.push_back(BoxRecord{a.box, a.level, std::nullopt});
    }
    write_boxes(out_path, {sb});
  }

  if (fmt == Format::Structured) {
    ojson arr = ojson::array();
    for (const LevelSpec& l : levels) {
      ojson j;
      j["level"] = l.name();
      j["cumulative_stride"] = l.cumulative_stride;
      j["feature_shape"] = l.feature_shape;
      j["detection"] = l.detection;
      j["anchor_shapes"] = l.anchor_shapes;
      j["anchors"] = l.detection ? expected_anchor_count(l, meta) : 0;
      arr.push_back(j);
    }
    ojson j;
    j["levels"] = std::move(arr);
    j["total_anchors"] = grid.size();
    out << j.dump(2) << "\n";
    return;
  }
  out << std::left << std::setw(6) << "level" << std::setw(12) << "stride" << std::setw(14)
      << "feature map" << std::setw(6) << "k" << "anchors\n";
  for (const LevelSpec& l : levels) {
    out << std::left << std::setw(6) << l.name() << std::setw(12) << index3(l.cumulative_stride)
        << std::setw(14) << index3(l.feature_shape) << std::setw(6)
        << (l.detection ? std::to_string(l.anchor_shapes.size()) : "-")
        << (l.detection ? std::to_string(expected_anchor_count(l, meta)) : "-") << "\n";
  }
  out << "total " << grid.size() << "\n";
}

std::vector<Box3> all_boxes(const std::vector<ScanBoxes>& scans) {
  std::vector<Box3> boxes;
  for (const ScanBoxes& s : scans) {
    for (const BoxRecord& r : s.boxes) boxes.push_back(r.box);
  }
  return boxes;
}

void cmd_anchors_fit(std::ostream& out, Format fmt, const std::string& boxes_path, int k, int iters,
                     std::uint64_t seed, const std::string& scaling, const std::string& out_path) {
  const auto boxes = all_boxes(read_boxes(boxes_path));
  const AnchorFit fit = fit_anchors(boxes, k, iters, seed);
  AnchorConfig cfg;
  cfg.family = fit.shapes;
  cfg.scaling = parse_family_scaling(scaling);
  const std::string text = format_anchor_config(cfg);

  if (out_path.empty() && fmt == Format::Structured) {
    out << text;
    return;
  }
  if (!out_path.empty()) write_text_file(out_path, text);
  if (fmt == Format::Structured) {
    ojson j;
    j["mean_best_iou"] = fit.mean_best_iou;
    j["iterations"] = fit.iterations;
    j["reseeds"] = fit.reseeds;
    j["family"] = fit.shapes;
    out << j.dump(2) << "\n";
    return;
  }
  out << "fitted " << fit.shapes.size() << " anchors on " << boxes.size() << " boxes\n";
  for (const Vec3& s : fit.shapes) {
    out << "  d=" << fixed(s[0], 3) << " h=" << fixed(s[1], 3) << " w=" << fixed(s[2], 3) << "\n";
  }
  out << "mean best IoU " << fixed(fit.mean_best_iou) << " after " << fit.iterations
      << " iterations (" << fit.reseeds << " re-seeds)\n";
}

void cmd_match(std::ostream& out, Format fmt, const std::string& config_path,
               const std::vector<std::int64_t>& shape, const std::string& gt_path, int top_k) {
  const AnchorConfig cfg = read_anchor_config(config_path);
  const auto scans = read_boxes(gt_path);
  ojson arr = ojson::array();
  for (const ScanBoxes& scan : scans) {
    const VolumeMeta meta =
        meta_from(shape, {scan.spacing_mm[0], scan.spacing_mm[1], scan.spacing_mm[2]});
    const AnchorGrid grid = generate_anchors(schedule_from_config(cfg, meta), meta);
    std::vector<Box3> gts;
    for (const BoxRecord& r : scan.boxes) gts.push_back(r.box);
    const MatchResult m = atss_match(grid, gts, top_k);

    if (fmt == Format::Structured) {
      ojson sj;
      sj["scan_id"] = scan.scan_id;
      sj["anchors"] = grid.size();
      sj["positives"] = m.positive_count();
      sj["gts_without_positives"] = m.unmatched_gt_count();
      ojson per = ojson::array();
      for (const GtMatchStats& st : m.per_gt) {
        ojson g;
        g["candidates"] = st.candidates;
        g["iou_mean"] = st.iou_mean;
        g["iou_std"] = st.iou_std;
        g["threshold"] = st.threshold;
        g["positives"] = st.positives;
        per.push_back(g);
      }
      sj["gts"] = std::move(per);
      arr.push_back(std::move(sj));
      continue;
    }
    out << "scan " << scan.scan_id << ": " << grid.size() << " anchors, " << m.positive_count()
        << " positive, " << m.unmatched_gt_count() << " gt(s) without positives\n";
    out << std::right << std::setw(6) << "gt" << std::setw(12) << "candidates" << std::setw(12)
        << "threshold" << std::setw(11) << "positives" << "\n";
    for (std::size_t g = 0; g < m.per_gt.size(); ++g) {
      const GtMatchStats& st = m.per_gt[g];
      out << std::setw(6) << g << std::setw(12) << st.candidates << std::setw(12)
          << fixed(st.threshold, 4) << std::setw(11) << st.positives << "\n";
    }
  }
  if (fmt == Format::Structured) out << arr.dump(2) << "\n";
}

void cmd_nms(std::ostream& out, Format fmt, const std::string& in_path, double thr,
             std::size_t max_out, const std::string& out_path) {
  auto scans = read_boxes(in_path);
  const auto dets = to_detections(scans);
  std::size_t before = 0, after = 0;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    const auto keep = nms_indices(dets[s].dets, thr, max_out);
    std::vector<BoxRecord> kept;
    for (std::size_t i : keep) kept.push_back(scans[s].boxes[i]);
    before += scans[s].boxes.size();
    after += kept.size();
    scans[s].boxes = std::move(kept);
  }
  if (out_path.empty()) {
    out << format_boxes(scans);
    return;
  }
  write_boxes(out_path, scans);
  if (fmt == Format::Structured) {
    ojson j;
    j["input"] = before;
    j["kept"] = after;
    out << j.dump(2) << "\n";
  } else {
    out << "kept " << after << " of " << before << " detections\n";
  }
}

void cmd_eval(std::ostream& out, Format fmt, const std::string& pred, const std::string& gt,
              const EvalConfig& cfg, const std::string& out_path) {
  const auto dets = to_detections(read_boxes(pred));
  const auto gts = to_ground_truth(read_boxes(gt));
  const EvalReport report = evaluate(dets, gts, cfg);
  const std::string structured = format_eval_report_json(report);
  if (!out_path.empty()) write_text_file(out_path, structured);
  out << (fmt == Format::Structured ? structured : format_eval_report_table(report));
}

void cmd_froc(std::ostream& out, Format fmt, const std::string& pred, const std::string& gt,
              double iou_t, const std::vector<double>& axis, const std::string& out_path) {
  const auto dets = to_detections(read_boxes(pred));
  const auto gts = to_ground_truth(read_boxes(gt));
  const FrocResult fr = froc(dets, gts, iou_t, axis);
  const std::string columns = format_froc_columns(fr);
  if (!out_path.empty()) write_text_file(out_path, columns);
  if (fmt == Format::Structured) {
    ojson j;
    j["iou_threshold"] = iou_t;
    j["fp_per_scan"] = fr.fp_axis;
    j["sensitivity"] = fr.sensitivity;
    out << j.dump(2) << "\n";
  } else {
    out << columns;
  }
}

void cmd_mask2boxes(std::ostream& out, Format fmt, const std::string& volume_path, int conn,
                    std::string scan_id, const std::string& out_path) {
  const LabelMap map = read_volume(volume_path);
  const auto comps = mask_to_boxes(map, parse_connectivity(conn));
  if (scan_id.empty()) scan_id = std::filesystem::path(volume_path).stem().string();
  ScanBoxes sb{scan_id, map.meta.spacing_mm, {}};
  for (const ComponentBox& c : comps) sb.boxes.push_back(BoxRecord{c.box, c.label, std::nullopt});

  if (out_path.empty()) {
    out << format_boxes({sb});
    return;
  }
  write_boxes(out_path, {sb});
  if (fmt == Format::Structured) {
    ojson arr = ojson::array();
    for (const ComponentBox& c : comps) {
      ojson j;
      j["voxels"] = c.voxel_count;
      j["label"] = c.label;
      j["volume_cm3"] = physical_volume_cm3(c.box, map.meta.spacing_mm);
      arr.push_back(j);
    }
    out << arr.dump(2) << "\n";
  } else {
    out << comps.size() << " component(s)\n";
    for (const ComponentBox& c : comps) {
      out << "  " << c.box << " voxels=" << c.voxel_count << " label=" << c.label << "\n";
    }
  }
}

void cmd_noise(std::ostream& out, Format fmt, const std::string& in_path, NoiseSpec spec,
               const std::string& out_path) {
  auto scans = read_boxes(in_path);
  const std::uint64_t base = spec.seed;
  double iou_sum = 0.0;
  std::size_t kept = 0, total = 0, clamped = 0;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    std::vector<Box3> boxes;
    for (const BoxRecord& r : scans[s].boxes) boxes.push_back(r.box);
    spec.seed = scan_seed(base, s);
    const NoiseResult res = corrupt_boxes(boxes, spec, scans[s].spacing_mm);
    std::vector<BoxRecord> next;
    for (std::size_t i = 0; i < res.boxes.size(); ++i) {
      BoxRecord r = scans[s].boxes[res.kept[i]];
      r.box = res.boxes[i];
      next.push_back(r);
    }
    total += boxes.size();
    kept += res.kept.size();
    clamped += res.clamped;
    if (res.mean_iou) iou_sum += *res.mean_iou * static_cast<double>(res.kept.size());
    scans[s].boxes = std::move(next);
  }
  if (out_path.empty()) {
    out << format_boxes(scans);
    return;
  }
  write_boxes(out_path, scans);
  const double mean = kept == 0 ? 0.0 : iou_sum / static_cast<double>(kept);
  if (fmt == Format::Structured) {
    ojson j;
    j["mode"] = std::string(to_string(spec.mode));
    j["boxes_in"] = total;
    j["boxes_out"] = kept;
    j["clamped"] = clamped;
    j["mean_iou"] = kept == 0 ? ojson(nullptr) : ojson(mean);
    out << j.dump(2) << "\n";
  } else {
    out << to_string(spec.mode) << ": " << kept << " of " << total << " boxes kept, mean IoU "
        << fixed(mean) << ", " << clamped << " clamped\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"voxdet: 3D box geometry, losses, matching and detection evaluation"};
  app.require_subcommand(1);
  std::string format = "table";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"table", "structured"}))
      ->capture_default_str();

  // iou
  std::vector<double> iou_a, iou_b;
  auto* iou_cmd = app.add_subcommand("iou", "IoU of two boxes given as z1,y1,x1,z2,y2,x2");
  iou_cmd->add_option("--a", iou_a)->required()->delimiter(',')->expected(6);
  iou_cmd->add_option("--b", iou_b)->required()->delimiter(',')->expected(6);

  // loss
  std::string loss_kind = "vciou";
  std::vector<double> loss_pred, loss_gt;
  double beta = kDefaultSmoothL1Beta;
  auto* loss_cmd = app.add_subcommand("loss", "Loss value and gradient for one pair (cz,cy,cx,d,h,w)");
  loss_cmd->add_option("--kind", loss_kind)
      ->check(CLI::IsMember({"smooth_l1", "diou", "vciou"}))
      ->capture_default_str();
  loss_cmd->add_option("--pred", loss_pred)->required()->delimiter(',')->expected(6);
  loss_cmd->add_option("--gt", loss_gt)->required()->delimiter(',')->expected(6);
  loss_cmd->add_option("--beta", beta)->check(CLI::PositiveNumber)->capture_default_str();

  // grad-check
  int gc_pairs = 1000;
  std::uint64_t gc_seed = 1;
  double gc_step = 1e-5;
  auto* gc_cmd = app.add_subcommand("grad-check", "Finite-difference check of every loss gradient");
  gc_cmd->add_option("--pairs", gc_pairs)->check(CLI::PositiveNumber)->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed)->capture_default_str();
  gc_cmd->add_option("--step", gc_step)->check(CLI::PositiveNumber)->capture_default_str();
  gc_cmd->add_option("--beta", beta)->check(CLI::PositiveNumber)->capture_default_str();

  // anchors gen / fit
  auto* anchors_cmd = app.add_subcommand("anchors", "Anchor grids and anchor family fitting");
  anchors_cmd->require_subcommand(1);
  std::string gen_config, gen_out;
  std::vector<std::int64_t> gen_shape;
  std::vector<double> gen_spacing{1.0, 1.0, 1.0};
  auto* gen_cmd = anchors_cmd->add_subcommand("gen", "Lay out anchors for a volume shape");
  gen_cmd->add_option("--config", gen_config, "Anchor family config")->required();
  gen_cmd->add_option("--shape", gen_shape, "Volume shape z,y,x")->required()->delimiter(',')->expected(3);
  gen_cmd->add_option("--spacing", gen_spacing, "Voxel spacing z,y,x in mm")->delimiter(',')->expected(3);
  gen_cmd->add_option("--out", gen_out, "Write every anchor to a box file");

  std::string fit_boxes, fit_out, fit_scaling = "rescale";
  int fit_k = 5, fit_iters = 100;
  std::uint64_t fit_seed = 0;
  auto* fit_cmd = anchors_cmd->add_subcommand("fit", "Fit an anchor family to a box file");
  fit_cmd->add_option("--boxes", fit_boxes)->required();
  fit_cmd->add_option("--k", fit_k)->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--iters", fit_iters)->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--seed", fit_seed)->capture_default_str();
  fit_cmd->add_option("--scaling", fit_scaling)
      ->check(CLI::IsMember({"rescale", "same"}))
      ->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "Write the anchor family config here");

  // match
  std::string match_config, match_gt;
  std::vector<std::int64_t> match_shape;
  int top_k = kDefaultAtssTopK;
  auto* match_cmd = app.add_subcommand("match", "ATSS matching diagnostics per ground truth");
  match_cmd->add_option("--config", match_config)->required();
  match_cmd->add_option("--shape", match_shape)->required()->delimiter(',')->expected(3);
  match_cmd->add_option("--gt", match_gt)->required();
  match_cmd->add_option("--top-k", top_k)->check(CLI::PositiveNumber)->capture_default_str();

  // nms
  std::string nms_in, nms_out;
  double nms_iou = kDefaultNmsIou;
  std::size_t nms_max = 100;
  auto* nms_cmd = app.add_subcommand("nms", "Per-scan greedy 3D NMS over a detection box file");
  nms_cmd->add_option("--in", nms_in)->required();
  nms_cmd->add_option("--iou", nms_iou)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  nms_cmd->add_option("--max-out", nms_max)->check(CLI::PositiveNumber)->capture_default_str();
  nms_cmd->add_option("--out", nms_out);

  // eval
  std::string eval_pred, eval_gt, eval_out;
  EvalConfig eval_cfg;
  auto* eval_cmd = app.add_subcommand("eval", "AP / AR / FROC / size-group report");
  eval_cmd->add_option("--pred", eval_pred)->required();
  eval_cmd->add_option("--gt", eval_gt)->required();
  eval_cmd->add_option("--iou", eval_cfg.iou_thresholds)->delimiter(',');
  eval_cmd->add_option("--max-det", eval_cfg.max_det)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--bins", eval_cfg.size_edges_cm3, "Size group edges in cm^3")->delimiter(',');
  eval_cmd->add_option("--froc-iou", eval_cfg.froc_iou);
  eval_cmd->add_option("--fp", eval_cfg.froc_fp_axis, "FROC FP/scan axis")->delimiter(',');
  eval_cmd->add_option("--out", eval_out, "Also write the structured report here");

  // froc
  std::string froc_pred, froc_gt, froc_out;
  double froc_iou = 0.1;
  std::vector<double> froc_axis = default_froc_axis();
  auto* froc_cmd = app.add_subcommand("froc", "FROC sensitivities at fixed FP/scan values");
  froc_cmd->add_option("--pred", froc_pred)->required();
  froc_cmd->add_option("--gt", froc_gt)->required();
  froc_cmd->add_option("--iou", froc_iou)->capture_default_str();
  froc_cmd->add_option("--fp", froc_axis)->delimiter(',');
  froc_cmd->add_option("--out", froc_out, "Write plot-ready columns here");

  // mask2boxes
  std::string m2b_volume, m2b_scan, m2b_out;
  int m2b_conn = 26;
  auto* m2b_cmd = app.add_subcommand("mask2boxes", "Connected-component boxes of a label volume");
  m2b_cmd->add_option("--volume", m2b_volume, "Volume header")->required();
  m2b_cmd->add_option("--connectivity", m2b_conn)
      ->check(CLI::IsMember({6, 26}))
      ->capture_default_str();
  m2b_cmd->add_option("--scan-id", m2b_scan);
  m2b_cmd->add_option("--out", m2b_out);

  // noise
  std::string noise_in, noise_out, noise_mode = "shrink";
  NoiseSpec noise;
  auto* noise_cmd = app.add_subcommand("noise", "Simulate annotation noise on a box file");
  noise_cmd->add_option("--in", noise_in)->required();
  noise_cmd->add_option("--mode", noise_mode)
      ->check(CLI::IsMember({"shrink", "enlarge", "shift", "drop"}))
      ->capture_default_str();
  noise_cmd->add_option("--magnitude", noise.magnitude)->capture_default_str();
  noise_cmd->add_option("--seed", noise.seed)->capture_default_str();
  noise_cmd->add_option("--p1", noise.drop_below_1cm3, "Drop rate below 1 cm^3")->capture_default_str();
  noise_cmd->add_option("--p2", noise.drop_below_10cm3, "Drop rate in [1, 10) cm^3")->capture_default_str();
  noise_cmd->add_option("--out", noise_out);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  }

  const Format fmt = format == "structured" ? Format::Structured : Format::Table;
  try {
    if (iou_cmd->parsed()) {
      cmd_iou(out, fmt, iou_a, iou_b);
    } else if (loss_cmd->parsed()) {
      cmd_loss(out, fmt, loss_kind, loss_pred, loss_gt, beta);
    } else if (gc_cmd->parsed()) {
      cmd_grad_check(out, fmt, gc_pairs, gc_seed, gc_step, beta);
    } else if (gen_cmd->parsed()) {
      cmd_anchors_gen(out, fmt, gen_config, gen_shape, gen_spacing, gen_out);
    } else if (fit_cmd->parsed()) {
      cmd_anchors_fit(out, fmt, fit_boxes, fit_k, fit_iters, fit_seed, fit_scaling, fit_out);
    } else if (match_cmd->parsed()) {
      cmd_match(out, fmt, match_config, match_shape, match_gt, top_k);
    } else if (nms_cmd->parsed()) {
      if (!(nms_iou > 0.0 && nms_iou < 1.0)) {
        err << "usage error: --iou must lie strictly between 0 and 1\n";
        return kExitUsageError;
      }
      cmd_nms(out, fmt, nms_in, nms_iou, nms_max, nms_out);
    } else if (eval_cmd->parsed()) {
      cmd_eval(out, fmt, eval_pred, eval_gt, eval_cfg, eval_out);
    } else if (froc_cmd->parsed()) {
      cmd_froc(out, fmt, froc_pred, froc_gt, froc_iou, froc_axis, froc_out);
    } else if (m2b_cmd->parsed()) {
      cmd_mask2boxes(out, fmt, m2b_volume, m2b_conn, m2b_scan, m2b_out);
    } else if (noise_cmd->parsed()) {
      noise.mode = parse_noise_mode(noise_mode);
      cmd_noise(out, fmt, noise_in, noise, noise_out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace voxdet
