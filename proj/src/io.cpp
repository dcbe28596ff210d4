// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "voxdet/error.hpp"

namespace voxdet {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVolumeOrder = "row-major z-major";

// Byte offset of `"key"` in a JSON text, or the text length if absent.
std::size_t key_offset(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? text.size() : pos;
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": invalid JSON at byte offset " << e.byte << ": " << e.what();
    throw HeaderMismatch(msg.str());
  }
}

template <class Err>
[[noreturn]] void fail_at(const std::string& source, const std::string& where,
                          const std::string& what) {
  throw Err(source + ": " + where + ": " + what);
}

Vec3 read_vec3(const json& j, const std::string& source, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    fail_at<HeaderMismatch>(source, where, "expected an array of 3 numbers");
  }
  Vec3 v{};
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      fail_at<HeaderMismatch>(source, where, "expected an array of 3 numbers");
    }
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(path.string() + ": cannot open file");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(path.string() + ": cannot open file for writing");
  }
  out << text;
  if (!out) {
    throw Error(path.string() + ": write failed");
  }
}

std::size_t dtype_size(Dtype d) noexcept {
  return d == Dtype::U8 ? 1 : 2;
}

// -- volumes --------------------------------------------------------------------

LabelMap read_volume(const fs::path& header_path) {
  const std::string src = header_path.string();
  const std::string text = read_text_file(header_path);
  const json h = parse_json(text, src);
  if (!h.is_object()) {
    throw HeaderMismatch(src + ": byte offset 0: header must be a JSON object");
  }

  auto field = [&](const std::string& key) -> const json& {
    if (!h.contains(key)) {
      std::ostringstream msg;
      msg << src << ": byte offset " << text.size() << ": missing header field '" << key << "'";
      throw HeaderMismatch(msg.str());
    }
    return h.at(key);
  };
  auto bad = [&](const std::string& key, const std::string& what) -> HeaderMismatch {
    std::ostringstream msg;
    msg << src << ": byte offset " << key_offset(text, key) << ": field '" << key << "' " << what;
    return HeaderMismatch(msg.str());
  };

  const json& shape = field("shape");
  if (!shape.is_array() || shape.size() != 3) throw bad("shape", "must be [z, y, x]");
  VolumeMeta meta;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!shape[i].is_number_integer() || shape[i].get<std::int64_t>() < 1) {
      throw bad("shape", "must hold positive integers");
    }
    meta.shape[i] = shape[i].get<std::int64_t>();
  }
  const json& spacing = field("spacing_mm");
  if (!spacing.is_array() || spacing.size() != 3) throw bad("spacing_mm", "must be [z, y, x]");
  for (std::size_t i = 0; i < 3; ++i) {
    if (!spacing[i].is_number() || !(spacing[i].get<double>() > 0.0)) {
      throw bad("spacing_mm", "must hold positive numbers");
    }
    meta.spacing_mm[i] = spacing[i].get<double>();
  }

  const json& dtype_j = field("dtype");
  const std::string dname = dtype_j.is_string() ? dtype_j.get<std::string>() : dtype_j.dump();
  Dtype dtype;
  if (dname == "u8") {
    dtype = Dtype::U8;
  } else if (dname == "u16") {
    dtype = Dtype::U16;
  } else {
    std::ostringstream msg;
    msg << src << ": byte offset " << key_offset(text, "dtype") << ": unsupported dtype '"
        << dname << "' (expected u8 or u16)";
    throw UnsupportedDtype(msg.str());
  }
  if (h.contains("order") && h["order"] != kVolumeOrder) {
    throw bad("order", std::string("must be \"") + kVolumeOrder + "\"");
  }

  fs::path payload = header_path;
  payload.replace_extension(".raw");
  if (h.contains("payload")) {
    if (!h["payload"].is_string()) throw bad("payload", "must be a file name");
    payload = header_path.parent_path() / h["payload"].get<std::string>();
  }
  const std::string bytes = read_text_file(payload);

  const std::size_t count = static_cast<std::size_t>(meta.voxel_count());
  const std::size_t expected = count * dtype_size(dtype);
  if (bytes.size() < expected) {
    std::ostringstream msg;
    msg << payload.string() << ": payload ends at byte offset " << bytes.size() << ", expected "
        << expected << " bytes for shape " << meta.shape[0] << "x" << meta.shape[1] << "x"
        << meta.shape[2] << " " << dname;
    throw TruncatedPayload(msg.str());
  }
  if (bytes.size() > expected) {
    std::ostringstream msg;
    msg << payload.string() << ": " << bytes.size() - expected
        << " unexpected trailing bytes starting at byte offset " << expected;
    throw HeaderMismatch(msg.str());
  }

  LabelMap map(meta);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (dtype == Dtype::U8) {
    for (std::size_t i = 0; i < count; ++i) map.voxels[i] = p[i];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      map.voxels[i] = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
    }
  }
  return map;
}

void write_volume(const fs::path& header_path, const LabelMap& map, Dtype dtype,
                  const std::string& payload_name) {
  map.validate();
  fs::path payload = header_path;
  payload.replace_extension(".raw");
  const std::string pname = payload_name.empty() ? payload.filename().string() : payload_name;
  payload = header_path.parent_path() / pname;

  std::string bytes;
  bytes.reserve(map.voxels.size() * dtype_size(dtype));
  for (std::size_t i = 0; i < map.voxels.size(); ++i) {
    const std::uint16_t v = map.voxels[i];
    if (dtype == Dtype::U8) {
      if (v > 255) {
        throw ConfigError("write_volume: voxel " + std::to_string(i) + " value " +
                          std::to_string(v) + " does not fit u8");
      }
      bytes.push_back(static_cast<char>(v));
    } else {
      bytes.push_back(static_cast<char>(v & 0xff));
      bytes.push_back(static_cast<char>(v >> 8));
    }
  }

  ojson h;
  h["shape"] = map.meta.shape;
  h["spacing_mm"] = map.meta.spacing_mm;
  h["dtype"] = dtype == Dtype::U8 ? "u8" : "u16";
  h["order"] = kVolumeOrder;
  h["payload"] = pname;
  write_text_file(header_path, h.dump(2) + "\n");
  write_text_file(payload, bytes);
}

// -- boxes ------------------------------------------------------------------------

std::vector<ScanBoxes> parse_boxes(const std::string& text, const std::string& source) {
  const json doc = parse_json(text, source);
  std::vector<json> items;
  const bool listed = doc.is_array();
  if (listed) {
    items.assign(doc.begin(), doc.end());
  } else if (doc.is_object()) {
    items.push_back(doc);
  } else {
    throw HeaderMismatch(source + ": byte offset 0: expected a scan object or an array of them");
  }

  std::vector<ScanBoxes> out;
  for (std::size_t s = 0; s < items.size(); ++s) {
    const json& scan = items[s];
    const std::string at = listed ? "$[" + std::to_string(s) + "]" : std::string("$");
    if (!scan.is_object()) fail_at<HeaderMismatch>(source, at, "expected a scan object");
    if (!scan.contains("scan_id")) fail_at<MissingField>(source, at, "missing field 'scan_id'");
    if (!scan.contains("boxes")) fail_at<MissingField>(source, at, "missing field 'boxes'");

    ScanBoxes sb;
    if (!scan["scan_id"].is_string()) fail_at<HeaderMismatch>(source, at + ".scan_id", "expected a string");
    sb.scan_id = scan["scan_id"].get<std::string>();
    if (scan.contains("spacing_mm")) {
      sb.spacing_mm = read_vec3(scan["spacing_mm"], source, at + ".spacing_mm");
      for (double v : sb.spacing_mm) {
        if (!(v > 0.0)) fail_at<HeaderMismatch>(source, at + ".spacing_mm", "spacing must be positive");
      }
    }
    const json& boxes = scan["boxes"];
    if (!boxes.is_array()) fail_at<HeaderMismatch>(source, at + ".boxes", "expected an array");

    for (std::size_t b = 0; b < boxes.size(); ++b) {
      const json& item = boxes[b];
      const std::string bat = at + ".boxes[" + std::to_string(b) + "]";
      if (!item.is_object()) fail_at<HeaderMismatch>(source, bat, "expected an object");
      if (!item.contains("box")) fail_at<MissingField>(source, bat, "missing field 'box'");
      const json& c = item["box"];
      if (!c.is_array() || c.size() != 6) {
        fail_at<MalformedBox>(source, bat + ".box", "expected [z1, y1, x1, z2, y2, x2]");
      }
      Vec3 lo{}, hi{};
      for (std::size_t k = 0; k < 6; ++k) {
        if (!c[k].is_number()) fail_at<MalformedBox>(source, bat + ".box", "coordinates must be numbers");
        (k < 3 ? lo[k] : hi[k - 3]) = c[k].get<double>();
      }
      for (int a = 0; a < 3; ++a) {
        if (!(lo[a] < hi[a])) {
          static const char* axis[] = {"z", "y", "x"};
          std::ostringstream msg;
          msg << "min >= max on axis " << axis[a] << " (" << std::setprecision(17) << lo[a]
              << " >= " << hi[a] << ")";
          fail_at<MalformedBox>(source, bat + ".box", msg.str());
        }
      }
      BoxRecord rec{Box3(lo, hi), 0, std::nullopt};
      if (item.contains("label")) {
        if (!item["label"].is_number_integer()) {
          fail_at<HeaderMismatch>(source, bat + ".label", "expected an integer");
        }
        rec.label = item["label"].get<int>();
      }
      if (item.contains("score") && !item["score"].is_null()) {
        if (!item["score"].is_number()) fail_at<HeaderMismatch>(source, bat + ".score", "expected a number");
        rec.score = item["score"].get<double>();
      }
      sb.boxes.push_back(rec);
    }
    out.push_back(std::move(sb));
  }
  return out;
}

std::vector<ScanBoxes> read_boxes(const fs::path& path) {
  return parse_boxes(read_text_file(path), path.string());
}

namespace {

ojson scan_to_json(const ScanBoxes& s) {
  ojson j;
  j["scan_id"] = s.scan_id;
  j["spacing_mm"] = s.spacing_mm;
  ojson arr = ojson::array();
  for (const BoxRecord& r : s.boxes) {
    ojson b;
    b["box"] = {r.box.min()[0], r.box.min()[1], r.box.min()[2],
                r.box.max()[0], r.box.max()[1], r.box.max()[2]};
    b["label"] = r.label;
    if (r.score) b["score"] = *r.score;
    arr.push_back(std::move(b));
  }
  j["boxes"] = std::move(arr);
  return j;
}

}  // namespace

std::string format_boxes(const std::vector<ScanBoxes>& scans) {
  if (scans.size() == 1) {
    return scan_to_json(scans.front()).dump(2) + "\n";
  }
  ojson arr = ojson::array();
  for (const ScanBoxes& s : scans) arr.push_back(scan_to_json(s));
  return arr.dump(2) + "\n";
}

void write_boxes(const fs::path& path, const std::vector<ScanBoxes>& scans) {
  write_text_file(path, format_boxes(scans));
}

std::vector<ScanGroundTruth> to_ground_truth(const std::vector<ScanBoxes>& scans) {
  std::vector<ScanGroundTruth> out;
  for (const ScanBoxes& s : scans) {
    ScanGroundTruth g{s.scan_id, s.spacing_mm, {}};
    for (const BoxRecord& r : s.boxes) g.gts.push_back(GroundTruth{r.box, r.label});
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<ScanDetections> to_detections(const std::vector<ScanBoxes>& scans) {
  std::vector<ScanDetections> out;
  for (const ScanBoxes& s : scans) {
    ScanDetections d{s.scan_id, {}};
    for (std::size_t i = 0; i < s.boxes.size(); ++i) {
      const BoxRecord& r = s.boxes[i];
      if (!r.score) {
        throw MissingField("scan '" + s.scan_id + "': boxes[" + std::to_string(i) +
                           "]: missing field 'score' on a detection");
      }
      d.dets.push_back(Detection{r.box, *r.score, r.label});
    }
    out.push_back(std::move(d));
  }
  return out;
}

// -- anchor config ------------------------------------------------------------------

AnchorConfig read_anchor_config(const fs::path& path) {
  const std::string src = path.string();
  const json j = parse_json(read_text_file(path), src);
  if (!j.is_object()) throw ConfigError(src + ": expected a JSON object");
  AnchorConfig cfg;
  if (!j.contains("family")) throw ConfigMissing(src + ": missing field 'family'");
  const json& fam = j["family"];
  if (!fam.is_array() || fam.empty()) throw ConfigMissing(src + ": 'family' lists no anchor shapes");
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const std::string at = "family[" + std::to_string(i) + "]";
    Vec3 v{};
    try {
      v = read_vec3(fam[i], src, at);
    } catch (const HeaderMismatch& e) {
      throw ConfigError(e.what());
    }
    for (double e : v) {
      if (!(e > 0.0)) throw ConfigError(src + ": " + at + ": anchor extents must be positive");
    }
    cfg.family.push_back(v);
  }
  if (j.contains("scaling")) cfg.scaling = parse_family_scaling(j["scaling"].get<std::string>());
  if (j.contains("transitions")) {
    cfg.schedule.transitions.clear();
    for (const json& t : j["transitions"]) {
      if (!t.is_array() || t.size() != 3) {
        throw ConfigError(src + ": transitions entries must be [z, y, x] factors");
      }
      cfg.schedule.transitions.push_back(
          {t[0].get<std::int64_t>(), t[1].get<std::int64_t>(), t[2].get<std::int64_t>()});
    }
  }
  if (j.contains("detection_levels")) {
    cfg.schedule.detection_levels = j["detection_levels"].get<std::vector<int>>();
  }
  return cfg;
}

std::string format_anchor_config(const AnchorConfig& config) {
  ojson j;
  j["family"] = config.family;
  j["scaling"] = std::string(to_string(config.scaling));
  j["transitions"] = config.schedule.transitions;
  j["detection_levels"] = config.schedule.detection_levels;
  return j.dump(2) + "\n";
}

void write_anchor_config(const fs::path& path, const AnchorConfig& config) {
  write_text_file(path, format_anchor_config(config));
}

// -- reports ------------------------------------------------------------------------

namespace {

ojson opt(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson threshold_json(const ThresholdReport& t) {
  ojson j;
  j["iou_threshold"] = t.iou_threshold;
  j["ap"] = opt(t.ap);
  j["ar"] = opt(t.ar);
  j["n_gt"] = t.n_gt;
  j["tp"] = t.tp;
  j["fp"] = t.fp;
  j["fn"] = t.fn;
  j["ignored"] = t.ignored;
  return j;
}

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << *v;
  return os.str();
}

}  // namespace

std::string format_eval_report_json(const EvalReport& report) {
  ojson j;
  j["n_scans"] = report.n_scans;
  ojson th = ojson::array();
  for (const auto& t : report.thresholds) th.push_back(threshold_json(t));
  j["thresholds"] = std::move(th);

  ojson fr;
  fr["iou_threshold"] = report.froc_iou;
  fr["fp_per_scan"] = report.froc.fp_axis;
  fr["sensitivity"] = report.froc.sensitivity;
  ojson curve = ojson::array();
  for (const FrocPoint& p : report.froc.curve) {
    ojson pt;
    pt["fp_per_scan"] = p.fp_per_scan;
    pt["sensitivity"] = p.sensitivity;
    pt["score_threshold"] = std::isinf(p.score_threshold) ? ojson(nullptr) : ojson(p.score_threshold);
    curve.push_back(std::move(pt));
  }
  fr["curve"] = std::move(curve);
  j["froc"] = std::move(fr);

  ojson groups = ojson::array();
  for (const auto& g : report.size_groups) {
    ojson gj;
    gj["name"] = g.name;
    gj["lo_cm3"] = g.lo_cm3;
    gj["hi_cm3"] = std::isinf(g.hi_cm3) ? ojson(nullptr) : ojson(g.hi_cm3);
    ojson gth = ojson::array();
    for (const auto& t : g.thresholds) gth.push_back(threshold_json(t));
    gj["thresholds"] = std::move(gth);
    groups.push_back(std::move(gj));
  }
  j["size_groups"] = std::move(groups);
  return j.dump(2) + "\n";
}

std::string format_eval_report_table(const EvalReport& report) {
  std::ostringstream os;
  os << "scans: " << report.n_scans << "\n\n";
  auto rows = [&os](const std::vector<ThresholdReport>& ts, const std::string& group) {
    for (const auto& t : ts) {
      os << std::left << std::setw(10) << group << std::setw(7) << std::setprecision(3)
         << t.iou_threshold << std::right << std::setw(8) << fmt_opt(t.ap) << std::setw(8)
         << fmt_opt(t.ar) << std::setw(6) << t.n_gt << std::setw(6) << t.tp << std::setw(6)
         << t.fp << std::setw(6) << t.fn << std::setw(8) << t.ignored << "\n";
    }
  };
  os << std::left << std::setw(10) << "group" << std::setw(7) << "iou" << std::right
     << std::setw(8) << "AP" << std::setw(8) << "AR" << std::setw(6) << "gt" << std::setw(6)
     << "tp" << std::setw(6) << "fp" << std::setw(6) << "fn" << std::setw(8) << "ignored"
     << "\n";
  rows(report.thresholds, "all");
  for (const auto& g : report.size_groups) rows(g.thresholds, g.name);

  os << "\nFROC at IoU " << report.froc_iou << "\n";
  os << std::setw(12) << "fp/scan" << std::setw(13) << "sensitivity" << "\n";
  for (std::size_t i = 0; i < report.froc.fp_axis.size(); ++i) {
    os << std::setw(12) << report.froc.fp_axis[i] << std::setw(13)
       << (i < report.froc.sensitivity.size() ? fmt_opt(report.froc.sensitivity[i]) : "n/a")
       << "\n";
  }
  return os.str();
}

std::string format_froc_columns(const FrocResult& froc) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# fp_per_scan sensitivity\n";
  for (std::size_t i = 0; i < froc.fp_axis.size() && i < froc.sensitivity.size(); ++i) {
    os << froc.fp_axis[i] << " " << froc.sensitivity[i] << "\n";
  }
  return os.str();
}

}  // namespace voxdet
