// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file io.hpp
 * @brief File formats: volumes, box lists, anchor configs, reports.
 *
 * Volume files are a JSON header plus a raw payload file next to it:
 *
 *     {"shape": [z, y, x], "spacing_mm": [z, y, x], "dtype": "u8" | "u16",
 *      "order": "row-major z-major", "payload": "name.raw"}
 *
 * The payload holds prod(shape) little-endian samples with x varying
 * fastest. "payload" is resolved relative to the header's directory.
 *
 * Box files are JSON, either one scan object or an array of them:
 *
 *     {"scan_id": "...", "spacing_mm": [z, y, x],
 *      "boxes": [{"box": [z1, y1, x1, z2, y2, x2], "label": 0, "score": 0.9}]}
 *
 * Coordinates are voxel units. "score" is present for detections and absent
 * for ground truth. Doubles are written in shortest round-trip form.
 */

#ifndef VOXDET_IO_HPP
#define VOXDET_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voxdet/anchors.hpp"
#include "voxdet/annotation.hpp"
#include "voxdet/geometry.hpp"
#include "voxdet/metrics.hpp"

namespace voxdet {

enum class Dtype { U8, U16 };

std::size_t dtype_size(Dtype d) noexcept;

/// Reads a volume header and its payload. Throws HeaderMismatch,
/// TruncatedPayload or UnsupportedDtype with the file and byte offset.
LabelMap read_volume(const std::filesystem::path& header_path);

/// Writes `header_path` and its payload (header stem + ".raw" unless
/// `payload_name` is given). Throws ConfigError if a value does not fit the dtype.
void write_volume(const std::filesystem::path& header_path, const LabelMap& map,
                  Dtype dtype = Dtype::U8, const std::string& payload_name = {});

struct BoxRecord {
  Box3 box;
  int label = 0;
  std::optional<double> score;
};

struct ScanBoxes {
  std::string scan_id;
  Vec3 spacing_mm{1.0, 1.0, 1.0};
  std::vector<BoxRecord> boxes;
};

/// Throws MalformedBox, MissingField or HeaderMismatch (unparseable JSON).
std::vector<ScanBoxes> read_boxes(const std::filesystem::path& path);
std::vector<ScanBoxes> parse_boxes(const std::string& text, const std::string& source);

void write_boxes(const std::filesystem::path& path, const std::vector<ScanBoxes>& scans);
std::string format_boxes(const std::vector<ScanBoxes>& scans);

std::vector<ScanGroundTruth> to_ground_truth(const std::vector<ScanBoxes>& scans);
/// Throws MissingField if a box has no score.
std::vector<ScanDetections> to_detections(const std::vector<ScanBoxes>& scans);

AnchorConfig read_anchor_config(const std::filesystem::path& path);
void write_anchor_config(const std::filesystem::path& path, const AnchorConfig& config);
std::string format_anchor_config(const AnchorConfig& config);

std::string format_eval_report_json(const EvalReport& report);
std::string format_eval_report_table(const EvalReport& report);
/// Two whitespace-separated columns: FP per scan, sensitivity.
std::string format_froc_columns(const FrocResult& froc);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace voxdet

#endif  // VOXDET_IO_HPP
