// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file anchors.hpp
 * @brief Anisotropic pyramid stride schedule and anchor grids.
 *
 * The default schedule halves the in-slice (y, x) resolution at every level
 * transition P0 -> P6, and halves the slice (z) resolution only at P3 -> P4
 * and P4 -> P5. Detection runs on P2..P6. With 512 x 512 x 32 input this gives
 * 128 x 128 x 32 at P2 and 8 x 8 x 8 at P6.
 *
 * Anchor shapes are configured for the reference level (P2) in input voxels
 * and, by default, rescaled to every other level by the ratio of cumulative
 * strides per axis.
 */

#ifndef VOXDET_ANCHORS_HPP
#define VOXDET_ANCHORS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

inline constexpr int kNumLevels = 7;  // P0..P6
inline constexpr int kReferenceLevel = 2;

struct LevelSpec {
  int level = 0;                ///< pyramid index, 0 for P0
  Index3 cumulative_stride{1, 1, 1};
  Index3 feature_shape{1, 1, 1};  ///< ceil(volume shape / cumulative stride)
  bool detection = false;
  std::vector<Vec3> anchor_shapes;  ///< (d, h, w) in input voxels

  std::string name() const { return "P" + std::to_string(level); }
};

/// Per-transition downscaling factors, entry t maps P{t} to P{t+1}.
struct StrideSchedule {
  std::vector<Index3> transitions;
  std::vector<int> detection_levels;

  static StrideSchedule standard();
};

enum class FamilyScaling {
  Rescale,  ///< multiply the reference shape by stride(level) / stride(P2)
  Same,     ///< identical shapes on every level
};

std::string_view to_string(FamilyScaling s) noexcept;
FamilyScaling parse_family_scaling(std::string_view name);

/// Contents of an anchor family config file.
struct AnchorConfig {
  std::vector<Vec3> family;  ///< (d, h, w) at the reference level, input voxels
  FamilyScaling scaling = FamilyScaling::Rescale;
  StrideSchedule schedule = StrideSchedule::standard();
};

/// Builds every level P0..P(n) of `schedule` over `volume`. Throws
/// VolumeTooSmall if a feature map would be empty, ConfigError on a bad
/// factor or detection level.
std::vector<LevelSpec> build_schedule(const VolumeMeta& volume, const StrideSchedule& schedule);

std::vector<LevelSpec> default_stride_schedule(const VolumeMeta& volume);

/// Fills anchor_shapes of every detection level from a reference family.
void apply_family(std::vector<LevelSpec>& levels, const std::vector<Vec3>& family,
                  FamilyScaling scaling);

std::vector<LevelSpec> schedule_from_config(const AnchorConfig& config, const VolumeMeta& volume);

struct Anchor {
  Box3 box;
  int level = 0;
  Index3 cell{};
  int family_index = 0;
};

/// Immutable anchor lattice over the detection levels. Anchors are computed
/// on access, so large grids cost only the level table.
///
/// Ordering is level-major, then cell z, y, x, then family index. Each
/// anchor is centered on its cell; a border cell that overhangs the volume
/// is centered on its in-volume part, so every center lies inside the
/// volume. Anchors themselves may extend past the borders.
class AnchorGrid {
 public:
  AnchorGrid() = default;
  AnchorGrid(std::vector<LevelSpec> levels, const VolumeMeta& volume);

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  bool empty() const noexcept { return size() == 0; }

  const std::vector<LevelSpec>& levels() const noexcept { return levels_; }
  const VolumeMeta& volume() const noexcept { return volume_; }

  std::size_t level_begin(std::size_t l) const { return offsets_.at(l); }
  std::size_t level_end(std::size_t l) const { return offsets_.at(l + 1); }
  /// Position of the level containing anchor `idx` within levels().
  std::size_t level_slot(std::size_t idx) const;

  Anchor at(std::size_t idx) const;
  Vec3 center(std::size_t idx) const;
  Box3 box(std::size_t idx) const { return at(idx).box; }

 private:
  std::vector<LevelSpec> levels_;
  VolumeMeta volume_;
  std::vector<std::size_t> offsets_;
};

/// k x prod(ceil(shape / stride)) for one level.
std::size_t expected_anchor_count(const LevelSpec& level, const VolumeMeta& volume);

/// Throws ConfigMissing if a detection level has no anchor shapes.
AnchorGrid generate_anchors(const std::vector<LevelSpec>& schedule, const VolumeMeta& volume);

// -- family fitting -----------------------------------------------------------

/// IoU of two shapes placed on a common center.
double shape_iou(const Vec3& a, const Vec3& b) noexcept;

struct AnchorFit {
  std::vector<Vec3> shapes;        ///< sorted by ascending volume
  double mean_best_iou = 0.0;
  std::vector<double> history;     ///< objective after init and each accepted update
  int iterations = 0;
  int reseeds = 0;                 ///< clusters that emptied and were re-seeded
};

/// IoU-distance k-means over box shapes. Initialization is k-means++ with
/// distance 1 - IoU, driven by `seed`. A cluster that empties is re-seeded
/// with the shape whose best IoU is currently lowest. An update that would
/// lower the mean best IoU is rejected and iteration stops, so `history`
/// never decreases.
AnchorFit fit_anchors(const std::vector<Box3>& boxes, int k, int iters, std::uint64_t seed = 0);

double mean_best_iou(const std::vector<Box3>& boxes, const std::vector<Vec3>& shapes);

}  // namespace voxdet

#endif  // VOXDET_ANCHORS_HPP
