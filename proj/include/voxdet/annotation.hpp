// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file annotation.hpp
 * @brief Label map to box conversion and simulated annotation noise.
 */

#ifndef VOXDET_ANNOTATION_HPP
#define VOXDET_ANNOTATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

/// Dense voxel grid in (z, y, x) row-major order; 0 is background.
struct LabelMap {
  VolumeMeta meta;
  std::vector<std::uint16_t> voxels;

  LabelMap() = default;
  /// All-background map. Validates `meta`.
  explicit LabelMap(const VolumeMeta& meta);

  std::size_t index(std::int64_t z, std::int64_t y, std::int64_t x) const noexcept {
    return static_cast<std::size_t>((z * meta.shape[1] + y) * meta.shape[2] + x);
  }
  std::uint16_t at(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return voxels.at(index(z, y, x));
  }
  void set(std::int64_t z, std::int64_t y, std::int64_t x, std::uint16_t v) {
    voxels.at(index(z, y, x)) = v;
  }
  /// Throws HeaderMismatch if the grid size disagrees with meta.shape.
  void validate() const;
};

enum class Connectivity { Six = 6, TwentySix = 26 };

/// Accepts 6 or 26; throws ConfigError otherwise.
Connectivity parse_connectivity(int n);

struct ComponentBox {
  Box3 box;
  std::size_t voxel_count = 0;
  std::uint16_t label = 0;
};

/// One tight box per connected component. Voxels connect when they are
/// neighbours under `connectivity` and carry the same non-zero value, so a
/// binary mask yields plain foreground components. Components are listed
/// in raster order of their first voxel.
std::vector<ComponentBox> mask_to_boxes(const LabelMap& map,
                                        Connectivity connectivity = Connectivity::TwentySix);

// -- annotation noise -----------------------------------------------------------

enum class NoiseMode { Shrink, Enlarge, Shift, Drop };

std::string_view to_string(NoiseMode m) noexcept;
NoiseMode parse_noise_mode(std::string_view name);

struct NoiseSpec {
  NoiseMode mode = NoiseMode::Shrink;
  double magnitude = 0.1;        ///< in [0, 1)
  double drop_below_1cm3 = 0.2;  ///< removal probability for boxes < 1 cm^3
  double drop_below_10cm3 = 0.1; ///< removal probability for 1 <= vol < 10 cm^3
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Seed for scan `scan_index` of a multi-scan run.
constexpr std::uint64_t scan_seed(std::uint64_t seed, std::uint64_t scan_index) noexcept {
  return seed + scan_index;
}

/// Shift offsets are rounded to this grid so that shifted boxes keep their
/// extents bit-for-bit whenever the input corners lie on it.
inline constexpr double kShiftQuantum = 0x1.0p-20;

struct NoiseResult {
  std::vector<Box3> boxes;
  std::vector<std::size_t> kept;    ///< source index of each output box
  std::optional<double> mean_iou;   ///< over kept pairs; empty if none kept
  std::size_t clamped = 0;          ///< shrinks stopped at the minimum extent
};

/// Applies one noise mode with a generator seeded from spec.seed:
///  - Shrink / Enlarge: each axis extent is scaled by 1 -/+ magnitude * u,
///    u ~ U[0, 1) drawn per axis, center kept. Shrinking never goes below
///    min(1 voxel, original extent); hitting that floor is counted.
///  - Shift: the center moves by (2u - 1) * magnitude * extent per axis.
///  - Drop: boxes under 1 cm^3 are removed with probability drop_below_1cm3,
///    boxes in [1, 10) cm^3 with drop_below_10cm3. Needs `spacing_mm`.
NoiseResult corrupt_boxes(const std::vector<Box3>& boxes, const NoiseSpec& spec,
                          const Vec3& spacing_mm = {1.0, 1.0, 1.0});

}  // namespace voxdet

#endif  // VOXDET_ANNOTATION_HPP
