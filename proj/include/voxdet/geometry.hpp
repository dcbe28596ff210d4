// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file geometry.hpp
 * @brief Axis-aligned 3D boxes in continuous voxel coordinates.
 *
 * Conventions used throughout voxdet:
 *
 *  - Axis order is (z, y, x). z is the slice axis.
 *  - A box covers the half-open interval [min, max) on every axis. Voxel
 *    (k, j, i) occupies [k, k+1) x [j, j+1) x [i, i+1), so a box with integer
 *    corners contains exactly the voxels whose index lies in [min, max).
 *    Corners sit on voxel boundaries, not on voxel centers.
 *  - The aspect-ratio term names extents (w, h, d) with w = x-extent,
 *    h = y-extent and d = z-extent.
 *
 * Degenerate boxes (any extent <= 0) cannot be constructed.
 */

#ifndef VOXDET_GEOMETRY_HPP
#define VOXDET_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <iosfwd>

namespace voxdet {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<std::int64_t, 3>;

inline constexpr int kZ = 0;
inline constexpr int kY = 1;
inline constexpr int kX = 2;

class Box3 {
 public:
  /// Throws InvalidBox unless min[i] < max[i] on every axis and all
  /// coordinates are finite.
  Box3(const Vec3& min, const Vec3& max);

  static Box3 from_center_size(const Vec3& center, const Vec3& size);

  const Vec3& min() const noexcept { return min_; }
  const Vec3& max() const noexcept { return max_; }
  double extent(int axis) const noexcept { return max_[axis] - min_[axis]; }
  Vec3 extents() const noexcept;
  Vec3 center() const noexcept;

  friend bool operator==(const Box3&, const Box3&) = default;

 private:
  Vec3 min_;
  Vec3 max_;
};

std::ostream& operator<<(std::ostream& os, const Box3& b);

/// Grid shape and physical voxel spacing, both in (z, y, x) order.
struct VolumeMeta {
  Index3 shape{1, 1, 1};
  Vec3 spacing_mm{1.0, 1.0, 1.0};

  /// Throws VolumeTooSmall for an empty axis, ConfigError for non-positive
  /// or non-finite spacing.
  void validate() const;
  std::int64_t voxel_count() const noexcept { return shape[0] * shape[1] * shape[2]; }
  double voxel_volume_mm3() const noexcept {
    return spacing_mm[0] * spacing_mm[1] * spacing_mm[2];
  }

  friend bool operator==(const VolumeMeta&, const VolumeMeta&) = default;
};

double volume(const Box3& b) noexcept;

/// Physical volume in cm^3 given the voxel spacing in mm.
double physical_volume_cm3(const Box3& b, const Vec3& spacing_mm) noexcept;

double intersection_volume(const Box3& a, const Box3& b) noexcept;

/// Intersection over union. Exact for integer-cornered boxes: every term is
/// an integer below 2^53, so the single division is correctly rounded.
double iou(const Box3& a, const Box3& b) noexcept;

Box3 enclosing_box(const Box3& a, const Box3& b) noexcept;

/// True if `inner` lies within `outer` (closed comparison on every face).
bool contains(const Box3& outer, const Box3& inner) noexcept;

/// True if the point lies strictly inside the box on every axis.
bool strictly_contains(const Box3& b, const Vec3& p) noexcept;

double center_distance_sq(const Box3& a, const Box3& b) noexcept;

/// Squared diagonal of the smallest box enclosing both inputs.
double enclosing_diagonal_sq(const Box3& a, const Box3& b) noexcept;

/// Aspect-ratio consistency term v in [0, 3):
///   4/pi^2 * sum over (w/h, h/d, d/w) of (atan(gt ratio) - atan(pred ratio))^2
/// Invariant under uniform scaling of either box.
double aspect_term(const Box3& pred, const Box3& gt) noexcept;

/// Same term evaluated directly from (d, h, w) = (z, y, x) extents.
double aspect_term(const Vec3& pred_size, const Vec3& gt_size) noexcept;

}  // namespace voxdet

#endif  // VOXDET_GEOMETRY_HPP
