// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

/**
 * @file losses.hpp
 * @brief Box-regression losses with analytic gradients.
 *
 * Every loss is a function of a predicted box in center-size form
 * (cz, cy, cx, d, h, w) against a fixed ground truth. Gradients are taken
 * with respect to those six prediction parameters, in that order.
 *
 * VC-IoU extends DIoU with an aspect-ratio penalty on all three
 * orthogonal planes:
 *
 *   L_vciou = L_diou + alpha * v,   alpha = v / (1 - IoU + v)
 *
 * alpha is a detached weight: it is evaluated at the current prediction and
 * treated as a constant when differentiating. The finite-difference checker
 * freezes alpha the same way.
 */

#ifndef VOXDET_LOSSES_HPP
#define VOXDET_LOSSES_HPP

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

using Grad6 = std::array<double, 6>;

/// Center-size box parameterization. size is (d, h, w) = (z, y, x) extents.
struct BoxParam {
  Vec3 center{};
  Vec3 size{1.0, 1.0, 1.0};

  /// Throws InvalidBox on a non-positive or non-finite size.
  void validate() const;
  Box3 to_box() const;
  static BoxParam from_box(const Box3& b);
  Grad6 as_array() const noexcept;
  static BoxParam from_array(const Grad6& a) noexcept;

  friend bool operator==(const BoxParam&, const BoxParam&) = default;
};

struct LossValue {
  double value = 0.0;
  std::optional<Grad6> gradient;
};

/// Intermediate quantities of the VC-IoU loss, for reporting and tests.
struct VcIouTerms {
  double iou = 0.0;
  double distance_ratio = 0.0;  ///< rho^2 / c^2
  double v = 0.0;
  double alpha = 0.0;
  double diou = 0.0;
  double penalty = 0.0;  ///< alpha * v
  double value = 0.0;
};

enum class LossKind { SmoothL1, DIoU, VCIoU };

std::string_view to_string(LossKind k) noexcept;
/// Accepts "smooth_l1", "diou", "vciou". Throws ConfigError otherwise.
LossKind parse_loss_kind(std::string_view name);

inline constexpr double kDefaultSmoothL1Beta = 1.0;

/// Elementwise Huber loss on the six parameters, summed.
LossValue smooth_l1(const BoxParam& pred, const BoxParam& gt, double beta = kDefaultSmoothL1Beta,
                    bool with_gradient = true);

LossValue diou_loss(const BoxParam& pred, const BoxParam& gt, bool with_gradient = true);

LossValue vciou_loss(const BoxParam& pred, const BoxParam& gt, bool with_gradient = true);

VcIouTerms vciou_terms(const BoxParam& pred, const BoxParam& gt);

/// alpha = v / (1 - IoU + v), with alpha = 0 whenever v = 0.
double tradeoff_alpha(double v, double iou) noexcept;

LossValue evaluate_loss(LossKind kind, const BoxParam& pred, const BoxParam& gt,
                        double beta = kDefaultSmoothL1Beta, bool with_gradient = true);

// -- batches ----------------------------------------------------------------

enum class Reduction { Mean, Sum, None };

Reduction parse_reduction(std::string_view name);

struct BatchLoss {
  /// One value when reduced, N values for Reduction::None.
  std::vector<double> values;
  /// N x 6 row-major gradients of the reduced quantity (scaled by 1/N for Mean).
  std::vector<double> gradients;
};

/// Evaluates `kind` over N (pred, gt) rows of (cz, cy, cx, d, h, w). Both
/// spans hold N * 6 doubles. Throws InvalidBox naming the row on a
/// non-positive size, ConfigError on length mismatch.
BatchLoss batch_loss(LossKind kind, std::span<const double> pred, std::span<const double> gt,
                     Reduction reduction = Reduction::Mean, double beta = kDefaultSmoothL1Beta);

// -- gradient verification --------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  int worst_param = -1;
  Grad6 analytic{};
  Grad6 numeric{};
};

/// Compares the analytic gradient with central finite differences on all six
/// parameters. The step for parameter i is `step * max(1, |x_i|)`.
///
/// Relative error per component is |a - n| / max(|a|, |n|, 1e-3 * max_j |a_j|, 1e-12),
/// so components far below the gradient's overall scale are judged against that
/// scale instead of their own magnitude.
///
/// For the IoU-family losses, throws NonDifferentiablePoint when a pred face
/// lies within the finite-difference stencil of a gt face (coinciding faces,
/// touching boxes, nested corners), since the loss has a kink there.
GradCheckResult gradient_check(LossKind kind, const BoxParam& pred, const BoxParam& gt, double step,
                               double beta = kDefaultSmoothL1Beta);

}  // namespace voxdet

#endif  // VOXDET_LOSSES_HPP
