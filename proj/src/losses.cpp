// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "voxdet/error.hpp"

namespace voxdet {

void BoxParam::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(center[i]) || !std::isfinite(size[i]) || !(size[i] > 0.0)) {
      throw InvalidBox("BoxParam: sizes must be positive and all values finite");
    }
  }
}

Box3 BoxParam::to_box() const {
  validate();
  return Box3::from_center_size(center, size);
}

BoxParam BoxParam::from_box(const Box3& b) {
  return BoxParam{b.center(), b.extents()};
}

Grad6 BoxParam::as_array() const noexcept {
  return {center[0], center[1], center[2], size[0], size[1], size[2]};
}

BoxParam BoxParam::from_array(const Grad6& a) noexcept {
  return BoxParam{{a[0], a[1], a[2]}, {a[3], a[4], a[5]}};
}

std::string_view to_string(LossKind k) noexcept {
  switch (k) {
    case LossKind::SmoothL1:
      return "smooth_l1";
    case LossKind::DIoU:
      return "diou";
    case LossKind::VCIoU:
      return "vciou";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "smooth_l1") return LossKind::SmoothL1;
  if (name == "diou") return LossKind::DIoU;
  if (name == "vciou") return LossKind::VCIoU;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected smooth_l1, diou or vciou)");
}

Reduction parse_reduction(std::string_view name) {
  if (name == "mean") return Reduction::Mean;
  if (name == "sum") return Reduction::Sum;
  if (name == "none") return Reduction::None;
  throw ConfigError("unknown reduction '" + std::string(name) + "' (expected mean, sum or none)");
}

LossValue smooth_l1(const BoxParam& pred, const BoxParam& gt, double beta, bool with_gradient) {
  if (!(beta > 0.0)) {
    throw ConfigError("smooth_l1: beta must be positive");
  }
  const Grad6 p = pred.as_array();
  const Grad6 g = gt.as_array();
  LossValue out;
  Grad6 grad{};
  for (int i = 0; i < 6; ++i) {
    const double d = p[i] - g[i];
    const double ad = std::abs(d);
    if (ad < beta) {
      out.value += 0.5 * d * d / beta;
      grad[i] = d / beta;
    } else {
      out.value += ad - 0.5 * beta;
      grad[i] = d > 0.0 ? 1.0 : -1.0;
    }
  }
  if (with_gradient) {
    out.gradient = grad;
  }
  return out;
}

namespace {

double step(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

// Per-axis face positions of pred and gt.
struct Faces {
  Vec3 lo_p, hi_p, lo_g, hi_g;
};

Faces faces_of(const BoxParam& pred, const BoxParam& gt) {
  Faces f{};
  for (int i = 0; i < 3; ++i) {
    f.lo_p[i] = pred.center[i] - 0.5 * pred.size[i];
    f.hi_p[i] = pred.center[i] + 0.5 * pred.size[i];
    f.lo_g[i] = gt.center[i] - 0.5 * gt.size[i];
    f.hi_g[i] = gt.center[i] + 0.5 * gt.size[i];
  }
  return f;
}

struct DiouParts {
  double iou = 0.0;
  double ratio = 0.0;
  Grad6 grad{};  // gradient of 1 - IoU + rho^2/c^2
};

DiouParts diou_parts(const BoxParam& pred, const BoxParam& gt, bool with_gradient) {
  const Faces f = faces_of(pred, gt);

  Vec3 overlap{}, enclose{};
  for (int i = 0; i < 3; ++i) {
    overlap[i] = std::max(0.0, std::min(f.hi_p[i], f.hi_g[i]) - std::max(f.lo_p[i], f.lo_g[i]));
    enclose[i] = std::max(f.hi_p[i], f.hi_g[i]) - std::min(f.lo_p[i], f.lo_g[i]);
  }
  const double inter = overlap[0] * overlap[1] * overlap[2];
  const double vol_p = pred.size[0] * pred.size[1] * pred.size[2];
  const double vol_g = gt.size[0] * gt.size[1] * gt.size[2];
  const double uni = vol_p + vol_g - inter;

  double rho2 = 0.0, c2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double dc = pred.center[i] - gt.center[i];
    rho2 += dc * dc;
    c2 += enclose[i] * enclose[i];
  }

  DiouParts out;
  out.iou = inter == 0.0 ? 0.0 : inter / uni;
  out.ratio = rho2 / c2;
  if (!with_gradient) {
    return out;
  }

  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;

    // d(overlap_i) and d(enclose_i) w.r.t. center_i and size_i.
    // Coinciding faces take the mean of the one-sided derivatives, which
    // makes the gradient vanish at pred == gt.
    double do_dc = 0.0, do_ds = 0.0;
    if (overlap[i] > 0.0) {
      const double upper = step(f.hi_g[i] - f.hi_p[i]);
      const double lower = step(f.lo_p[i] - f.lo_g[i]);
      do_dc = upper - lower;
      do_ds = 0.5 * (upper + lower);
    }
    const double eu = step(f.hi_p[i] - f.hi_g[i]);
    const double el = step(f.lo_g[i] - f.lo_p[i]);
    const double de_dc = eu - el;
    const double de_ds = 0.5 * (eu + el);

    const double others = overlap[j] * overlap[k];
    const double dvol_ds = pred.size[j] * pred.size[k];

    // dIoU = (dI * (Vp + Vg) - I * dVp) / U^2
    const double u2 = uni * uni;
    const double diou_dc = others * do_dc * (vol_p + vol_g) / u2;
    const double diou_ds = (others * do_ds * (vol_p + vol_g) - inter * dvol_ds) / u2;

    const double c4 = c2 * c2;
    const double dr_dc =
        2.0 * (pred.center[i] - gt.center[i]) / c2 - rho2 * 2.0 * enclose[i] * de_dc / c4;
    const double dr_ds = -rho2 * 2.0 * enclose[i] * de_ds / c4;

    out.grad[i] = -diou_dc + dr_dc;
    out.grad[3 + i] = -diou_ds + dr_ds;
  }
  return out;
}

// Gradient of the aspect term v w.r.t. the pred sizes (d, h, w).
Vec3 aspect_term_grad(const Vec3& pred_size, const Vec3& gt_size) {
  const double d = pred_size[kZ], h = pred_size[kY], w = pred_size[kX];
  const double dg = gt_size[kZ], hg = gt_size[kY], wg = gt_size[kX];
  const double t1 = std::atan(wg / hg) - std::atan(w / h);
  const double t2 = std::atan(hg / dg) - std::atan(h / d);
  const double t3 = std::atan(dg / wg) - std::atan(d / w);
  constexpr double k = 4.0 / (std::numbers::pi * std::numbers::pi);

  // d atan(a/b)/da = b/(a^2+b^2), d atan(a/b)/db = -a/(a^2+b^2)
  const double n_wh = w * w + h * h;
  const double n_hd = h * h + d * d;
  const double n_dw = d * d + w * w;
  const double dv_dw = -2.0 * k * (t1 * (h / n_wh) + t3 * (-d / n_dw));
  const double dv_dh = -2.0 * k * (t1 * (-w / n_wh) + t2 * (d / n_hd));
  const double dv_dd = -2.0 * k * (t2 * (-h / n_hd) + t3 * (w / n_dw));
  return {dv_dd, dv_dh, dv_dw};
}

}  // namespace

double tradeoff_alpha(double v, double iou) noexcept {
  if (v == 0.0) {
    return 0.0;
  }
  return v / (1.0 - iou + v);
}

LossValue diou_loss(const BoxParam& pred, const BoxParam& gt, bool with_gradient) {
  pred.validate();
  gt.validate();
  const DiouParts parts = diou_parts(pred, gt, with_gradient);
  LossValue out;
  out.value = 1.0 - parts.iou + parts.ratio;
  if (with_gradient) {
    out.gradient = parts.grad;
  }
  return out;
}

VcIouTerms vciou_terms(const BoxParam& pred, const BoxParam& gt) {
  pred.validate();
  gt.validate();
  const DiouParts parts = diou_parts(pred, gt, false);
  VcIouTerms t;
  t.iou = parts.iou;
  t.distance_ratio = parts.ratio;
  t.diou = 1.0 - parts.iou + parts.ratio;
  t.v = aspect_term(pred.size, gt.size);
  t.alpha = tradeoff_alpha(t.v, t.iou);
  t.penalty = t.alpha * t.v;
  t.value = t.diou + t.penalty;
  return t;
}

LossValue vciou_loss(const BoxParam& pred, const BoxParam& gt, bool with_gradient) {
  pred.validate();
  gt.validate();
  const DiouParts parts = diou_parts(pred, gt, with_gradient);
  const double v = aspect_term(pred.size, gt.size);
  const double alpha = tradeoff_alpha(v, parts.iou);

  LossValue out;
  out.value = (1.0 - parts.iou + parts.ratio) + alpha * v;
  if (with_gradient) {
    Grad6 g = parts.grad;
    if (alpha != 0.0) {
      const Vec3 dv = aspect_term_grad(pred.size, gt.size);
      for (int i = 0; i < 3; ++i) {
        g[3 + i] += alpha * dv[i];
      }
    }
    out.gradient = g;
  }
  return out;
}

LossValue evaluate_loss(LossKind kind, const BoxParam& pred, const BoxParam& gt, double beta,
                        bool with_gradient) {
  switch (kind) {
    case LossKind::SmoothL1:
      return smooth_l1(pred, gt, beta, with_gradient);
    case LossKind::DIoU:
      return diou_loss(pred, gt, with_gradient);
    case LossKind::VCIoU:
      return vciou_loss(pred, gt, with_gradient);
  }
  throw ConfigError("unknown loss kind");
}

BatchLoss batch_loss(LossKind kind, std::span<const double> pred, std::span<const double> gt,
                     Reduction reduction, double beta) {
  if (pred.size() != gt.size() || pred.size() % 6 != 0) {
    std::ostringstream msg;
    msg << "batch_loss: expected two N x 6 arrays, got " << pred.size() << " and " << gt.size()
        << " values";
    throw ConfigError(msg.str());
  }
  const std::size_t n = pred.size() / 6;
  BatchLoss out;
  out.gradients.resize(n * 6);
  std::vector<double> values(n);

  for (std::size_t r = 0; r < n; ++r) {
    Grad6 p{}, g{};
    std::copy_n(pred.begin() + static_cast<std::ptrdiff_t>(r * 6), 6, p.begin());
    std::copy_n(gt.begin() + static_cast<std::ptrdiff_t>(r * 6), 6, g.begin());
    const BoxParam bp = BoxParam::from_array(p);
    const BoxParam bg = BoxParam::from_array(g);
    try {
      bp.validate();
      bg.validate();
    } catch (const InvalidBox&) {
      throw InvalidBox("batch_loss: row " + std::to_string(r) + " has a non-positive size");
    }
    const LossValue lv = evaluate_loss(kind, bp, bg, beta, true);
    values[r] = lv.value;
    std::copy(lv.gradient->begin(), lv.gradient->end(),
              out.gradients.begin() + static_cast<std::ptrdiff_t>(r * 6));
  }

  switch (reduction) {
    case Reduction::None:
      out.values = std::move(values);
      break;
    case Reduction::Sum: {
      double s = 0.0;
      for (double v : values) s += v;
      out.values = {s};
      break;
    }
    case Reduction::Mean: {
      double s = 0.0;
      for (double v : values) s += v;
      out.values = {n == 0 ? 0.0 : s / static_cast<double>(n)};
      const double scale = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
      for (double& g : out.gradients) g *= scale;
      break;
    }
  }
  return out;
}

namespace {

const char* axis_name(int i) {
  static const char* names[] = {"z", "y", "x"};
  return names[i];
}

void reject_kinks(const BoxParam& pred, const BoxParam& gt, const Grad6& steps) {
  const Faces f = faces_of(pred, gt);
  for (int i = 0; i < 3; ++i) {
    // A face moves by at most one center step plus half a size step.
    const double reach = 2.0 * (steps[i] + 0.5 * steps[3 + i]);
    const double gaps[] = {f.hi_p[i] - f.hi_g[i], f.lo_p[i] - f.lo_g[i], f.hi_p[i] - f.lo_g[i],
                           f.lo_p[i] - f.hi_g[i]};
    for (double gap : gaps) {
      if (std::abs(gap) <= reach) {
        std::ostringstream msg;
        msg << "gradient_check: pred and gt faces coincide on the " << axis_name(i)
            << " axis (gap " << gap << " within finite-difference reach " << reach << ")";
        throw NonDifferentiablePoint(msg.str());
      }
    }
  }
}

}  // namespace

GradCheckResult gradient_check(LossKind kind, const BoxParam& pred, const BoxParam& gt, double step,
                               double beta) {
  if (!(step > 0.0)) {
    throw ConfigError("gradient_check: step must be positive");
  }
  pred.validate();
  gt.validate();

  const Grad6 x0 = pred.as_array();
  Grad6 steps{};
  for (int i = 0; i < 6; ++i) {
    steps[i] = step * std::max(1.0, std::abs(x0[i]));
  }
  if (kind != LossKind::SmoothL1) {
    reject_kinks(pred, gt, steps);
  }

  const LossValue base = evaluate_loss(kind, pred, gt, beta, true);

  // alpha is a detached weight, so the numeric side freezes it too.
  double frozen_alpha = 0.0;
  if (kind == LossKind::VCIoU) {
    frozen_alpha = vciou_terms(pred, gt).alpha;
  }
  auto f = [&](const Grad6& x) {
    const BoxParam p = BoxParam::from_array(x);
    switch (kind) {
      case LossKind::SmoothL1:
        return smooth_l1(p, gt, beta, false).value;
      case LossKind::DIoU:
        return diou_loss(p, gt, false).value;
      case LossKind::VCIoU:
        return diou_loss(p, gt, false).value + frozen_alpha * aspect_term(p.size, gt.size);
    }
    return 0.0;
  };

  GradCheckResult r;
  r.analytic = *base.gradient;
  for (int i = 0; i < 6; ++i) {
    Grad6 xp = x0, xm = x0;
    xp[i] += steps[i];
    xm[i] -= steps[i];
    // Use the step actually representable in floating point.
    const double h2 = xp[i] - xm[i];
    r.numeric[i] = (f(xp) - f(xm)) / h2;
  }

  double scale = 0.0;
  for (double a : r.analytic) scale = std::max(scale, std::abs(a));
  for (int i = 0; i < 6; ++i) {
    const double a = r.analytic[i], n = r.numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), 1e-3 * scale, 1e-12});
    const double err = std::abs(a - n) / denom;
    if (err > r.max_rel_error || r.worst_param < 0) {
      r.max_rel_error = std::max(r.max_rel_error, err);
      r.worst_param = i;
    }
  }
  return r;
}

}  // namespace voxdet
