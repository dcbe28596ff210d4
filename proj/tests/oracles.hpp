// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used only by the tests. Each one is
// written from the definition, without calling the library routine it checks.

#ifndef VOXDET_TESTS_ORACLES_HPP
#define VOXDET_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "voxdet/annotation.hpp"
#include "voxdet/geometry.hpp"
#include "voxdet/metrics.hpp"
#include "voxdet/nms.hpp"

namespace oracle {

using voxdet::Box3;
using voxdet::Vec3;

// IoU by counting unit voxels of integer-cornered boxes.
inline double voxel_iou(const Box3& a, const Box3& b) {
  auto lo = [](const Box3& x, int i) { return static_cast<long>(x.min()[i]); };
  auto hi = [](const Box3& x, int i) { return static_cast<long>(x.max()[i]); };
  long zlo = std::min(lo(a, 0), lo(b, 0)), zhi = std::max(hi(a, 0), hi(b, 0));
  long ylo = std::min(lo(a, 1), lo(b, 1)), yhi = std::max(hi(a, 1), hi(b, 1));
  long xlo = std::min(lo(a, 2), lo(b, 2)), xhi = std::max(hi(a, 2), hi(b, 2));
  auto inside = [&](const Box3& x, long z, long y, long w) {
    return z >= lo(x, 0) && z < hi(x, 0) && y >= lo(x, 1) && y < hi(x, 1) && w >= lo(x, 2) &&
           w < hi(x, 2);
  };
  long inter = 0, uni = 0;
  for (long z = zlo; z < zhi; ++z)
    for (long y = ylo; y < yhi; ++y)
      for (long x = xlo; x < xhi; ++x) {
        const bool ia = inside(a, z, y, x), ib = inside(b, z, y, x);
        inter += ia && ib;
        uni += ia || ib;
      }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// -- ATSS ------------------------------------------------------------------------

struct PlainAnchor {
  Box3 box;
  int level;
};

inline std::vector<int> atss(const std::vector<PlainAnchor>& anchors, const std::vector<Box3>& gts,
                             int top_k) {
  std::vector<int> levels;
  for (const auto& a : anchors) {
    if (std::find(levels.begin(), levels.end(), a.level) == levels.end()) levels.push_back(a.level);
  }
  // positive[g] = set of anchors positive for gt g
  std::vector<std::vector<std::size_t>> positive(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const Vec3 c = gts[g].center();
    std::vector<std::size_t> cand;
    for (int lvl : levels) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < anchors.size(); ++i)
        if (anchors[i].level == lvl) idx.push_back(i);
      auto dist = [&](std::size_t i) {
        const Vec3 a = anchors[i].box.center();
        return (a[0] - c[0]) * (a[0] - c[0]) + (a[1] - c[1]) * (a[1] - c[1]) +
               (a[2] - c[2]) * (a[2] - c[2]);
      };
      std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        const double dx = dist(x), dy = dist(y);
        return dx != dy ? dx < dy : x < y;
      });
      for (std::size_t k = 0; k < idx.size() && k < static_cast<std::size_t>(top_k); ++k)
        cand.push_back(idx[k]);
    }
    std::vector<double> ious;
    for (std::size_t i : cand) ious.push_back(voxdet::iou(anchors[i].box, gts[g]));
    double mean = 0.0;
    for (double v : ious) mean += v;
    mean /= static_cast<double>(ious.size());
    double var = 0.0;
    for (double v : ious) var += (v - mean) * (v - mean);
    const double t = mean + std::sqrt(var / static_cast<double>(ious.size()));
    for (std::size_t k = 0; k < cand.size(); ++k) {
      const Vec3 ac = anchors[cand[k]].box.center();
      bool inside = true;
      for (int a = 0; a < 3; ++a)
        inside = inside && ac[a] > gts[g].min()[a] && ac[a] < gts[g].max()[a];
      if (ious[k] >= t && inside) positive[g].push_back(cand[k]);
    }
  }
  std::vector<int> labels(anchors.size(), -1);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    double best = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (std::find(positive[g].begin(), positive[g].end(), i) == positive[g].end()) continue;
      const double v = voxdet::iou(anchors[i].box, gts[g]);
      if (v > best) {
        best = v;
        labels[i] = static_cast<int>(g);
      }
    }
  }
  return labels;
}

// -- NMS ---------------------------------------------------------------------------

inline std::vector<std::size_t> nms(const std::vector<voxdet::Detection>& d, double thr,
                                    std::size_t max_out) {
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  // selection order: repeatedly take the highest remaining score, lowest index on ties
  std::vector<bool> used(d.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t round = 0; round < d.size(); ++round) {
    std::size_t pick = d.size();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (used[i]) continue;
      if (pick == d.size() || d[i].score > d[pick].score) pick = i;
    }
    used[pick] = true;
    bool ok = true;
    for (std::size_t k : kept)
      if (d[k].label == d[pick].label && voxdet::iou(d[k].box, d[pick].box) > thr) ok = false;
    if (ok && kept.size() < max_out) kept.push_back(pick);
  }
  return kept;
}

// -- evaluation -----------------------------------------------------------------------

struct RefDet {
  std::size_t scan;
  std::size_t rank;
  double score;
  int outcome;  // 1 TP, 0 FP, -1 ignored
};

struct RefEval {
  std::vector<RefDet> dets;
  std::size_t n_gt = 0;
  std::size_t n_scans = 0;
};

// Greedy one-to-one matching written directly over an IoU matrix. `in_group`
// decides which gts count; the rest act as ignore regions.
template <class InGroup>
RefEval evaluate(const std::vector<voxdet::ScanDetections>& dets,
                 const std::vector<voxdet::ScanGroundTruth>& gts, double t, InGroup in_group) {
  RefEval out;
  std::map<std::string, std::size_t> order;
  std::vector<std::string> ids;
  for (const auto& g : gts) {
    order.emplace(g.scan_id, ids.size());
    ids.push_back(g.scan_id);
  }
  for (const auto& d : dets)
    if (!order.count(d.scan_id)) {
      order.emplace(d.scan_id, ids.size());
      ids.push_back(d.scan_id);
    }
  out.n_scans = ids.size();

  for (std::size_t s = 0; s < ids.size(); ++s) {
    const voxdet::ScanGroundTruth* G = nullptr;
    for (const auto& g : gts)
      if (g.scan_id == ids[s]) G = &g;
    const voxdet::ScanDetections* D = nullptr;
    for (const auto& d : dets)
      if (d.scan_id == ids[s]) D = &d;
    const std::size_t ng = G ? G->gts.size() : 0;
    for (std::size_t g = 0; g < ng; ++g)
      if (in_group(*G, g)) ++out.n_gt;
    if (!D) continue;

    const std::size_t nd = D->dets.size();
    std::vector<std::vector<double>> m(nd, std::vector<double>(ng, 0.0));
    for (std::size_t i = 0; i < nd; ++i)
      for (std::size_t g = 0; g < ng; ++g)
        m[i][g] = D->dets[i].label == G->gts[g].label ? voxdet::iou(D->dets[i].box, G->gts[g].box)
                                                      : -1.0;
    std::vector<std::size_t> rank(nd);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return D->dets[a].score > D->dets[b].score;
    });
    std::vector<bool> used(ng, false);
    for (std::size_t r = 0; r < nd; ++r) {
      const std::size_t i = rank[r];
      int outcome = 0;
      for (int pass = 0; pass < 2 && outcome == 0; ++pass) {
        int best = -1;
        for (std::size_t g = 0; g < ng; ++g) {
          const bool ig = !in_group(*G, g);
          if (used[g] || ig != (pass == 1) || m[i][g] < t) continue;
          if (best < 0 || m[i][g] > m[i][static_cast<std::size_t>(best)]) best = static_cast<int>(g);
        }
        if (best >= 0) {
          used[static_cast<std::size_t>(best)] = true;
          outcome = pass == 0 ? 1 : -1;
        }
      }
      out.dets.push_back({s, r, D->dets[i].score, outcome});
    }
  }
  std::stable_sort(out.dets.begin(), out.dets.end(),
                   [](const RefDet& a, const RefDet& b) { return a.score > b.score; });
  return out;
}

inline RefEval evaluate(const std::vector<voxdet::ScanDetections>& dets,
                        const std::vector<voxdet::ScanGroundTruth>& gts, double t) {
  return evaluate(dets, gts, t, [](const voxdet::ScanGroundTruth&, std::size_t) { return true; });
}

// AP as the sum, over each TP, of 1/n_gt times the best precision at any
// rank at or after it.
inline std::optional<double> ap(const RefEval& e) {
  if (e.n_gt == 0) return std::nullopt;
  std::vector<int> flags;
  for (const auto& d : e.dets)
    if (d.outcome >= 0) flags.push_back(d.outcome);
  double total = 0.0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i]) continue;
    double best = 0.0;
    for (std::size_t j = i; j < flags.size(); ++j) {
      const double tp = std::count(flags.begin(), flags.begin() + static_cast<long>(j) + 1, 1);
      best = std::max(best, tp / static_cast<double>(j + 1));
    }
    total += best / static_cast<double>(e.n_gt);
  }
  return total;
}

inline std::optional<double> ar(const RefEval& e, std::size_t max_det) {
  if (e.n_gt == 0) return std::nullopt;
  std::size_t tp = 0;
  for (const auto& d : e.dets)
    if (d.outcome == 1 && d.rank < max_det) ++tp;
  return static_cast<double>(tp) / static_cast<double>(e.n_gt);
}

// Sensitivity at each FP/scan by trying every score threshold.
inline std::vector<double> froc(const RefEval& e, const std::vector<double>& axis) {
  std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
  for (const auto& d : e.dets) thresholds.push_back(d.score);
  std::vector<double> out;
  for (double f : axis) {
    double best = 0.0;
    for (double th : thresholds) {
      double tp = 0, fp = 0;
      for (const auto& d : e.dets) {
        if (d.score < th) continue;
        tp += d.outcome == 1;
        fp += d.outcome == 0;
      }
      if (fp / static_cast<double>(e.n_scans) <= f) best = std::max(best, tp / static_cast<double>(e.n_gt));
    }
    out.push_back(best);
  }
  return out;
}

// -- connected components ----------------------------------------------------------------

struct RefComponent {
  Box3 box;
  std::size_t count;
};

inline std::vector<RefComponent> flood_fill(const voxdet::LabelMap& m, int connectivity) {
  const long nz = m.meta.shape[0], ny = m.meta.shape[1], nx = m.meta.shape[2];
  std::vector<bool> seen(m.voxels.size(), false);
  std::vector<RefComponent> out;
  for (long z = 0; z < nz; ++z)
    for (long y = 0; y < ny; ++y)
      for (long x = 0; x < nx; ++x) {
        const auto start = m.index(z, y, x);
        if (m.voxels[start] == 0 || seen[start]) continue;
        const auto value = m.voxels[start];
        long lo[3] = {z, y, x}, hi[3] = {z, y, x};
        std::size_t count = 0;
        std::deque<std::array<long, 3>> q{{z, y, x}};
        seen[start] = true;
        while (!q.empty()) {
          const auto p = q.front();
          q.pop_front();
          ++count;
          for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
          }
          for (long dz = -1; dz <= 1; ++dz)
            for (long dy = -1; dy <= 1; ++dy)
              for (long dx = -1; dx <= 1; ++dx) {
                const long manhattan = std::labs(dz) + std::labs(dy) + std::labs(dx);
                if (manhattan == 0 || (connectivity == 6 && manhattan > 1)) continue;
                const long a = p[0] + dz, b = p[1] + dy, c = p[2] + dx;
                if (a < 0 || b < 0 || c < 0 || a >= nz || b >= ny || c >= nx) continue;
                const auto j = m.index(a, b, c);
                if (seen[j] || m.voxels[j] != value) continue;
                seen[j] = true;
                q.push_back({a, b, c});
              }
        }
        out.push_back({Box3({double(lo[0]), double(lo[1]), double(lo[2])},
                            {double(hi[0] + 1), double(hi[1] + 1), double(hi[2] + 1)}),
                       count});
      }
  return out;
}

}  // namespace oracle

#endif  // VOXDET_TESTS_ORACLES_HPP
