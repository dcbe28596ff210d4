// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "voxdet/annotation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "voxdet/detail/random.hpp"
#include "voxdet/error.hpp"

namespace voxdet {

LabelMap::LabelMap(const VolumeMeta& m) : meta(m) {
  meta.validate();
  voxels.assign(static_cast<std::size_t>(meta.voxel_count()), 0);
}

void LabelMap::validate() const {
  meta.validate();
  if (voxels.size() != static_cast<std::size_t>(meta.voxel_count())) {
    std::ostringstream msg;
    msg << "label map holds " << voxels.size() << " voxels but its shape needs "
        << meta.voxel_count();
    throw HeaderMismatch(msg.str());
  }
}

Connectivity parse_connectivity(int n) {
  if (n == 6) return Connectivity::Six;
  if (n == 26) return Connectivity::TwentySix;
  throw ConfigError("connectivity must be 6 or 26, got " + std::to_string(n));
}

namespace {

// Disjoint sets over provisional labels. Union keeps the smaller label as
// root, so a root is always the first label of its component in raster order.
class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<std::uint32_t> parent_;
};

// Already-visited half of the neighbourhood in (z, y, x) raster order.
std::vector<std::array<int, 3>> backward_offsets(Connectivity c) {
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 0; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const bool before = dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0);
        if (!before) continue;
        const int manhattan = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (c == Connectivity::Six && manhattan != 1) continue;
        out.push_back({dz, dy, dx});
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ComponentBox> mask_to_boxes(const LabelMap& map, Connectivity connectivity) {
  map.validate();
  const auto nz = map.meta.shape[0], ny = map.meta.shape[1], nx = map.meta.shape[2];
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> prov(map.voxels.size(), kNone);
  DisjointSets sets;
  const auto offsets = backward_offsets(connectivity);

  // First pass: provisional labels and equivalences.
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x) {
        const std::size_t i = map.index(z, y, x);
        const std::uint16_t v = map.voxels[i];
        if (v == 0) continue;
        std::uint32_t mine = kNone;
        for (const auto& o : offsets) {
          const std::int64_t zz = z + o[0], yy = y + o[1], xx = x + o[2];
          if (zz < 0 || yy < 0 || xx < 0 || yy >= ny || xx >= nx) continue;
          const std::size_t j = map.index(zz, yy, xx);
          if (map.voxels[j] != v) continue;
          if (mine == kNone) {
            mine = prov[j];
          } else {
            sets.unite(mine, prov[j]);
          }
        }
        prov[i] = mine == kNone ? sets.make() : mine;
      }
    }
  }

  // Second pass: accumulate bounds per root.
  struct Acc {
    Index3 lo, hi;
    std::size_t count = 0;
    std::uint16_t label = 0;
  };
  std::vector<std::uint32_t> slot_of_root;
  std::vector<Acc> acc;
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x) {
        const std::size_t i = map.index(z, y, x);
        if (prov[i] == kNone) continue;
        const std::uint32_t root = sets.find(prov[i]);
        if (root >= slot_of_root.size()) slot_of_root.resize(root + 1, kNone);
        if (slot_of_root[root] == kNone) {
          slot_of_root[root] = static_cast<std::uint32_t>(acc.size());
          acc.push_back(Acc{{z, y, x}, {z, y, x}, 0, map.voxels[i]});
        }
        Acc& a = acc[slot_of_root[root]];
        const Index3 p{z, y, x};
        for (int k = 0; k < 3; ++k) {
          a.lo[k] = std::min(a.lo[k], p[k]);
          a.hi[k] = std::max(a.hi[k], p[k]);
        }
        ++a.count;
      }
    }
  }

  std::vector<ComponentBox> out;
  out.reserve(acc.size());
  for (const Acc& a : acc) {
    Vec3 lo{}, hi{};
    for (int k = 0; k < 3; ++k) {
      lo[k] = static_cast<double>(a.lo[k]);
      hi[k] = static_cast<double>(a.hi[k] + 1);
    }
    out.push_back(ComponentBox{Box3(lo, hi), a.count, a.label});
  }
  return out;
}

std::string_view to_string(NoiseMode m) noexcept {
  switch (m) {
    case NoiseMode::Shrink:
      return "shrink";
    case NoiseMode::Enlarge:
      return "enlarge";
    case NoiseMode::Shift:
      return "shift";
    case NoiseMode::Drop:
      return "drop";
  }
  return "?";
}

NoiseMode parse_noise_mode(std::string_view name) {
  if (name == "shrink") return NoiseMode::Shrink;
  if (name == "enlarge") return NoiseMode::Enlarge;
  if (name == "shift") return NoiseMode::Shift;
  if (name == "drop") return NoiseMode::Drop;
  throw ConfigError("unknown noise mode '" + std::string(name) +
                    "' (expected shrink, enlarge, shift or drop)");
}

void NoiseSpec::validate() const {
  if (!(magnitude >= 0.0 && magnitude < 1.0)) {
    throw ConfigError("noise magnitude must lie in [0, 1)");
  }
  for (double p : {drop_below_1cm3, drop_below_10cm3}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("drop probabilities must lie in [0, 1]");
    }
  }
}

NoiseResult corrupt_boxes(const std::vector<Box3>& boxes, const NoiseSpec& spec,
                          const Vec3& spacing_mm) {
  spec.validate();
  detail::Rng rng(spec.seed);
  NoiseResult out;
  double iou_sum = 0.0;

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box3& b = boxes[i];
    Vec3 lo = b.min(), hi = b.max();

    switch (spec.mode) {
      case NoiseMode::Shrink:
      case NoiseMode::Enlarge: {
        bool clamped = false;
        for (int a = 0; a < 3; ++a) {
          const double e = b.extent(a);
          const double u = rng.uniform();
          double ne = spec.mode == NoiseMode::Shrink ? e * (1.0 - spec.magnitude * u)
                                                     : e * (1.0 + spec.magnitude * u);
          if (spec.mode == NoiseMode::Shrink) {
            const double floor = std::min(1.0, e);
            if (ne < floor) {
              ne = floor;
              clamped = true;
            }
          }
          // Move both faces by half the change; the clamps absorb rounding.
          const double half = 0.5 * (ne - e);
          if (spec.mode == NoiseMode::Shrink) {
            lo[a] = std::max(b.min()[a], b.min()[a] - half);
            hi[a] = std::min(b.max()[a], b.max()[a] + half);
            if (!(lo[a] < hi[a])) {
              lo[a] = b.min()[a];
              hi[a] = b.max()[a];
            }
          } else {
            lo[a] = std::min(b.min()[a], b.min()[a] - half);
            hi[a] = std::max(b.max()[a], b.max()[a] + half);
          }
        }
        if (clamped) ++out.clamped;
        break;
      }
      case NoiseMode::Shift: {
        for (int a = 0; a < 3; ++a) {
          const double u = rng.uniform();
          const double raw = (2.0 * u - 1.0) * spec.magnitude * b.extent(a);
          const double delta = std::round(raw / kShiftQuantum) * kShiftQuantum;
          lo[a] += delta;
          hi[a] += delta;
        }
        break;
      }
      case NoiseMode::Drop: {
        const double u = rng.uniform();
        const double vol = physical_volume_cm3(b, spacing_mm);
        double p = 0.0;
        if (vol < 1.0) {
          p = spec.drop_below_1cm3;
        } else if (vol < 10.0) {
          p = spec.drop_below_10cm3;
        }
        if (u < p) continue;
        break;
      }
    }

    Box3 nb(lo, hi);
    iou_sum += iou(b, nb);
    out.boxes.push_back(nb);
    out.kept.push_back(i);
  }
  if (!out.kept.empty()) {
    out.mean_iou = iou_sum / static_cast<double>(out.kept.size());
  }
  return out;
}

}  // namespace voxdet
