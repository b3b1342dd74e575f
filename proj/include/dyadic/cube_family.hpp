#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "dyadic/cube.hpp"
#include "dyadic/errors.hpp"

namespace dyadic {

/// Every cube of the selected grids lying inside the root, from the
/// coarsest level that fits down to `scan_level`. Finite truncation of the
/// supremum over all cubes; closed under ancestors inside the root.
class CubeFamily {
 public:
  struct LevelBox {
    int level;
    Shift shift;
    std::vector<std::int64_t> lo;  // first index per coordinate
    std::vector<std::int64_t> hi;  // one past the last index
    std::size_t count() const {
      std::size_t c = 1;
      for (std::size_t d = 0; d < lo.size(); ++d) c *= static_cast<std::size_t>(hi[d] - lo[d]);
      return c;
    }
    bool holds(const DyadicCube& q) const {
      if (q.level() != level || q.shift() != shift) return false;
      for (std::size_t d = 0; d < lo.size(); ++d) {
        if (q.index()[d] < lo[d] || q.index()[d] >= hi[d]) return false;
      }
      return true;
    }
    std::size_t offset(const DyadicCube& q) const {
      std::size_t off = 0;
      for (int d = static_cast<int>(lo.size()) - 1; d >= 0; --d) {
        off = off * static_cast<std::size_t>(hi[d] - lo[d]) + static_cast<std::size_t>(q.index()[d] - lo[d]);
      }
      return off;
    }
    DyadicCube cube(std::size_t off) const {
      std::vector<std::int64_t> j(lo.size());
      for (std::size_t d = 0; d < lo.size(); ++d) {
        const auto w = static_cast<std::size_t>(hi[d] - lo[d]);
        j[d] = lo[d] + static_cast<std::int64_t>(off % w);
        off /= w;
      }
      return DyadicCube(level, std::move(j), shift);
    }
  };

  /// All 2^n shifted grids.
  CubeFamily(const RootSystem& sys, int scan_level) : CubeFamily(sys, scan_level, Shift::all(sys.dim())) {}

  CubeFamily(const RootSystem& sys, int scan_level, std::vector<Shift> grids)
      : sys_(sys), scan_level_(scan_level), grids_(std::move(grids)) {
    if (scan_level_ > sys_.max_level()) throw DomainError("scan level exceeds the mesh level");
    const int n = sys_.dim();
    for (Shift t : grids_) {
      for (int k = sys_.coarsest_level(); k <= scan_level_; ++k) {
        LevelBox box{k, t, std::vector<std::int64_t>(n), std::vector<std::int64_t>(n)};
        bool empty = false;
        for (int d = 0; d < n; ++d) {
          const int s = t.shifted(d) ? (k % 2 == 0 ? 1 : -1) : 0;
          const Rational off(s, 3);
          box.lo[d] = ceil_int(sys_.lower(d) * pow2(k) - off);
          box.hi[d] = floor_int(sys_.upper(d) * pow2(k) - off);  // j + 1 <= upper * 2^k - off
          if (box.hi[d] <= box.lo[d]) empty = true;
        }
        if (!empty) boxes_.push_back(std::move(box));
      }
    }
    if (boxes_.empty()) throw DomainError("cube family is empty");
    std::size_t s = 0;
    for (const auto& b : boxes_) {
      starts_.push_back(s);
      s += b.count();
    }
    size_ = s;
  }

  const RootSystem& system() const { return sys_; }
  int scan_level() const { return scan_level_; }
  const std::vector<Shift>& grids() const { return grids_; }
  const std::vector<LevelBox>& boxes() const { return boxes_; }

  std::size_t size() const { return size_; }

  /// Position of q in the enumeration order of for_each, or npos.
  std::size_t index_of(const DyadicCube& q) const {
    for (std::size_t b = 0; b < boxes_.size(); ++b) {
      if (boxes_[b].level == q.level() && boxes_[b].shift == q.shift()) {
        return boxes_[b].holds(q) ? starts_[b] + boxes_[b].offset(q) : npos;
      }
    }
    return npos;
  }

  DyadicCube cube(std::size_t index) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), index);
    const auto b = static_cast<std::size_t>(it - starts_.begin()) - 1;
    return boxes_[b].cube(index - starts_[b]);
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const LevelBox* box_of(int level, Shift t) const {
    for (const auto& b : boxes_) {
      if (b.level == level && b.shift == t) return &b;
    }
    return nullptr;
  }

  bool holds(const DyadicCube& q) const {
    const LevelBox* b = box_of(q.level(), q.shift());
    return b != nullptr && b->holds(q);
  }

  void for_each(const std::function<void(const DyadicCube&)>& fn) const {
    for (const auto& b : boxes_) {
      const std::size_t c = b.count();
      for (std::size_t i = 0; i < c; ++i) fn(b.cube(i));
    }
  }

  std::vector<DyadicCube> cubes() const {
    std::vector<DyadicCube> out;
    out.reserve(size());
    for_each([&](const DyadicCube& q) { out.push_back(q); });
    return out;
  }

 private:
  RootSystem sys_;
  int scan_level_;
  std::vector<Shift> grids_;
  std::vector<LevelBox> boxes_;
  std::vector<std::size_t> starts_;
  std::size_t size_ = 0;
};

}  // namespace dyadic
