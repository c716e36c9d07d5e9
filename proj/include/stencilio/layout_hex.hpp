/*
Copyright 2026 <Project Authors>

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "stencilio/layout_base.hpp"
#include "stencilio/layout_cross.hpp"

namespace stencilio {

using Point2 = std::pair<std::int64_t, std::int64_t>;

// Constants of the hexagonal closed-form size: c' gathers 13 output blocks and the rounding
// of 13 streams (13 + 2*13); d' and d'' bound the carried-over and triply shared vertices.
inline constexpr double kHexCp = 39;
inline constexpr double kHexDp = 10;
inline constexpr double kHexDpp = 60;

// P_s(x): the s-star seen in the (x1 - x3, x2 - x3) projection. Offsets within l1 distance s,
// plus offsets within l_inf distance s whose coordinates are all <= 0 or all >= 0.
inline std::vector<Point2> hexagonal_projection(int s, Point2 x = {0, 0}) {
  std::vector<Point2> out;
  for (std::int64_t a = -s; a <= s; ++a)
    for (std::int64_t b = -s; b <= s; ++b) {
      const bool l1 = std::llabs(a) + std::llabs(b) <= s;
      const bool same_sign = (a <= 0 && b <= 0) || (a >= 0 && b >= 0);
      if (l1 || same_sign) out.emplace_back(x.first + a, x.second + b);
    }
  return out;
}

namespace hex {

// Cross-section of the sweep shape: (a-c, b-c) for a+b+c = 0, |a|+|b|+|c| <= 2m.
inline std::vector<Point2> shape(std::int64_t m) {
  std::vector<Point2> out;
  for (std::int64_t a = -2 * m; a <= 2 * m; ++a)
    for (std::int64_t b = -2 * m; b <= 2 * m; ++b) {
      const std::int64_t c = -a - b;
      if (std::llabs(a) + std::llabs(b) + std::llabs(c) <= 2 * m) out.emplace_back(a - c, b - c);
    }
  std::sort(out.begin(), out.end());
  return out;
}

// The working band's projection: the shape after the x1 shift and after the x1, x2 shifts.
// Residue (p + q) mod 3 tells which of the three a cell belongs to.
inline std::vector<Point2> footprint(std::int64_t m) {
  std::vector<Point2> out;
  for (auto [p, q] : shape(m)) {
    out.emplace_back(p, q);
    out.emplace_back(p + 1, q);
    out.emplace_back(p + 1, q + 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Set of 2D points with O(1) membership on its bounding box.
class PointSet {
 public:
  explicit PointSet(const std::vector<Point2>& pts) : pts_(pts) {
    pmin_ = qmin_ = INT64_MAX;
    std::int64_t pmax = INT64_MIN, qmax = INT64_MIN;
    for (auto [p, q] : pts) {
      pmin_ = std::min(pmin_, p), qmin_ = std::min(qmin_, q);
      pmax = std::max(pmax, p), qmax = std::max(qmax, q);
    }
    pn_ = pmax - pmin_ + 1;
    qn_ = qmax - qmin_ + 1;
    bits_.assign(static_cast<std::size_t>(pn_ * qn_), 0);
    for (auto [p, q] : pts) bits_[static_cast<std::size_t>((p - pmin_) * qn_ + (q - qmin_))] = 1;
  }
  bool contains(std::int64_t p, std::int64_t q) const {
    p -= pmin_;
    q -= qmin_;
    return p >= 0 && q >= 0 && p < pn_ && q < qn_ && bits_[static_cast<std::size_t>(p * qn_ + q)];
  }
  const std::vector<Point2>& points() const { return pts_; }
  std::int64_t pmin() const { return pmin_; }
  std::int64_t qmin() const { return qmin_; }
  std::int64_t pmax() const { return pmin_ + pn_ - 1; }
  std::int64_t qmax() const { return qmin_ + qn_ - 1; }

 private:
  std::vector<Point2> pts_;
  std::int64_t pmin_, qmin_, pn_, qn_;
  std::vector<std::uint8_t> bits_;
};

// Cells of the footprint all of whose stencil projections stay in the footprint.
inline std::vector<Point2> eligible(const std::vector<Point2>& F, int s) {
  PointSet fs(F);
  const auto proj = hexagonal_projection(s);
  std::vector<Point2> out;
  for (auto [p, q] : F) {
    bool ok = true;
    for (auto [a, b] : proj)
      if (!fs.contains(p + a, q + b)) {
        ok = false;
        break;
      }
    if (ok) out.emplace_back(p, q);
  }
  return out;
}

struct Lattice {
  Point2 v1, v2;
  std::int64_t det = 0;  // |det|: cells per band on average
};

inline std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::llabs(a);
  }
  std::int64_t x1, y1;
  std::int64_t g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

// True when translates of E by the lattice cover Z^2.
inline bool covers(const std::vector<Point2>& E, const Lattice& L) {
  // Hermite form: generators (a, 0) and (b, c) with a*c = det.
  auto [a1, b1] = L.v1;
  auto [a2, b2] = L.v2;
  std::int64_t x, y;
  const std::int64_t c = ext_gcd(b1, b2, x, y);
  if (c == 0) return false;
  const std::int64_t b = x * a1 + y * a2;
  const std::int64_t a = L.det / c;
  if (a * c != L.det || a <= 0) return false;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(L.det), 0);
  std::int64_t hit = 0;
  for (auto [p, q] : E) {
    const std::int64_t j = detail::floor_div(q, c);
    const std::int64_t qq = q - j * c;
    std::int64_t pp = (p - j * b) % a;
    if (pp < 0) pp += a;
    auto& cell = seen[static_cast<std::size_t>(pp * c + qq)];
    if (!cell) {
      cell = 1;
      ++hit;
    }
  }
  return hit == L.det;
}

// Densest-first search over near-square bases (3m+i, j), (k, 3m+l) for one whose
// translates of E cover the plane.
inline Lattice find_lattice(std::int64_t m, int s) {
  const auto E = eligible(footprint(m), s);
  std::vector<Lattice> cands;
  for (std::int64_t widen = 0; widen < 4; ++widen) {
    cands.clear();
    const std::int64_t lo = -4 * s - 4 - 4 * widen, hi = 4 + 2 * widen, sk = 4 + 2 * widen;
    for (std::int64_t i = lo; i <= hi; ++i)
      for (std::int64_t l = lo; l <= hi; ++l)
        for (std::int64_t j = -sk; j <= sk; ++j)
          for (std::int64_t k = -sk; k <= sk; ++k) {
            Lattice L{{3 * m + i, j}, {k, 3 * m + l}, 0};
            L.det = std::llabs(L.v1.first * L.v2.second - L.v1.second * L.v2.first);
            if (L.det > 0 && L.det <= static_cast<std::int64_t>(E.size())) cands.push_back(L);
          }
    std::stable_sort(cands.begin(), cands.end(), [](const Lattice& a, const Lattice& b) { return a.det > b.det; });
    for (const auto& L : cands)
      if (covers(E, L)) return L;
  }
  fail(ErrorCode::UnusableConfiguration, "no covering lattice for the hexagonal band");
}

}  // namespace hex

// Hexagonal diagonal sweep in 3D. Cells are lines along (1,1,1), labelled by
// (p, q) = (x1 - x3, x2 - x3); tau = x1 + x2 + x3 = p + q + 3*x3. Within a sweep shape
// vertices ascend in x3, then x2.
class HexLayout final : public Layout {
 public:
  HexLayout(const GridSpec& g, int s, std::int64_t m, std::int64_t B, const hex::Lattice* lattice = nullptr)
      : Layout(LayoutKind::HexagonalAlignedDiagonal3D, g, s, m, B) {
    k1_ = g_.side(0);
    k2_ = g_.side(1);
    k3_ = g_.side(2);
    pmin_ = -(k3_ - 1);
    qmin_ = -(k3_ - 1);
    pn_ = k1_ + k3_ - 1;
    qn_ = k2_ + k3_ - 1;
    ncells_ = pn_ * qn_;
    ntau_ = k1_ + k2_ + k3_ - 2;
    period_ = 3;
    key_span_ = 3 * k3_ * k2_ + k2_ + 1;
    window_ = 3 * (static_cast<std::int64_t>(s_) * k3_ * k2_ + static_cast<std::int64_t>(s_) * k2_);
    lattice_ = lattice ? *lattice : hex::find_lattice(m_, s_);

    const auto nc = static_cast<std::size_t>(ncells_);
    key_.resize(nc);
    tau_lo_.resize(nc);
    tau_hi_.resize(nc);
    for (std::int64_t p = pmin_; p < pmin_ + pn_; ++p)
      for (std::int64_t q = qmin_; q < qmin_ + qn_; ++q) {
        const auto c = static_cast<std::size_t>(cell_index(p, q));
        const std::int64_t u = p + q;
        const std::int64_t zlo = std::max<std::int64_t>({0, -p, -q});
        const std::int64_t zhi = std::min<std::int64_t>({k3_ - 1, k1_ - 1 - p, k2_ - 1 - q});
        key_[c] = 3 * q - u * (k2_ + 1);
        tau_lo_[c] = u + 3 * zlo;
        tau_hi_[c] = u + 3 * zhi;
      }

    const auto F = hex::footprint(m_);
    const auto E = hex::eligible(F, s_);
    hex::PointSet fset(F), eset(E);
    f_size_ = static_cast<std::int64_t>(F.size());
    e_size_ = static_cast<std::int64_t>(E.size());

    // Band origins: lattice points whose footprint meets a valid cell.
    const auto [a1, b1] = lattice_.v1;
    const auto [a2, b2] = lattice_.v2;
    const double det = static_cast<double>(a1 * b2 - b1 * a2);
    double imin = 1e300, imax = -1e300, jmin = 1e300, jmax = -1e300;
    for (double px : {static_cast<double>(pmin_ - fset.pmax()), static_cast<double>(pmin_ + pn_ - fset.pmin())})
      for (double py : {static_cast<double>(qmin_ - fset.qmax()), static_cast<double>(qmin_ + qn_ - fset.qmin())}) {
        const double i = (px * static_cast<double>(b2) - py * static_cast<double>(a2)) / det;
        const double j = (static_cast<double>(a1) * py - static_cast<double>(b1) * px) / det;
        imin = std::min(imin, i), imax = std::max(imax, i), jmin = std::min(jmin, j), jmax = std::max(jmax, j);
      }
    std::vector<Point2> origins;
    for (auto i = static_cast<std::int64_t>(std::floor(imin)) - 1; i <= static_cast<std::int64_t>(std::ceil(imax)) + 1; ++i)
      for (auto j = static_cast<std::int64_t>(std::floor(jmin)) - 1; j <= static_cast<std::int64_t>(std::ceil(jmax)) + 1; ++j) {
        const Point2 o{i * a1 + j * a2, i * b1 + j * b2};
        if (o.first + fset.pmax() < pmin_ || o.first + fset.pmin() >= pmin_ + pn_) continue;
        if (o.second + fset.qmax() < qmin_ || o.second + fset.qmin() >= qmin_ + qn_) continue;
        bool any = false;
        for (auto [p, q] : F)
          if (cell_valid(o.first + p, o.second + q)) {
            any = true;
            break;
          }
        if (any) origins.push_back(o);
      }
    std::sort(origins.begin(), origins.end());

    // Owner: the first band, in origin order, whose eligible region holds the cell.
    std::vector<int> owner(nc, -1);
    std::vector<std::uint8_t> partial(origins.size(), 0);
    std::vector<std::int64_t> owned_count(origins.size(), 0);
    for (std::size_t b = 0; b < origins.size(); ++b)
      for (auto [p, q] : F) {
        const std::int64_t cp = origins[b].first + p, cq = origins[b].second + q;
        if (!cell_valid(cp, cq)) {
          partial[b] = 1;
          continue;
        }
        const auto c = static_cast<std::size_t>(cell_index(cp, cq));
        if (owner[c] < 0 && eset.contains(p, q)) {
          owner[c] = static_cast<int>(b);
          ++owned_count[b];
        }
      }
    // Bands that own nothing are dropped.
    std::vector<int> renumber(origins.size(), -1);
    for (std::size_t b = 0; b < origins.size(); ++b) {
      if (owned_count[b] == 0) continue;
      renumber[b] = static_cast<int>(bands_.size());
      Band band;
      band.origin = {origins[b].first, origins[b].second};
      band.partial = partial[b] != 0;
      bands_.push_back(std::move(band));
    }
    std::vector<std::vector<std::int64_t>> owned_by(bands_.size());
    for (std::size_t c = 0; c < nc; ++c) {
      if (owner[c] < 0) continue;
      owner[c] = renumber[static_cast<std::size_t>(owner[c])];
      owned_by[static_cast<std::size_t>(owner[c])].push_back(static_cast<std::int64_t>(c));
    }

    // Members: each band holds exactly its owned cells and their stencil projections.
    const auto proj = hexagonal_projection(s_);
    std::vector<int> stamp(nc, -1);
    std::vector<std::int64_t> offsets(nc + 1, 0);
    auto for_each_needed = [&](int b, auto&& f) {
      for (std::int64_t c : owned_by[static_cast<std::size_t>(b)]) {
        auto [p, q] = cell_pq(c);
        for (auto [dp, dq] : proj) {
          if (!cell_valid(p + dp, q + dq)) continue;
          const auto t = static_cast<std::size_t>(cell_index(p + dp, q + dq));
          if (stamp[t] == b) continue;
          stamp[t] = b;
          f(t);
        }
      }
    };
    for (int b = 0; b < static_cast<int>(bands_.size()); ++b) for_each_needed(b, [&](std::size_t t) { ++offsets[t + 1]; });
    for (std::size_t c = 0; c < nc; ++c) offsets[c + 1] += offsets[c];
    std::vector<int> members(static_cast<std::size_t>(offsets[nc]));
    std::vector<std::int64_t> fill(offsets.begin(), offsets.end() - 1);
    std::fill(stamp.begin(), stamp.end(), -1);
    for (int b = 0; b < static_cast<int>(bands_.size()); ++b)
      for_each_needed(b, [&](std::size_t t) { members[static_cast<std::size_t>(fill[t]++)] = b; });
    line_cache_slots_ = static_cast<std::size_t>(2 * s_ + 3);
    finish(offsets, members, owner, false);
  }

  const hex::Lattice& lattice() const { return lattice_; }
  std::int64_t footprint_size() const { return f_size_; }
  std::int64_t eligible_size() const { return e_size_; }

  std::int64_t cell_index(std::int64_t p, std::int64_t q) const { return (p - pmin_) * qn_ + (q - qmin_); }
  Point2 cell_pq(std::int64_t cell) const { return {cell / qn_ + pmin_, cell % qn_ + qmin_}; }
  bool cell_valid(std::int64_t p, std::int64_t q) const {
    if (p < pmin_ || p >= pmin_ + pn_ || q < qmin_ || q >= qmin_ + qn_) return false;
    const auto c = static_cast<std::size_t>(cell_index(p, q));
    return tau_lo_[c] <= tau_hi_[c];
  }

  std::int64_t cell_of(const Vertex& x) const override { return cell_index(x.c[0] - x.c[2], x.c[1] - x.c[2]); }
  std::int64_t tau_of(const Vertex& x) const override { return x.c[0] + x.c[1] + x.c[2]; }
  Vertex vertex_at(std::int64_t cell, std::int64_t tau) const override {
    auto [p, q] = cell_pq(cell);
    const std::int64_t z = (tau - p - q) / 3;
    return Vertex{p + z, q + z, z};
  }

  Address address(const Vertex& x, Layer layer) const override {
    const std::int64_t p = x.c[0] - x.c[2], q = x.c[1] - x.c[2];
    const auto c = static_cast<std::size_t>(cell_index(p, q));
    const auto sid = static_cast<std::size_t>(layer == Layer::In ? in_stream_[c] : out_stream_[c]);
    return to_address(streams_[sid], rank_pq(sid, p, q, x.c[0] + x.c[1] + x.c[2]));
  }

  void addresses(const Vertex* xs, std::size_t count, Layer layer, Address* out) const override {
    for (std::size_t i = 0; i < count; ++i) out[i] = address(xs[i], layer);
  }

  std::int64_t rank(const Stream& st, std::int64_t cell, std::int64_t tau) const override {
    auto [p, q] = cell_pq(cell);
    return rank_pq(static_cast<std::size_t>(&st - streams_.data()), p, q, tau);
  }

  std::int64_t rank_pq(std::size_t sid, std::int64_t p, std::int64_t q, std::int64_t tau) const {
    const auto& a = aux_[sid];
    const std::int64_t u = p + q;
    const std::size_t li = static_cast<std::size_t>(a.line_of_u[static_cast<std::size_t>(u - a.umin)]);
    const auto& table = slice_table(a, tau);
    const Line& line = a.lines[li];
    const std::int64_t z = (tau - u) / 3;
    const std::int64_t qa = std::max(-z, u + z - (k1_ - 1));
    std::int64_t before = 0;
    for (auto [lo, hi] : line.intervals) {
      const std::int64_t f = std::max(lo, qa);
      const std::int64_t l = std::min(hi, q - 1);
      if (l >= f) before += l - f + 1;
      if (hi >= q - 1) break;
    }
    return a.prefix[static_cast<std::size_t>(tau - a.tau0)] + table[li] + before;
  }

  std::pair<std::int64_t, std::int64_t> element(const Stream& st, std::int64_t r) const override {
    const Aux& a = aux_[static_cast<std::size_t>(&st - streams_.data())];
    const auto it = std::upper_bound(a.prefix.begin(), a.prefix.end(), r);
    const std::int64_t tau = (it - a.prefix.begin()) - 1 + a.tau0;
    std::int64_t rem = r - a.prefix[static_cast<std::size_t>(tau - a.tau0)];
    const auto& table = slice_table(a, tau);
    const auto lt = std::upper_bound(table.begin(), table.end(), rem);
    const auto li = static_cast<std::size_t>((lt - table.begin()) - 1);
    rem -= table[li];
    const Line& line = a.lines[li];
    const std::int64_t z = (tau - line.u) / 3;
    const std::int64_t qa = std::max(-z, line.u + z - (k1_ - 1));
    const std::int64_t qb = std::min(k2_ - 1 - z, line.u + z);
    for (auto [lo, hi] : line.intervals) {
      const std::int64_t f = std::max(lo, qa), l = std::min(hi, qb);
      if (l < f) continue;
      if (rem < l - f + 1) return {cell_index(line.u - (f + rem), f + rem), tau};
      rem -= l - f + 1;
    }
    fail(ErrorCode::OutOfRange, "rank beyond stream");
  }

 protected:
  void index_stream(Stream& st) override {
    const auto idx = static_cast<std::size_t>(&st - streams_.data());
    if (aux_.size() < streams_.size()) aux_.resize(streams_.size());
    Aux& a = aux_[idx];
    // Lines by descending u; q intervals ascending.
    std::vector<Point2> uq;
    uq.reserve(st.cells.size());
    std::int64_t tmin = INT64_MAX, tmax = INT64_MIN;
    for (std::int64_t c : st.cells) {
      auto [p, q] = cell_pq(c);
      uq.emplace_back(-(p + q), q);
      tmin = std::min(tmin, tau_lo_[static_cast<std::size_t>(c)]);
      tmax = std::max(tmax, tau_hi_[static_cast<std::size_t>(c)]);
    }
    std::sort(uq.begin(), uq.end());
    a.lines.clear();
    for (auto [nu, q] : uq) {
      if (a.lines.empty() || a.lines.back().u != -nu) a.lines.push_back(Line{-nu, {}});
      auto& iv = a.lines.back().intervals;
      if (!iv.empty() && iv.back().second + 1 == q) {
        iv.back().second = q;
      } else {
        iv.emplace_back(q, q);
      }
    }
    a.umax = a.lines.front().u;
    a.umin = a.lines.back().u;
    a.line_of_u.assign(static_cast<std::size_t>(a.umax - a.umin + 1), -1);
    for (std::size_t i = 0; i < a.lines.size(); ++i) a.line_of_u[static_cast<std::size_t>(a.lines[i].u - a.umin)] = static_cast<int>(i);
    // Elements per tau from each cell's tau range (stride 3).
    a.tau0 = tmin;
    const std::int64_t span = tmax - tmin + 1;
    std::vector<std::int64_t> diff(static_cast<std::size_t>(span + 3), 0);
    for (std::int64_t c : st.cells) {
      diff[static_cast<std::size_t>(tau_lo_[static_cast<std::size_t>(c)] - tmin)] += 1;
      diff[static_cast<std::size_t>(tau_hi_[static_cast<std::size_t>(c)] + 3 - tmin)] -= 1;
    }
    a.prefix.assign(static_cast<std::size_t>(span + 1), 0);
    for (std::int64_t t = 0; t < span; ++t) {
      if (t >= 3) diff[static_cast<std::size_t>(t)] += diff[static_cast<std::size_t>(t - 3)];
      a.prefix[static_cast<std::size_t>(t + 1)] = a.prefix[static_cast<std::size_t>(t)] + diff[static_cast<std::size_t>(t)];
    }
    st.length = a.prefix.back();
    a.cache.assign(line_cache_slots_, {});
  }

 private:
  struct Line {
    std::int64_t u = 0;
    std::vector<Point2> intervals;
  };
  struct Slice {
    std::int64_t tau = -1;
    std::vector<std::int64_t> table;  // elements before each line at tau
  };
  struct Aux {
    std::vector<Line> lines;
    std::int64_t umin = 0, umax = 0;
    std::vector<int> line_of_u;
    std::int64_t tau0 = 0;
    std::vector<std::int64_t> prefix;
    mutable std::vector<Slice> cache;
  };

  // Not thread-safe: caches per-stream slice tables.
  const std::vector<std::int64_t>& slice_table(const Aux& a, std::int64_t tau) const {
    Slice& sl = a.cache[static_cast<std::size_t>(tau % static_cast<std::int64_t>(a.cache.size()))];
    if (sl.tau == tau) return sl.table;
    sl.tau = tau;
    sl.table.assign(a.lines.size() + 1, 0);
    for (std::size_t i = 0; i < a.lines.size(); ++i) {
      const Line& line = a.lines[i];
      std::int64_t cnt = 0;
      if ((((tau - line.u) % 3) + 3) % 3 == 0) {
        const std::int64_t z = (tau - line.u) / 3;
        if (z >= 0 && z < k3_) {
          const std::int64_t qa = std::max(-z, line.u + z - (k1_ - 1));
          const std::int64_t qb = std::min(k2_ - 1 - z, line.u + z);
          for (auto [lo, hi] : line.intervals) {
            const std::int64_t f = std::max(lo, qa), l = std::min(hi, qb);
            if (l >= f) cnt += l - f + 1;
          }
        }
      }
      sl.table[i + 1] = sl.table[i] + cnt;
    }
    return sl.table;
  }

  std::int64_t k1_ = 0, k2_ = 0, k3_ = 0;
  std::int64_t pmin_ = 0, qmin_ = 0, pn_ = 0, qn_ = 0;
  hex::Lattice lattice_;
  std::int64_t f_size_ = 0, e_size_ = 0;
  std::size_t line_cache_slots_ = 5;
  std::vector<Aux> aux_;
};

}  // namespace stencilio
