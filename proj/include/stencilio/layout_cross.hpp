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
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

#include "stencilio/layout_base.hpp"

namespace stencilio {

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Working intervals [j*w - s, j*w - s + m) with w = m - 2s; band j owns [j*w, (j+1)*w).
struct IntervalTiling {
  std::int64_t k = 0, m = 0, s = 0, w = 0, count = 0;

  IntervalTiling(std::int64_t side, std::int64_t m_, std::int64_t s_) : k(side), m(m_), s(s_), w(m_ - 2 * s_) {
    if (w < 1) fail(ErrorCode::UnusableConfiguration, "sweep shape narrower than the stencil");
    count = ceil_div(k, w);
  }

  std::int64_t start(std::int64_t j) const { return j * w - s; }
  std::int64_t owner(std::int64_t x) const { return x / w; }
  std::int64_t first_member(std::int64_t x) const { return std::max<std::int64_t>(0, floor_div(x + s - m, w) + 1); }
  std::int64_t last_member(std::int64_t x) const { return std::min<std::int64_t>(count - 1, floor_div(x + s, w)); }
  bool partial(std::int64_t j) const { return start(j) < 0 || start(j) + m > k; }
};

}  // namespace detail

// Sweeps along x1 with a fixed cross-section over (x2, ..., xn). A cell is a cross-section
// point, numbered with x2 fastest; tau = x1.
class CrossSectionLayout final : public Layout {
 public:
  CrossSectionLayout(LayoutKind kind, const GridSpec& g, int s, std::int64_t m, std::int64_t B)
      : Layout(kind, g, s, m, B) {
    if (kind == LayoutKind::BlockAlignedDiagonal2D || kind == LayoutKind::HexagonalAlignedDiagonal3D)
      fail(ErrorCode::InvalidArgument, "not a cross-section kind");
    const int n = g_.n();
    dims_ = n - 1;
    ncells_ = 1;
    for (int i = 1; i < n; ++i) {
      stride_[static_cast<std::size_t>(i - 1)] = ncells_;
      ncells_ *= g_.side(i);
    }
    ntau_ = g_.side(0);
    period_ = 1;
    const auto nc = static_cast<std::size_t>(ncells_);
    key_.resize(nc);
    tau_lo_.assign(nc, 0);
    tau_hi_.assign(nc, ntau_ - 1);

    std::vector<std::int64_t> offsets(nc + 1, 0);
    std::vector<int> members;
    std::vector<int> owner(nc, -1);
    if (kind == LayoutKind::BlockAlignedDiagonal2Din3D) {
      build_diamond(offsets, members, owner);
    } else {
      build_intervals(offsets, members, owner);
    }
    window_ = static_cast<std::int64_t>(s_) * key_span_;
    const bool rows = kind == LayoutKind::Row2D || kind == LayoutKind::Row3D;
    idx_in_.assign(nc, -1);
    idx_out_.assign(nc, -1);
    finish(offsets, members, owner, rows);
  }

  std::int64_t cell_of(const Vertex& x) const override {
    std::int64_t c = 0;
    for (int i = 1; i <= dims_; ++i) c += x.c[i] * stride_[static_cast<std::size_t>(i - 1)];
    return c;
  }
  std::int64_t tau_of(const Vertex& x) const override { return x.c[0]; }
  Vertex vertex_at(std::int64_t cell, std::int64_t tau) const override {
    Vertex x(dims_ + 1);
    x.c[0] = tau;
    for (int i = 1; i <= dims_; ++i) {
      x.c[i] = cell % g_.side(i);
      cell /= g_.side(i);
    }
    return x;
  }

  void addresses(const Vertex* xs, std::size_t count, Layer layer, Address* out) const override {
    for (std::size_t i = 0; i < count; ++i) out[i] = address(xs[i], layer);
  }

  std::int64_t rank(const Stream& st, std::int64_t cell, std::int64_t tau) const override {
    const std::int64_t idx = (st.layer == Layer::In ? idx_in_ : idx_out_)[static_cast<std::size_t>(cell)];
    if (st.rows) return idx * ntau_ + tau;
    return tau * static_cast<std::int64_t>(st.cells.size()) + idx;
  }

  std::pair<std::int64_t, std::int64_t> element(const Stream& st, std::int64_t r) const override {
    if (st.rows) return {st.cells[static_cast<std::size_t>(r / ntau_)], r % ntau_};
    const auto S = static_cast<std::int64_t>(st.cells.size());
    return {st.cells[static_cast<std::size_t>(r % S)], r / S};
  }

  // Diamond tiling only: lattice basis of band centres in (x2, x3).
  std::array<std::int64_t, 4> diamond_basis() const { return {r_, r_ + 1, r_ + 1, -r_}; }

 protected:
  void index_stream(Stream& st) override {
    auto& idx = st.layer == Layer::In ? idx_in_ : idx_out_;
    for (std::size_t i = 0; i < st.cells.size(); ++i) idx[static_cast<std::size_t>(st.cells[i])] = static_cast<std::int64_t>(i);
    st.length = static_cast<std::int64_t>(st.cells.size()) * ntau_;
  }

 private:
  void build_intervals(std::vector<std::int64_t>& offsets, std::vector<int>& members, std::vector<int>& owner) {
    std::vector<detail::IntervalTiling> tiles;
    for (int i = 1; i <= dims_; ++i) tiles.emplace_back(g_.side(i), m_, s_);
    // Band id is row-major over (j2, ..., jn): origins ascend lexicographically.
    std::int64_t nb = 1;
    for (auto& t : tiles) nb *= t.count;
    bands_.assign(static_cast<std::size_t>(nb), {});
    for (std::int64_t b = 0; b < nb; ++b) {
      std::int64_t rem = b;
      Band& band = bands_[static_cast<std::size_t>(b)];
      band.origin.assign(static_cast<std::size_t>(dims_), 0);
      for (int i = dims_ - 1; i >= 0; --i) {
        const auto& t = tiles[static_cast<std::size_t>(i)];
        const std::int64_t j = rem % t.count;
        rem /= t.count;
        band.origin[static_cast<std::size_t>(i)] = t.start(j);
        band.partial = band.partial || t.partial(j);
      }
    }
    key_span_ = ncells_;
    std::vector<std::int64_t> lo(static_cast<std::size_t>(dims_)), hi(static_cast<std::size_t>(dims_)), cur(static_cast<std::size_t>(dims_));
    for (std::int64_t c = 0; c < ncells_; ++c) {
      key_[static_cast<std::size_t>(c)] = c;
      std::int64_t rem = c;
      std::int64_t own = 0;
      for (int i = 0; i < dims_; ++i) {
        const auto& t = tiles[static_cast<std::size_t>(i)];
        const std::int64_t x = rem % t.k;
        rem /= t.k;
        lo[static_cast<std::size_t>(i)] = t.first_member(x);
        hi[static_cast<std::size_t>(i)] = t.last_member(x);
        cur[static_cast<std::size_t>(i)] = t.owner(x);
      }
      for (int i = 0; i < dims_; ++i) own = own * tiles[static_cast<std::size_t>(i)].count + cur[static_cast<std::size_t>(i)];
      owner[static_cast<std::size_t>(c)] = static_cast<int>(own);
      // Cartesian product of member ranges, in ascending band id.
      cur = lo;
      while (true) {
        std::int64_t id = 0;
        for (int i = 0; i < dims_; ++i) id = id * tiles[static_cast<std::size_t>(i)].count + cur[static_cast<std::size_t>(i)];
        members.push_back(static_cast<int>(id));
        int i = dims_ - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == hi[static_cast<std::size_t>(i)]) {
          cur[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
          --i;
        }
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
      }
      offsets[static_cast<std::size_t>(c) + 1] = static_cast<std::int64_t>(members.size());
    }
  }

  // l1 balls of radius m centred on the lattice spanned by (r, r+1) and (r+1, -r),
  // r = m - s; the radius-r balls tile the plane exactly, so ownership is unique.
  void build_diamond(std::vector<std::int64_t>& offsets, std::vector<int>& members, std::vector<int>& owner) {
    r_ = m_ - s_;
    if (r_ < 1) fail(ErrorCode::UnusableConfiguration, "sweep shape radius below the stencil");
    const std::int64_t k2 = g_.side(1), k3 = g_.side(2);
    const std::int64_t ux = r_, uy = r_ + 1, vx = r_ + 1, vy = -r_;
    const std::int64_t det = ux * vy - uy * vx;  // -(2r^2+2r+1)
    auto lattice_coords = [&](double px, double py) {
      // Solve (px, py) = i*u + j*v.
      double i = (px * vy - py * vx) / static_cast<double>(det);
      double j = (ux * py - uy * px) / static_cast<double>(det);
      return std::pair<double, double>(i, j);
    };
    double imin = 1e300, imax = -1e300, jmin = 1e300, jmax = -1e300;
    for (double px : {static_cast<double>(-m_), static_cast<double>(k2 + m_)})
      for (double py : {static_cast<double>(-m_), static_cast<double>(k3 + m_)}) {
        auto [i, j] = lattice_coords(px, py);
        imin = std::min(imin, i), imax = std::max(imax, i), jmin = std::min(jmin, j), jmax = std::max(jmax, j);
      }
    const std::int64_t i0 = static_cast<std::int64_t>(std::floor(imin)) - 1, i1 = static_cast<std::int64_t>(std::ceil(imax)) + 1;
    const std::int64_t j0 = static_cast<std::int64_t>(std::floor(jmin)) - 1, j1 = static_cast<std::int64_t>(std::ceil(jmax)) + 1;
    struct Centre {
      std::int64_t x, y;
    };
    std::vector<Centre> centres;
    for (std::int64_t i = i0; i <= i1; ++i)
      for (std::int64_t j = j0; j <= j1; ++j) {
        const std::int64_t ox = i * ux + j * vx, oy = i * uy + j * vy;
        const std::int64_t dx = std::max<std::int64_t>({0, -ox, ox - (k2 - 1)});
        const std::int64_t dy = std::max<std::int64_t>({0, -oy, oy - (k3 - 1)});
        if (dx + dy <= m_) centres.push_back({ox, oy});
      }
    std::sort(centres.begin(), centres.end(), [](const Centre& a, const Centre& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    bands_.assign(centres.size(), {});
    std::map<std::pair<std::int64_t, std::int64_t>, int> id_of;
    for (std::size_t b = 0; b < centres.size(); ++b) {
      bands_[b].origin = {centres[b].x, centres[b].y};
      bands_[b].partial = centres[b].x - m_ < 0 || centres[b].x + m_ >= k2 || centres[b].y - m_ < 0 || centres[b].y + m_ >= k3;
      id_of[{centres[b].x, centres[b].y}] = static_cast<int>(b);
    }
    key_span_ = (k2 + k3 - 1) * (k2 + k3);
    std::vector<int> list;
    for (std::int64_t c = 0; c < ncells_; ++c) {
      const std::int64_t x = c % k2, y = c / k2;
      key_[static_cast<std::size_t>(c)] = (x - y + k3 - 1) * (k2 + k3) + (x + y);
      auto [fi, fj] = lattice_coords(static_cast<double>(x), static_cast<double>(y));
      list.clear();
      for (std::int64_t i = static_cast<std::int64_t>(std::floor(fi)) - 2; i <= static_cast<std::int64_t>(std::floor(fi)) + 3; ++i)
        for (std::int64_t j = static_cast<std::int64_t>(std::floor(fj)) - 2; j <= static_cast<std::int64_t>(std::floor(fj)) + 3; ++j) {
          const std::int64_t ox = i * ux + j * vx, oy = i * uy + j * vy;
          const std::int64_t d = std::llabs(x - ox) + std::llabs(y - oy);
          if (d > m_) continue;
          const int id = id_of.at({ox, oy});
          list.push_back(id);
          if (d <= r_) owner[static_cast<std::size_t>(c)] = id;
        }
      std::sort(list.begin(), list.end());
      members.insert(members.end(), list.begin(), list.end());
      offsets[static_cast<std::size_t>(c) + 1] = static_cast<std::int64_t>(members.size());
    }
  }

  int dims_ = 0;
  std::array<std::int64_t, kMaxDim> stride_{};
  std::int64_t r_ = 0;
  std::vector<std::int64_t> idx_in_, idx_out_;
};

}  // namespace stencilio
