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

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"
#include "stencilio/kinds.hpp"
#include "stencilio/layout_base.hpp"
#include "stencilio/layout_cross.hpp"
#include "stencilio/layout_diag.hpp"
#include "stencilio/layout_hex.hpp"

namespace stencilio {

enum class SizeDerivation { ClosedForm, CapacitySearch };

inline const char* to_string(SizeDerivation d) { return d == SizeDerivation::ClosedForm ? "closed" : "search"; }

inline SizeDerivation parse_size_derivation(const std::string& s) {
  if (s == "closed") return SizeDerivation::ClosedForm;
  if (s == "search") return SizeDerivation::CapacitySearch;
  fail(ErrorCode::InvalidArgument, "unknown m mode '" + s + "'");
}

struct SweepShapeSize {
  std::int64_t m = 0;
  SizeDerivation derivation = SizeDerivation::CapacitySearch;
};

inline std::unique_ptr<Layout> build_layout(LayoutKind kind, const GridSpec& g, int s, std::int64_t m, std::int64_t B) {
  require_dimension(kind, g.n());
  if (m < 4 * static_cast<std::int64_t>(s) + 1)
    fail(ErrorCode::UnusableConfiguration, "sweep shape parameter m=" + std::to_string(m) + " below 4s+1");
  switch (kind) {
    case LayoutKind::BlockAlignedDiagonal2D: return std::make_unique<DiagonalLayout>(g, s, m, B);
    case LayoutKind::HexagonalAlignedDiagonal3D: return std::make_unique<HexLayout>(g, s, m, B);
    default: return std::make_unique<CrossSectionLayout>(kind, g, s, m, B);
  }
}

namespace detail {

inline bool interval_kind(LayoutKind k) {
  return k == LayoutKind::Row2D || k == LayoutKind::BlockAlignedColumn2D || k == LayoutKind::Row3D ||
         k == LayoutKind::BlockAlignedColumnPole3D || k == LayoutKind::BlockAlignedColumnND;
}

inline bool row_kind(LayoutKind k) { return k == LayoutKind::Row2D || k == LayoutKind::Row3D; }

inline std::int64_t ceil_pos(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Interval kinds: every interior band splits each cross-section axis into a 2s wing,
// an m-4s core and a 2s wing; streams are the products of these segments.
inline std::int64_t interval_footprint_blocks(LayoutKind kind, int n, int s, std::int64_t m, std::int64_t B) {
  const int d = n - 1;
  const std::int64_t seg[3] = {2 * static_cast<std::int64_t>(s), m - 4 * static_cast<std::int64_t>(s), 2 * static_cast<std::int64_t>(s)};
  std::int64_t combos = 1;
  for (int i = 0; i < d; ++i) combos *= 3;
  std::int64_t blocks = combos;  // one block per owned output stream
  if (row_kind(kind)) {
    std::int64_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= m;
    return blocks + cells * (ceil_pos(2 * s + 1, B) + 1);
  }
  for (std::int64_t c = 0; c < combos; ++c) {
    std::int64_t S = 1, rem = c;
    for (int i = 0; i < d; ++i) {
      S *= seg[rem % 3];
      rem /= 3;
    }
    blocks += ceil_pos(2 * s * S + 1, B) + 1;
  }
  return blocks;
}

// Builds the kind on a grid large enough to contain an interior band and measures it.
inline std::int64_t virtual_footprint_blocks(LayoutKind kind, int n, int s, std::int64_t m, std::int64_t B) {
  const std::int64_t sl = s;
  switch (kind) {
    case LayoutKind::BlockAlignedDiagonal2D: {
      const std::int64_t K = 6 * m + 8 * sl;
      DiagonalLayout L(GridSpec({K, K}), s, m, B);
      const std::int64_t span = 2 * sl + 2 + L.period();
      std::int64_t best = 0;
      for (int b = 0; b < static_cast<int>(L.bands().size()); ++b)
        best = std::max(best, L.band_footprint_blocks(b, K - 1 - span / 2, span));
      return best;
    }
    case LayoutKind::HexagonalAlignedDiagonal3D: {
      const std::int64_t K = 6 * m + 4 * sl + 12;
      HexLayout L(GridSpec({K, K, K}), s, m, B);
      const std::int64_t span = 2 * sl + 2 + L.period();
      for (int b = 0; b < static_cast<int>(L.bands().size()); ++b)
        if (L.bands()[static_cast<std::size_t>(b)].origin == std::vector<std::int64_t>{0, 0})
          return L.band_footprint_blocks(b, 3 * K / 2 - span / 2, span);
      fail(ErrorCode::UnusableConfiguration, "no central hexagonal band");
    }
    default: {
      std::vector<std::int64_t> sides(static_cast<std::size_t>(n));
      const std::int64_t span = 2 * sl + 3;
      sides[0] = span;
      for (int i = 1; i < n; ++i) sides[static_cast<std::size_t>(i)] = kind == LayoutKind::BlockAlignedDiagonal2Din3D ? 5 * m : 3 * (m - 2 * sl);
      CrossSectionLayout L(kind, GridSpec(sides), s, m, B);
      std::int64_t best = 0;
      for (int b = 0; b < static_cast<int>(L.bands().size()); ++b) best = std::max(best, L.band_footprint_blocks(b, 0, span));
      return best;
    }
  }
}

}  // namespace detail

// Sizes of the shared input groups of an interior working band: the largest group shared by
// exactly two bands, the largest shared by three or more, and the band's total in the latter.
struct WingGroups {
  std::int64_t two = 0;
  std::int64_t more = 0;
  std::int64_t more_total = 0;
};

inline WingGroups interior_wing_groups(LayoutKind kind, int s, std::int64_t m, std::int64_t B) {
  const std::int64_t sl = s;
  std::unique_ptr<Layout> L;
  std::vector<std::int64_t> centre;
  if (kind == LayoutKind::HexagonalAlignedDiagonal3D) {
    const std::int64_t K = 6 * m + 4 * sl + 12;
    L = std::make_unique<HexLayout>(GridSpec({K, K, K}), s, m, B);
    centre = {0, 0};
  } else if (kind == LayoutKind::BlockAlignedDiagonal2Din3D) {
    const std::int64_t K = 5 * m;
    L = std::make_unique<CrossSectionLayout>(kind, GridSpec({2 * sl + 3, K, K}), s, m, B);
    centre = {K / 2, K / 2};
  } else {
    fail(ErrorCode::InvalidArgument, "wing groups are tabulated for the l1-ball and hexagonal kinds only");
  }
  int best = -1;
  std::int64_t best_d = INT64_MAX;
  for (int b = 0; b < static_cast<int>(L->bands().size()); ++b) {
    const auto& o = L->bands()[static_cast<std::size_t>(b)].origin;
    const std::int64_t d = std::llabs(o[0] - centre[0]) + std::llabs(o[1] - centre[1]);
    if (d < best_d) best_d = d, best = b;
  }
  WingGroups w;
  for (int sid : L->band_inputs(best)) {
    const auto& st = L->streams()[static_cast<std::size_t>(sid)];
    const auto n = static_cast<std::int64_t>(st.cells.size());
    if (st.bands.size() == 2) {
      w.two = std::max(w.two, n);
    } else if (st.bands.size() > 2) {
      w.more = std::max(w.more, n);
      w.more_total += n;
    }
  }
  return w;
}

// Blocks an interior working band keeps resident at once: input units within the stencil
// window of the current vertex, plus one block per output stream the band owns.
inline std::int64_t footprint_blocks(LayoutKind kind, int n, int s, std::int64_t m, std::int64_t B) {
  require_dimension(kind, n);
  if (detail::interval_kind(kind)) return detail::interval_footprint_blocks(kind, n, s, m, B);
  return detail::virtual_footprint_blocks(kind, n, s, m, B);
}

// Same quantity, always measured on a concrete layout. Used to cross-check the analytic count.
inline std::int64_t measured_footprint_blocks(LayoutKind kind, int n, int s, std::int64_t m, std::int64_t B) {
  return detail::virtual_footprint_blocks(kind, n, s, m, B);
}

inline bool fits(LayoutKind kind, int n, int s, std::int64_t m, std::int64_t M, std::int64_t B) {
  return footprint_blocks(kind, n, s, m, B) * B <= M;
}

// Closed-form sweep-shape parameter. The n-D kind has none; its size always comes from the search.
inline std::int64_t closed_form_m(LayoutKind kind, int n, int s, std::int64_t M, std::int64_t B) {
  require_dimension(kind, n);
  const double sd = s, Md = static_cast<double>(M), Bd = static_cast<double>(B);
  double m = 0;
  switch (kind) {
    case LayoutKind::Row2D: {
      const double cp = 3 + 2 + 4 * sd;
      m = (Md - cp * Bd + 8 * sd * sd) / (Bd + 2 * sd);
      break;
    }
    case LayoutKind::BlockAlignedColumn2D: m = (Md - 9 * Bd - 5 * sd) / (2 * sd); break;
    case LayoutKind::BlockAlignedDiagonal2D: m = (Md - 9 * Bd - 3 * sd) / (2 * sd); break;
    case LayoutKind::Row3D: {
      const double r = Md - 32 * sd * sd * sd - 2 * Bd - 9 * Bd;
      if (r < 0) fail(ErrorCode::UnusableConfiguration, "M too small for Row3D");
      m = (std::sqrt(r) - 4 * sd * Bd / std::sqrt(Bd + 2 * sd)) / std::sqrt(Bd + 2 * sd);
      break;
    }
    case LayoutKind::BlockAlignedColumnPole3D: {
      const double r = Md - 27 * Bd;
      if (r < 0) fail(ErrorCode::UnusableConfiguration, "M too small for BlockAlignedColumnPole3D");
      m = (std::sqrt(r) - 9 * std::sqrt(sd) / std::sqrt(2.0)) / std::sqrt(2 * sd);
      break;
    }
    case LayoutKind::BlockAlignedDiagonal2Din3D: {
      const double r = Md - 11 * sd - 27 * Bd;
      if (r < 0) fail(ErrorCode::UnusableConfiguration, "M too small for BlockAlignedDiagonal2Din3D");
      m = (std::sqrt(r) - 13 * std::sqrt(sd) / 4) / (2 * std::sqrt(sd));
      break;
    }
    case LayoutKind::HexagonalAlignedDiagonal3D: {
      const double r = Md * sd - sd * (2 * sd + kHexDpp * sd * sd + kHexCp * Bd);
      if (r < 0) fail(ErrorCode::UnusableConfiguration, "M too small for HexagonalAlignedDiagonal3D");
      m = (std::sqrt(r) - (6 * sd + kHexDp * sd) / (2 * std::sqrt(6.0))) / std::sqrt(6 * sd * sd);
      break;
    }
    case LayoutKind::BlockAlignedColumnND:
      fail(ErrorCode::InvalidArgument, "BlockAlignedColumnND has no closed-form sweep shape size");
  }
  const auto mi = static_cast<std::int64_t>(std::floor(m));
  if (mi < 4 * static_cast<std::int64_t>(s) + 1)
    fail(ErrorCode::UnusableConfiguration, "closed-form m=" + std::to_string(mi) + " below 4s+1");
  return mi;
}

// Largest m whose footprint fits in M.
inline std::int64_t search_m(LayoutKind kind, int n, int s, std::int64_t M, std::int64_t B) {
  const std::int64_t lo0 = 4 * static_cast<std::int64_t>(s) + 1;
  if (!fits(kind, n, s, lo0, M, B))
    fail(ErrorCode::UnusableConfiguration,
         "M=" + std::to_string(M) + " cannot hold the smallest sweep shape (m=" + std::to_string(lo0) + ")");
  std::int64_t lo = lo0, hi = lo0 + 1;
  while (fits(kind, n, s, hi, M, B)) {
    lo = hi;
    hi = lo0 + 2 * (hi - lo0) + 1;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (fits(kind, n, s, mid, M, B) ? lo : hi) = mid;
  }
  return lo;
}

inline SweepShapeSize sweep_shape_size(LayoutKind kind, int n, int s, std::int64_t M, std::int64_t B,
                                       SizeDerivation mode = SizeDerivation::CapacitySearch) {
  require_dimension(kind, n);
  if (s < 1) fail(ErrorCode::InvalidArgument, "s must be >= 1");
  MachineConfig cfg(M, B);
  if (mode == SizeDerivation::ClosedForm && kind != LayoutKind::BlockAlignedColumnND)
    return {closed_form_m(kind, n, s, M, B), SizeDerivation::ClosedForm};
  return {search_m(kind, n, s, M, B), SizeDerivation::CapacitySearch};
}

struct BandTile {
  int id = 0;
  std::vector<std::int64_t> origin;
  bool partial = false;
  std::int64_t owned_cells = 0;
};

// Working bands of the kind on g at sweep size m, in processing order.
inline std::vector<BandTile> working_band_tiling(const Layout& L) {
  std::vector<BandTile> out;
  for (int b = 0; b < static_cast<int>(L.bands().size()); ++b) {
    const auto& band = L.bands()[static_cast<std::size_t>(b)];
    BandTile t{b, band.origin, band.partial, 0};
    for (int r = 0; r < L.period(); ++r) t.owned_cells += static_cast<std::int64_t>(L.owned_cells(b, r).size());
    out.push_back(std::move(t));
  }
  return out;
}

// One line per (vertex, layer) in linear vertex order: coords, layer, band, block, offset.
inline void export_layout_csv(const Layout& L, std::ostream& os) {
  const GridSpec& g = L.grid();
  os << "vertex,layer,band,block,offset\n";
  for (std::int64_t i = 0; i < g.vertex_count(); ++i) {
    const Vertex x = g.delinearize(i);
    for (Layer layer : {Layer::In, Layer::Out}) {
      const Address a = L.address(x, layer);
      os << '"' << x.str() << "\"," << to_string(layer) << ',' << L.band_label(x, layer) << ',' << a.block << ','
         << a.offset << '\n';
    }
  }
}

}  // namespace stencilio
