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
#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stencilio/layout.hpp"

namespace stencilio {
namespace {

struct Case {
  LayoutKind kind;
  std::vector<std::int64_t> sides;
  int s;
  std::int64_t m;
  std::int64_t B;
};

std::vector<Case> small_cases() {
  std::vector<Case> out;
  for (int s : {1, 2})
    for (std::int64_t B : {1, 3, 4}) {
      const std::int64_t m = 4 * s + 2;
      out.push_back({LayoutKind::Row2D, {23, 19}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedColumn2D, {23, 19}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedDiagonal2D, {23, 19}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedDiagonal2D, {9, 30}, s, m, B});
      out.push_back({LayoutKind::Row3D, {7, 17, 15}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedColumnPole3D, {7, 17, 15}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedDiagonal2Din3D, {7, 17, 15}, s, m, B});
      out.push_back({LayoutKind::HexagonalAlignedDiagonal3D, {11, 13, 12}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedColumnND, {6, 17, 15}, s, m, B});
      out.push_back({LayoutKind::BlockAlignedColumnND, {5, 11, 12, 10}, s, m, B});
    }
  return out;
}

std::string name(const Case& c) {
  std::string out = std::string(to_string(c.kind)) + " s=" + std::to_string(c.s) + " B=" + std::to_string(c.B);
  for (auto k : c.sides) out += " " + std::to_string(k);
  return out;
}

// Each layer is an injection into its own block range; streams are block-aligned and disjoint.
TEST(Layout, AddressesAreInjectiveAndBlockAligned) {
  for (const Case& c : small_cases()) {
    const GridSpec g(c.sides);
    const auto L = build_layout(c.kind, g, c.s, c.m, c.B);
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (std::int64_t i = 0; i < g.vertex_count(); ++i) {
      const Vertex x = g.delinearize(i);
      const Address in = L->address(x, Layer::In), out = L->address(x, Layer::Out);
      ASSERT_GE(in.block, 0) << name(c);
      ASSERT_LT(in.block, L->input_blocks()) << name(c);
      ASSERT_GE(out.block, L->input_blocks()) << name(c);
      ASSERT_LT(out.block, L->block_count()) << name(c);
      ASSERT_TRUE(in.offset >= 0 && in.offset < c.B && out.offset >= 0 && out.offset < c.B) << name(c);
      ASSERT_TRUE(seen.insert({in.block, in.offset}).second) << name(c) << " " << x.str();
      ASSERT_TRUE(seen.insert({out.block, out.offset}).second) << name(c) << " " << x.str();
    }
    std::int64_t next = 0;
    bool outputs = false;
    for (const auto& st : L->streams()) {
      if (st.layer == Layer::Out) outputs = true;
      EXPECT_EQ(st.layer == Layer::Out, outputs) << name(c) << ": input stream after an output stream";
      EXPECT_EQ(st.first_block, next) << name(c);
      EXPECT_EQ(st.blocks, (st.length + c.B - 1) / c.B) << name(c);
      next += st.blocks;
    }
    EXPECT_EQ(next, L->block_count()) << name(c);
  }
}

TEST(Layout, RankElementInverse) {
  for (const Case& c : small_cases()) {
    const auto L = build_layout(c.kind, GridSpec(c.sides), c.s, c.m, c.B);
    for (const auto& st : L->streams())
      for (std::int64_t r = 0; r < st.length; ++r) {
        const auto [cell, tau] = L->element(st, r);
        ASSERT_TRUE(L->valid(cell, tau)) << name(c);
        ASSERT_EQ(L->rank(st, cell, tau), r) << name(c);
      }
  }
}

// Every stencil neighbour lies within window() sweep positions.
TEST(Layout, NeighboursWithinWindow) {
  for (const Case& c : small_cases()) {
    const GridSpec g(c.sides);
    const StencilSpec st(c.s);
    const auto L = build_layout(c.kind, g, c.s, c.m, c.B);
    for (std::int64_t i = 0; i < g.vertex_count(); ++i) {
      const Vertex x = g.delinearize(i);
      const std::int64_t cx = L->cell_of(x), tx = L->tau_of(x);
      ASSERT_EQ(L->vertex_at(cx, tx), x) << name(c);
      const std::int64_t p = L->pos(cx, tx);
      for (const Vertex& y : stencil_neighbors(g, st, x)) {
        const std::int64_t q = L->pos(L->cell_of(y), L->tau_of(y));
        ASSERT_LE(std::llabs(p - q), L->window()) << name(c) << " " << x.str() << " -> " << y.str();
      }
    }
  }
}

// Each vertex is owned by exactly one band, and the bands' input streams contain it.
TEST(Layout, OwnershipPartitionsCells) {
  for (const Case& c : small_cases()) {
    const auto L = build_layout(c.kind, GridSpec(c.sides), c.s, c.m, c.B);
    std::vector<int> owners(static_cast<std::size_t>(L->cell_count()), 0);
    std::int64_t owned = 0;
    for (const BandTile& t : working_band_tiling(*L)) {
      owned += t.owned_cells;
      for (int r = 0; r < L->period(); ++r)
        for (std::int64_t cell : L->owned_cells(t.id, r)) {
          ++owners[static_cast<std::size_t>(cell)];
          const auto& bands = L->streams()[static_cast<std::size_t>(L->stream_of(cell, Layer::In))].bands;
          EXPECT_TRUE(std::binary_search(bands.begin(), bands.end(), t.id)) << name(c);
        }
    }
    std::int64_t valid = 0;
    for (std::int64_t cell = 0; cell < L->cell_count(); ++cell)
      if (L->tau_lo(cell) <= L->tau_hi(cell)) {
        ++valid;
        EXPECT_EQ(owners[static_cast<std::size_t>(cell)], 1) << name(c) << " cell " << cell;
      }
    EXPECT_EQ(owned, valid) << name(c);
  }
}

TEST(Layout, RejectsTooSmallShape) {
  const GridSpec g({40, 40});
  EXPECT_THROW(build_layout(LayoutKind::BlockAlignedDiagonal2D, g, 1, 4, 4), Error);
  EXPECT_NO_THROW(build_layout(LayoutKind::BlockAlignedDiagonal2D, g, 1, 5, 4));
  EXPECT_THROW(build_layout(LayoutKind::HexagonalAlignedDiagonal3D, g, 1, 9, 4), Error);
  EXPECT_THROW(build_layout(LayoutKind::Row2D, GridSpec({40, 40}, Topology::Torus), 1, 9, 4), Error);
}

// Capacity-search sizes at the experiment parameters (M=4096, B=16 in 2D; M=6144, B=8 in 3D).
TEST(SweepShapeSize, FrozenSearchAndClosedForm) {
  struct Row {
    LayoutKind kind;
    int s;
    std::int64_t search, closed;
  };
  const Row rows[] = {
      {LayoutKind::Row2D, 1, 126, 220},
      {LayoutKind::BlockAlignedColumn2D, 1, 1987, 1973},
      {LayoutKind::BlockAlignedColumn2D, 2, 991, 985},
      {LayoutKind::BlockAlignedDiagonal2D, 1, 1985, 1974},
      {LayoutKind::BlockAlignedDiagonal2D, 2, 995, 986},
      {LayoutKind::Row3D, 1, 19, 21},
      {LayoutKind::BlockAlignedColumnPole3D, 1, 54, 49},
      {LayoutKind::BlockAlignedDiagonal2Din3D, 1, 37, 36},
      {LayoutKind::HexagonalAlignedDiagonal3D, 1, 30, 29},
      {LayoutKind::HexagonalAlignedDiagonal3D, 2, 21, 20},
  };
  for (const Row& r : rows) {
    const int n = kind_supports_dimension(r.kind, 2) ? 2 : 3;
    const std::int64_t M = n == 2 ? 4096 : 6144, B = n == 2 ? 16 : 8;
    EXPECT_EQ(search_m(r.kind, n, r.s, M, B), r.search) << to_string(r.kind);
    EXPECT_EQ(closed_form_m(r.kind, n, r.s, M, B), r.closed) << to_string(r.kind);
    const auto closed = sweep_shape_size(r.kind, n, r.s, M, B, SizeDerivation::ClosedForm);
    EXPECT_EQ(closed.derivation, SizeDerivation::ClosedForm);
    EXPECT_EQ(closed.m, r.closed);
  }
  EXPECT_EQ(search_m(LayoutKind::BlockAlignedColumnND, 2, 1, 4096, 16), 1987);
  EXPECT_EQ(search_m(LayoutKind::BlockAlignedColumnND, 4, 1, 32768, 4), 25);
  EXPECT_THROW(closed_form_m(LayoutKind::BlockAlignedColumnND, 4, 1, 32768, 4), Error);
  EXPECT_EQ(sweep_shape_size(LayoutKind::BlockAlignedColumnND, 3, 1, 6144, 8, SizeDerivation::ClosedForm).derivation,
            SizeDerivation::CapacitySearch);
}

// The search returns the largest fitting m.
TEST(SweepShapeSize, SearchIsMaximal) {
  for (LayoutKind k : kAllLayoutKinds)
    for (int s : {1, 2})
      for (std::int64_t M : {700, 3000}) {
        const int n = kind_supports_dimension(k, 2) ? 2 : 3;
        const std::int64_t B = 4;
        std::int64_t m = 0;
        try {
          m = search_m(k, n, s, M, B);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::UnusableConfiguration);
          EXPECT_FALSE(fits(k, n, s, 4 * s + 1, M, B));
          continue;
        }
        EXPECT_TRUE(fits(k, n, s, m, M, B)) << to_string(k);
        EXPECT_FALSE(fits(k, n, s, m + 1, M, B)) << to_string(k);
      }
}

TEST(SweepShapeSize, AnalyticFootprintMatchesMeasured) {
  for (LayoutKind k : {LayoutKind::Row2D, LayoutKind::BlockAlignedColumn2D, LayoutKind::Row3D,
                       LayoutKind::BlockAlignedColumnPole3D, LayoutKind::BlockAlignedColumnND})
    for (int s : {1, 2})
      for (std::int64_t m : {4 * s + 1, 4 * s + 4, 4 * s + 9})
        for (std::int64_t B : {1, 4, 16}) {
          const int n = kind_supports_dimension(k, 2) ? 2 : 3;
          EXPECT_EQ(footprint_blocks(k, n, s, m, B), measured_footprint_blocks(k, n, s, m, B))
              << to_string(k) << " s=" << s << " m=" << m << " B=" << B;
        }
}

TEST(SizeDerivation, Parse) {
  EXPECT_EQ(parse_size_derivation("closed"), SizeDerivation::ClosedForm);
  EXPECT_EQ(parse_size_derivation("search"), SizeDerivation::CapacitySearch);
  EXPECT_THROW(parse_size_derivation("guess"), Error);
}

TEST(HexLattice, FrozenLattices) {
  const std::pair<std::int64_t, std::int64_t> want[] = {{9, 677}, {16, 2210}, {30, 7922}};
  for (auto [m, det] : want) {
    const hex::Lattice L = hex::find_lattice(m, 1);
    EXPECT_EQ(L.det, det) << m;
    EXPECT_EQ(std::llabs(L.v1.first * L.v2.second - L.v1.second * L.v2.first), det);
    const auto F = hex::footprint(m);
    EXPECT_TRUE(hex::covers(hex::eligible(F, 1), L));
  }
}

// The projection equals the image of the 3D s-star under (d1 - d3, d2 - d3).
TEST(HexLattice, ProjectionOfStencil) {
  EXPECT_EQ(hexagonal_projection(1).size(), 7u);
  for (int s = 1; s <= 4; ++s) {
    std::set<std::pair<std::int64_t, std::int64_t>> want;
    for (const Vertex& d : ball_offsets(3, s)) want.emplace(d.c[0] - d.c[2], d.c[1] - d.c[2]);
    const auto got = hexagonal_projection(s, {3, -2});
    std::set<std::pair<std::int64_t, std::int64_t>> shifted;
    for (auto [a, b] : got) shifted.emplace(a - 3, b + 2);
    EXPECT_EQ(shifted.size(), got.size());
    EXPECT_EQ(shifted, want) << "s=" << s;
  }
}

// Frozen export of a small diagonal layout.
TEST(LayoutExport, Golden) {
  const auto L = build_layout(LayoutKind::BlockAlignedDiagonal2D, GridSpec({7, 6}), 1, 5, 2);
  std::ostringstream got;
  export_layout_csv(*L, got);
  std::ifstream in(std::string(STENCILIO_SOURCE_DIR) + "/tests/golden/diagonal2d_7x6_m5_b2.csv");
  ASSERT_TRUE(in) << "golden file missing";
  std::stringstream want;
  want << in.rdbuf();
  EXPECT_EQ(got.str(), want.str());
  std::ostringstream again;
  export_layout_csv(*build_layout(LayoutKind::BlockAlignedDiagonal2D, GridSpec({7, 6}), 1, 5, 2), again);
  EXPECT_EQ(again.str(), got.str());
}

}  // namespace
}  // namespace stencilio
