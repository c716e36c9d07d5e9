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

#include <cstdlib>
#include <random>
#include <set>

#include "stencilio/grid.hpp"

namespace stencilio {
namespace {

TEST(GridSpec, LinearizeRoundTrip) {
  const GridSpec g({3, 5, 4});
  EXPECT_EQ(g.vertex_count(), 60);
  for (std::int64_t i = 0; i < g.vertex_count(); ++i) EXPECT_EQ(g.linearize(g.delinearize(i)), i);
  EXPECT_EQ(g.linearize(Vertex{0, 0, 1}), 1);  // last coordinate fastest
  EXPECT_EQ(g.linearize(Vertex{1, 0, 0}), 20);
}

TEST(GridSpec, RejectsBadInput) {
  EXPECT_THROW(GridSpec({}), Error);
  EXPECT_THROW(GridSpec({4, 0}), Error);
  EXPECT_THROW(GridSpec({std::int64_t{1} << 40, std::int64_t{1} << 40}), Error);
  const GridSpec g({4, 4});
  EXPECT_THROW(g.linearize(Vertex{4, 0}), Error);
  EXPECT_THROW(g.delinearize(16), Error);
  EXPECT_THROW(StencilSpec(0), Error);
  EXPECT_THROW(StencilSpec(2).validate_for(g), Error);
  EXPECT_NO_THROW(StencilSpec(1).validate_for(g));
}

TEST(GridSpec, CanonicalOrder) {
  EXPECT_TRUE(GridSpec({9, 7, 7}).has_canonical_order());
  EXPECT_FALSE(GridSpec({7, 9}).has_canonical_order());
}

// |ball_offsets(n, s)| equals the l1 ball weight: 5, 13, 7, 25 for (2,1), (2,2), (3,1), (3,2).
TEST(Stencil, BallOffsetCounts) {
  EXPECT_EQ(ball_offsets(2, 1).size(), 5u);
  EXPECT_EQ(ball_offsets(2, 2).size(), 13u);
  EXPECT_EQ(ball_offsets(3, 1).size(), 7u);
  EXPECT_EQ(ball_offsets(3, 2).size(), 25u);
  for (const Vertex& d : ball_offsets(3, 2)) {
    std::int64_t norm = 0;
    for (int i = 0; i < 3; ++i) norm += std::llabs(d.c[i]);
    EXPECT_LE(norm, 2);
  }
}

// Neighbourhoods against a scan of the whole grid.
TEST(Stencil, NeighborsMatchDistanceScan) {
  std::mt19937_64 rng(3);
  for (Topology topo : {Topology::Grid, Topology::Torus})
    for (int s : {1, 2}) {
      const GridSpec g({7, 6, 5}, topo);
      const StencilSpec st(s);
      for (int trial = 0; trial < 20; ++trial) {
        const Vertex x = g.delinearize(static_cast<std::int64_t>(rng() % 210));
        std::vector<Vertex> want;
        for (std::int64_t i = 0; i < g.vertex_count(); ++i)
          if (l1_distance(g, x, g.delinearize(i)) <= s) want.push_back(g.delinearize(i));
        EXPECT_EQ(stencil_neighbors(g, st, x), want) << x.str();
      }
    }
}

TEST(Stencil, BoundaryVertexLosesOutsideNeighbours) {
  const GridSpec g({5, 5});
  EXPECT_EQ(stencil_neighbors(g, StencilSpec(1), Vertex{0, 0}).size(), 3u);
  EXPECT_EQ(stencil_neighbors(g, StencilSpec(1), Vertex{2, 2}).size(), 5u);
  const GridSpec t({5, 5}, Topology::Torus);
  EXPECT_EQ(stencil_neighbors(t, StencilSpec(1), Vertex{0, 0}).size(), 5u);
}

TEST(Stencil, TorusDistanceWraps) {
  const GridSpec t({8, 8}, Topology::Torus);
  EXPECT_EQ(l1_distance(t, Vertex{0, 0}, Vertex{7, 7}), 2);
  const GridSpec g({8, 8});
  EXPECT_EQ(l1_distance(g, Vertex{0, 0}, Vertex{7, 7}), 14);
}

}  // namespace
}  // namespace stencilio
