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

#include <cmath>
#include <random>
#include <sstream>

#include "stencilio/bounds.hpp"
#include "stencilio/experiment.hpp"
#include "stencilio/sweeps.hpp"

namespace stencilio {
namespace {

struct Config {
  LayoutKind kind;
  std::vector<std::int64_t> sides;
  int s;
  std::int64_t M, B;
};

std::string label(const Config& c) {
  std::string out = std::string(to_string(c.kind)) + " s=" + std::to_string(c.s) + " M=" + std::to_string(c.M) +
                    " B=" + std::to_string(c.B);
  for (auto k : c.sides) out += " " + std::to_string(k);
  return out;
}

std::vector<Config> configs() {
  std::vector<Config> out = {
      {LayoutKind::Row2D, {40, 37}, 1, 600, 4},
      {LayoutKind::BlockAlignedColumn2D, {40, 37}, 1, 200, 4},
      {LayoutKind::BlockAlignedDiagonal2D, {40, 37}, 1, 200, 4},
      {LayoutKind::BlockAlignedDiagonal2D, {48, 48}, 2, 400, 4},
      {LayoutKind::BlockAlignedDiagonal2D, {17, 90}, 1, 96, 3},
      {LayoutKind::Row3D, {12, 30, 29}, 1, 3000, 4},
      {LayoutKind::BlockAlignedColumnPole3D, {12, 30, 29}, 1, 1200, 4},
      {LayoutKind::BlockAlignedDiagonal2Din3D, {12, 40, 39}, 1, 1200, 4},
      {LayoutKind::HexagonalAlignedDiagonal3D, {30, 31, 29}, 1, 1500, 4},
      {LayoutKind::HexagonalAlignedDiagonal3D, {30, 31, 29}, 2, 4000, 4},
      {LayoutKind::HexagonalAlignedDiagonal3D, {9, 40, 37}, 1, 900, 3},
      {LayoutKind::BlockAlignedColumnND, {8, 20, 21, 19}, 1, 5000, 4},
      {LayoutKind::BlockAlignedColumnND, {60, 55}, 2, 300, 4},
  };
  for (LayoutKind k : kAllLayoutKinds)
    for (std::uint64_t seed = 11; seed < 14; ++seed) {
      const ExperimentSpec e = random_oracle_spec(k, seed);
      out.push_back({k, e.sides, e.s, e.M, e.B});
    }
  return out;
}

TEST(Sweep, MatchesNaiveStencil) {
  for (const Config& c : configs()) {
    const GridSpec g(c.sides);
    const MachineConfig cfg(c.M, c.B);
    const SweepPlan plan = make_sweep_plan(c.kind, g, StencilSpec(c.s), cfg);
    const OracleComparison r = run_oracle_compare(plan, cfg, 5);
    EXPECT_TRUE(r.equal) << label(c) << " first mismatch " << (r.first_mismatch ? r.first_mismatch->str() : "");
    EXPECT_TRUE(r.report.complete) << label(c);
    EXPECT_LE(r.report.peak_footprint, c.M) << label(c);
    EXPECT_EQ(r.report.stats.compulsory_reads, plan.layout->input_blocks()) << label(c);
    EXPECT_EQ(r.report.stats.compulsory_writes, plan.layout->output_blocks()) << label(c);
    EXPECT_EQ(r.report.stats.evaluated_vertices, g.vertex_count()) << label(c);
    EXPECT_LE(static_cast<double>(r.report.stats.noncompulsory()), noncompulsory_ceiling(*plan.layout)) << label(c);
  }
}

TEST(Sweep, PeakWithinPlannedFootprint) {
  for (const Config& c : configs()) {
    const GridSpec g(c.sides);
    const MachineConfig cfg(c.M, c.B);
    const SweepPlan plan = make_sweep_plan(c.kind, g, StencilSpec(c.s), cfg);
    Machine m(g, StencilSpec(c.s), cfg, *plan.layout);
    EXPECT_LE(run_sweep(plan, m).peak_footprint, plan.footprint_blocks * c.B) << label(c);
  }
}

TEST(Sweep, DeterministicAndFidelityIndependent) {
  for (const Config& c : configs()) {
    const GridSpec g(c.sides);
    const StencilSpec st(c.s);
    const MachineConfig cfg(c.M, c.B);
    const SweepPlan plan = make_sweep_plan(c.kind, g, st, cfg);
    const SweepPlan twin = make_sweep_plan(c.kind, g, st, cfg);
    Machine a(g, st, cfg, *plan.layout, Fidelity::CountOnly);
    Machine b(g, st, cfg, *twin.layout, Fidelity::CountOnly);
    Machine full(g, st, cfg, *plan.layout, Fidelity::Full);
    full.set_input(std::vector<std::int64_t>(static_cast<std::size_t>(g.vertex_count()), 3));
    std::stringstream trace_a, trace_b;
    a.set_trace(&trace_a);
    b.set_trace(&trace_b);
    const IoStats sa = run_sweep(*plan.layout, a).stats;
    EXPECT_EQ(sa, run_sweep(twin, b).stats) << label(c);
    EXPECT_EQ(trace_a.str(), trace_b.str()) << label(c);
    EXPECT_EQ(sa, run_sweep(*plan.layout, full).stats) << label(c);
  }
}

TEST(Sweep, TraceReplays) {
  for (const Config& c : configs()) {
    const GridSpec g(c.sides);
    const StencilSpec st(c.s);
    const MachineConfig cfg(c.M, c.B);
    const SweepPlan plan = make_sweep_plan(c.kind, g, st, cfg);
    Machine m(g, st, cfg, *plan.layout);
    std::stringstream trace;
    m.set_trace(&trace);
    const RunReport r = run_sweep(plan, m);
    Machine again(g, st, cfg, *plan.layout);
    const RunReport back = replay_trace(trace, again);
    EXPECT_EQ(back.stats, r.stats) << label(c);
    EXPECT_EQ(back.complete, r.complete) << label(c);
  }
}

TEST(Sweep, RefusesForeignMachine) {
  const GridSpec g({40, 40});
  const MachineConfig cfg(200, 4);
  const SweepPlan plan = make_sweep_plan(LayoutKind::BlockAlignedDiagonal2D, g, StencilSpec(1), cfg);
  const DenseAddressMap dense(g, 4);
  Machine m(g, StencilSpec(1), cfg, dense);
  EXPECT_THROW(run_sweep(plan, m), Error);
}

TEST(SweepPlan, UnusableWhenMemoryTooSmall) {
  const GridSpec g({256, 256});
  try {
    make_sweep_plan(LayoutKind::BlockAlignedDiagonal2D, g, StencilSpec(1), MachineConfig(64, 16));
    FAIL() << "expected UnusableConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnusableConfiguration);
  }
}

// The diagonal ceiling written out by hand.
TEST(Ceiling, DiagonalMatchesHandFormula) {
  for (std::int64_t k1 : {100, 257, 1000})
    for (std::int64_t k2 : {90, 300})
      for (int s : {1, 2}) {
        const auto L = build_layout(LayoutKind::BlockAlignedDiagonal2D, GridSpec({k1, k2}), s, 20, 8);
        const double want =
            2 * std::ceil((std::ceil(static_cast<double>(k1) / (40 - 2 * s)) + 1) * 2 * s * static_cast<double>(k2) / 8);
        EXPECT_DOUBLE_EQ(noncompulsory_ceiling(*L), want);
      }
}

// Past a few bands the measured traffic is within the lower bound floor and the ceiling.
TEST(Sweep, MidScaleBetweenBounds) {
  const Config mid[] = {
      {LayoutKind::BlockAlignedDiagonal2D, {1024, 1024}, 1, 1024, 8},
      {LayoutKind::BlockAlignedColumn2D, {1024, 1024}, 1, 1024, 8},
      {LayoutKind::HexagonalAlignedDiagonal3D, {64, 64, 64}, 1, 2048, 8},
      {LayoutKind::BlockAlignedDiagonal2Din3D, {64, 64, 64}, 1, 2048, 8},
      {LayoutKind::BlockAlignedColumnPole3D, {64, 64, 64}, 1, 2048, 8},
  };
  for (const Config& c : mid) {
    const GridSpec g(c.sides);
    const MachineConfig cfg(c.M, c.B);
    const SweepPlan plan = make_sweep_plan(c.kind, g, StencilSpec(c.s), cfg);
    Machine m(g, StencilSpec(c.s), cfg, *plan.layout);
    const RunReport r = run_sweep(plan, m);
    const double N = static_cast<double>(g.vertex_count());
    const double nc = static_cast<double>(r.stats.noncompulsory());
    EXPECT_GE(nc, 0.75 * lower_bound_constant(g.n(), c.s, static_cast<double>(c.M)) * N / static_cast<double>(c.B))
        << label(c);
    EXPECT_LE(nc, noncompulsory_ceiling(*plan.layout)) << label(c);
  }
}

}  // namespace
}  // namespace stencilio
