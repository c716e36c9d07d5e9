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

#include <random>
#include <sstream>

#include "stencilio/machine.hpp"

namespace stencilio {
namespace {

// Whole grid resident: load every input block, allocate every output block, evaluate, write back.
RunReport in_core_run(Machine& m, const AddressMap& map) {
  for (std::int64_t b = 0; b < map.input_blocks(); ++b) m.load(b);
  for (std::int64_t b = 0; b < map.output_blocks(); ++b) m.allocate(map.input_blocks() + b);
  const GridSpec& g = m.grid();
  for (std::int64_t i = 0; i < g.vertex_count(); ++i) m.eval_stencil(g.delinearize(i));
  for (std::int64_t b = 0; b < map.block_count(); ++b) m.evict(b, b >= map.input_blocks());
  return m.run_report();
}

TEST(MachineConfig, Validates) {
  EXPECT_THROW(MachineConfig(16, 0), Error);
  EXPECT_THROW(MachineConfig(4, 8), Error);
  EXPECT_NO_THROW(MachineConfig(8, 8));
}

TEST(DenseAddressMap, PadsToWholeBlocks) {
  const DenseAddressMap map(GridSpec({5, 3}), 4);
  EXPECT_EQ(map.input_blocks(), 4);
  EXPECT_EQ(map.output_blocks(), 4);
  EXPECT_EQ(map.address(Vertex{1, 2}, Layer::In), (Address{1, 1}));
  EXPECT_EQ(map.address(Vertex{1, 2}, Layer::Out), (Address{5, 1}));
}

TEST(Machine, InCoreRunIsCompulsoryOnly) {
  const GridSpec g({6, 7});
  const StencilSpec st(1);
  const DenseAddressMap map(g, 4);
  Machine m(g, st, MachineConfig(2 * 44, 4), map, Fidelity::Full);
  std::vector<std::int64_t> in(42);
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = static_cast<std::int64_t>(i * i);
  m.set_input(in);
  const RunReport r = in_core_run(m, map);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.stats.compulsory_reads, 11);
  EXPECT_EQ(r.stats.compulsory_writes, 11);
  EXPECT_EQ(r.stats.noncompulsory(), 0);
  EXPECT_EQ(r.peak_footprint, 88);
  // (2,3) is index 17 and sums indices 10, 16, 17, 18, 24 squared.
  EXPECT_EQ(m.output()[17], 100 + 256 + 289 + 324 + 576);
}

TEST(Machine, ReloadAndRewriteAreNoncompulsory) {
  const GridSpec g({4, 4});
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(1), MachineConfig(64, 4), map);
  m.load(0);
  m.evict(0, false);
  m.load(0);
  m.allocate(4);
  m.evict(4, true);
  m.load(4);
  m.evict(4, true);
  const RunReport r = m.run_report();
  EXPECT_EQ(r.stats.compulsory_reads, 1);
  EXPECT_EQ(r.stats.noncompulsory_reads, 2);
  EXPECT_EQ(r.stats.compulsory_writes, 1);
  EXPECT_EQ(r.stats.noncompulsory_writes, 1);
  EXPECT_FALSE(r.complete);
}

TEST(Machine, ErrorPaths) {
  const GridSpec g({4, 4});
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(1), MachineConfig(8, 4), map);
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;  // not reached in these cases
  };
  EXPECT_EQ(code([&] { m.evict(0, false); }), ErrorCode::NotResident);
  EXPECT_EQ(code([&] { m.load(99); }), ErrorCode::OutOfRange);
  m.load(0);
  EXPECT_EQ(code([&] { m.load(0); }), ErrorCode::AlreadyResident);
  EXPECT_EQ(code([&] { m.allocate(1); }), ErrorCode::InvalidArgument);
  m.allocate(4);
  EXPECT_EQ(code([&] { m.load(1); }), ErrorCode::CapacityExceeded);
  // (0,0) needs (1,0) from block 1.
  EXPECT_EQ(code([&] { m.eval_stencil(Vertex{0, 0}); }), ErrorCode::MissingInput);
  m.evict(0, false);
  m.load(1);
  EXPECT_EQ(code([&] { m.eval_stencil(Vertex{1, 0}); }), ErrorCode::MissingInput);
  m.evict(4, false);
  m.load(0);
  EXPECT_EQ(code([&] { m.eval_stencil(Vertex{0, 0}); }), ErrorCode::MissingOutputSlot);
}

TEST(Machine, DoubleEvaluationRejected) {
  const GridSpec g({2, 2});
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(1), MachineConfig(8, 4), map);
  m.load(0);
  m.allocate(1);
  m.eval_stencil(Vertex{0, 0});
  EXPECT_THROW(m.eval_stencil(Vertex{0, 0}), Error);
}

// Evaluates `order` in chunks of `chunk` on a fresh in-core machine; returns outputs and the error text.
struct BatchOutcome {
  std::vector<std::int64_t> out;
  IoStats stats;
  std::string error;
};

BatchOutcome run_in_chunks(const GridSpec& g, int s, const std::vector<Vertex>& order, std::size_t chunk) {
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(s), MachineConfig(map.block_count() * 4, 4), map, Fidelity::Full);
  std::vector<std::int64_t> in(static_cast<std::size_t>(g.vertex_count()));
  std::mt19937_64 rng(7);
  for (auto& v : in) v = static_cast<std::int64_t>(rng());
  m.set_input(in);
  for (std::int64_t b = 0; b < map.input_blocks(); ++b) m.load(b);
  for (std::int64_t b = 0; b < map.output_blocks(); ++b) m.allocate(map.input_blocks() + b);
  BatchOutcome o;
  try {
    for (std::size_t i = 0; i < order.size(); i += chunk) {
      const std::size_t n = std::min(chunk, order.size() - i);
      if (chunk == 1) {
        m.eval_stencil(order[i]);
      } else {
        m.eval_stencils(order.data() + i, n);
      }
    }
  } catch (const Error& e) {
    o.error = e.what();
  }
  o.stats = m.run_report().stats;
  for (std::int64_t b = 0; b < map.block_count(); ++b) m.evict(b, b >= map.input_blocks());
  o.out = m.output();
  return o;
}

TEST(Machine, BatchedEvaluationMatchesSingle) {
  for (const GridSpec& g : {GridSpec({9, 8}), GridSpec({6, 5, 7}), GridSpec({5, 6}, Topology::Torus), GridSpec({4, 4, 4, 5})}) {
    std::vector<Vertex> order;
    for (std::int64_t i = 0; i < g.vertex_count(); ++i) order.push_back(g.delinearize(i));
    const BatchOutcome single = run_in_chunks(g, 1, order, 1);
    for (std::size_t chunk : {2u, 3u, 7u, 1000u}) {
      const BatchOutcome batch = run_in_chunks(g, 1, order, chunk);
      EXPECT_EQ(batch.out, single.out) << "n=" << g.n() << " chunk " << chunk;
      EXPECT_EQ(batch.stats.evaluated_vertices, g.vertex_count());
    }
  }
}

TEST(Machine, BatchedEvaluationFailsLikeSingle) {
  const GridSpec g({9, 9});
  // Interior vertices only, so the batch takes the fast path; the third repeats the first.
  const std::vector<Vertex> order = {Vertex{3, 3}, Vertex{4, 4}, Vertex{3, 3}, Vertex{5, 5}};
  const BatchOutcome single = run_in_chunks(g, 1, order, 1);
  const BatchOutcome batch = run_in_chunks(g, 1, order, order.size());
  EXPECT_NE(single.error.find("AlreadyEvaluated"), std::string::npos) << single.error;
  EXPECT_EQ(batch.error, single.error);
  EXPECT_EQ(batch.stats.evaluated_vertices, 2);
  EXPECT_EQ(batch.stats.evaluated_vertices, single.stats.evaluated_vertices);
}

TEST(Machine, DiscardedOutputIsIncomplete) {
  const GridSpec g({2, 2});
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(1), MachineConfig(8, 4), map);
  m.load(0);
  m.allocate(1);
  for (std::int64_t i = 0; i < 4; ++i) m.eval_stencil(g.delinearize(i));
  m.evict(1, false);
  EXPECT_FALSE(m.run_report().complete);
}

TEST(Machine, CountOnlyMatchesFullCounters) {
  const GridSpec g({9, 5});
  const DenseAddressMap map(g, 2);
  Machine full(g, StencilSpec(1), MachineConfig(100, 2), map, Fidelity::Full);
  Machine count(g, StencilSpec(1), MachineConfig(100, 2), map, Fidelity::CountOnly);
  full.set_input(std::vector<std::int64_t>(45, 1));
  EXPECT_EQ(in_core_run(full, map).stats, in_core_run(count, map).stats);
  EXPECT_THROW(count.output(), Error);
}

TEST(Machine, TraceReplayReproducesStats) {
  const GridSpec g({5, 6}, Topology::Torus);
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(2), MachineConfig(64, 4), map);
  std::stringstream trace;
  m.set_trace(&trace);
  const RunReport r = in_core_run(m, map);
  EXPECT_TRUE(r.complete);
  Machine again(g, StencilSpec(2), MachineConfig(64, 4), map);
  const RunReport back = replay_trace(trace, again);
  EXPECT_EQ(back.stats, r.stats);
  EXPECT_EQ(back.peak_footprint, r.peak_footprint);
  EXPECT_EQ(back.instructions, r.instructions);
}

TEST(Machine, ReplayRejectsGarbage) {
  const GridSpec g({2, 2});
  const DenseAddressMap map(g, 4);
  Machine m(g, StencilSpec(1), MachineConfig(8, 4), map);
  std::istringstream bad("LOAD 0\nJUMP 3\n");
  EXPECT_THROW(replay_trace(bad, m), Error);
}

}  // namespace
}  // namespace stencilio
