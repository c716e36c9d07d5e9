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
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <unordered_map>
#include <vector>

#include "stencilio/bitset.hpp"
#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"
#include "stencilio/layout.hpp"
#include "stencilio/machine.hpp"
#include "stencilio/oracles.hpp"

namespace stencilio {

struct SweepPlan {
  LayoutKind kind = LayoutKind::BlockAlignedDiagonal2D;
  int s = 1;
  SweepShapeSize size;
  std::int64_t footprint_blocks = 0;  // predicted peak residency of an interior band
  std::shared_ptr<const Layout> layout;
};

// Sizes the sweep shape, builds the layout and checks the predicted residency against M.
inline SweepPlan make_sweep_plan(LayoutKind kind, const GridSpec& g, const StencilSpec& st, const MachineConfig& cfg,
                                 SizeDerivation mode = SizeDerivation::CapacitySearch) {
  SweepPlan p;
  p.kind = kind;
  p.s = st.s;
  p.size = sweep_shape_size(kind, g.n(), st.s, cfg.M, cfg.B, mode);
  p.footprint_blocks = footprint_blocks(kind, g.n(), st.s, p.size.m, cfg.B);
  if (p.footprint_blocks * cfg.B > cfg.M)
    fail(ErrorCode::UnusableConfiguration, "m=" + std::to_string(p.size.m) + " needs " +
                                               std::to_string(p.footprint_blocks * cfg.B) + " elements, M=" + std::to_string(cfg.M));
  p.layout = build_layout(kind, g, st.s, p.size.m, cfg.B);
  return p;
}

namespace detail {

class SweepDriver {
 public:
  SweepDriver(const Layout& L, Machine& mach) : L_(L), mach_(mach), B_(L.block_size()), wing_written_(L.input_blocks()) {}

  void run() {
    for (int b = 0; b < static_cast<int>(L_.bands().size()); ++b) run_band(b);
  }

 private:
  struct UnitState {
    const Layout::Stream* st = nullptr;
    std::int64_t lo = 0, hi = 0;
    std::int64_t next = 0, last = 0;  // absolute block ids
    std::int64_t window = 0;
  };
  struct Trigger {
    std::int64_t at;
    std::int64_t block;
    int unit;
    bool operator>(const Trigger& o) const { return at != o.at ? at > o.at : block > o.block; }
  };
  using MinHeap = std::priority_queue<Trigger, std::vector<Trigger>, std::greater<Trigger>>;

  std::int64_t pos_of_rank(const Layout::Stream& st, std::int64_t r) const {
    auto [cell, tau] = L_.element(st, r);
    return L_.pos(cell, tau);
  }
  std::int64_t first_rank(const UnitState& u, std::int64_t blk) const {
    return std::max(u.lo, (blk - u.st->first_block) * B_);
  }
  std::int64_t last_rank(const UnitState& u, std::int64_t blk) const {
    return std::min(u.hi, (blk - u.st->first_block + 1) * B_) - 1;
  }

  void push_next_load(int ui) {
    const UnitState& u = units_[static_cast<std::size_t>(ui)];
    if (u.next > u.last) return;
    loads_.push({pos_of_rank(*u.st, first_rank(u, u.next)) - u.window, u.next, ui});
  }

  void run_band(int b) {
    units_.clear();
    for (int sid : L_.band_inputs(b))
      for (const Layout::Unit& un : L_.units(sid)) add_unit(un, L_.window());
    for (int sid : L_.band_outputs(b))
      for (const Layout::Unit& un : L_.units(sid)) add_unit(un, 0);
    for (int i = 0; i < static_cast<int>(units_.size()); ++i) push_next_load(i);

    const Layout::Band& band = L_.bands()[static_cast<std::size_t>(b)];
    band_ = b;
    // Vertices up to `quiet` see no load or eviction in between and are evaluated as one batch.
    std::int64_t quiet = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t tau = band.tau_lo; tau <= band.tau_hi; ++tau) {
      // owned_cells already matches the residue of tau, so only the range is left to check.
      for (std::int64_t c : L_.owned_cells(b, L_.residue(tau))) {
        if (tau < L_.tau_lo(c) || tau > L_.tau_hi(c)) continue;
        const std::int64_t P = L_.pos(c, tau);
        if (P > quiet) {
          flush();
          advance(P);
          quiet = std::numeric_limits<std::int64_t>::max();
          if (!evicts_.empty()) quiet = std::min(quiet, evicts_.top().at);
          if (!loads_.empty()) quiet = std::min(quiet, loads_.top().at - 1);
        }
        batch_.push_back(L_.vertex_at(c, tau));
      }
    }
    flush();
    while (!evicts_.empty()) {
      const Trigger t = evicts_.top();
      evicts_.pop();
      release(t.block, t.unit);
    }
    loads_ = MinHeap();
    shared_.clear();
  }

  void flush() {
    if (batch_.empty()) return;
    mach_.eval_stencils(batch_.data(), batch_.size());
    batch_.clear();
  }

  void add_unit(const Layout::Unit& un, std::int64_t window) {
    const Layout::Stream& st = L_.streams()[static_cast<std::size_t>(un.stream)];
    if (un.hi <= un.lo) return;
    UnitState u;
    u.st = &st;
    u.lo = un.lo;
    u.hi = un.hi;
    u.next = st.first_block + un.lo / B_;
    u.last = st.first_block + (un.hi - 1) / B_;
    u.window = window;
    units_.push_back(u);
  }

  // Evictions strictly behind the window first, then loads entering it.
  void advance(std::int64_t P) {
    while (!evicts_.empty() && evicts_.top().at < P) {
      const Trigger t = evicts_.top();
      evicts_.pop();
      release(t.block, t.unit);
    }
    while (!loads_.empty() && loads_.top().at <= P) {
      const Trigger t = loads_.top();
      loads_.pop();
      UnitState& u = units_[static_cast<std::size_t>(t.unit)];
      const std::int64_t blk = u.next++;
      push_next_load(t.unit);
      const std::int64_t done = pos_of_rank(*u.st, last_rank(u, blk)) + u.window;
      if (done < P) continue;  // no element of the block is needed any more
      acquire(blk, t.unit);
      evicts_.push({done, blk, t.unit});
    }
  }

  void acquire(std::int64_t blk, int ui) {
    const Layout::Stream& st = *units_[static_cast<std::size_t>(ui)].st;
    if (st.rows && shared_[blk]++ > 0) return;
    if (st.layer == Layer::Out) {
      mach_.allocate(blk);
    } else {
      mach_.load(blk);
    }
  }

  void release(std::int64_t blk, int ui) {
    const Layout::Stream& st = *units_[static_cast<std::size_t>(ui)].st;
    if (st.rows) {
      auto it = shared_.find(blk);
      if (--it->second > 0) return;
      shared_.erase(it);
    }
    if (st.layer == Layer::Out) {
      mach_.evict(blk, true);
      return;
    }
    // A shared input block is written back once, by its first band, for the later bands to reread.
    bool wb = false;
    if (st.wing() && band_ < st.bands.back() && !wing_written_.test(blk)) {
      wb = true;
      wing_written_.set(blk);
    }
    mach_.evict(blk, wb);
  }

  const Layout& L_;
  Machine& mach_;
  std::int64_t B_;
  int band_ = 0;
  std::vector<UnitState> units_;
  std::vector<Vertex> batch_;
  MinHeap loads_, evicts_;
  std::unordered_map<std::int64_t, int> shared_;
  Bitset wing_written_;
};

}  // namespace detail

// Drives the machine through every working band of the layout and returns its report.
inline RunReport run_sweep(const Layout& L, Machine& mach) {
  if (&mach.address_map() != static_cast<const AddressMap*>(&L))
    fail(ErrorCode::InvalidArgument, "machine does not address through this layout");
  detail::SweepDriver(L, mach).run();
  return mach.run_report();
}

inline RunReport run_sweep(const SweepPlan& plan, Machine& mach) { return run_sweep(*plan.layout, mach); }

namespace detail {

inline double cdiv(double a, double b) { return std::ceil(a / b); }

}  // namespace detail

// Exact non-compulsory I/O ceiling of the kind, evaluated at the layout's m, s, B and sides.
inline double noncompulsory_ceiling(const Layout& L) {
  using detail::cdiv;
  const GridSpec& g = L.grid();
  const double s = L.s(), m = static_cast<double>(L.m()), B = static_cast<double>(L.block_size());
  const double k1 = static_cast<double>(g.side(0)), k2 = static_cast<double>(g.side(1));
  const double k3 = g.n() >= 3 ? static_cast<double>(g.side(2)) : 0;
  switch (L.kind()) {
    case LayoutKind::Row2D: return cdiv(k2, m - 2 * s) * (2 * m + (cdiv(k1, B) + 1) * 4 * s);
    case LayoutKind::BlockAlignedColumn2D: return std::ceil(cdiv(k2, m - 2 * s) * k1 * 2 * s / B) * 2;
    case LayoutKind::BlockAlignedDiagonal2D: return std::ceil((cdiv(k1, 2 * m - 2 * s) + 1) * 2 * s * k2 / B) * 2;
    case LayoutKind::Row3D:
      return cdiv(k2, m - 2 * s) * cdiv(k3, m - 2 * s) *
             (2 * m * m + (cdiv(k1, B) + 1) * 4 * (2 * s * (m - 4 * s) + 2 * 2 * s * 2 * s));
    case LayoutKind::BlockAlignedColumnPole3D:
      return cdiv(k2, m - 2 * s) * cdiv(k3, m - 2 * s) *
             ((cdiv(k1 * (m - 4 * s) * 2 * s, B) + 1) * 4 + (cdiv(k1 * 4 * s * s, B) + 1) * 4 * 2);
    case LayoutKind::BlockAlignedDiagonal2Din3D: {
      const WingGroups w = interior_wing_groups(L.kind(), L.s(), L.m(), L.block_size());
      const double a1 = static_cast<double>(w.two), a2 = std::ceil(static_cast<double>(w.more_total) / 4);
      return (cdiv(k2, 2 * m - 3 * s) + 1) * (cdiv(k3, m) + 1) * ((cdiv(k1 * a1, B) + 1) * 4 + (cdiv(k1 * a2, B) + 1) * 4 * 2);
    }
    case LayoutKind::HexagonalAlignedDiagonal3D: {
      const auto& H = static_cast<const HexLayout&>(L);
      const WingGroups w = interior_wing_groups(L.kind(), L.s(), L.m(), L.block_size());
      const double c1 = static_cast<double>(w.two), c2 = static_cast<double>(w.more);
      const double D = static_cast<double>(H.lattice().det);
      return (k2 + 14 * m) * (k3 + 14 * m) / D * (6 * (cdiv(k1 * c1, B) + 1) + 6 * (cdiv(k1 * c2, B) + 1) * 2);
    }
    case LayoutKind::BlockAlignedColumnND: {
      const int n = g.n();
      double bands = 1, wing = 1, core = 1, groups = 1;
      for (int i = 1; i < n; ++i) {
        bands *= cdiv(static_cast<double>(g.side(i)), m - 2 * s);
        wing *= m;
        core *= m - 4 * s;
        groups *= 3;
      }
      return bands * std::ceil(((wing - core) * k1 + (groups - 1) * B) / B);
    }
  }
  return 0;
}

struct OracleComparison {
  bool equal = false;
  std::optional<Vertex> first_mismatch;
  RunReport report;
};

// Full-fidelity sweep on seeded random input, compared with the in-core evaluation.
inline OracleComparison run_oracle_compare(const SweepPlan& plan, const MachineConfig& cfg, std::uint64_t seed = 1) {
  const Layout& L = *plan.layout;
  const GridSpec& g = L.grid();
  const StencilSpec st(plan.s);
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> input(static_cast<std::size_t>(g.vertex_count()));
  for (auto& v : input) v = static_cast<std::int64_t>(rng());
  Machine mach(g, st, cfg, L, Fidelity::Full);
  mach.set_input(input);
  OracleComparison out;
  out.report = run_sweep(L, mach);
  const auto got = mach.output();
  const auto want = naive_stencil(g, st, input);
  out.equal = true;
  for (std::size_t i = 0; i < got.size(); ++i)
    if (got[i] != want[i]) {
      out.equal = false;
      out.first_mismatch = g.delinearize(static_cast<std::int64_t>(i));
      break;
    }
  return out;
}

}  // namespace stencilio
