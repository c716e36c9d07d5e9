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

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stencilio/bitset.hpp"
#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"

namespace stencilio {

struct MachineConfig {
  std::int64_t M = 0;  // internal memory, elements
  std::int64_t B = 0;  // block size, elements

  MachineConfig(std::int64_t m, std::int64_t b) : M(m), B(b) {
    if (B < 1) fail(ErrorCode::InvalidArgument, "B must be >= 1");
    if (M < B) fail(ErrorCode::InvalidArgument, "M must be >= B");
  }
};

struct Address {
  std::int64_t block = 0;
  std::int64_t offset = 0;
  friend bool operator==(const Address&, const Address&) = default;
};

enum class Layer { In, Out };

inline const char* to_string(Layer l) { return l == Layer::In ? "in" : "out"; }

// Maps (vertex, layer) to external memory. Input blocks are [0, input_blocks()),
// output blocks are [input_blocks(), block_count()).
class AddressMap {
 public:
  virtual ~AddressMap() = default;
  virtual std::int64_t block_size() const = 0;
  virtual std::int64_t input_blocks() const = 0;
  virtual std::int64_t output_blocks() const = 0;
  virtual Address address(const Vertex& x, Layer layer) const = 0;
  // Batched address(); final layouts override it to drop the virtual call per vertex.
  virtual void addresses(const Vertex* xs, std::size_t count, Layer layer, Address* out) const {
    for (std::size_t i = 0; i < count; ++i) out[i] = address(xs[i], layer);
  }
  std::int64_t block_count() const { return input_blocks() + output_blocks(); }
};

// Row-major input array followed by a row-major output array, each padded to whole blocks.
class DenseAddressMap final : public AddressMap {
 public:
  DenseAddressMap(GridSpec g, std::int64_t B) : g_(std::move(g)), B_(B) {
    if (B < 1) fail(ErrorCode::InvalidArgument, "B must be >= 1");
    blocks_ = (g_.vertex_count() + B - 1) / B;
  }
  std::int64_t block_size() const override { return B_; }
  std::int64_t input_blocks() const override { return blocks_; }
  std::int64_t output_blocks() const override { return blocks_; }
  Address address(const Vertex& x, Layer layer) const override {
    std::int64_t i = g_.linearize(x);
    return {i / B_ + (layer == Layer::Out ? blocks_ : 0), i % B_};
  }

 private:
  GridSpec g_;
  std::int64_t B_;
  std::int64_t blocks_ = 0;
};

struct IoStats {
  std::int64_t compulsory_reads = 0;
  std::int64_t noncompulsory_reads = 0;
  std::int64_t compulsory_writes = 0;
  std::int64_t noncompulsory_writes = 0;
  std::int64_t evaluated_vertices = 0;

  std::int64_t noncompulsory() const { return noncompulsory_reads + noncompulsory_writes; }
  std::int64_t total() const { return compulsory_reads + noncompulsory_reads + compulsory_writes + noncompulsory_writes; }
  friend bool operator==(const IoStats&, const IoStats&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const IoStats& s) {
  return os << "(" << s.compulsory_reads << "," << s.noncompulsory_reads << "," << s.compulsory_writes << ","
            << s.noncompulsory_writes << "; evaluated " << s.evaluated_vertices << ")";
}

enum class Fidelity { Full, CountOnly };

struct RunReport {
  IoStats stats;
  bool complete = false;
  std::int64_t peak_footprint = 0;  // elements
  std::int64_t instructions = 0;
};

// Two-level machine: M element slots of internal memory, external memory in blocks of B.
// Every transfer is explicit; the machine only counts and checks.
class Machine {
 public:
  Machine(GridSpec g, StencilSpec st, MachineConfig cfg, const AddressMap& map, Fidelity fidelity = Fidelity::CountOnly)
      : g_(std::move(g)), st_(st), cfg_(cfg), map_(&map), fidelity_(fidelity) {
    if (map.block_size() != cfg_.B) fail(ErrorCode::InvalidArgument, "address map block size differs from B");
    in_blocks_ = map.input_blocks();
    out_blocks_ = map.output_blocks();
    const std::int64_t total = in_blocks_ + out_blocks_;
    resident_ = Bitset(total);
    ever_loaded_ = Bitset(total);
    dirty_ = Bitset(out_blocks_);
    written_ = Bitset(out_blocks_);
    evaluated_ = Bitset(out_blocks_ * cfg_.B);
    offsets_ = ball_offsets(g_.n(), st_.s);
    nbr_.assign(offsets_.size(), Vertex(g_.n()));
    nbr_addr_.resize(offsets_.size());
    degenerate_torus_ = g_.topology() == Topology::Torus && 2 * static_cast<std::int64_t>(st_.s) >= g_.min_side();
    if (fidelity_ == Fidelity::Full) store_.assign(static_cast<std::size_t>(total * cfg_.B), 0);
  }

  const GridSpec& grid() const { return g_; }
  const MachineConfig& config() const { return cfg_; }
  Fidelity fidelity() const { return fidelity_; }
  const AddressMap& address_map() const { return *map_; }

  void set_trace(std::ostream* out) { trace_ = out; }

  // Full fidelity only: stores input values (indexed by linear vertex index) in external memory.
  void set_input(const std::vector<std::int64_t>& values) {
    require_full();
    if (static_cast<std::int64_t>(values.size()) != g_.vertex_count())
      fail(ErrorCode::InvalidArgument, "input size differs from vertex count");
    for (std::int64_t i = 0; i < g_.vertex_count(); ++i) {
      Address a = map_->address(g_.delinearize(i), Layer::In);
      store_[static_cast<std::size_t>(a.block * cfg_.B + a.offset)] = values[static_cast<std::size_t>(i)];
    }
  }

  // Full fidelity only: reads the output layer from external memory, indexed by linear vertex index.
  std::vector<std::int64_t> output() const {
    require_full();
    std::vector<std::int64_t> out(static_cast<std::size_t>(g_.vertex_count()));
    for (std::int64_t i = 0; i < g_.vertex_count(); ++i) {
      Address a = map_->address(g_.delinearize(i), Layer::Out);
      out[static_cast<std::size_t>(i)] = store_[static_cast<std::size_t>(a.block * cfg_.B + a.offset)];
    }
    return out;
  }

  void load(std::int64_t b) {
    ++instr_;
    check_block(b);
    if (resident_.test(b)) fail_at(ErrorCode::AlreadyResident, "block " + std::to_string(b));
    admit(b);
    // Only the first read of an input block is compulsory; output blocks are never read cold.
    if (ever_loaded_.test(b) || b >= in_blocks_)
      ++stats_.noncompulsory_reads;
    else
      ++stats_.compulsory_reads;
    ever_loaded_.set(b);
    if (trace_) *trace_ << "LOAD " << b << '\n';
  }

  // Makes a never-written output block resident without reading it.
  void allocate(std::int64_t b) {
    ++instr_;
    check_block(b);
    if (b < in_blocks_) fail_at(ErrorCode::InvalidArgument, "allocate on input block " + std::to_string(b));
    if (resident_.test(b)) fail_at(ErrorCode::AlreadyResident, "block " + std::to_string(b));
    if (written_.test(b - in_blocks_) || ever_loaded_.test(b))
      fail_at(ErrorCode::InvalidArgument, "allocate would discard contents of block " + std::to_string(b));
    admit(b);
    if (trace_) *trace_ << "ALLOC " << b << '\n';
  }

  void evict(std::int64_t b, bool write_back) {
    ++instr_;
    check_block(b);
    if (!resident_.test(b)) fail_at(ErrorCode::NotResident, "block " + std::to_string(b));
    resident_.reset(b);
    footprint_ -= cfg_.B;
    if (write_back) ++writes_;
    if (b >= in_blocks_) {
      const std::int64_t o = b - in_blocks_;
      if (write_back) {
        written_.set(o);
        dirty_.reset(o);
      } else if (dirty_.test(o)) {
        lost_ = true;
        dirty_.reset(o);
      }
    }
    if (trace_) *trace_ << "EVICT " << b << ' ' << (write_back ? 1 : 0) << '\n';
  }

  void eval_stencil(const Vertex& x) {
    ++instr_;
    const int n = g_.n();
    bool interior = x.n == n;
    for (int i = 0; i < n; ++i) interior &= (x.c[i] >= st_.s) & (x.c[i] + st_.s < g_.side(i));
    if (!interior && !g_.contains(x)) fail_at(ErrorCode::OutOfRange, "vertex " + x.str());
    const Address out = map_->address(x, Layer::Out);
    const std::int64_t slot = (out.block - in_blocks_) * cfg_.B + out.offset;
    if (evaluated_.test(slot)) fail_at(ErrorCode::AlreadyEvaluated, "vertex " + x.str());
    std::size_t cnt = 0;
    if (degenerate_torus_) {
      for (const Vertex& y : stencil_neighbors(g_, st_, x)) nbr_[cnt++] = y;
    } else {
      if (interior) {
        cnt = offsets_.size();
        const auto xc = x.c;  // x may live in nbr_
        const Vertex* d = offsets_.data();
        Vertex* y = nbr_.data();
        if (n == 2) {
          for (std::size_t j = 0; j < cnt; ++j) {
            y[j].c[0] = xc[0] + d[j].c[0];
            y[j].c[1] = xc[1] + d[j].c[1];
          }
        } else if (n == 3) {
          for (std::size_t j = 0; j < cnt; ++j) {
            y[j].c[0] = xc[0] + d[j].c[0];
            y[j].c[1] = xc[1] + d[j].c[1];
            y[j].c[2] = xc[2] + d[j].c[2];
          }
        } else {
          for (std::size_t j = 0; j < cnt; ++j)
            for (int i = 0; i < n; ++i) y[j].c[i] = xc[i] + d[j].c[i];
        }
      } else {
        const bool torus = g_.topology() == Topology::Torus;
        for (const Vertex& d : offsets_) {
          Vertex& y = nbr_[cnt];
          bool inside = true;
          for (int i = 0; i < n; ++i) {
            std::int64_t v = x.c[i] + d.c[i];
            const std::int64_t k = g_.side(i);
            if (v < 0 || v >= k) {
              if (!torus) {
                inside = false;
                break;
              }
              v = v < 0 ? v + k : v - k;
            }
            y.c[i] = v;
          }
          if (inside) ++cnt;
        }
      }
    }
    map_->addresses(nbr_.data(), cnt, Layer::In, nbr_addr_.data());
    std::uint64_t sum = 0;
    const Address* na = nbr_addr_.data();
    for (std::size_t i = 0; i < cnt; ++i)
      if (!resident_.test(na[i].block)) fail_at(ErrorCode::MissingInput, "vertex " + nbr_[i].str());
    if (fidelity_ == Fidelity::Full)
      for (std::size_t i = 0; i < cnt; ++i) sum += static_cast<std::uint64_t>(store_[static_cast<std::size_t>(na[i].block * cfg_.B + na[i].offset)]);
    if (!resident_.test(out.block)) fail_at(ErrorCode::MissingOutputSlot, "vertex " + x.str());
    evaluated_.set(slot);
    dirty_.set(out.block - in_blocks_);
    ++stats_.evaluated_vertices;
    if (fidelity_ == Fidelity::Full) store_[static_cast<std::size_t>(out.block * cfg_.B + out.offset)] = static_cast<std::int64_t>(sum);
    if (trace_) {
      *trace_ << "EVAL";
      for (int i = 0; i < x.n; ++i) *trace_ << ' ' << x.c[i];
      *trace_ << '\n';
    }
  }

  // Same as calling eval_stencil on each vertex in order, with the address lookups batched.
  // Falls back to single evaluations when a vertex touches the boundary or a trace is open.
  void eval_stencils(const Vertex* xs, std::size_t count) {
    const int n = g_.n();
    bool interior = !degenerate_torus_ && !trace_;
    for (std::size_t v = 0; v < count && interior; ++v) {
      interior = xs[v].n == n;
      for (int i = 0; i < n; ++i) interior &= (xs[v].c[i] >= st_.s) & (xs[v].c[i] + st_.s < g_.side(i));
    }
    if (!interior) {
      for (std::size_t v = 0; v < count; ++v) eval_stencil(xs[v]);
      return;
    }
    const std::size_t noff = offsets_.size();
    if (batch_nbr_.size() < count * noff) {
      batch_nbr_.resize(count * noff, Vertex(n));
      batch_in_.resize(count * noff);
    }
    if (batch_out_.size() < count) batch_out_.resize(count);
    const Vertex* d = offsets_.data();
    Vertex* y = batch_nbr_.data();
    for (std::size_t v = 0; v < count; ++v, y += noff) {
      const auto& xc = xs[v].c;
      if (n == 2) {
        for (std::size_t j = 0; j < noff; ++j) {
          y[j].c[0] = xc[0] + d[j].c[0];
          y[j].c[1] = xc[1] + d[j].c[1];
        }
      } else {
        for (std::size_t j = 0; j < noff; ++j)
          for (int i = 0; i < n; ++i) y[j].c[i] = xc[i] + d[j].c[i];
      }
    }
    map_->addresses(xs, count, Layer::Out, batch_out_.data());
    map_->addresses(batch_nbr_.data(), count * noff, Layer::In, batch_in_.data());

    const std::int64_t B = cfg_.B;
    const bool full = fidelity_ == Fidelity::Full;
    const Address* in = batch_in_.data();
    for (std::size_t v = 0; v < count; ++v, in += noff) {
      ++instr_;
      const Address out = batch_out_[v];
      const std::int64_t slot = (out.block - in_blocks_) * B + out.offset;
      if (evaluated_.test(slot)) fail_at(ErrorCode::AlreadyEvaluated, "vertex " + xs[v].str());
      std::uint64_t sum = 0;
      for (std::size_t j = 0; j < noff; ++j)
        if (!resident_.test(in[j].block)) fail_at(ErrorCode::MissingInput, "vertex " + batch_nbr_[v * noff + j].str());
      if (full)
        for (std::size_t j = 0; j < noff; ++j) sum += static_cast<std::uint64_t>(store_[static_cast<std::size_t>(in[j].block * B + in[j].offset)]);
      if (!resident_.test(out.block)) fail_at(ErrorCode::MissingOutputSlot, "vertex " + xs[v].str());
      evaluated_.set(slot);
      dirty_.set(out.block - in_blocks_);
      ++stats_.evaluated_vertices;
      if (full) store_[static_cast<std::size_t>(out.block * B + out.offset)] = static_cast<std::int64_t>(sum);
    }
  }

  std::int64_t footprint() const { return footprint_; }
  std::int64_t peak_footprint() const { return peak_; }
  std::int64_t instructions() const { return instr_; }
  bool is_resident(std::int64_t b) const { return resident_.test(b); }

  // Reads and non-final writes as counted so far; exactly one write per written output block is compulsory.
  RunReport run_report() const {
    RunReport r;
    r.stats = stats_;
    const std::int64_t finals = written_.count();
    r.stats.compulsory_writes = finals;
    r.stats.noncompulsory_writes = writes_ - finals;
    bool dirty_resident = dirty_.count() != 0;
    r.complete = !lost_ && !dirty_resident && stats_.evaluated_vertices == g_.vertex_count() &&
                 finals == out_blocks_ && evaluated_.count() == g_.vertex_count();
    r.peak_footprint = peak_;
    r.instructions = instr_;
    return r;
  }

 private:
  void require_full() const {
    if (fidelity_ != Fidelity::Full) fail(ErrorCode::InvalidArgument, "operation needs Full fidelity");
  }

  void check_block(std::int64_t b) const {
    if (b < 0 || b >= in_blocks_ + out_blocks_) fail_at(ErrorCode::OutOfRange, "block " + std::to_string(b));
  }

  void admit(std::int64_t b) {
    if (footprint_ + cfg_.B > cfg_.M)
      fail_at(ErrorCode::CapacityExceeded, "block " + std::to_string(b) + " with footprint " + std::to_string(footprint_));
    resident_.set(b);
    footprint_ += cfg_.B;
    if (footprint_ > peak_) peak_ = footprint_;
  }

  [[noreturn]] void fail_at(ErrorCode code, const std::string& what) const {
    fail(code, what + " at instruction " + std::to_string(instr_));
  }

  GridSpec g_;
  StencilSpec st_;
  MachineConfig cfg_;
  const AddressMap* map_;
  Fidelity fidelity_;
  std::ostream* trace_ = nullptr;

  std::int64_t in_blocks_ = 0;
  std::int64_t out_blocks_ = 0;
  Bitset resident_, ever_loaded_, dirty_, written_, evaluated_;
  std::vector<Vertex> offsets_;
  std::vector<Vertex> nbr_;  // scratch for eval_stencil
  std::vector<Address> nbr_addr_;
  std::vector<Vertex> batch_nbr_;  // scratch for eval_stencils
  std::vector<Address> batch_in_, batch_out_;
  bool degenerate_torus_ = false;
  std::vector<std::int64_t> store_;

  IoStats stats_;
  std::int64_t writes_ = 0;
  std::int64_t footprint_ = 0;
  std::int64_t peak_ = 0;
  std::int64_t instr_ = 0;
  bool lost_ = false;
};

// Re-executes a trace dump on a fresh machine and returns its report.
inline RunReport replay_trace(std::istream& in, Machine& m) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string op;
    ls >> op;
    if (op == "LOAD") {
      std::int64_t b;
      ls >> b;
      m.load(b);
    } else if (op == "ALLOC") {
      std::int64_t b;
      ls >> b;
      m.allocate(b);
    } else if (op == "EVICT") {
      std::int64_t b;
      int wb;
      ls >> b >> wb;
      m.evict(b, wb != 0);
    } else if (op == "EVAL") {
      Vertex x(m.grid().n());
      for (int i = 0; i < x.n; ++i) ls >> x.c[i];
      m.eval_stencil(x);
    } else {
      fail(ErrorCode::InvalidArgument, "bad trace record '" + line + "'");
    }
    if (!ls && !ls.eof()) fail(ErrorCode::InvalidArgument, "bad trace record '" + line + "'");
  }
  return m.run_report();
}

}  // namespace stencilio
