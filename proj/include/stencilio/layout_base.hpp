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
#include <bit>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"
#include "stencilio/kinds.hpp"
#include "stencilio/machine.hpp"

namespace stencilio {

// A layout pairs a sweep geometry with the block placement it induces.
//
// Geometry: every vertex is a (cell, tau) pair. tau is the sweep time (which sweep shape
// the vertex belongs to); cells are what a working band owns. A vertex is valid at tau
// when tau lies in the cell's range and has the cell's residue modulo period().
// pos(cell, tau) = tau * key_span() + key(cell) orders each sweep; every stencil
// neighbour of a vertex lies within window() positions of it.
//
// Placement: cells with the same set of working bands form one input stream, stored
// contiguously in sweep order. Output streams split further by owning band.
class Layout : public AddressMap {
 public:
  struct Band {
    std::vector<std::int64_t> origin;
    bool partial = false;
    std::int64_t tau_lo = 0;
    std::int64_t tau_hi = -1;
  };

  struct Stream {
    Layer layer = Layer::In;
    std::vector<int> bands;  // working bands containing the stream's cells, ascending
    int owner = -1;          // owning band, output streams only
    bool rows = false;       // one unit per cell, ranks cell-major
    std::vector<std::int64_t> cells;  // ascending key
    std::int64_t length = 0;
    std::int64_t first_block = 0;
    std::int64_t blocks = 0;

    bool wing() const { return bands.size() > 1; }
  };

  // A contiguous rank range of a stream consumed in pos order.
  struct Unit {
    int stream = 0;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
  };

  ~Layout() override = default;

  LayoutKind kind() const { return kind_; }
  const GridSpec& grid() const { return g_; }
  int s() const { return s_; }
  std::int64_t m() const { return m_; }

  std::int64_t block_size() const override { return B_; }
  std::int64_t input_blocks() const override { return in_blocks_; }
  std::int64_t output_blocks() const override { return out_blocks_; }

  Address address(const Vertex& x, Layer layer) const override {
    const std::int64_t c = cell_of(x);
    const std::int64_t t = tau_of(x);
    const Stream& st = streams_[static_cast<std::size_t>(layer == Layer::In ? in_stream_[c] : out_stream_[c])];
    return to_address(st, rank(st, c, t));
  }

  Address to_address(const Stream& st, std::int64_t r) const {
    if (b_shift_ >= 0) return {st.first_block + (r >> b_shift_), r & (B_ - 1)};
    return {st.first_block + r / B_, r % B_};
  }

  std::int64_t cell_count() const { return ncells_; }
  std::int64_t tau_count() const { return ntau_; }
  int period() const { return period_; }
  std::int64_t key_span() const { return key_span_; }
  std::int64_t window() const { return window_; }
  std::int64_t key(std::int64_t cell) const { return key_[static_cast<std::size_t>(cell)]; }
  std::int64_t pos(std::int64_t cell, std::int64_t tau) const { return tau * key_span_ + key_[static_cast<std::size_t>(cell)]; }
  std::int64_t tau_lo(std::int64_t cell) const { return tau_lo_[static_cast<std::size_t>(cell)]; }
  std::int64_t tau_hi(std::int64_t cell) const { return tau_hi_[static_cast<std::size_t>(cell)]; }
  bool valid(std::int64_t cell, std::int64_t tau) const {
    const std::int64_t lo = tau_lo_[static_cast<std::size_t>(cell)];
    return tau >= lo && tau <= tau_hi_[static_cast<std::size_t>(cell)] && (period_ == 1 || (tau - lo) % period_ == 0);
  }
  int residue(std::int64_t tau) const { return static_cast<int>(((tau % period_) + period_) % period_); }

  virtual std::int64_t cell_of(const Vertex& x) const = 0;
  virtual std::int64_t tau_of(const Vertex& x) const = 0;
  virtual Vertex vertex_at(std::int64_t cell, std::int64_t tau) const = 0;

  const std::vector<Band>& bands() const { return bands_; }
  const std::vector<Stream>& streams() const { return streams_; }
  int stream_of(std::int64_t cell, Layer layer) const {
    return layer == Layer::In ? in_stream_[static_cast<std::size_t>(cell)] : out_stream_[static_cast<std::size_t>(cell)];
  }
  const std::vector<int>& band_inputs(int band) const { return band_inputs_[static_cast<std::size_t>(band)]; }
  const std::vector<int>& band_outputs(int band) const { return band_outputs_[static_cast<std::size_t>(band)]; }
  // Cells owned by the band whose valid taus have the given residue, ascending key.
  const std::vector<std::int64_t>& owned_cells(int band, int res) const {
    return owned_[static_cast<std::size_t>(band) * static_cast<std::size_t>(period_) + static_cast<std::size_t>(res)];
  }

  std::vector<Unit> units(int stream) const {
    const Stream& st = streams_[static_cast<std::size_t>(stream)];
    std::vector<Unit> out;
    if (!st.rows) {
      if (st.length > 0) out.push_back({stream, 0, st.length});
      return out;
    }
    const std::int64_t len = st.cells.empty() ? 0 : st.length / static_cast<std::int64_t>(st.cells.size());
    for (std::size_t i = 0; i < st.cells.size(); ++i)
      out.push_back({stream, static_cast<std::int64_t>(i) * len, static_cast<std::int64_t>(i + 1) * len});
    return out;
  }

  // Rank of (cell, tau) within the stream, and its inverse.
  virtual std::int64_t rank(const Stream& st, std::int64_t cell, std::int64_t tau) const = 0;
  virtual std::pair<std::int64_t, std::int64_t> element(const Stream& st, std::int64_t r) const = 0;

  // Upper bound on blocks resident at once while sweeping the band, assuming every
  // input unit keeps the blocks meeting its current window and every output stream one block.
  // Counts are sampled on taus [t0, t0 + span) where the band is interior in tau.
  std::int64_t band_footprint_blocks(int band, std::int64_t t0, std::int64_t span) const {
    std::int64_t blocks = static_cast<std::int64_t>(band_outputs(band).size());
    for (int sid : band_inputs(band)) {
      const Stream& st = streams_[static_cast<std::size_t>(sid)];
      if (st.rows) {
        for (std::int64_t c : st.cells) {
          std::int64_t cnt = window_count_cells(&c, &c + 1, t0, span);
          if (cnt > 0) blocks += (cnt + B_ - 1) / B_ + 1;
        }
      } else {
        std::int64_t cnt = window_count_cells(st.cells.data(), st.cells.data() + st.cells.size(), t0, span);
        if (cnt > 0) blocks += (cnt + B_ - 1) / B_ + 1;
      }
    }
    return blocks;
  }

  // Band id per layer used by the layout export: input streams are labelled by stream id.
  std::string band_label(const Vertex& x, Layer layer) const {
    const Stream& st = streams_[static_cast<std::size_t>(stream_of(cell_of(x), layer))];
    std::string out = st.wing() ? "W" : "C";
    for (std::size_t i = 0; i < st.bands.size(); ++i) out += (i ? "+" : "") + std::to_string(st.bands[i]);
    if (layer == Layer::Out) out += "/" + std::to_string(st.owner);
    return out;
  }

 protected:
  Layout(LayoutKind kind, GridSpec g, int s, std::int64_t m, std::int64_t B)
      : kind_(kind), g_(std::move(g)), s_(s), m_(m), B_(B) {
    require_dimension(kind_, g_.n());
    if (g_.topology() != Topology::Grid) fail(ErrorCode::InvalidArgument, "sweep layouts are defined on grids only");
    StencilSpec(s).validate_for(g_);
    if (B_ < 1) fail(ErrorCode::InvalidArgument, "B must be >= 1");
    if ((B_ & (B_ - 1)) == 0) b_shift_ = std::countr_zero(static_cast<std::uint64_t>(B_));
  }

  // Subclass constructors fill ncells_, ntau_, period_, key_span_, window_, key_, tau_lo_,
  // tau_hi_, bands_, and per-cell band lists and owners, then call finish().
  void finish(const std::vector<std::int64_t>& member_offsets, const std::vector<int>& members,
              const std::vector<int>& owner, bool row_inputs) {
    const std::size_t nc = static_cast<std::size_t>(ncells_);
    in_stream_.assign(nc, -1);
    out_stream_.assign(nc, -1);

    std::map<std::vector<int>, int> in_ids;
    std::map<std::pair<std::vector<int>, int>, int> out_ids;
    std::vector<int> sig;
    for (std::size_t c = 0; c < nc; ++c) {
      if (tau_lo_[c] > tau_hi_[c]) continue;
      sig.assign(members.begin() + member_offsets[c], members.begin() + member_offsets[c + 1]);
      if (sig.empty() || owner[c] < 0) fail(ErrorCode::UnusableConfiguration, "cell not covered by any working band");
      in_ids.emplace(sig, 0);
      out_ids.emplace(std::make_pair(sig, owner[c]), 0);
    }
    streams_.clear();
    for (auto& [k, id] : in_ids) {
      id = static_cast<int>(streams_.size());
      Stream st;
      st.layer = Layer::In;
      st.bands = k;
      st.rows = row_inputs;
      streams_.push_back(std::move(st));
    }
    n_in_streams_ = static_cast<int>(streams_.size());
    for (auto& [k, id] : out_ids) {
      id = static_cast<int>(streams_.size());
      Stream st;
      st.layer = Layer::Out;
      st.bands = k.first;
      st.owner = k.second;
      streams_.push_back(std::move(st));
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (tau_lo_[c] > tau_hi_[c]) continue;
      sig.assign(members.begin() + member_offsets[c], members.begin() + member_offsets[c + 1]);
      in_stream_[c] = in_ids[sig];
      out_stream_[c] = out_ids[std::make_pair(sig, owner[c])];
    }
    // Cells ascend by key within each stream; ties cannot occur because keys are distinct.
    std::vector<std::int64_t> order;
    order.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c)
      if (in_stream_[c] >= 0) order.push_back(static_cast<std::int64_t>(c));
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) { return key_[a] < key_[b]; });
    for (std::int64_t c : order) {
      streams_[static_cast<std::size_t>(in_stream_[c])].cells.push_back(c);
      streams_[static_cast<std::size_t>(out_stream_[c])].cells.push_back(c);
    }

    const std::size_t nb = bands_.size();
    band_inputs_.assign(nb, {});
    band_outputs_.assign(nb, {});
    for (std::size_t i = 0; i < streams_.size(); ++i) {
      const Stream& st = streams_[i];
      if (st.layer == Layer::In) {
        for (int b : st.bands) band_inputs_[static_cast<std::size_t>(b)].push_back(static_cast<int>(i));
      } else {
        band_outputs_[static_cast<std::size_t>(st.owner)].push_back(static_cast<int>(i));
      }
    }

    owned_.assign(nb * static_cast<std::size_t>(period_), {});
    for (auto& b : bands_) {
      b.tau_lo = ntau_;
      b.tau_hi = -1;
    }
    for (std::int64_t c : order) {
      const auto j = static_cast<std::size_t>(owner[static_cast<std::size_t>(c)]);
      owned_[j * static_cast<std::size_t>(period_) + static_cast<std::size_t>(residue(tau_lo_[c]))].push_back(c);
      bands_[j].tau_lo = std::min(bands_[j].tau_lo, tau_lo_[c]);
      bands_[j].tau_hi = std::max(bands_[j].tau_hi, tau_hi_[c]);
    }

    std::int64_t next = 0;
    for (std::size_t i = 0; i < streams_.size(); ++i) {
      if (static_cast<int>(i) == n_in_streams_) {
        in_blocks_ = next;
      }
      Stream& st = streams_[i];
      index_stream(st);
      st.first_block = next;
      st.blocks = (st.length + B_ - 1) / B_;
      next += st.blocks;
    }
    if (n_in_streams_ == static_cast<int>(streams_.size())) in_blocks_ = next;
    out_blocks_ = next - in_blocks_;
  }

  // Computes st.length and any rank tables; cells are already sorted.
  virtual void index_stream(Stream& st) = 0;

  // Most elements of the given cells inside any window of 2*window()+1 positions,
  // over taus [t0, t0 + span).
  std::int64_t window_count_cells(const std::int64_t* begin, const std::int64_t* end, std::int64_t t0,
                                  std::int64_t span) const {
    std::vector<std::int64_t> ps;
    for (std::int64_t t = t0; t < t0 + span; ++t)
      for (const std::int64_t* c = begin; c != end; ++c)
        if (valid(*c, t)) ps.push_back(pos(*c, t));
    std::sort(ps.begin(), ps.end());
    std::int64_t best = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (j < i) j = i;
      while (j < ps.size() && ps[j] - ps[i] <= 2 * window_) ++j;
      best = std::max<std::int64_t>(best, static_cast<std::int64_t>(j - i));
    }
    return best;
  }

  LayoutKind kind_;
  GridSpec g_;
  int s_;
  std::int64_t m_;
  std::int64_t B_;
  int b_shift_ = -1;

  std::int64_t ncells_ = 0;
  std::int64_t ntau_ = 0;
  int period_ = 1;
  std::int64_t key_span_ = 1;
  std::int64_t window_ = 0;
  std::vector<std::int64_t> key_;
  std::vector<std::int64_t> tau_lo_, tau_hi_;
  std::vector<Band> bands_;

  std::vector<int> in_stream_, out_stream_;
  std::vector<Stream> streams_;
  int n_in_streams_ = 0;
  std::vector<std::vector<int>> band_inputs_, band_outputs_;
  std::vector<std::vector<std::int64_t>> owned_;
  std::int64_t in_blocks_ = 0;
  std::int64_t out_blocks_ = 0;
};

}  // namespace stencilio
