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
#include <cstdint>
#include <vector>

#include "stencilio/layout_base.hpp"
#include "stencilio/layout_cross.hpp"

namespace stencilio {

// 2D diagonal sweep: cells are diagonals d = x1 - x2 and tau = x1 + x2, so each sweep
// shape is a segment of direction (1,-1) and consecutive shapes alternate the x1 and x2
// shifts. Working band j covers 2m diagonals starting at a_j = -(k2-1) - s + j(2m-2s)
// and owns the middle 2m - 2s.
class DiagonalLayout final : public Layout {
 public:
  DiagonalLayout(const GridSpec& g, int s, std::int64_t m, std::int64_t B)
      : Layout(LayoutKind::BlockAlignedDiagonal2D, g, s, m, B) {
    k1_ = g_.side(0);
    k2_ = g_.side(1);
    d0_ = -(k2_ - 1);
    ncells_ = k1_ + k2_ - 1;
    ntau_ = k1_ + k2_ - 1;
    period_ = 2;
    key_span_ = ncells_;
    window_ = static_cast<std::int64_t>(s_) * key_span_ + s_;
    step_ = 2 * m_ - 2 * s_;
    if (step_ < 1) fail(ErrorCode::UnusableConfiguration, "sweep shape narrower than the stencil");
    const std::int64_t nb = detail::ceil_div(ncells_, step_);
    bands_.assign(static_cast<std::size_t>(nb), {});
    for (std::int64_t j = 0; j < nb; ++j) {
      bands_[static_cast<std::size_t>(j)].origin = {start(j)};
      bands_[static_cast<std::size_t>(j)].partial = start(j) < d0_ || start(j) + 2 * m_ - 1 > k1_ - 1;
    }
    const auto nc = static_cast<std::size_t>(ncells_);
    key_.resize(nc);
    tau_lo_.resize(nc);
    tau_hi_.resize(nc);
    std::vector<std::int64_t> offsets(nc + 1, 0);
    std::vector<int> members;
    std::vector<int> owner(nc);
    for (std::int64_t c = 0; c < ncells_; ++c) {
      const std::int64_t d = c + d0_;
      key_[static_cast<std::size_t>(c)] = c;
      tau_lo_[static_cast<std::size_t>(c)] = d < 0 ? -d : d;
      tau_hi_[static_cast<std::size_t>(c)] = std::min(2 * (k1_ - 1) - d, 2 * (k2_ - 1) + d);
      const std::int64_t jlo = std::max<std::int64_t>(0, detail::floor_div(c + s_ - 2 * m_, step_) + 1);
      const std::int64_t jhi = std::min<std::int64_t>(nb - 1, detail::floor_div(c + s_, step_));
      for (std::int64_t j = jlo; j <= jhi; ++j) members.push_back(static_cast<int>(j));
      offsets[static_cast<std::size_t>(c) + 1] = static_cast<std::int64_t>(members.size());
      owner[static_cast<std::size_t>(c)] = static_cast<int>(c / step_);
    }
    finish(offsets, members, owner, false);
    for (std::size_t i = 0; i < streams_.size(); ++i) aux_[i].first_block = streams_[i].first_block;
  }

  std::int64_t start(std::int64_t j) const { return d0_ - s_ + j * step_; }

  std::int64_t cell_of(const Vertex& x) const override { return x.c[0] - x.c[1] - d0_; }
  std::int64_t tau_of(const Vertex& x) const override { return x.c[0] + x.c[1]; }
  Vertex vertex_at(std::int64_t cell, std::int64_t tau) const override {
    const std::int64_t d = cell + d0_;
    return Vertex{(tau + d) / 2, (tau - d) / 2};
  }

  Address address(const Vertex& x, Layer layer) const override {
    Address a;
    addresses(&x, 1, layer, &a);
    return a;
  }

  // Members are copied to locals: stores to out could otherwise alias them.
  void addresses(const Vertex* xs, std::size_t count, Layer layer, Address* out) const override {
    const std::int64_t d0 = d0_, B = B_;
    const int shift = b_shift_;
    const int* stream_of = (layer == Layer::In ? in_stream_ : out_stream_).data();
    const Aux* aux = aux_.data();
    for (std::size_t i = 0; i < count; ++i) {
      const std::int64_t x0 = xs[i].c[0], x1 = xs[i].c[1];
      const std::int64_t c = x0 - x1 - d0, t = x0 + x1;
      const Aux& a = aux[stream_of[c]];
      const std::int64_t r = (a.twice_rank_base[static_cast<std::size_t>(t)] + c) >> 1;
      out[i] = shift >= 0 ? Address{a.first_block + (r >> shift), r & (B - 1)} : Address{a.first_block + r / B, r % B};
    }
  }

  std::int64_t rank(const Stream& st, std::int64_t cell, std::int64_t tau) const override {
    const Aux& a = aux_[static_cast<std::size_t>(&st - streams_.data())];
    return a.prefix[static_cast<std::size_t>(tau)] + (cell - first_valid(a, tau)) / 2;
  }

  std::pair<std::int64_t, std::int64_t> element(const Stream& st, std::int64_t r) const override {
    const Aux& a = aux_[static_cast<std::size_t>(&st - streams_.data())];
    const auto it = std::upper_bound(a.prefix.begin(), a.prefix.end(), r);
    const std::int64_t tau = (it - a.prefix.begin()) - 1;
    return {first_valid(a, tau) + 2 * (r - a.prefix[static_cast<std::size_t>(tau)]), tau};
  }

 protected:
  void index_stream(Stream& st) override {
    const auto i = static_cast<std::size_t>(&st - streams_.data());
    if (aux_.size() < streams_.size()) aux_.resize(streams_.size());
    Aux& a = aux_[i];
    a.lo = st.cells.front();
    a.hi = st.cells.back();
    a.prefix.assign(static_cast<std::size_t>(ntau_) + 1, 0);
    a.twice_rank_base.assign(static_cast<std::size_t>(ntau_), 0);
    for (std::int64_t t = 0; t < ntau_; ++t) {
      const std::int64_t f = first_valid(a, t), l = last_valid(a, t);
      const std::int64_t cnt = l >= f ? (l - f) / 2 + 1 : 0;
      a.prefix[static_cast<std::size_t>(t) + 1] = a.prefix[static_cast<std::size_t>(t)] + cnt;
      // f has the parity of every valid cell at t, so (this + c) / 2 is exact.
      a.twice_rank_base[static_cast<std::size_t>(t)] = 2 * a.prefix[static_cast<std::size_t>(t)] - f;
    }
    st.length = a.prefix.back();
  }

 private:
  struct Aux {
    std::int64_t lo = 0, hi = -1;  // cell range
    std::int64_t first_block = 0;
    std::vector<std::int64_t> prefix;
    std::vector<std::int64_t> twice_rank_base;  // rank of (c, t) is (twice_rank_base[t] + c) / 2
  };

  // Valid cells at tau: d in [max(-tau, tau - 2(k2-1)), min(tau, 2(k1-1) - tau)], same parity as tau.
  std::int64_t first_valid(const Aux& a, std::int64_t tau) const {
    std::int64_t f = std::max(a.lo, std::max(-tau, tau - 2 * (k2_ - 1)) - d0_);
    if (((f + d0_ - tau) & 1) != 0) ++f;
    return f;
  }
  std::int64_t last_valid(const Aux& a, std::int64_t tau) const {
    std::int64_t l = std::min(a.hi, std::min(tau, 2 * (k1_ - 1) - tau) - d0_);
    if (((l + d0_ - tau) & 1) != 0) --l;
    return l;
  }

  std::int64_t k1_ = 0, k2_ = 0, d0_ = 0, step_ = 0;
  std::vector<Aux> aux_;
};

}  // namespace stencilio
