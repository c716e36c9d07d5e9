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
#include <initializer_list>
#include <string>
#include <vector>

#include "stencilio/errors.hpp"

namespace stencilio {

inline constexpr int kMaxDim = 8;

enum class Topology { Grid, Torus };

// Coordinates are 0-based: coordinate i lies in [0, k_i).
struct Vertex {
  std::array<std::int64_t, kMaxDim> c{};
  int n = 0;

  Vertex() = default;
  explicit Vertex(int dims) : n(dims) {}
  Vertex(std::initializer_list<std::int64_t> coords) : n(static_cast<int>(coords.size())) {
    if (coords.size() > static_cast<std::size_t>(kMaxDim)) fail(ErrorCode::InvalidArgument, "too many coordinates");
    std::copy(coords.begin(), coords.end(), c.begin());
  }
  explicit Vertex(const std::vector<std::int64_t>& coords) : n(static_cast<int>(coords.size())) {
    if (coords.size() > static_cast<std::size_t>(kMaxDim)) fail(ErrorCode::InvalidArgument, "too many coordinates");
    std::copy(coords.begin(), coords.end(), c.begin());
  }

  std::int64_t& operator[](int i) { return c[i]; }
  std::int64_t operator[](int i) const { return c[i]; }

  friend bool operator==(const Vertex& a, const Vertex& b) {
    if (a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }
  friend bool operator<(const Vertex& a, const Vertex& b) {
    if (a.n != b.n) return a.n < b.n;
    for (int i = 0; i < a.n; ++i)
      if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
    return false;
  }

  std::string str() const {
    std::string out = "(";
    for (int i = 0; i < n; ++i) {
      if (i) out += ',';
      out += std::to_string(c[i]);
    }
    return out + ")";
  }
};

class GridSpec {
 public:
  GridSpec(std::vector<std::int64_t> sides, Topology topology = Topology::Grid)
      : sides_(std::move(sides)), topology_(topology) {
    if (sides_.empty() || sides_.size() > static_cast<std::size_t>(kMaxDim))
      fail(ErrorCode::InvalidArgument, "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    count_ = 1;
    for (auto k : sides_) {
      if (k < 1) fail(ErrorCode::InvalidArgument, "side lengths must be >= 1");
      if (__builtin_mul_overflow(count_, k, &count_)) fail(ErrorCode::Overflow, "vertex count exceeds 64 bits");
    }
  }

  int n() const { return static_cast<int>(sides_.size()); }
  const std::vector<std::int64_t>& sides() const { return sides_; }
  std::int64_t side(int i) const { return sides_[i]; }
  Topology topology() const { return topology_; }
  std::int64_t vertex_count() const { return count_; }

  // k_1 >= k_2 >= ... >= k_n.
  bool has_canonical_order() const { return std::is_sorted(sides_.rbegin(), sides_.rend()); }

  bool contains(const Vertex& x) const {
    if (x.n != n()) return false;
    for (int i = 0; i < x.n; ++i)
      if (x.c[i] < 0 || x.c[i] >= sides_[i]) return false;
    return true;
  }

  // Row-major: the last coordinate varies fastest.
  std::int64_t linearize(const Vertex& x) const {
    if (!contains(x)) fail(ErrorCode::OutOfRange, "vertex " + x.str() + " outside grid");
    std::int64_t idx = 0;
    for (int i = 0; i < n(); ++i) idx = idx * sides_[i] + x.c[i];
    return idx;
  }

  Vertex delinearize(std::int64_t idx) const {
    if (idx < 0 || idx >= count_) fail(ErrorCode::OutOfRange, "index " + std::to_string(idx) + " outside grid");
    Vertex x(n());
    for (int i = n() - 1; i >= 0; --i) {
      x.c[i] = idx % sides_[i];
      idx /= sides_[i];
    }
    return x;
  }

  std::int64_t min_side() const { return *std::min_element(sides_.begin(), sides_.end()); }

 private:
  std::vector<std::int64_t> sides_;
  Topology topology_;
  std::int64_t count_ = 0;
};

inline std::int64_t vertex_count(const GridSpec& g) { return g.vertex_count(); }

struct StencilSpec {
  int s = 1;

  explicit StencilSpec(int radius) : s(radius) {
    if (s < 1) fail(ErrorCode::InvalidArgument, "stencil radius must be >= 1");
  }

  void validate_for(const GridSpec& g) const {
    if (2 * static_cast<std::int64_t>(s) >= g.min_side())
      fail(ErrorCode::InvalidArgument, "stencil radius requires 2s < min side");
  }
};

// All offsets d in Z^n with |d|_1 <= s, in lexicographic order.
inline std::vector<Vertex> ball_offsets(int n, int s) {
  std::vector<Vertex> out;
  Vertex d(n);
  auto rec = [&](auto&& self, int i, int budget) -> void {
    if (i == n) {
      out.push_back(d);
      return;
    }
    for (int v = -budget; v <= budget; ++v) {
      d.c[i] = v;
      self(self, i + 1, budget - (v < 0 ? -v : v));
    }
    d.c[i] = 0;
  };
  rec(rec, 0, s);
  return out;
}

// S_s(x), centre included, sorted by linear index.
inline std::vector<Vertex> stencil_neighbors(const GridSpec& g, const StencilSpec& st, const Vertex& x) {
  if (!g.contains(x)) fail(ErrorCode::OutOfRange, "vertex " + x.str() + " outside grid");
  std::vector<Vertex> out;
  for (const Vertex& d : ball_offsets(g.n(), st.s)) {
    Vertex y(g.n());
    bool inside = true;
    for (int i = 0; i < g.n(); ++i) {
      std::int64_t v = x.c[i] + d.c[i];
      if (g.topology() == Topology::Torus) {
        v %= g.side(i);
        if (v < 0) v += g.side(i);
      } else if (v < 0 || v >= g.side(i)) {
        inside = false;
        break;
      }
      y.c[i] = v;
    }
    if (inside) out.push_back(y);
  }
  std::sort(out.begin(), out.end(), [&](const Vertex& a, const Vertex& b) { return g.linearize(a) < g.linearize(b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Per-coordinate distance, wrapping on a torus.
inline std::int64_t l1_distance(const GridSpec& g, const Vertex& a, const Vertex& b) {
  std::int64_t d = 0;
  for (int i = 0; i < g.n(); ++i) {
    std::int64_t di = a.c[i] > b.c[i] ? a.c[i] - b.c[i] : b.c[i] - a.c[i];
    if (g.topology() == Topology::Torus) di = std::min(di, g.side(i) - di);
    d += di;
  }
  return d;
}

}  // namespace stencilio
