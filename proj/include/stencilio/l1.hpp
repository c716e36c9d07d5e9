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
#include <functional>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"
#include "stencilio/rational.hpp"

namespace stencilio {

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorCode::Overflow, "l1 weight overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorCode::Overflow, "l1 weight overflow");
  return r;
}

// Weights of b_dim^(l) for l = 0..r via the dimension recursion. dim 0 is a point.
inline std::vector<std::int64_t> ball_weight_row(int dim, std::int64_t r) {
  std::vector<std::int64_t> row(static_cast<std::size_t>(r + 1), 1);
  for (int d = 1; d <= dim; ++d) {
    std::vector<std::int64_t> next(row.size());
    std::int64_t prefix = 0;
    for (std::size_t l = 0; l < row.size(); ++l) {
      next[l] = checked_add(row[l], checked_mul(2, prefix));
      prefix = checked_add(prefix, row[l]);
    }
    row = std::move(next);
  }
  return row;
}

}  // namespace detail

// w(b_n^(r,0)): lattice points of Z^n with |x|_1 <= r.
inline std::int64_t ball_weight(int n, std::int64_t r) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (r < 0) fail(ErrorCode::InvalidArgument, "r must be >= 0");
  return detail::ball_weight_row(n, r).back();
}

// w(Gamma b_n^(r,0)): lattice points with |x|_1 == r.
inline std::int64_t boundary_weight(int n, std::int64_t r) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (r < 0) fail(ErrorCode::InvalidArgument, "r must be >= 0");
  if (r == 0) return 1;
  auto row = detail::ball_weight_row(n - 1, r);
  return detail::checked_add(row[r], row[r - 1]);
}

inline std::int64_t sphere_weight(int n, std::int64_t r) { return boundary_weight(n, r); }

// (2^n/n!, 2^n/(n-1)!): the two leading coefficients of w(b_n^(r,0)) as a polynomial in r.
inline std::pair<Rational, Rational> leading_coefficients(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  Rational pow2(1), fact(1), fact_prev(1);
  for (int i = 1; i <= n; ++i) {
    pow2 *= 2;
    fact *= i;
    if (i < n) fact_prev *= i;
  }
  return {pow2 / fact, pow2 / fact_prev};
}

struct FractionalBall {
  int n = 1;
  std::int64_t r = 0;
  Rational alpha;

  Rational weight() const { return Rational(ball_weight(n, r)) + alpha * Rational(sphere_weight(n, r + 1)); }
};

inline FractionalBall ball_of_weight(int n, const Rational& v) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (v < Rational(0)) fail(ErrorCode::InvalidArgument, "weight must be >= 0");
  // The empty system has weight 0; the ball of radius 0 with surplus 0 already weighs 1.
  if (v < Rational(1)) fail(ErrorCode::InvalidArgument, "weight below a single point has no ball");
  std::int64_t r = 0;
  while (Rational(ball_weight(n, r + 1)) <= v) ++r;
  Rational alpha = (v - Rational(ball_weight(n, r))) / Rational(sphere_weight(n, r + 1));
  return FractionalBall{n, r, alpha};
}

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(v.n);
    for (int i = 0; i < v.n; ++i) {
      h ^= static_cast<std::uint64_t>(v.c[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

// A finite set of vertices of Z^n, or of a torus when a torus GridSpec is given.
class VertexSet {
 public:
  static VertexSet on_lattice(int n) { return VertexSet(n, std::nullopt); }
  static VertexSet on_torus(const GridSpec& g) {
    if (g.topology() != Topology::Torus) fail(ErrorCode::InvalidArgument, "torus VertexSet needs a torus GridSpec");
    return VertexSet(g.n(), g);
  }

  int n() const { return n_; }
  const std::optional<GridSpec>& torus() const { return torus_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const Vertex& x) const { return members_.count(normalize(x)) != 0; }
  void insert(const Vertex& x) { members_.insert(normalize(x)); }
  void erase(const Vertex& x) { members_.erase(normalize(x)); }

  std::vector<Vertex> sorted() const {
    std::vector<Vertex> out(members_.begin(), members_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  bool subset_of(const VertexSet& other) const {
    for (const auto& v : members_)
      if (!other.contains(v)) return false;
    return true;
  }

  friend bool operator==(const VertexSet& a, const VertexSet& b) { return a.size() == b.size() && a.subset_of(b); }

  VertexSet empty_like() const { return VertexSet(n_, torus_); }

  // Calls f on the 2n vertices at distance 1 (with repeats when a torus side is 2).
  template <class F>
  void for_each_unit_neighbor(const Vertex& x, F&& f) const {
    for (int i = 0; i < n_; ++i) {
      for (int d : {-1, 1}) {
        Vertex y = x;
        y.c[i] += d;
        f(normalize(y));
      }
    }
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& v : members_) f(v);
  }

 private:
  VertexSet(int n, std::optional<GridSpec> torus) : n_(n), torus_(std::move(torus)) {
    if (n < 1 || n > kMaxDim) fail(ErrorCode::InvalidArgument, "bad dimension");
  }

  Vertex normalize(Vertex x) const {
    if (x.n != n_) fail(ErrorCode::InvalidArgument, "vertex dimension mismatch");
    if (torus_) {
      for (int i = 0; i < n_; ++i) {
        std::int64_t k = torus_->side(i);
        x.c[i] %= k;
        if (x.c[i] < 0) x.c[i] += k;
      }
    }
    return x;
  }

  int n_;
  std::optional<GridSpec> torus_;
  std::unordered_set<Vertex, VertexHash> members_;
};

// S plus every vertex at distance 1 from S.
inline VertexSet closure(const VertexSet& S) {
  VertexSet out = S;
  S.for_each([&](const Vertex& x) { S.for_each_unit_neighbor(x, [&](const Vertex& y) { out.insert(y); }); });
  return out;
}

// s-fold application of the one-step core {x in S : all distance-1 neighbours in S}.
inline VertexSet inner_core(const VertexSet& S, int s) {
  if (s < 1) fail(ErrorCode::InvalidArgument, "s must be >= 1");
  VertexSet cur = S;
  for (int step = 0; step < s && !cur.empty(); ++step) {
    VertexSet next = cur.empty_like();
    cur.for_each([&](const Vertex& x) {
      bool inside = true;
      cur.for_each_unit_neighbor(x, [&](const Vertex& y) { inside = inside && cur.contains(y); });
      if (inside) next.insert(x);
    });
    cur = std::move(next);
  }
  return cur;
}

inline VertexSet inner_boundary(const VertexSet& S, int s) {
  VertexSet core = inner_core(S, s);
  VertexSet out = S.empty_like();
  S.for_each([&](const Vertex& x) {
    if (!core.contains(x)) out.insert(x);
  });
  return out;
}

// b_n^(r,0) centred at the origin, on Z^n or wrapped onto the torus of `like`.
inline VertexSet ball_set(const VertexSet& like, std::int64_t r) {
  VertexSet out = like.empty_like();
  for (const Vertex& d : ball_offsets(like.n(), static_cast<int>(r))) out.insert(d);
  return out;
}

}  // namespace stencilio
