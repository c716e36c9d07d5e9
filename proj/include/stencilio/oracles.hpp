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
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "stencilio/errors.hpp"
#include "stencilio/grid.hpp"

namespace stencilio {

// Direct evaluation on an in-core array; wraps modulo 2^64 like the machine.
inline std::vector<std::int64_t> naive_stencil(const GridSpec& g, const StencilSpec& st, const std::vector<std::int64_t>& input) {
  if (static_cast<std::int64_t>(input.size()) != g.vertex_count()) fail(ErrorCode::InvalidArgument, "input size differs from vertex count");
  std::vector<std::int64_t> out(input.size());
  for (std::int64_t i = 0; i < g.vertex_count(); ++i) {
    std::uint64_t sum = 0;
    for (const Vertex& y : stencil_neighbors(g, st, g.delinearize(i)))
      sum += static_cast<std::uint64_t>(input[static_cast<std::size_t>(g.linearize(y))]);
    out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(sum);
  }
  return out;
}

struct BallWeights {
  std::int64_t r = 0;
  std::int64_t ball = 0;
  std::int64_t boundary = 0;  // members with a unit neighbour outside
  std::int64_t core = 0;      // members whose unit neighbours are all inside
};

// Lattice enumeration over [-r-1, r+1]^n for every r <= r_max.
inline std::vector<BallWeights> brute_ball_weights(int n, std::int64_t r_max) {
  if (n < 1 || n > 4) fail(ErrorCode::InvalidArgument, "brute_ball_weights needs 1 <= n <= 4");
  if (r_max < 0 || r_max > 8) fail(ErrorCode::InvalidArgument, "brute_ball_weights needs 0 <= r_max <= 8");
  std::vector<BallWeights> out;
  for (std::int64_t r = 0; r <= r_max; ++r) {
    BallWeights w;
    w.r = r;
    const std::int64_t side = 2 * r + 3;
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) total *= side;
    auto norm = [&](const std::int64_t* x) {
      std::int64_t d = 0;
      for (int i = 0; i < n; ++i) d += std::llabs(x[i]);
      return d;
    };
    for (std::int64_t idx = 0; idx < total; ++idx) {
      std::int64_t x[4] = {0, 0, 0, 0};
      std::int64_t rem = idx;
      for (int i = 0; i < n; ++i) {
        x[i] = rem % side - (r + 1);
        rem /= side;
      }
      if (norm(x) > r) continue;
      ++w.ball;
      bool all_in = true;
      for (int i = 0; i < n && all_in; ++i)
        for (int d : {-1, 1}) {
          x[i] += d;
          if (norm(x) > r) all_in = false;
          x[i] -= d;
        }
      if (all_in) {
        ++w.core;
      } else {
        ++w.boundary;
      }
    }
    out.push_back(w);
  }
  return out;
}

namespace detail {

// Vertex subsets of a tiny torus as bitmasks.
class TinyTorus {
 public:
  TinyTorus(std::int64_t k, int n) : k_(k), n_(n) {
    if (k < 2 || n < 1) fail(ErrorCode::InvalidArgument, "torus needs k >= 2, n >= 1");
    N_ = 1;
    for (int i = 0; i < n; ++i) N_ *= static_cast<int>(k);
    if (N_ > 64) fail(ErrorCode::InvalidArgument, "torus too large for bitmask enumeration");
    nbr_.assign(static_cast<std::size_t>(N_), 0);
    dist_.assign(static_cast<std::size_t>(N_ * N_), 0);
    for (int a = 0; a < N_; ++a) {
      for (int b = 0; b < N_; ++b) {
        std::int64_t d = 0;
        int ra = a, rb = b;
        for (int i = 0; i < n_; ++i) {
          const std::int64_t da = std::llabs(static_cast<std::int64_t>(ra % k_) - rb % k_);
          d += std::min(da, k_ - da);
          ra /= static_cast<int>(k_);
          rb /= static_cast<int>(k_);
        }
        dist_[static_cast<std::size_t>(a * N_ + b)] = static_cast<int>(d);
        if (d == 1) nbr_[static_cast<std::size_t>(a)] |= std::uint64_t{1} << b;
      }
    }
  }
  int size() const { return N_; }
  int dist(int a, int b) const { return dist_[static_cast<std::size_t>(a * N_ + b)]; }
  std::uint64_t full() const { return N_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << N_) - 1; }

  std::uint64_t closure(std::uint64_t S) const {
    std::uint64_t out = S;
    for (std::uint64_t t = S; t; t &= t - 1) out |= nbr_[static_cast<std::size_t>(std::countr_zero(t))];
    return out;
  }
  std::uint64_t core(std::uint64_t S, int s) const {
    for (int i = 0; i < s; ++i) {
      std::uint64_t out = 0;
      for (std::uint64_t t = S; t; t &= t - 1) {
        const int v = std::countr_zero(t);
        if ((nbr_[static_cast<std::size_t>(v)] & ~S) == 0) out |= std::uint64_t{1} << v;
      }
      S = out;
    }
    return S;
  }

 private:
  std::int64_t k_;
  int n_;
  int N_ = 0;
  std::vector<std::uint64_t> nbr_;
  std::vector<int> dist_;
};

inline double binomial(int n, int k) {
  double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Calls f(mask) for every k-subset of [0, n) in colex order.
template <class F>
void for_each_subset(int n, int k, F&& f) {
  if (k == 0) {
    f(std::uint64_t{0});
    return;
  }
  if (k > n) return;
  std::uint64_t S = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  while (true) {
    f(S);
    // Gosper's hack: next larger integer with the same popcount.
    const std::uint64_t c = S & (~S + 1);
    const std::uint64_t r = S + c;
    if (r == 0) return;
    const std::uint64_t next = (((r ^ S) >> 2) / c) | r;
    if (n < 64 && (next >> n) != 0) return;
    S = next;
  }
}

}  // namespace detail

struct IsoperimetryVerdict {
  int weight = 0;
  std::int64_t subsets = 0;
  int min_closure = 0;          // over all subsets of this weight
  int ball_closure = 0;         // best over the integral balls of this weight
  int max_core = 0;             // over all subsets, core of the given depth
  int ball_core = 0;
  std::uint64_t argmin_closure = 0;
  std::uint64_t argmax_core = 0;
  std::uint64_t ball = 0;       // the ball attaining ball_closure
  bool closure_ok = false;
  bool core_ok = false;
};

inline constexpr double kDefaultEnumerationBudget = 1e8;

// Integral balls of weight v around vertex 0: the full ball of the largest radius r with
// |b^(r)| <= v, plus every (v - |b^(r)|)-subset of the sphere at distance r+1.
// For every v <= weight_cap, checks that some integral ball attains the minimum closure and
// the maximum s-fold inner core over all v-subsets of Z_k^n.
inline std::vector<IsoperimetryVerdict> exhaustive_isoperimetry(std::int64_t k, int n, int weight_cap, int s = 1,
                                                                 double budget = kDefaultEnumerationBudget) {
  if (k % 2 != 0) fail(ErrorCode::InvalidArgument, "isoperimetry checks need even k");
  detail::TinyTorus T(k, n);
  const int N = T.size();
  if (weight_cap < 0 || weight_cap > N) fail(ErrorCode::InvalidArgument, "weight cap outside [0, k^n]");
  double visits = 0;
  for (int v = 1; v <= weight_cap; ++v) visits += detail::binomial(N, v);
  if (visits > budget)
    fail(ErrorCode::BudgetExceeded, "enumeration needs " + std::to_string(visits) + " subset visits, budget " + std::to_string(budget));

  std::vector<IsoperimetryVerdict> out;
  for (int v = 1; v <= weight_cap; ++v) {
    IsoperimetryVerdict r;
    r.weight = v;
    r.min_closure = std::numeric_limits<int>::max();
    r.max_core = -1;
    detail::for_each_subset(N, v, [&](std::uint64_t S) {
      ++r.subsets;
      const int cl = std::popcount(T.closure(S));
      const int co = std::popcount(T.core(S, s));
      if (cl < r.min_closure) r.min_closure = cl, r.argmin_closure = S;
      if (co > r.max_core) r.max_core = co, r.argmax_core = S;
    });

    std::uint64_t inner = 0;
    std::vector<int> sphere;
    for (int radius = 0;; ++radius) {
      std::uint64_t b = 0;
      std::vector<int> next;
      for (int x = 0; x < N; ++x) {
        if (T.dist(0, x) <= radius) b |= std::uint64_t{1} << x;
        if (T.dist(0, x) == radius + 1) next.push_back(x);
      }
      if (std::popcount(b) > v) break;
      inner = b;
      sphere = std::move(next);
      if (std::popcount(b) == v || sphere.empty()) break;
    }
    const int extra = v - std::popcount(inner);
    r.ball_closure = std::numeric_limits<int>::max();
    r.ball_core = -1;
    detail::for_each_subset(static_cast<int>(sphere.size()), extra, [&](std::uint64_t pick) {
      std::uint64_t S = inner;
      for (std::uint64_t t = pick; t; t &= t - 1) S |= std::uint64_t{1} << sphere[static_cast<std::size_t>(std::countr_zero(t))];
      const int cl = std::popcount(T.closure(S));
      const int co = std::popcount(T.core(S, s));
      if (cl < r.ball_closure) r.ball_closure = cl, r.ball = S;
      r.ball_core = std::max(r.ball_core, co);
    });
    r.closure_ok = r.ball_closure == r.min_closure;
    r.core_ok = r.ball_core == r.max_core;
    out.push_back(r);
  }
  return out;
}

}  // namespace stencilio
