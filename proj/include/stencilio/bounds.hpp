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
#include <optional>

#include "stencilio/errors.hpp"
#include "stencilio/kinds.hpp"

namespace stencilio {

namespace detail {

inline double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline void check_bound_args(int n, int s, double M) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "bounds need n >= 2");
  if (s < 1) fail(ErrorCode::InvalidArgument, "bounds need s >= 1");
  if (M < 2) fail(ErrorCode::InvalidArgument, "bounds need M >= 2");
}

}  // namespace detail

enum class Provenance { LowerBound, UpperBoundLayout };

struct BoundReport {
  double leading_constant = 0;  // coefficient of prod(k)/B in the non-compulsory term
  double compulsory_constant = 2;
  double per_point_rate = 0;  // non-compulsory I/Os per grid point
  Provenance provenance = Provenance::LowerBound;
  std::optional<LayoutKind> layout;
};

// Non-compulsory I/Os per grid point times B.
inline double lower_bound_constant(int n, int s, double M) {
  detail::check_bound_args(n, s, M);
  double e = 1.0 / (n - 1);
  return 4.0 * (n - 1) * std::pow(2.0 * std::pow(s, n) / detail::factorial(n), e) / std::pow(M, e);
}

struct RoundQuantities {
  std::int64_t c = 0;  // round length in non-compulsory I/Os
  double r0 = 0;       // round radius
};

inline RoundQuantities round_quantities(int n, int s, std::int64_t M) {
  detail::check_bound_args(n, s, static_cast<double>(M));
  RoundQuantities q;
  q.c = 2 * static_cast<std::int64_t>(n - 1) * M;
  q.r0 = std::pow(detail::factorial(n) / std::pow(2.0, n) * static_cast<double>(M) / s, 1.0 / (n - 1));
  return q;
}

// Leading non-compulsory I/Os per grid point of the sweep on the given layout.
inline double upper_bound_leading(LayoutKind kind, int n, int s, double M, double B) {
  detail::check_bound_args(n, s, M);
  if (B < 1) fail(ErrorCode::InvalidArgument, "B must be >= 1");
  require_dimension(kind, n);
  const double sd = s;
  switch (kind) {
    case LayoutKind::Row2D: return 8.0 * sd / M;
    case LayoutKind::BlockAlignedColumn2D: return 8.0 * sd * sd / (B * M);
    case LayoutKind::BlockAlignedDiagonal2D: return 4.0 * sd * sd / (B * M);
    case LayoutKind::Row3D: return 8.0 * sd / (std::sqrt(B) * std::sqrt(M));
    case LayoutKind::BlockAlignedColumnPole3D: return 8.0 * std::sqrt(2.0) * std::pow(sd, 1.5) / (B * std::sqrt(M));
    case LayoutKind::BlockAlignedDiagonal2Din3D: return 8.0 * std::pow(sd, 1.5) / (B * std::sqrt(M));
    case LayoutKind::HexagonalAlignedDiagonal3D:
      return 8.0 * std::sqrt(2.0) * std::pow(sd, 1.5) / (std::sqrt(3.0) * B * std::sqrt(M));
    case LayoutKind::BlockAlignedColumnND: {
      double e = 1.0 / (n - 1);
      return 4.0 * std::pow(2.0, e) * std::pow(sd, n * e) * (n - 1) / (B * std::pow(M, e));
    }
  }
  return 0;
}

// Upper bound of the n-D column sweep over the lower bound.
inline double gap_ratio(int n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "gap_ratio needs n >= 2");
  return std::pow(detail::factorial(n), 1.0 / (n - 1));
}

inline BoundReport lower_bound_report(int n, int s, double M, double B) {
  BoundReport r;
  r.leading_constant = lower_bound_constant(n, s, M);
  r.per_point_rate = r.leading_constant / B;
  r.provenance = Provenance::LowerBound;
  return r;
}

inline BoundReport upper_bound_report(LayoutKind kind, int n, int s, double M, double B) {
  BoundReport r;
  r.per_point_rate = upper_bound_leading(kind, n, s, M, B);
  r.leading_constant = r.per_point_rate * B;
  r.provenance = Provenance::UpperBoundLayout;
  r.layout = kind;
  return r;
}

// Earlier published leading terms for the 1-star stencil, per grid point. Reference only.
namespace reference {

inline double frumkin_wijngaart_lower(int n, double M, double B) {
  double e = 1.0 / (n - 1);
  return std::pow(2.0 / 3.0, n * e) * n / std::pow(detail::factorial(n - 1), e) / (B * std::pow(M, e));
}

inline double leopold_lower_2d(double M, double B) { return 2.0 / (B * M); }
inline double leopold_lower_3d(double M, double B) { return 2.0 / (B * std::sqrt(M)); }
inline double leopold_upper_2d(double M, double B) { return 8.0 / (B * M); }
inline double leopold_upper_3d(double M, double B) { return 4.0 * std::sqrt(6.0) / (std::sqrt(B) * std::sqrt(M)); }

}  // namespace reference

}  // namespace stencilio
