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

#include "stencilio/bounds.hpp"

namespace stencilio {
namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(LowerBound, TwoAndThreeDimensions) {
  for (double M : {16.0, 4096.0, 1e7})
    for (int s : {1, 2, 3}) {
      EXPECT_LT(rel(lower_bound_constant(2, s, M), 4.0 * s * s / M), 1e-13);
      EXPECT_LT(rel(lower_bound_constant(3, s, M), 8.0 * std::pow(s, 1.5) / (std::sqrt(3.0) * std::sqrt(M))), 1e-13);
    }
}

TEST(LowerBound, GeneralDimension) {
  const double M = 5000;
  for (int n = 2; n <= 6; ++n) {
    const double e = 1.0 / (n - 1);
    const double want = 4 * std::pow(2.0, e) * (n - 1) / std::pow(std::tgamma(n + 1.0), e) / std::pow(M, e);
    EXPECT_LT(rel(lower_bound_constant(n, 1, M), want), 1e-13) << n;
  }
}

TEST(LowerBound, RejectsBadArguments) {
  EXPECT_THROW(lower_bound_constant(1, 1, 100), Error);
  EXPECT_THROW(lower_bound_constant(2, 0, 100), Error);
  EXPECT_THROW(lower_bound_constant(2, 1, 1), Error);
}

// Leading constants times B * M^(1/(n-1)) for s = 1.
TEST(UpperBound, FrozenLayoutConstants) {
  const double M = 4096, B = 16;
  auto scaled = [&](LayoutKind k, int n) { return upper_bound_leading(k, n, 1, M, B) * B * std::pow(M, 1.0 / (n - 1)); };
  EXPECT_NEAR(scaled(LayoutKind::BlockAlignedDiagonal2D, 2), 4, 1e-12);
  EXPECT_NEAR(scaled(LayoutKind::BlockAlignedColumn2D, 2), 8, 1e-12);
  EXPECT_NEAR(scaled(LayoutKind::Row2D, 2), 8 * B, 1e-9);
  EXPECT_NEAR(scaled(LayoutKind::HexagonalAlignedDiagonal3D, 3), 6.531972647421808, 1e-12);
  EXPECT_NEAR(scaled(LayoutKind::BlockAlignedDiagonal2Din3D, 3), 8, 1e-12);
  EXPECT_NEAR(scaled(LayoutKind::BlockAlignedColumnPole3D, 3), 11.313708498984761, 1e-12);
  EXPECT_NEAR(scaled(LayoutKind::Row3D, 3), 8 * std::sqrt(B), 1e-9);
  EXPECT_NEAR(scaled(LayoutKind::BlockAlignedColumnND, 4), 4 * std::cbrt(2.0) * 3, 1e-12);
}

TEST(UpperBound, DimensionChecked) {
  EXPECT_THROW(upper_bound_leading(LayoutKind::Row2D, 3, 1, 100, 4), Error);
  EXPECT_THROW(upper_bound_leading(LayoutKind::HexagonalAlignedDiagonal3D, 2, 1, 100, 4), Error);
  EXPECT_THROW(upper_bound_leading(LayoutKind::BlockAlignedDiagonal2D, 2, 1, 100, 0), Error);
}

TEST(UpperBound, NeverBelowLowerBound) {
  for (LayoutKind k : kAllLayoutKinds)
    for (int n = 2; n <= 6; ++n) {
      if (!kind_supports_dimension(k, n)) continue;
      for (int s : {1, 2})
        for (double M : {256.0, 6144.0, 1e6})
          EXPECT_GE(upper_bound_leading(k, n, s, M, 8) * (1 + 1e-12), lower_bound_constant(n, s, M) / 8)
              << to_string(k) << " n=" << n;
    }
}

TEST(Gap, FrozenValues) {
  EXPECT_DOUBLE_EQ(gap_ratio(2), 2);
  EXPECT_NEAR(gap_ratio(3), std::sqrt(6.0), 1e-14);
  EXPECT_NEAR(gap_ratio(4), std::cbrt(24.0), 1e-14);
  // Diagonal layouts close the gap in 2D and leave sqrt(2) in 3D.
  EXPECT_NEAR(upper_bound_leading(LayoutKind::BlockAlignedDiagonal2D, 2, 1, 999, 8) * 8 / lower_bound_constant(2, 1, 999), 1,
              1e-14);
  EXPECT_NEAR(upper_bound_leading(LayoutKind::HexagonalAlignedDiagonal3D, 3, 1, 999, 8) * 8 /
                  lower_bound_constant(3, 1, 999),
              std::sqrt(2.0), 1e-14);
  EXPECT_THROW(gap_ratio(1), Error);
}

TEST(Reports, CarryProvenance) {
  const BoundReport lo = lower_bound_report(3, 1, 6144, 8);
  EXPECT_EQ(lo.provenance, Provenance::LowerBound);
  EXPECT_FALSE(lo.layout.has_value());
  EXPECT_DOUBLE_EQ(lo.per_point_rate * 8, lo.leading_constant);
  const BoundReport up = upper_bound_report(LayoutKind::HexagonalAlignedDiagonal3D, 3, 1, 6144, 8);
  EXPECT_EQ(up.provenance, Provenance::UpperBoundLayout);
  EXPECT_EQ(up.layout, LayoutKind::HexagonalAlignedDiagonal3D);
  EXPECT_DOUBLE_EQ(up.compulsory_constant, 2);
}

TEST(RoundQuantities, FrozenValues) {
  const RoundQuantities q2 = round_quantities(2, 1, 100);
  EXPECT_EQ(q2.c, 200);
  EXPECT_NEAR(q2.r0, 50, 1e-12);
  const RoundQuantities q3 = round_quantities(3, 1, 6144);
  EXPECT_EQ(q3.c, 4 * 6144);
  EXPECT_NEAR(q3.r0, std::sqrt(4608.0), 1e-12);
}

TEST(ReferenceBounds, FrozenValues) {
  const double M = 4096, B = 16;
  EXPECT_NEAR(reference::frumkin_wijngaart_lower(2, M, B) * B * M, 8.0 / 9.0, 1e-14);
  EXPECT_NEAR(reference::frumkin_wijngaart_lower(3, M, B) * B * std::sqrt(M), 2 / std::sqrt(3.0), 1e-14);
  EXPECT_DOUBLE_EQ(reference::leopold_lower_2d(M, B) * B * M, 2);
  EXPECT_DOUBLE_EQ(reference::leopold_upper_2d(M, B) * B * M, 8);
}

}  // namespace
}  // namespace stencilio
