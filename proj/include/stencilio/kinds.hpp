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

#include <array>
#include <string>
#include <string_view>

#include "stencilio/errors.hpp"

namespace stencilio {

enum class LayoutKind {
  Row2D,
  BlockAlignedColumn2D,
  BlockAlignedDiagonal2D,
  Row3D,
  BlockAlignedColumnPole3D,
  BlockAlignedDiagonal2Din3D,
  HexagonalAlignedDiagonal3D,
  BlockAlignedColumnND,
};

inline constexpr std::array<LayoutKind, 8> kAllLayoutKinds = {
    LayoutKind::Row2D,
    LayoutKind::BlockAlignedColumn2D,
    LayoutKind::BlockAlignedDiagonal2D,
    LayoutKind::Row3D,
    LayoutKind::BlockAlignedColumnPole3D,
    LayoutKind::BlockAlignedDiagonal2Din3D,
    LayoutKind::HexagonalAlignedDiagonal3D,
    LayoutKind::BlockAlignedColumnND,
};

inline std::string_view to_string(LayoutKind k) {
  switch (k) {
    case LayoutKind::Row2D: return "Row2D";
    case LayoutKind::BlockAlignedColumn2D: return "BlockAlignedColumn2D";
    case LayoutKind::BlockAlignedDiagonal2D: return "BlockAlignedDiagonal2D";
    case LayoutKind::Row3D: return "Row3D";
    case LayoutKind::BlockAlignedColumnPole3D: return "BlockAlignedColumnPole3D";
    case LayoutKind::BlockAlignedDiagonal2Din3D: return "BlockAlignedDiagonal2Din3D";
    case LayoutKind::HexagonalAlignedDiagonal3D: return "HexagonalAlignedDiagonal3D";
    case LayoutKind::BlockAlignedColumnND: return "BlockAlignedColumnND";
  }
  return "?";
}

inline LayoutKind parse_layout_kind(std::string_view name) {
  for (LayoutKind k : kAllLayoutKinds)
    if (to_string(k) == name) return k;
  fail(ErrorCode::InvalidArgument, "unknown layout kind '" + std::string(name) + "'");
}

inline bool kind_supports_dimension(LayoutKind k, int n) {
  switch (k) {
    case LayoutKind::Row2D:
    case LayoutKind::BlockAlignedColumn2D:
    case LayoutKind::BlockAlignedDiagonal2D: return n == 2;
    case LayoutKind::Row3D:
    case LayoutKind::BlockAlignedColumnPole3D:
    case LayoutKind::BlockAlignedDiagonal2Din3D:
    case LayoutKind::HexagonalAlignedDiagonal3D: return n == 3;
    case LayoutKind::BlockAlignedColumnND: return n >= 2 && n <= 6;
  }
  return false;
}

inline void require_dimension(LayoutKind k, int n) {
  if (!kind_supports_dimension(k, n))
    fail(ErrorCode::InvalidArgument, std::string(to_string(k)) + " does not support n=" + std::to_string(n));
}

}  // namespace stencilio
