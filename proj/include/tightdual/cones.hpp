#pragma once

#include <cstddef>
#include <string_view>

namespace tightdual {

enum class ConeKind { jabr, send_flow, recv_flow, cost_epi };

std::string_view to_string(ConeKind kind);

/// Rows [row, row + size) of the cone map F / constants g, and of the flat
/// dual cone vector, ordered (slot1, slot2, vector...). size = 2 + vector length.
struct ConeRange {
  ConeKind kind = ConeKind::jabr;
  std::size_t row = 0;
  std::size_t size = 2;

  std::size_t slot1() const { return row; }
  std::size_t slot2() const { return row + 1; }
  std::size_t vec_begin() const { return row + 2; }
  std::size_t vec_size() const { return size - 2; }
};

}  // namespace tightdual
