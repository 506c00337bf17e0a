#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace tightdual {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Immutable compressed-row matrix. Built once from triplets (duplicates are
/// summed, explicit zeros dropped); only products are needed downstream.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;

  CsrMatrix transpose() const;
  std::vector<Triplet> triplets() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// {"rows","cols","i":[...],"j":[...],"v":[...]} with 0-based indices.
nlohmann::json to_triplet_json(const CsrMatrix& m);
CsrMatrix from_triplet_json(const nlohmann::json& j);

}  // namespace tightdual
