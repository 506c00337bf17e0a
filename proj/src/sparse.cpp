#include "tightdual/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace tightdual {

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) throw std::out_of_range("triplet outside matrix shape");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    const std::size_t i = entries[k].row, j = entries[k].col;
    double sum = 0.0;
    for (; k < entries.size() && entries[k].row == i && entries[k].col == j; ++k) {
      sum += entries[k].value;
    }
    if (sum == 0.0) continue;
    m.col_idx_.push_back(j);
    m.values_.push_back(sum);
    ++m.row_ptr_[i + 1];
  }
  for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      t.push_back({col_idx_[k], i, values_[k]});
    }
  }
  return from_triplets(cols_, rows_, std::move(t));
}

std::vector<Triplet> CsrMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      t.push_back({i, col_idx_[k], values_[k]});
    }
  }
  return t;
}

nlohmann::json to_triplet_json(const CsrMatrix& m) {
  nlohmann::json is = nlohmann::json::array(), js = nlohmann::json::array(),
                 vs = nlohmann::json::array();
  for (const auto& t : m.triplets()) {
    is.push_back(t.row);
    js.push_back(t.col);
    vs.push_back(t.value);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"i", is}, {"j", js}, {"v", vs}};
}

CsrMatrix from_triplet_json(const nlohmann::json& j) {
  const auto& is = j.at("i");
  const auto& js = j.at("j");
  const auto& vs = j.at("v");
  if (is.size() != js.size() || is.size() != vs.size()) {
    throw std::invalid_argument("triplet arrays differ in length");
  }
  std::vector<Triplet> t;
  t.reserve(is.size());
  for (std::size_t k = 0; k < is.size(); ++k) {
    t.push_back({is[k].get<std::size_t>(), js[k].get<std::size_t>(), vs[k].get<double>()});
  }
  return CsrMatrix::from_triplets(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                                  std::move(t));
}

}  // namespace tightdual
