#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "tightdual/fosolve.hpp"
#include "tightdual/kernels.hpp"

namespace tightdual {

namespace {

namespace ks = kernels::serial;

// Jacobian entry = Σ coeff·(1 | ∂slot1/∂slot2 | ∂slot1/∂vec_j) over its terms.
enum class TermKind { direct, d1_d2, d1_v };

struct JacTerm {
  TermKind kind;
  double coeff;
  std::size_t cone;
  std::size_t var;  // cone-vector row for d1_v
};

struct NlpData {
  const CanonicalProblem* p;
  double eps;
  std::vector<double> bound_d;
  CsrMatrix Ct;
  std::vector<std::vector<JacTerm>> terms;
  std::vector<std::size_t> cone_of_row;
};

std::vector<double> full_cone(const NlpData& d, std::span<const double> z) {
  const auto& p = *d.p;
  const std::size_t off = p.num_eq() + p.num_bound_rows();
  std::vector<double> c(z.begin() + static_cast<std::ptrdiff_t>(off), z.end());
  ks::replace_slot1(p.cones, c, d.eps);
  return c;
}

}  // namespace

NlpSpec export_nlp(const CanonicalProblem& p, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  auto data = std::make_shared<NlpData>();
  data->p = &p;
  data->eps = eps;
  auto [C, d] = bound_rows(p);
  data->bound_d = std::move(d);
  data->Ct = C.transpose();

  NlpSpec s;
  s.num_lambda = p.num_eq();
  s.num_mu = p.num_bound_rows();
  s.num_cone = p.num_cone_rows();
  s.num_constraints = p.num_vars();
  const double inf = std::numeric_limits<double>::infinity();
  s.var_lower.assign(s.num_vars(), -inf);
  s.var_upper.assign(s.num_vars(), inf);
  for (std::size_t i = 0; i < s.num_mu; ++i) s.var_lower[s.num_lambda + i] = 0.0;
  const std::size_t off = s.num_lambda + s.num_mu;
  for (const auto& c : p.cones) {
    s.var_lower[off + c.slot1()] = s.var_upper[off + c.slot1()] = 0.0;
    if (c.kind == ConeKind::cost_epi) {
      s.var_lower[off + c.slot2()] = s.var_upper[off + c.slot2()] = 1.0;
    } else {
      s.var_lower[off + c.slot2()] = 0.0;
    }
  }

  // Sparsity: Aᵀ and Cᵀ blocks, −Fᵀ on slot2/vec columns, and the chain terms
  // of every slot1 row spread over its cone's slot2 and vec columns.
  std::vector<std::map<std::size_t, std::vector<JacTerm>>> rows(p.num_vars());
  auto add_block = [&](const CsrMatrix& mt, std::size_t col_off) {
    const auto rp = mt.row_ptr();
    const auto ci = mt.col_idx();
    const auto v = mt.values();
    for (std::size_t i = 0; i < mt.rows(); ++i) {
      for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
        rows[i][col_off + ci[k]].push_back({TermKind::direct, v[k], 0, 0});
      }
    }
  };
  add_block(p.At, 0);
  add_block(data->Ct, s.num_lambda);
  data->cone_of_row.assign(p.num_cone_rows(), 0);
  for (std::size_t k = 0; k < p.cones.size(); ++k) {
    for (std::size_t r = p.cones[k].row; r < p.cones[k].row + p.cones[k].size; ++r) {
      data->cone_of_row[r] = k;
    }
  }
  {
    const auto rp = p.Ft.row_ptr();
    const auto ci = p.Ft.col_idx();
    const auto v = p.Ft.values();
    for (std::size_t i = 0; i < p.num_vars(); ++i) {
      for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
        const std::size_t r = ci[k];
        const std::size_t ck = data->cone_of_row[r];
        const auto& c = p.cones[ck];
        if (r != c.slot1()) {
          rows[i][off + r].push_back({TermKind::direct, -v[k], 0, 0});
          continue;
        }
        if (c.kind != ConeKind::cost_epi) {
          rows[i][off + c.slot2()].push_back({TermKind::d1_d2, -v[k], ck, 0});
        }
        for (std::size_t j = c.vec_begin(); j < c.row + c.size; ++j) {
          rows[i][off + j].push_back({TermKind::d1_v, -v[k], ck, j});
        }
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto& [col, t] : rows[i]) {
      s.jac_rows.push_back(i);
      s.jac_cols.push_back(col);
      data->terms.push_back(std::move(t));
    }
  }

  s.objective = [data, off](std::span<const double> z) {
    const auto& p = *data->p;
    const auto c = full_cone(*data, z);
    return ks::dot(z.subspan(0, p.num_eq()), p.b) +
           ks::dot(z.subspan(p.num_eq(), p.num_bound_rows()), data->bound_d) -
           ks::dot(c, p.g);
  };
  s.gradient = [data, off](std::span<const double> z, std::span<double> grad) {
    const auto& p = *data->p;
    std::copy(p.b.begin(), p.b.end(), grad.begin());
    std::copy(data->bound_d.begin(), data->bound_d.end(),
              grad.begin() + static_cast<std::ptrdiff_t>(p.num_eq()));
    const auto c = full_cone(*data, z);
    auto gc = grad.subspan(off);
    for (std::size_t r = 0; r < p.num_cone_rows(); ++r) gc[r] = -p.g[r];
    ks::reduce_cone_gradient(p.cones, c, data->eps, gc);
    for (const auto& cr : p.cones) {
      if (cr.kind == ConeKind::cost_epi) gc[cr.slot2()] = 0.0;
    }
  };
  s.constraints = [data, off](std::span<const double> z, std::span<double> res) {
    const auto& p = *data->p;
    const auto c = full_cone(*data, z);
    std::copy(p.m.begin(), p.m.end(), res.begin());
    ks::spmv_acc(p.At, z.subspan(0, p.num_eq()), 1.0, res);
    ks::spmv_acc(data->Ct, z.subspan(p.num_eq(), p.num_bound_rows()), 1.0, res);
    ks::spmv_acc(p.Ft, c, -1.0, res);
  };
  s.jacobian_values = [data, off](std::span<const double> z, std::span<double> vals) {
    const auto& p = *data->p;
    const auto zc = z.subspan(off);
    for (std::size_t e = 0; e < data->terms.size(); ++e) {
      double v = 0.0;
      for (const auto& t : data->terms[e]) {
        if (t.kind == TermKind::direct) {
          v += t.coeff;
          continue;
        }
        const auto& c = p.cones[t.cone];
        if (c.kind == ConeKind::cost_epi) {
          v += t.coeff * zc[t.var];
          continue;
        }
        const double den = 2.0 * zc[c.slot2()] + data->eps;
        if (den == 0.0) continue;
        if (t.kind == TermKind::d1_v) {
          v += t.coeff * 2.0 * zc[t.var] / den;
        } else {
          double q = 0.0;
          for (std::size_t j = c.vec_begin(); j < c.row + c.size; ++j) q += zc[j] * zc[j];
          v -= t.coeff * 2.0 * q / (den * den);
        }
      }
      vals[e] = v;
    }
  };
  return s;
}

}  // namespace tightdual
