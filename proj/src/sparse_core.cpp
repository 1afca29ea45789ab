#include "cleanknn/sparse_core.hpp"

#include <algorithm>
#include <cmath>

#include "cleanknn/errors.hpp"

namespace cleanknn {

ColumnStats column_stats(const InteractionMatrix& matrix) {
  if (matrix.nnz() == 0) throw EmptyMatrix();
  ColumnStats stats;
  const std::uint32_t m = matrix.n_items();
  stats.n_rows = matrix.n_users();
  stats.sums.assign(m, 0.0);
  for (std::uint32_t j : matrix.col_idx()) stats.sums[j] += 1.0;
  stats.means.resize(m);
  stats.l2norms.resize(m);
  for (std::uint32_t j = 0; j < m; ++j) {
    stats.means[j] = stats.sums[j] / static_cast<double>(stats.n_rows);
    stats.l2norms[j] = std::sqrt(stats.sums[j]);  // binary entries
  }
  return stats;
}

ScaledMatrix::ScaledMatrix(const InteractionMatrix& base, std::vector<double> divisors)
    : base_(&base), divisors_(std::move(divisors)) {
  if (divisors_.size() != base.n_items())
    throw DimensionMismatch("divisor vector length does not match column count");
  inv_scale_.resize(divisors_.size());
  for (std::uint32_t j = 0; j < divisors_.size(); ++j) {
    if (divisors_[j] > 0.0) {
      inv_scale_[j] = 1.0 / divisors_[j];
    } else {
      if (base.column_nnz(j) != 0) throw ZeroDivisorOnNonemptyColumn(j);
      inv_scale_[j] = 0.0;
    }
  }
}

void ScaledMatrix::matvec(std::span<const double> v, std::span<double> out,
                          bool transposed, std::uint64_t* op_counter) const {
  const InteractionMatrix& m = *base_;
  if (!transposed) {
    if (v.size() != n_cols() || out.size() != n_rows())
      throw DimensionMismatch("matvec vector length mismatch");
    for (std::uint32_t u = 0; u < n_rows(); ++u) {
      double acc = 0.0;
      for (std::uint32_t j : m.row(u)) acc += v[j] * inv_scale_[j];
      out[u] = acc;
    }
  } else {
    if (v.size() != n_rows() || out.size() != n_cols())
      throw DimensionMismatch("matvec vector length mismatch");
    for (std::uint32_t j = 0; j < n_cols(); ++j) {
      double acc = 0.0;
      for (std::uint32_t u : m.col(j)) acc += v[u];
      out[j] = acc * inv_scale_[j];
    }
  }
  if (op_counter) *op_counter += m.nnz();
}

std::vector<double> ScaledMatrix::matvec(std::span<const double> v, bool transposed) const {
  std::vector<double> out(transposed ? n_cols() : n_rows());
  matvec(v, out, transposed);
  return out;
}

SparseVector ScaledMatrix::gram_column(std::uint32_t j) const {
  if (j >= n_cols()) throw IndexOutOfRange(j, n_cols());
  const InteractionMatrix& m = *base_;
  std::vector<double> scratch(n_cols(), 0.0);
  std::vector<std::uint32_t> touched;
  const double wj = inv_scale_[j];
  for (std::uint32_t u : m.col(j)) {
    for (std::uint32_t jj : m.row(u)) {
      if (scratch[jj] == 0.0) touched.push_back(jj);
      scratch[jj] += wj * inv_scale_[jj];
    }
  }
  std::sort(touched.begin(), touched.end());
  SparseVector result;
  result.idx.reserve(touched.size());
  result.val.reserve(touched.size());
  for (std::uint32_t t : touched) {
    result.idx.push_back(t);
    result.val.push_back(scratch[t]);
  }
  return result;
}

ScaledMatrix cosine_scaled(const InteractionMatrix& base) {
  ColumnStats stats = column_stats(base);
  return ScaledMatrix(base, std::move(stats.l2norms));
}

}  // namespace cleanknn
