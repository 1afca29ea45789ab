#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cleanknn/interaction_matrix.hpp"

namespace cleanknn {

// Per-column statistics of a binary matrix, computed in one pass over the
// stored entries. For binary data sums[j] == l2norms[j]^2 exactly.
struct ColumnStats {
  std::vector<double> means;
  std::vector<double> sums;
  std::vector<double> l2norms;
  std::uint64_t n_rows = 0;
};

ColumnStats column_stats(const InteractionMatrix& matrix);

struct SparseVector {
  std::vector<std::uint32_t> idx;  // ascending
  std::vector<double> val;
};

// Column-scaled view of a binary matrix: logical entry (i, j) is
// 1 / divisor[j]. The base matrix is never copied or mutated, so one
// stored matrix serves cosine scaling, the literal column-sum scaling and
// raw access at once.
class ScaledMatrix {
public:
  // divisors[j] must be positive wherever column j has entries; a zero
  // divisor on an empty column passes through (the column stays zero).
  ScaledMatrix(const InteractionMatrix& base, std::vector<double> divisors);

  std::uint32_t n_rows() const noexcept { return base_->n_users(); }
  std::uint32_t n_cols() const noexcept { return base_->n_items(); }
  std::uint64_t nnz() const noexcept { return base_->nnz(); }
  const InteractionMatrix& base() const noexcept { return *base_; }
  double divisor(std::uint32_t j) const { return divisors_[j]; }
  double inv_scale(std::uint32_t j) const { return inv_scale_[j]; }
  std::span<const double> inv_scales() const noexcept { return inv_scale_; }

  // out = X'v (or X'^T v when transposed) in one pass over the stored
  // entries. op_counter, when given, is advanced by the number of entries
  // touched; tests use it to pin the O(nnz) cost.
  void matvec(std::span<const double> v, std::span<double> out, bool transposed,
              std::uint64_t* op_counter = nullptr) const;
  std::vector<double> matvec(std::span<const double> v, bool transposed) const;

  // Column j of the Gram matrix X'^T X'.
  SparseVector gram_column(std::uint32_t j) const;

private:
  const InteractionMatrix* base_;
  std::vector<double> divisors_;
  std::vector<double> inv_scale_;
};

// Cosine scaling divides each column by its Euclidean norm so that
// X'^T X' is exactly the cosine similarity matrix of the base.
ScaledMatrix cosine_scaled(const InteractionMatrix& base);

}  // namespace cleanknn
