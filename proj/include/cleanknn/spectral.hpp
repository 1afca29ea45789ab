#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cleanknn/sparse_core.hpp"

namespace cleanknn {

struct SvdResult {
  std::vector<double> singular_values;  // descending, >= 0
  Eigen::MatrixXd right_vectors;        // m x F, orthonormal columns
  double achieved_tolerance = 0.0;      // max_i ||X'^T X' v_i - s_i^2 v_i|| / s_1^2
  std::uint32_t iterations = 0;         // Lanczos steps taken
};

// Top-F singular triplets (right side only) of a sparse scaled matrix via
// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization of
// both stored bases. Deterministic for a fixed seed; each right vector's
// largest-magnitude entry is made positive.
//
// max_iter == 0 selects the default 10*F + 100 basis-size cap.
SvdResult truncated_svd(const ScaledMatrix& matrix, std::uint32_t F, double tol,
                        std::uint32_t max_iter, std::uint64_t seed);

struct DenseEig {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues[i]
};

// Full spectrum of a small symmetric matrix; the test oracle behind the
// iterative path. Rejects inputs above 4000x4000 and asymmetric inputs.
DenseEig dense_eig(const Eigen::MatrixXd& sym);

// Densifies the Gram matrix X'^T X' column by column (oracle scale only).
Eigen::MatrixXd dense_gram(const ScaledMatrix& matrix);

}  // namespace cleanknn
