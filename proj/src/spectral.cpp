#include "cleanknn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cleanknn/errors.hpp"
#include "cleanknn/rng.hpp"

namespace cleanknn {

namespace {

constexpr std::uint32_t kDenseEigLimit = 4000;

Eigen::VectorXd random_unit_vector(Eigen::Index dim, Prng& prng) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = prng.next_gaussian();
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

// Classical Gram-Schmidt, applied twice, against the first `cols` columns.
void reorthogonalize(const Eigen::MatrixXd& basis, Eigen::Index cols, Eigen::VectorXd& w) {
  if (cols == 0) return;
  const auto block = basis.leftCols(cols);
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= block * (block.transpose() * w);
}

// Draws a random direction orthogonal to the stored basis; returns false
// when the basis already spans the whole space.
bool random_orthogonal(const Eigen::MatrixXd& basis, Eigen::Index cols,
                       Eigen::VectorXd& out, Prng& prng) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    out = random_unit_vector(basis.rows(), prng);
    reorthogonalize(basis, cols, out);
    const double norm = out.norm();
    if (norm > 1e-8) {
      out /= norm;
      return true;
    }
  }
  return false;
}

struct SmallSvd {
  Eigen::VectorXd sigma;  // descending
  Eigen::MatrixXd P;      // left vectors of the bidiagonal matrix
  Eigen::MatrixXd Q;      // right vectors
};

SmallSvd svd_of_bidiagonal(const std::vector<double>& alpha, const std::vector<double>& beta,
                           Eigen::Index k) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) B(i, i) = alpha[i];
  for (Eigen::Index i = 0; i + 1 < k; ++i) B(i + 1, i) = beta[i];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

}  // namespace

SvdResult truncated_svd(const ScaledMatrix& matrix, std::uint32_t F, double tol,
                        std::uint32_t max_iter, std::uint64_t seed) {
  const Eigen::Index n = matrix.n_rows();
  const Eigen::Index m = matrix.n_cols();
  const Eigen::Index min_dim = std::min(n, m);
  if (F < 1 || static_cast<Eigen::Index>(F) > min_dim)
    throw InvalidRank("F must be in [1, " + std::to_string(min_dim) + "], got " +
                      std::to_string(F));
  if (tol <= 0.0) throw Error(ErrorCategory::usage, "tolerance must be positive");

  const std::uint32_t iter_cap = max_iter == 0 ? 10 * F + 100 : max_iter;
  const Eigen::Index kmax =
      std::min<Eigen::Index>(min_dim, std::max<Eigen::Index>(F, iter_cap));

  Prng prng(derive_seed(seed, "lanczos"));
  Eigen::MatrixXd V(m, kmax), U(n, kmax);
  std::vector<double> alpha, beta;
  alpha.reserve(kmax);
  beta.reserve(kmax);

  Eigen::VectorXd v = random_unit_vector(m, prng);
  Eigen::VectorXd u(n), w(m), gv(m);

  // u_1 = X' v_1 (restarting if v_1 happens to hit the null space)
  double a = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    matrix.matvec({v.data(), static_cast<std::size_t>(m)},
                  {u.data(), static_cast<std::size_t>(n)}, false);
    a = u.norm();
    if (a > 0) break;
    v = random_unit_vector(m, prng);
  }
  if (a == 0.0) throw NoConvergence(0);
  u /= a;
  V.col(0) = v;
  U.col(0) = u;
  alpha.push_back(a);

  const Eigen::Index check_step = std::max<Eigen::Index>(8, F / 4);
  Eigen::Index next_check = std::min<Eigen::Index>(kmax, F);
  double norm_estimate = a;

  auto explicit_check = [&](const SmallSvd& small, Eigen::Index k, std::uint32_t iters)
      -> std::optional<SvdResult> {
    SvdResult result;
    result.right_vectors.noalias() = V.leftCols(k) * small.Q.leftCols(F);
    result.singular_values.assign(small.sigma.data(), small.sigma.data() + F);
    result.iterations = iters;
    const double s1sq = small.sigma[0] * small.sigma[0];
    double max_res = 0.0;
    Eigen::VectorXd xv(n);
    for (std::uint32_t i = 0; i < F; ++i) {
      const Eigen::VectorXd vi = result.right_vectors.col(i);
      matrix.matvec({vi.data(), static_cast<std::size_t>(m)},
                    {xv.data(), static_cast<std::size_t>(n)}, false);
      matrix.matvec({xv.data(), static_cast<std::size_t>(n)},
                    {gv.data(), static_cast<std::size_t>(m)}, true);
      const double si2 = small.sigma[i] * small.sigma[i];
      max_res = std::max(max_res, (gv - si2 * vi).norm());
    }
    result.achieved_tolerance = s1sq > 0 ? max_res / s1sq : 0.0;
    if (result.achieved_tolerance > tol) return std::nullopt;
    fix_signs(result.right_vectors);
    return result;
  };

  for (Eigen::Index k = 1; k <= kmax; ++k) {
    // w = X'^T u_k - alpha_k v_k, fully reorthogonalized
    matrix.matvec({U.col(k - 1).data(), static_cast<std::size_t>(n)},
                  {w.data(), static_cast<std::size_t>(m)}, true);
    w.noalias() -= alpha[k - 1] * V.col(k - 1);
    reorthogonalize(V, k, w);
    double b = w.norm();
    norm_estimate = std::max(norm_estimate, b);
    const double breakdown = 1e-12 * norm_estimate;
    bool v_exhausted = false;
    if (b <= breakdown) {
      b = 0.0;
      if (!random_orthogonal(V, k, w, prng)) v_exhausted = true;
    } else {
      w /= b;
    }

    if (k >= next_check || k == kmax || v_exhausted) {
      next_check = std::min<Eigen::Index>(kmax, k + check_step);
      if (k >= static_cast<Eigen::Index>(F)) {
        SmallSvd small = svd_of_bidiagonal(alpha, beta, k);
        const double s1sq = small.sigma[0] * small.sigma[0];
        double bound = 0.0;
        for (std::uint32_t i = 0; i < F; ++i)
          bound = std::max(bound, b * small.sigma[i] * std::abs(small.P(k - 1, i)));
        if (bound <= tol * s1sq || k == kmax || v_exhausted) {
          if (auto result = explicit_check(small, k, static_cast<std::uint32_t>(k)))
            return *result;
          if (k == kmax || v_exhausted) throw NoConvergence(static_cast<std::uint32_t>(k));
        }
      } else if (v_exhausted || k == kmax) {
        throw NoConvergence(static_cast<std::uint32_t>(k));
      }
    }
    if (k == kmax) throw NoConvergence(static_cast<std::uint32_t>(kmax));

    beta.push_back(b);
    V.col(k) = w;

    // p = X' v_{k+1} - beta_k u_k, fully reorthogonalized
    Eigen::VectorXd p(n);
    matrix.matvec({V.col(k).data(), static_cast<std::size_t>(m)},
                  {p.data(), static_cast<std::size_t>(n)}, false);
    p.noalias() -= b * U.col(k - 1);
    reorthogonalize(U, k, p);
    double a_next = p.norm();
    norm_estimate = std::max(norm_estimate, a_next);
    if (a_next <= 1e-12 * norm_estimate) {
      a_next = 0.0;
      if (!random_orthogonal(U, k, p, prng)) {
        // Left space exhausted: alpha_{k+1} stays zero with a fresh zero
        // column so the bidiagonal stays consistent.
        p.setZero();
      }
    } else {
      p /= a_next;
    }
    alpha.push_back(a_next);
    U.col(k) = p;
  }
  throw NoConvergence(static_cast<std::uint32_t>(kmax));
}

DenseEig dense_eig(const Eigen::MatrixXd& sym) {
  if (sym.rows() != sym.cols()) throw DimensionMismatch("dense_eig needs a square matrix");
  if (sym.rows() > kDenseEigLimit)
    throw TooLarge("dense_eig limited to " + std::to_string(kDenseEigLimit) +
                   " rows, got " + std::to_string(sym.rows()));
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw NotSymmetric();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw NoConvergence(static_cast<std::uint32_t>(sym.rows()));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd dense_gram(const ScaledMatrix& matrix) {
  const Eigen::Index m = matrix.n_cols();
  if (m > kDenseEigLimit)
    throw TooLarge("dense Gram limited to " + std::to_string(kDenseEigLimit) +
                   " columns, got " + std::to_string(m));
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const SparseVector column = matrix.gram_column(static_cast<std::uint32_t>(j));
    for (std::size_t t = 0; t < column.idx.size(); ++t)
      gram(column.idx[t], j) = column.val[t];
  }
  // exact symmetry for the eigensolver
  gram = 0.5 * (gram + gram.transpose()).eval();
  return gram;
}

}  // namespace cleanknn
