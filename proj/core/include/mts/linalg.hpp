#pragma once

// Dense linear algebra shared by every module. Storage is Eigen's dynamic
// dense matrix/vector; this header adds the factorizations with the
// singularity contract the solvers rely on.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <optional>

#include "mts/errors.hpp"

namespace mts {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;
using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Relative pivot threshold below which a factorization is declared singular.
inline constexpr double kSingularPivotTolerance = 1e-14;

/// Partial-pivoted LU of a square, possibly indefinite matrix.
///
/// Throws SingularMatrix when any pivot magnitude falls below
/// kSingularPivotTolerance times the largest entry of the input.
class LuSolver {
 public:
  LuSolver() = default;
  explicit LuSolver(const DenseMatrix& a);

  [[nodiscard]] DenseVector solve(const DenseVector& b) const;
  [[nodiscard]] DenseMatrix solve_columns(const DenseMatrix& b) const;
  [[nodiscard]] Index size() const { return lu_.rows(); }

 private:
  Eigen::PartialPivLU<DenseMatrix> lu_;
};

/// True for matrices large and empty enough that sparse kernels win
/// (at least kSparseMinSize rows, at most kSparseMaxDensity non-zeros).
inline constexpr Index kSparseMinSize = 256;
inline constexpr double kSparseMaxDensity = 0.05;
bool prefers_sparse(const DenseMatrix& a);

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Large, mostly-zero inputs are factored with a fill-reducing sparse
/// Cholesky; the result is the same up to round-off.
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(const DenseMatrix& a);

  [[nodiscard]] DenseVector solve(const DenseVector& b) const;
  [[nodiscard]] DenseMatrix solve_columns(const DenseMatrix& b) const;
  [[nodiscard]] Index size() const { return n_; }
  [[nodiscard]] bool is_sparse() const { return static_cast<bool>(sparse_); }

 private:
  Index n_ = 0;
  Eigen::LLT<DenseMatrix> dense_;
  // Eigen's sparse factorizations are not copyable; share the immutable factor.
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> sparse_;
};

/// y = A x, through a sparse copy of A when prefers_sparse(A). Cheap to copy.
class MatrixOperator {
 public:
  MatrixOperator() = default;
  explicit MatrixOperator(std::shared_ptr<const DenseMatrix> a);

  [[nodiscard]] DenseVector apply(const DenseVector& x) const;
  [[nodiscard]] const DenseMatrix& dense() const { return *dense_; }
  [[nodiscard]] Index rows() const { return dense_ ? dense_->rows() : 0; }

 private:
  std::shared_ptr<const DenseMatrix> dense_;
  std::shared_ptr<const SparseMatrix> sparse_;
};

/// Solves A x = b with partial pivoting. A must be square with rows(A) = len(b).
DenseVector solve_general(const DenseMatrix& a, const DenseVector& b);

/// Largest ω² of the pencil ω² M x = K x, with M SPD and K symmetric PSD.
double max_generalized_eigenvalue(const DenseMatrix& k, const DenseMatrix& m);

/// True when |A - Aᵀ| <= rel_tol * max|A| entrywise.
bool is_symmetric(const DenseMatrix& a, double rel_tol = 1e-12);

/// Max-norm that returns 0 for empty vectors instead of asserting.
inline double max_abs(const DenseVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace mts
