#include "mts/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace mts {

LuSolver::LuSolver(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("LU factorization needs a square matrix, got " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  if (a.size() == 0) return;
  if (!a.allFinite()) throw InvalidArgument("LU factorization: matrix has non-finite entries");

  lu_.compute(a);
  const double scale = a.cwiseAbs().maxCoeff();
  const DenseVector pivots = lu_.matrixLU().diagonal().cwiseAbs();
  Index worst = 0;
  const double smallest = pivots.minCoeff(&worst);
  if (scale == 0.0 || smallest < kSingularPivotTolerance * scale) {
    throw SingularMatrix("LU factorization: pivot " + std::to_string(worst) + " has magnitude " +
                         std::to_string(smallest) + " (matrix scale " + std::to_string(scale) + ")");
  }
}

DenseVector LuSolver::solve(const DenseVector& b) const {
  if (b.size() != size()) throw DimensionMismatch("LU solve: right-hand side has wrong length");
  if (size() == 0) return DenseVector(0);
  return lu_.solve(b);
}

DenseMatrix LuSolver::solve_columns(const DenseMatrix& b) const {
  if (b.rows() != size()) throw DimensionMismatch("LU solve: right-hand side has wrong row count");
  if (size() == 0) return DenseMatrix(0, b.cols());
  return lu_.solve(b);
}

bool prefers_sparse(const DenseMatrix& a) {
  if (a.rows() < kSparseMinSize) return false;
  const double nnz = static_cast<double>((a.array() != 0.0).count());
  return nnz <= kSparseMaxDensity * static_cast<double>(a.size());
}

SpdSolver::SpdSolver(const DenseMatrix& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw DimensionMismatch("Cholesky factorization needs a square matrix");
  if (a.size() == 0) return;
  if (!a.allFinite()) throw InvalidArgument("Cholesky factorization: matrix has non-finite entries");
  const double scale = a.diagonal().cwiseAbs().maxCoeff();

  DenseVector factor_diagonal;
  if (prefers_sparse(a)) {
    auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
    llt->compute(a.sparseView());
    if (llt->info() != Eigen::Success) {
      throw SingularMatrix("Cholesky factorization: matrix is not positive definite");
    }
    factor_diagonal = SparseMatrix(llt->matrixL()).diagonal();
    sparse_ = std::move(llt);
  } else {
    dense_.compute(a);
    if (dense_.info() != Eigen::Success) {
      throw SingularMatrix("Cholesky factorization: matrix is not positive definite");
    }
    factor_diagonal = dense_.matrixLLT().diagonal();
  }
  // Pivots of LLᵀ are squares of the factor's diagonal.
  const double smallest = factor_diagonal.minCoeff();
  if (!(smallest * smallest >= kSingularPivotTolerance * scale)) {
    throw SingularMatrix("Cholesky factorization: matrix is numerically singular");
  }
}

DenseVector SpdSolver::solve(const DenseVector& b) const {
  if (b.size() != size()) throw DimensionMismatch("Cholesky solve: right-hand side has wrong length");
  if (size() == 0) return DenseVector(0);
  if (sparse_) return sparse_->solve(b);
  return dense_.solve(b);
}

DenseMatrix SpdSolver::solve_columns(const DenseMatrix& b) const {
  if (b.rows() != size()) throw DimensionMismatch("Cholesky solve: right-hand side has wrong row count");
  if (size() == 0) return DenseMatrix(0, b.cols());
  if (sparse_) return sparse_->solve(b);
  return dense_.solve(b);
}

MatrixOperator::MatrixOperator(std::shared_ptr<const DenseMatrix> a) : dense_(std::move(a)) {
  if (!dense_) throw InvalidArgument("MatrixOperator: null matrix");
  if (prefers_sparse(*dense_)) sparse_ = std::make_shared<const SparseMatrix>(dense_->sparseView());
}

DenseVector MatrixOperator::apply(const DenseVector& x) const {
  if (x.size() != (dense_ ? dense_->cols() : 0)) throw DimensionMismatch("MatrixOperator: vector length mismatch");
  if (!dense_) return DenseVector(0);
  if (sparse_) return *sparse_ * x;
  return *dense_ * x;
}

DenseVector solve_general(const DenseMatrix& a, const DenseVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw DimensionMismatch("solve_general: A must be square with rows(A) == len(b)");
  }
  return LuSolver(a).solve(b);
}

double max_generalized_eigenvalue(const DenseMatrix& k, const DenseMatrix& m) {
  if (k.rows() != k.cols() || m.rows() != m.cols() || k.rows() != m.rows()) {
    throw DimensionMismatch("max_generalized_eigenvalue: K and M must be square and of equal size");
  }
  if (k.size() == 0) return 0.0;

  // Reduce ω² M x = K x to the symmetric standard problem L⁻¹ K L⁻ᵀ y = ω² y.
  const Eigen::LLT<DenseMatrix> llt(m);
  if (llt.info() != Eigen::Success) throw SingularMatrix("max_generalized_eigenvalue: M is not positive definite");
  DenseMatrix reduced = llt.matrixL().solve(k);
  reduced = llt.matrixL().solve(reduced.transpose()).transpose();
  reduced = 0.5 * (reduced + reduced.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(reduced, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NotConverged("max_generalized_eigenvalue: symmetric eigensolver did not converge");
  }
  return eig.eigenvalues().maxCoeff();
}

bool is_symmetric(const DenseMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace mts
