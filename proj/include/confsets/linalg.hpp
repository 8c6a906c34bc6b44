#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "confsets/subset.hpp"

namespace confsets {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Full-rank n x d_theta regression design. When `intercept_included` is set
/// the first column is the ones vector.
class Design {
 public:
  /// Throws SingularDesign when n < d_theta or the smallest singular value is
  /// not above 1e-10 times the largest.
  Design(MatrixXd entries, bool intercept_included);

  /// Columns `subset` of `x`, preceded by a ones column when `intercept`.
  static Design from_columns(const MatrixXd& x, const ModelSubset& subset, bool intercept);

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  const MatrixXd& entries() const { return entries_; }
  bool intercept_included() const { return intercept_; }
  std::uint64_t hash() const;

 private:
  MatrixXd entries_;
  bool intercept_;
};

struct ComplementBasis {
  MatrixXd u;  ///< n x (n - d_theta), orthonormal columns spanning span(X)^perp
  std::uint64_t source_design_hash = 0;
};

struct LeastSquaresFit {
  VectorXd theta_hat;
  VectorXd residuals;
  double rss = 0.0;
  Index df_resid = 0;
};

struct FTestResult {
  double f = 0.0;
  Index df1 = 0;
  Index df2 = 0;
  double p_value = 1.0;
};

LeastSquaresFit ols_fit(const Design& design, const VectorXd& y);

/// Trailing n - d_theta columns of the orthogonal factor of a full Householder
/// QR of the design.
ComplementBasis complement_basis(const Design& design);

/// M = I - X (X^T X)^{-1} X^T, built from the thin QR factor.
MatrixXd residual_maker(const Design& design);

/// Nested-model F test of `sub` against `full`; p is the upper F tail.
FTestResult f_statistic(const Design& sub, const Design& full, const VectorXd& y);

/// Coefficient standard errors and two-sided t-test p-values of an OLS fit.
struct CoefficientTests {
  VectorXd estimate;
  VectorXd std_error;
  VectorXd p_value;
  Index df_resid = 0;
};
CoefficientTests coefficient_t_tests(const Design& design, const VectorXd& y);

/// Orthonormal basis grown one column at a time by Gram-Schmidt with one
/// re-orthogonalisation pass. Supports push/pop, so a depth-first walk over
/// nested column sets pays O(n d) per step instead of a fresh factorisation.
class IncrementalBasis {
 public:
  IncrementalBasis(Index n, Index capacity);

  Index rows() const { return q_.rows(); }
  Index size() const { return size_; }

  /// Appends the normalised component of `column` orthogonal to the current
  /// basis. Throws SingularDesign if that component is below `rel_tol` times
  /// the column norm.
  void push(const double* column, double rel_tol = 1e-10);
  void pop();

  const double* column(Index j) const { return q_.col(j).data(); }

  /// Removes the component along basis column j from every column of `r`.
  void project_out_column(Index j, MatrixXd& r) const;

 private:
  MatrixXd q_;
  Index size_ = 0;
};

}  // namespace confsets
