#include "confsets/linalg.hpp"

#include <cmath>
#include <cstring>
#include <span>
#include <string>

#include "confsets/dist.hpp"
#include "confsets/errors.hpp"
#include "confsets/kernels.hpp"

namespace confsets {

namespace {

constexpr double kRankTol = 1e-10;

std::span<const double> col_span(const MatrixXd& m, Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

bool same_column(const MatrixXd& a, Index ja, const MatrixXd& b, Index jb) {
  return std::memcmp(a.col(ja).data(), b.col(jb).data(),
                     sizeof(double) * static_cast<std::size_t>(a.rows())) == 0;
}

}  // namespace

Design::Design(MatrixXd entries, bool intercept_included)
    : entries_(std::move(entries)), intercept_(intercept_included) {
  const Index n = entries_.rows();
  const Index d = entries_.cols();
  if (n < d)
    throw SingularDesign("need at least as many rows as columns (n=" + std::to_string(n) +
                         ", d=" + std::to_string(d) + ")");
  if (!entries_.allFinite()) throw DomainError("design contains non-finite entries");
  if (d == 0) return;
  Eigen::JacobiSVD<MatrixXd> svd(entries_);
  const auto& sv = svd.singularValues();
  if (!(sv(d - 1) > kRankTol * sv(0)))
    throw SingularDesign("columns are linearly dependent (condition > 1e10)");
}

Design Design::from_columns(const MatrixXd& x, const ModelSubset& subset, bool intercept) {
  const Index off = intercept ? 1 : 0;
  MatrixXd m(x.rows(), subset.size() + off);
  if (intercept) m.col(0).setOnes();
  for (int j = 0; j < subset.size(); ++j) {
    const int c = subset.indices()[static_cast<std::size_t>(j)];
    if (c >= x.cols()) throw DimensionMismatch("subset index beyond design width");
    m.col(j + off) = x.col(c);
  }
  return Design(std::move(m), intercept);
}

std::uint64_t Design::hash() const {
  // FNV-1a over shape and raw entries.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const Index shape[2] = {entries_.rows(), entries_.cols()};
  mix(shape, sizeof(shape));
  mix(entries_.data(), sizeof(double) * static_cast<std::size_t>(entries_.size()));
  mix(&intercept_, sizeof(intercept_));
  return h;
}

LeastSquaresFit ols_fit(const Design& design, const VectorXd& y) {
  if (y.size() != design.rows())
    throw DimensionMismatch("response has " + std::to_string(y.size()) + " entries, design " +
                            std::to_string(design.rows()) + " rows");
  LeastSquaresFit fit;
  const MatrixXd& x = design.entries();
  if (x.cols() == 0) {
    fit.theta_hat.resize(0);
    fit.residuals = y;
  } else {
    Eigen::HouseholderQR<MatrixXd> qr(x);
    fit.theta_hat = qr.solve(y);
    fit.residuals = y - x * fit.theta_hat;
  }
  fit.rss = fit.residuals.squaredNorm();
  fit.df_resid = design.rows() - design.cols();
  return fit;
}

ComplementBasis complement_basis(const Design& design) {
  const Index n = design.rows();
  const Index d = design.cols();
  ComplementBasis out;
  out.source_design_hash = design.hash();
  if (d == 0) {
    out.u = MatrixXd::Identity(n, n);
    return out;
  }
  Eigen::HouseholderQR<MatrixXd> qr(design.entries());
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  out.u = q.rightCols(n - d);
  return out;
}

MatrixXd residual_maker(const Design& design) {
  const Index n = design.rows();
  const Index d = design.cols();
  if (d == 0) return MatrixXd::Identity(n, n);
  Eigen::HouseholderQR<MatrixXd> qr(design.entries());
  MatrixXd q1 = qr.householderQ() * MatrixXd::Identity(n, d);
  return MatrixXd::Identity(n, n) - q1 * q1.transpose();
}

FTestResult f_statistic(const Design& sub, const Design& full, const VectorXd& y) {
  if (sub.rows() != full.rows() || y.size() != full.rows())
    throw DimensionMismatch("sub, full and y must share n");
  for (Index j = 0; j < sub.cols(); ++j) {
    bool found = false;
    for (Index k = 0; k < full.cols() && !found; ++k)
      found = same_column(sub.entries(), j, full.entries(), k);
    if (!found) throw NotNested("column " + std::to_string(j) + " of sub not present in full");
  }
  FTestResult res;
  res.df1 = full.cols() - sub.cols();
  res.df2 = full.rows() - full.cols();
  if (res.df1 <= 0) throw DegenerateDf("df1 = " + std::to_string(res.df1));
  if (res.df2 <= 0) throw DegenerateDf("df2 = " + std::to_string(res.df2));
  const double rss_sub = ols_fit(sub, y).rss;
  const double rss_full = ols_fit(full, y).rss;
  if (!(rss_full > 0.0)) throw DegenerateDf("full model fits exactly (rss = 0)");
  const double gain = std::max(0.0, rss_sub - rss_full);
  res.f = (gain / static_cast<double>(res.df1)) / (rss_full / static_cast<double>(res.df2));
  res.p_value = f_sf(res.f, static_cast<double>(res.df1), static_cast<double>(res.df2));
  return res;
}

CoefficientTests coefficient_t_tests(const Design& design, const VectorXd& y) {
  if (y.size() != design.rows()) throw DimensionMismatch("response length != design rows");
  const Index d = design.cols();
  CoefficientTests out;
  out.df_resid = design.rows() - d;
  if (out.df_resid < 1) throw InsufficientData("no residual degrees of freedom");
  Eigen::HouseholderQR<MatrixXd> qr(design.entries());
  out.estimate = qr.solve(y);
  const double rss = (y - design.entries() * out.estimate).squaredNorm();
  const double s2 = rss / static_cast<double>(out.df_resid);
  const MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(d, d));
  out.std_error = (rinv.rowwise().squaredNorm() * s2).cwiseSqrt();
  out.p_value.resize(d);
  for (Index j = 0; j < d; ++j) {
    if (out.std_error(j) > 0.0) {
      const double t = std::abs(out.estimate(j)) / out.std_error(j);
      out.p_value(j) = std::min(1.0, 2.0 * t_sf(t, static_cast<double>(out.df_resid)));
    } else {
      out.p_value(j) = out.estimate(j) != 0.0 ? 0.0 : 1.0;
    }
  }
  return out;
}

IncrementalBasis::IncrementalBasis(Index n, Index capacity) : q_(n, capacity) {}

void IncrementalBasis::push(const double* column, double rel_tol) {
  if (size_ >= q_.cols()) throw DimensionMismatch("incremental basis capacity exceeded");
  const auto n = static_cast<std::size_t>(q_.rows());
  double* v = q_.col(size_).data();
  std::memcpy(v, column, n * sizeof(double));
  std::span<double> vs(v, n);
  const double norm0 = std::sqrt(kernels::sum_squares(vs));
  for (int pass = 0; pass < 2; ++pass)
    for (Index j = 0; j < size_; ++j) kernels::project_out(col_span(q_, j), vs);
  const double norm = std::sqrt(kernels::sum_squares(vs));
  if (!(norm > rel_tol * norm0) || norm0 == 0.0)
    throw SingularDesign("column is (numerically) in the span of the current basis");
  const double inv = 1.0 / norm;
  for (double& e : vs) e *= inv;
  ++size_;
}

void IncrementalBasis::pop() {
  if (size_ == 0) throw DomainError("pop from empty basis");
  --size_;
}

void IncrementalBasis::project_out_column(Index j, MatrixXd& r) const {
  const auto q = col_span(q_, j);
  for (Index c = 0; c < r.cols(); ++c)
    kernels::project_out(q, {r.col(c).data(), static_cast<std::size_t>(r.rows())});
}

}  // namespace confsets
