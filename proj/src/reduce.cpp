#include "confsets/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "confsets/errors.hpp"
#include "confsets/kernels.hpp"
#include "confsets/rng.hpp"

namespace confsets {

namespace {

std::span<const double> col_span(const MatrixXd& m, Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

std::string to_string(ReductionMethod m) {
  switch (m) {
    case ReductionMethod::cox:
      return "cox";
    case ReductionMethod::lasso:
      return "lasso";
    case ReductionMethod::fixed:
      return "fixed";
  }
  return "?";
}

std::vector<int> CoxGrid::row_members(int r) const {
  std::vector<int> out;
  for (int c = 0; c < cols; ++c)
    if (int v = cells[static_cast<std::size_t>(r * cols + c)]; v >= 0) out.push_back(v);
  return out;
}

std::vector<int> CoxGrid::col_members(int c) const {
  std::vector<int> out;
  for (int r = 0; r < rows; ++r)
    if (int v = cells[static_cast<std::size_t>(r * cols + c)]; v >= 0) out.push_back(v);
  return out;
}

CoxGrid cox_grid(int p, std::uint64_t seed) {
  if (p < 1) throw DomainError("cox_grid needs p >= 1");
  CoxGrid g;
  g.cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  // Guard against sqrt rounding for perfect squares.
  while ((g.cols - 1) * (g.cols - 1) >= p && g.cols > 1) --g.cols;
  g.rows = (p + g.cols - 1) / g.cols;
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  g.cells.assign(static_cast<std::size_t>(g.rows * g.cols), -1);
  std::copy(order.begin(), order.end(), g.cells.begin());
  return g;
}

std::vector<double> cox_min_pvalues(const MatrixXd& x, const VectorXd& y, const CoxGrid& grid,
                                    bool intercept) {
  if (x.rows() != y.size()) throw DimensionMismatch("X and y disagree on n");
  std::vector<double> min_p(static_cast<std::size_t>(x.cols()), 1.0);
  const Index off = intercept ? 1 : 0;
  auto run = [&](const std::vector<int>& members) {
    if (members.empty()) return;
    const Index d = static_cast<Index>(members.size()) + off;
    if (x.rows() <= d + 1)
      throw InsufficientData("grid regression with " + std::to_string(d) + " regressors needs n > " +
                             std::to_string(d + 1));
    MatrixXd m(x.rows(), d);
    if (intercept) m.col(0).setOnes();
    for (std::size_t j = 0; j < members.size(); ++j)
      m.col(static_cast<Index>(j) + off) = x.col(members[j]);
    const CoefficientTests tests = coefficient_t_tests(Design(std::move(m), intercept), y);
    for (std::size_t j = 0; j < members.size(); ++j) {
      double& slot = min_p[static_cast<std::size_t>(members[j])];
      slot = std::min(slot, tests.p_value(static_cast<Index>(j) + off));
    }
  };
  for (int r = 0; r < grid.rows; ++r) run(grid.row_members(r));
  for (int c = 0; c < grid.cols; ++c) run(grid.col_members(c));
  return min_p;
}

ReductionResult cox_reduction(const MatrixXd& x, const VectorXd& y, const CoxOptions& opts,
                              std::uint64_t grid_seed) {
  const int p = static_cast<int>(x.cols());
  if (opts.max_keep < 0) throw DomainError("max_keep must be nonnegative");
  if (!(opts.alpha_step > 0.0) || !(opts.alpha_start >= opts.alpha_step))
    throw DomainError("need alpha_start >= alpha_step > 0");
  const CoxGrid grid = cox_grid(p, grid_seed);
  const int widest = std::max(grid.rows, grid.cols);
  if (x.rows() <= widest + (opts.intercept ? 1 : 0) + 1)
    throw InsufficientData("n must exceed grid dimension + intercept + 1");

  const std::vector<double> min_p = cox_min_pvalues(x, y, grid, opts.intercept);

  ReductionResult res;
  res.method = ReductionMethod::cox;
  const long steps = std::lround(std::floor(opts.alpha_start / opts.alpha_step + 1e-9));
  std::vector<int> kept;
  for (long i = 0;; ++i) {
    const double alpha = opts.alpha_start - static_cast<double>(i) * opts.alpha_step;
    kept.clear();
    for (int j = 0; j < p; ++j)
      if (min_p[static_cast<std::size_t>(j)] <= alpha) kept.push_back(j);
    res.trace.push_back({alpha, static_cast<int>(kept.size())});
    res.final_alpha = alpha;
    if (static_cast<int>(kept.size()) <= opts.max_keep) break;
    if (i + 1 >= steps) {
      res.never_small_enough = true;
      break;
    }
  }
  res.selected = ModelSubset(kept, p);
  return res;
}

StandardizedDesign standardize_columns(const MatrixXd& x) {
  StandardizedDesign s;
  const double n = static_cast<double>(x.rows());
  s.center = x.colwise().mean().transpose();
  s.x = x.rowwise() - s.center.transpose();
  s.scale.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double norm = s.x.col(j).norm();
    if (norm > 1e-12 * std::max(1.0, x.col(j).cwiseAbs().maxCoeff()) * std::sqrt(n)) {
      s.scale(j) = norm / std::sqrt(n);
      s.x.col(j) /= s.scale(j);
    } else {
      s.scale(j) = 0.0;
      s.x.col(j).setZero();
    }
  }
  return s;
}

LassoSolution lasso_coordinate_descent(const MatrixXd& x_std, const VectorXd& y, double lambda,
                                       double tol, int max_iter, const VectorXd& warm_start) {
  const Index n = x_std.rows();
  const Index p = x_std.cols();
  if (y.size() != n) throw DimensionMismatch("X and y disagree on n");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto nn = static_cast<std::size_t>(n);

  LassoSolution sol;
  sol.beta = warm_start.size() == p ? warm_start : VectorXd::Zero(p);
  VectorXd r = y - x_std * sol.beta;
  std::span<double> rs(r.data(), nn);

  VectorXd col_sq(p);
  for (Index j = 0; j < p; ++j) col_sq(j) = kernels::sum_squares(col_span(x_std, j)) * inv_n;

  auto update = [&](Index j) {
    if (col_sq(j) <= 0.0) return 0.0;
    const double old = sol.beta(j);
    const double g = kernels::dot(col_span(x_std, j), rs) * inv_n + col_sq(j) * old;
    const double nb = soft_threshold(g, lambda) / col_sq(j);
    if (nb == old) return 0.0;
    kernels::axpy(old - nb, col_span(x_std, j), rs);
    sol.beta(j) = nb;
    return std::abs(nb - old) * std::sqrt(col_sq(j));
  };

  std::vector<Index> active;
  while (sol.sweeps < max_iter) {
    // Full sweep, then iterate on the active set until it settles.
    double delta = 0.0;
    for (Index j = 0; j < p; ++j) delta = std::max(delta, update(j));
    ++sol.sweeps;
    if (delta < tol) {
      sol.converged = true;
      break;
    }
    active.clear();
    for (Index j = 0; j < p; ++j)
      if (sol.beta(j) != 0.0) active.push_back(j);
    while (sol.sweeps < max_iter) {
      double d = 0.0;
      for (Index j : active) d = std::max(d, update(j));
      ++sol.sweeps;
      if (d < tol) break;
    }
  }
  return sol;
}

ReductionResult undertuned_lasso(const MatrixXd& x, const VectorXd& y, int max_keep,
                                 const LassoPathOptions& opts) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 2 || p < 1) throw DomainError("undertuned_lasso needs n >= 2 and p >= 1");
  if (y.size() != n) throw DimensionMismatch("X and y disagree on n");
  if (max_keep < 0) throw DomainError("max_keep must be nonnegative");
  if (opts.n_lambda < 2 || !(opts.lambda_min_ratio > 0.0 && opts.lambda_min_ratio < 1.0))
    throw DomainError("invalid lambda path options");

  const StandardizedDesign sd = standardize_columns(x);
  const VectorXd yc = y.array() - y.mean();
  const double lambda_max =
      (sd.x.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(n);

  ReductionResult res;
  res.method = ReductionMethod::lasso;
  res.lambda_chosen = lambda_max;
  res.selected = ModelSubset({}, static_cast<int>(p));
  res.trace.push_back({lambda_max, 0});
  if (!(lambda_max > 0.0)) return res;

  VectorXd beta = VectorXd::Zero(p);
  for (int i = 1; i < opts.n_lambda; ++i) {
    const double lambda =
        lambda_max * std::pow(opts.lambda_min_ratio, static_cast<double>(i) / (opts.n_lambda - 1));
    const LassoSolution sol =
        lasso_coordinate_descent(sd.x, yc, lambda, opts.tol, opts.max_iter, beta);
    beta = sol.beta;
    std::vector<int> support;
    for (Index j = 0; j < p; ++j)
      if (beta(j) != 0.0) support.push_back(static_cast<int>(j));
    res.trace.push_back({lambda, static_cast<int>(support.size())});
    if (static_cast<int>(support.size()) > max_keep) {
      res.path_exhausted = (i == 1);
      break;
    }
    res.selected = ModelSubset(std::move(support), static_cast<int>(p));
    res.lambda_chosen = lambda;
  }
  return res;
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double frac) {
  if (!(frac > 0.0 && frac < 1.0)) throw DomainError("split fraction must lie in (0, 1)");
  const int n_train = static_cast<int>(std::floor(frac * n + 1e-9));
  if (n_train < 1 || n - n_train < 1)
    throw DomainError("split leaves an empty part (n=" + std::to_string(n) + ")");
  std::vector<int> train(static_cast<std::size_t>(n_train));
  std::vector<int> test(static_cast<std::size_t>(n - n_train));
  std::iota(train.begin(), train.end(), 0);
  std::iota(test.begin(), test.end(), n_train);
  return {std::move(train), std::move(test)};
}

MatrixXd take_rows(const MatrixXd& x, const std::vector<int>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

VectorXd take_rows(const VectorXd& y, const std::vector<int>& rows) {
  VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y(rows[i]);
  return out;
}

}  // namespace confsets
