#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "confsets/linalg.hpp"
#include "confsets/subset.hpp"

namespace confsets {

enum class ReductionMethod { cox, lasso, fixed };

std::string to_string(ReductionMethod m);

struct ReductionStage {
  double level = 0.0;  ///< alpha (Cox) or lambda (lasso)
  int selected = 0;
};

struct ReductionResult {
  ModelSubset selected;
  ReductionMethod method = ReductionMethod::fixed;
  double final_alpha = 0.0;    ///< Cox only
  double lambda_chosen = 0.0;  ///< lasso only, on the standardised scale
  bool never_small_enough = false;  ///< Cox: alpha floor reached above max_keep
  bool path_exhausted = false;      ///< lasso: no admissible point below lambda_max
  std::vector<ReductionStage> trace;
};

struct CoxOptions {
  int max_keep = 15;
  double alpha_start = 0.05;
  double alpha_step = 0.001;
  bool intercept = false;
};

/// Random placement of p variable indices on a grid with ceil(sqrt(p))
/// columns, filled row by row. Trailing cells of the last row stay empty.
struct CoxGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> cells;  ///< rows*cols entries, -1 marks an empty cell

  std::vector<int> row_members(int r) const;
  std::vector<int> col_members(int c) const;
};

CoxGrid cox_grid(int p, std::uint64_t seed);

/// Per-variable smallest two-sided coefficient p-value over its row and column
/// regressions.
std::vector<double> cox_min_pvalues(const MatrixXd& x, const VectorXd& y, const CoxGrid& grid,
                                    bool intercept);

ReductionResult cox_reduction(const MatrixXd& x, const VectorXd& y, const CoxOptions& opts,
                              std::uint64_t grid_seed);

struct LassoSolution {
  VectorXd beta;
  bool converged = false;
  int sweeps = 0;
};

/// Coordinate descent for (1/2n)||y - X b||^2 + lambda ||b||_1 on a design
/// whose columns have mean 0 and squared norm n. `warm_start` may be empty.
LassoSolution lasso_coordinate_descent(const MatrixXd& x_std, const VectorXd& y, double lambda,
                                       double tol = 1e-9, int max_iter = 10000,
                                       const VectorXd& warm_start = VectorXd());

struct LassoPathOptions {
  int n_lambda = 100;
  double lambda_min_ratio = 1e-3;
  double tol = 1e-9;
  int max_iter = 10000;
};

/// Walks a geometric lambda path from lambda_max down and keeps the support
/// just before its size first exceeds max_keep (or the end of the path).
ReductionResult undertuned_lasso(const MatrixXd& x, const VectorXd& y, int max_keep,
                                 const LassoPathOptions& opts = {});

/// Centre each column and scale it to squared norm n. Constant columns get
/// scale 0 and are zeroed.
struct StandardizedDesign {
  MatrixXd x;
  VectorXd center;
  VectorXd scale;
};
StandardizedDesign standardize_columns(const MatrixXd& x);

/// First floor(frac*n) indices and the rest.
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double frac);

MatrixXd take_rows(const MatrixXd& x, const std::vector<int>& rows);
VectorXd take_rows(const VectorXd& y, const std::vector<int>& rows);

}  // namespace confsets
