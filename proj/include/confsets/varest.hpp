#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "confsets/linalg.hpp"
#include "confsets/subset.hpp"

namespace confsets {

/// Conservative variable screener: returns a candidate set for (X, y).
using Screener = std::function<ModelSubset(const MatrixXd&, const VectorXd&)>;

enum class VarianceMethod { rcv, mrcv, oracle };

std::string to_string(VarianceMethod m);

struct VarianceEstimate {
  double sigma2_hat = 0.0;
  VarianceMethod method = VarianceMethod::mrcv;
  int df1 = 0;  ///< residual df of the first half, refitted on the second half's set
  int df2 = 0;
  int nu = 0;
  double sigma2_half1 = 0.0;
  double sigma2_half2 = 0.0;
  ModelSubset screen1;  ///< selected on the first half
  ModelSubset screen2;
  double gamma_frac = 1.0;

  /// Known-variance stand-in used by property tests and the null-calibration
  /// suite; nu is reported as 0.
  static VarianceEstimate oracle(double sigma2);
};

struct VarianceOptions {
  double gamma_frac = 0.6;
  bool intercept = false;
  /// When set, rows of the leading floor(gamma n) block are permuted with this
  /// seed before halving.
  std::optional<std::uint64_t> shuffle_seed;
};

/// Weighted combination (df1 s1 + df2 s2) / (df1 + df2).
double combine_mrcv(double sigma2_half1, int df1, double sigma2_half2, int df2);

VarianceEstimate rcv_variance(const MatrixXd& x, const VectorXd& y, const Screener& screener,
                              const VarianceOptions& opts = {});
VarianceEstimate mrcv_variance(const MatrixXd& x, const VectorXd& y, const Screener& screener,
                               const VarianceOptions& opts = {});

}  // namespace confsets
