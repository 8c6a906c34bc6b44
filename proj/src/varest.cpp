#include "confsets/varest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confsets/errors.hpp"
#include "confsets/reduce.hpp"
#include "confsets/rng.hpp"

namespace confsets {

namespace {

struct HalfFits {
  double s1 = 0.0;
  double s2 = 0.0;
  int df1 = 0;
  int df2 = 0;
  ModelSubset e1;
  ModelSubset e2;
};

double refit_rss(const MatrixXd& x, const VectorXd& y, const ModelSubset& cols, bool intercept) {
  if (cols.empty() && !intercept) return y.squaredNorm();
  return ols_fit(Design::from_columns(x, cols, intercept), y).rss;
}

HalfFits cross_fit(const MatrixXd& x, const VectorXd& y, const Screener& screener,
                   const VarianceOptions& opts) {
  if (!(opts.gamma_frac > 0.5 && opts.gamma_frac <= 1.0))
    throw DomainError("gamma_frac must lie in (0.5, 1]");
  if (x.rows() != y.size()) throw DimensionMismatch("X and y disagree on n");
  const int n = static_cast<int>(x.rows());
  const int used = static_cast<int>(std::floor(opts.gamma_frac * n + 1e-9));
  const int h1 = used / 2;
  const int h2 = used - h1;
  if (h1 < 2) throw InsufficientData("too few observations for refitted cross-validation");

  std::vector<int> rows(static_cast<std::size_t>(used));
  std::iota(rows.begin(), rows.end(), 0);
  if (opts.shuffle_seed) {
    Rng rng(*opts.shuffle_seed);
    std::shuffle(rows.begin(), rows.end(), rng);
  }
  const std::vector<int> r1(rows.begin(), rows.begin() + h1);
  const std::vector<int> r2(rows.begin() + h1, rows.end());
  const MatrixXd x1 = take_rows(x, r1), x2 = take_rows(x, r2);
  const VectorXd y1 = take_rows(y, r1), y2 = take_rows(y, r2);

  HalfFits f;
  try {
    f.e1 = screener(x1, y1);
    f.e2 = screener(x2, y2);
  } catch (const Error& e) {
    throw ScreenerFailure(e.what());
  }
  const int icpt = opts.intercept ? 1 : 0;
  f.df1 = h1 - f.e2.size() - icpt;
  f.df2 = h2 - f.e1.size() - icpt;
  if (f.df1 <= 0 || f.df2 <= 0)
    throw InsufficientData("screened sets leave no residual degrees of freedom (df1=" +
                           std::to_string(f.df1) + ", df2=" + std::to_string(f.df2) + ")");
  f.s1 = refit_rss(x1, y1, f.e2, opts.intercept) / f.df1;
  f.s2 = refit_rss(x2, y2, f.e1, opts.intercept) / f.df2;
  return f;
}

VarianceEstimate package(const HalfFits& f, VarianceMethod m, double sigma2, double gamma_frac) {
  VarianceEstimate v;
  v.method = m;
  v.sigma2_hat = sigma2;
  v.df1 = f.df1;
  v.df2 = f.df2;
  v.nu = f.df1 + f.df2;
  v.sigma2_half1 = f.s1;
  v.sigma2_half2 = f.s2;
  v.screen1 = f.e1;
  v.screen2 = f.e2;
  v.gamma_frac = gamma_frac;
  return v;
}

}  // namespace

std::string to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::rcv:
      return "rcv";
    case VarianceMethod::mrcv:
      return "mrcv";
    case VarianceMethod::oracle:
      return "oracle";
  }
  return "?";
}

VarianceEstimate VarianceEstimate::oracle(double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("oracle variance must be positive");
  VarianceEstimate v;
  v.method = VarianceMethod::oracle;
  v.sigma2_hat = sigma2;
  v.sigma2_half1 = v.sigma2_half2 = sigma2;
  return v;
}

double combine_mrcv(double sigma2_half1, int df1, double sigma2_half2, int df2) {
  if (df1 < 1 || df2 < 1) throw DomainError("degrees of freedom must be >= 1");
  if (df1 == df2) return 0.5 * (sigma2_half1 + sigma2_half2);
  return (df1 * sigma2_half1 + df2 * sigma2_half2) / static_cast<double>(df1 + df2);
}

VarianceEstimate rcv_variance(const MatrixXd& x, const VectorXd& y, const Screener& screener,
                              const VarianceOptions& opts) {
  const HalfFits f = cross_fit(x, y, screener, opts);
  return package(f, VarianceMethod::rcv, 0.5 * (f.s1 + f.s2), opts.gamma_frac);
}

VarianceEstimate mrcv_variance(const MatrixXd& x, const VectorXd& y, const Screener& screener,
                               const VarianceOptions& opts) {
  const HalfFits f = cross_fit(x, y, screener, opts);
  return package(f, VarianceMethod::mrcv, combine_mrcv(f.s1, f.df1, f.s2, f.df2),
                 opts.gamma_frac);
}

}  // namespace confsets
