#include "confsets/modeltest.hpp"

#include <cmath>
#include <span>

#include "confsets/errors.hpp"
#include "confsets/kernels.hpp"

namespace confsets {

namespace {

void require_df(Index n, Index d_theta) {
  if (n - d_theta < 2)
    throw InsufficientData("need n - d_theta >= 2 (n=" + std::to_string(n) +
                           ", d_theta=" + std::to_string(d_theta) + ")");
}

double sigma_hat(const VarianceEstimate& v) {
  if (!(v.sigma2_hat > 0.0) || !std::isfinite(v.sigma2_hat))
    throw DomainError("variance estimate must be positive");
  return std::sqrt(v.sigma2_hat);
}

// sum_{i<j} <c_i, c_j> / (|c_i| |c_j|) over the columns of a column-major block.
double pairwise_cosine_sum(const double* cols, Index rows, Index k) {
  const auto n = static_cast<std::size_t>(rows);
  std::vector<double> inv(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const double norm = std::sqrt(kernels::sum_squares({cols + i * rows, n}));
    if (!(norm > 1e-12))
      throw DegenerateProjection("replicate " + std::to_string(i) + " projects to zero");
    inv[static_cast<std::size_t>(i)] = 1.0 / norm;
  }
  double s = 0.0;
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j)
      s += kernels::dot({cols + i * rows, n}, {cols + j * rows, n}) *
           inv[static_cast<std::size_t>(i)] * inv[static_cast<std::size_t>(j)];
  return s;
}

TestOutcome rayleigh_outcome(double pair_sum, Index m, int k, int nu, RayleighCalibration cal,
                             const ModelSubset& submodel) {
  TestOutcome out;
  out.method = TestMethod::cosufficient;
  const double raw = std::sqrt(2.0 * static_cast<double>(m)) / k * pair_sum;
  out.statistic = cal == RayleighCalibration::exact_variance ? raw / rayleigh_null_sd(k) : raw;
  out.p_value = rayleigh_p_value(raw, k, cal);
  out.df1 = static_cast<double>(m);
  out.k = k;
  out.nu = nu;
  out.submodel = submodel;
  return out;
}

}  // namespace

std::string to_string(TestMethod m) {
  switch (m) {
    case TestMethod::cosufficient:
      return "cosufficient";
    case TestMethod::ancillary:
      return "ancillary";
    case TestMethod::naive_f:
      return "naive_f";
    case TestMethod::split_f:
      return "split_f";
  }
  return "?";
}

double rayleigh_statistic(const MatrixXd& q_reps) {
  const Index k = q_reps.cols();
  if (k < 2) throw DomainError("Rayleigh statistic needs k >= 2");
  for (Index i = 0; i < k; ++i)
    if (std::abs(q_reps.col(i).norm() - 1.0) > 1e-8)
      throw DomainError("Rayleigh inputs must be unit vectors");
  double s = 0.0;
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j) s += q_reps.col(i).dot(q_reps.col(j));
  return std::sqrt(2.0 * static_cast<double>(q_reps.rows())) / static_cast<double>(k) * s;
}

double rayleigh_null_sd(int k) {
  if (k < 2) throw DomainError("k must be >= 2");
  return std::sqrt((k - 1.0) / k);
}

double rayleigh_p_value(double rayleigh, int k, RayleighCalibration cal) {
  const double z = cal == RayleighCalibration::exact_variance ? rayleigh / rayleigh_null_sd(k)
                                                              : rayleigh;
  return normal_sf(z);
}

TestOutcome cosufficient_test(const ModelSubset& submodel, const MatrixXd& x,
                              const ReplicateBundle& bundle, const VarianceEstimate& variance,
                              bool intercept, RayleighCalibration cal) {
  sigma_hat(variance);
  const Design design = Design::from_columns(x, submodel, intercept);
  require_df(design.rows(), design.cols());
  const MatrixXd q = q_replicates(bundle, complement_basis(design));
  const int k = static_cast<int>(q.cols());
  double pair_sum = 0.0;
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j) pair_sum += q.col(i).dot(q.col(j));
  return rayleigh_outcome(pair_sum, q.rows(), k, variance.nu, cal, submodel);
}

TestOutcome cosufficient_test(const ModelSubset& submodel, const MatrixXd& x, const VectorXd& y,
                              int k, const VarianceEstimate& variance, std::uint64_t noise_seed,
                              bool intercept, RayleighCalibration cal) {
  const GammaPlan plan = gamma_coefficients(k, sigma_hat(variance));
  return cosufficient_test(submodel, x, pseudo_replicates(y, plan, noise_seed), variance,
                           intercept, cal);
}

TestOutcome ancillary_test(const ModelSubset& submodel, const MatrixXd& x, const VectorXd& y,
                           const VarianceEstimate& variance, bool intercept, TailSide tail) {
  sigma_hat(variance);
  const Design design = Design::from_columns(x, submodel, intercept);
  require_df(design.rows(), design.cols());
  const LeastSquaresFit fit = ols_fit(design, y);
  TestOutcome out;
  out.method = TestMethod::ancillary;
  out.df1 = static_cast<double>(fit.df_resid);
  out.statistic = fit.rss / variance.sigma2_hat;
  out.p_value = chi2_tail(out.statistic, out.df1, tail);
  out.nu = variance.nu;
  out.submodel = submodel;
  return out;
}

TestOutcome naive_f_test(const ModelSubset& submodel, const ModelSubset& encompassing,
                         const MatrixXd& x, const VectorXd& y, bool intercept) {
  if (!submodel.is_subset_of(encompassing))
    throw NotNested(submodel.to_string() + " is not contained in " + encompassing.to_string());
  const FTestResult f = f_statistic(Design::from_columns(x, submodel, intercept),
                                    Design::from_columns(x, encompassing, intercept), y);
  TestOutcome out;
  out.method = TestMethod::naive_f;
  out.statistic = f.f;
  out.p_value = f.p_value;
  out.df1 = static_cast<double>(f.df1);
  out.df2 = static_cast<double>(f.df2);
  out.submodel = submodel;
  return out;
}

SplitFOutcome split_f_test(const ModelSubset& submodel, const MatrixXd& x, const VectorXd& y,
                           double frac, const Reducer& reducer, bool intercept) {
  const auto [train, test] = split_indices(static_cast<int>(x.rows()), frac);
  SplitFOutcome res;
  res.reduction = reducer(take_rows(x, train), take_rows(y, train));
  if (!submodel.is_subset_of(res.reduction.selected)) {
    res.outcome.method = TestMethod::split_f;
    res.outcome.p_value = 0.0;
    res.outcome.not_nested = true;
    res.outcome.submodel = submodel;
    return res;
  }
  res.outcome = naive_f_test(submodel, res.reduction.selected, take_rows(x, test),
                             take_rows(y, test), intercept);
  res.outcome.method = TestMethod::split_f;
  return res;
}

DepartureDiagnostic vmf_departure(const ComplementBasis& basis, const MatrixXd& z,
                                  const VectorXd& lambda, double sigma) {
  if (z.rows() != basis.u.rows() || z.cols() != lambda.size())
    throw DimensionMismatch("Z must be n x len(lambda) with n matching the basis");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const VectorXd proj = basis.u.transpose() * (z * lambda);
  const double norm = proj.norm();
  DepartureDiagnostic d;
  const double m = static_cast<double>(basis.u.cols());
  // Components below this are rounding noise from U^T X = 0.
  const double floor = 1e-12 * std::max(1.0, (z * lambda).norm());
  if (!(norm > floor)) {
    d.mean_direction = VectorXd::Zero(proj.size());
    d.kappa = 0.0;
    return d;
  }
  d.mean_direction = proj / norm;
  d.kappa = m * norm / (std::sqrt(2.0) * sigma);
  return d;
}

CosufficientTester::CosufficientTester(ReplicateBundle bundle, const VarianceEstimate& variance,
                                       RayleighCalibration cal)
    : bundle_(std::move(bundle)), nu_(variance.nu), cal_(cal) {
  if (bundle_.y_reps.cols() < 2) throw DomainError("bundle needs k >= 2 replicates");
}

TestOutcome CosufficientTester::evaluate(const ProjectedSubmodel& s) const {
  require_df(s.n, s.d_theta);
  const int k = static_cast<int>(bundle_.y_reps.cols());
  return rayleigh_outcome(pairwise_cosine_sum(s.residuals, s.n, k), s.n - s.d_theta, k, nu_, cal_,
                          s.submodel);
}

AncillaryTester::AncillaryTester(const VectorXd& y, const VarianceEstimate& variance,
                                 TailSide tail)
    : y_(y), sigma2_(variance.sigma2_hat), nu_(variance.nu), tail_(tail) {
  sigma_hat(variance);
}

TestOutcome AncillaryTester::evaluate(const ProjectedSubmodel& s) const {
  require_df(s.n, s.d_theta);
  const double rss = kernels::sum_squares({s.residuals, static_cast<std::size_t>(s.n)});
  TestOutcome out;
  out.method = TestMethod::ancillary;
  out.df1 = static_cast<double>(s.n - s.d_theta);
  out.statistic = rss / sigma2_;
  out.p_value = chi2_tail(out.statistic, out.df1, tail_);
  out.nu = nu_;
  out.submodel = s.submodel;
  return out;
}

FTester::FTester(const MatrixXd& x, const VectorXd& y, const ModelSubset& encompassing,
                 bool intercept, TestMethod tag)
    : y_(y), encompassing_(encompassing), tag_(tag) {
  const Design full = Design::from_columns(x, encompassing, intercept);
  df2_ = full.rows() - full.cols();
  if (df2_ <= 0) throw DegenerateDf("encompassing model leaves no residual df");
  rss_full_ = ols_fit(full, y).rss;
  if (!(rss_full_ > 0.0)) throw DegenerateDf("encompassing model fits exactly");
}

TestOutcome FTester::evaluate(const ProjectedSubmodel& s) const {
  if (!s.submodel.is_subset_of(encompassing_))
    throw NotNested(s.submodel.to_string() + " is not contained in " + encompassing_.to_string());
  TestOutcome out;
  out.method = tag_;
  out.submodel = s.submodel;
  out.df1 = static_cast<double>(encompassing_.size() - s.submodel.size());
  out.df2 = static_cast<double>(df2_);
  if (out.df1 == 0.0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const double rss = kernels::sum_squares({s.residuals, static_cast<std::size_t>(s.n)});
  const double gain = std::max(0.0, rss - rss_full_);
  out.statistic = (gain / out.df1) / (rss_full_ / out.df2);
  out.p_value = f_sf(out.statistic, out.df1, out.df2);
  return out;
}

}  // namespace confsets
