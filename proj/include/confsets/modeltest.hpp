#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "confsets/dist.hpp"
#include "confsets/linalg.hpp"
#include "confsets/randomize.hpp"
#include "confsets/reduce.hpp"
#include "confsets/subset.hpp"
#include "confsets/varest.hpp"

namespace confsets {

enum class TestMethod { cosufficient, ancillary, naive_f, split_f };

std::string to_string(TestMethod m);

struct TestOutcome {
  TestMethod method = TestMethod::cosufficient;
  /// Rayleigh value on the scale its calibration refers to N(0, 1),
  /// V = R^2 / sigma2_hat, or F.
  double statistic = 0.0;
  double p_value = 1.0;
  double df1 = 0.0;  ///< F numerator df, or n - d_theta for the sphere/chi2 tests
  double df2 = 0.0;  ///< F denominator df
  int k = 0;
  int nu = 0;  ///< df of the variance estimate, 0 when sigma is treated as known
  bool not_nested = false;
  ModelSubset submodel;
};

/// How the Rayleigh sum is referred to N(0, 1).
///  - exact_variance: divide by sqrt((k-1)/k), the exact null standard
///    deviation of sqrt(2m)/k * sum_{i<j} <q_i, q_j> for uniform directions;
///  - asymptotic: use the unscaled sum directly, whose variance only reaches 1
///    as k grows.
enum class RayleighCalibration { exact_variance, asymptotic };

/// sqrt(2m)/k * sum_{i<j} <q_i, q_j> for the k unit columns of an m x k matrix.
double rayleigh_statistic(const MatrixXd& q_reps);

/// sqrt((k-1)/k).
double rayleigh_null_sd(int k);

double rayleigh_p_value(double rayleigh, int k, RayleighCalibration cal);

/// Uniformity test of the randomised replicates projected on the complement of
/// the submodel's column space.
TestOutcome cosufficient_test(const ModelSubset& submodel, const MatrixXd& x,
                              const ReplicateBundle& bundle, const VarianceEstimate& variance,
                              bool intercept,
                              RayleighCalibration cal = RayleighCalibration::asymptotic);

/// Convenience overload that builds the bundle from (k, sigma_hat, noise_seed).
TestOutcome cosufficient_test(const ModelSubset& submodel, const MatrixXd& x, const VectorXd& y,
                              int k, const VarianceEstimate& variance, std::uint64_t noise_seed,
                              bool intercept,
                              RayleighCalibration cal = RayleighCalibration::asymptotic);

/// V = rss(submodel) / sigma2_hat against chi2_{n - d_theta}.
TestOutcome ancillary_test(const ModelSubset& submodel, const MatrixXd& x, const VectorXd& y,
                           const VarianceEstimate& variance, bool intercept,
                           TailSide tail = TailSide::upper);

/// F test of the submodel against the encompassing set on the same data.
TestOutcome naive_f_test(const ModelSubset& submodel, const ModelSubset& encompassing,
                         const MatrixXd& x, const VectorXd& y, bool intercept);

using Reducer = std::function<ReductionResult(const MatrixXd&, const VectorXd&)>;

struct SplitFOutcome {
  TestOutcome outcome;
  ReductionResult reduction;  ///< computed on the training rows
};

/// Reduction on the first floor(frac n) rows, F test on the rest. A submodel
/// outside the training reduction is reported with p = 0 and not_nested set.
SplitFOutcome split_f_test(const ModelSubset& submodel, const MatrixXd& x, const VectorXd& y,
                           double frac, const Reducer& reducer, bool intercept);

struct DepartureDiagnostic {
  VectorXd mean_direction;  ///< zero vector when kappa == 0
  double kappa = 0.0;
};

/// Mean direction U^T Z lambda / ||.|| and concentration
/// kappa = (n - d_theta) ||U^T Z lambda|| / (sqrt(2) sigma) of the projected
/// replicates under an omitted-variable departure Z lambda.
DepartureDiagnostic vmf_departure(const ComplementBasis& basis, const MatrixXd& z,
                                  const VectorXd& lambda, double sigma);

// ---------------------------------------------------------------------------
// Pre-bound procedures for the submodel sweep. The sweep residualises each
// tester's response columns against the submodel design and hands them over;
// the tester turns residuals into an outcome.

struct ProjectedSubmodel {
  const ModelSubset& submodel;
  Index n;
  Index d_theta;          ///< submodel columns plus intercept
  const double* residuals;  ///< this tester's columns, column-major n x c
};

class SubmodelTester {
 public:
  virtual ~SubmodelTester() = default;
  virtual TestMethod method() const = 0;
  /// Response columns to residualise (n x c).
  virtual const MatrixXd& responses() const = 0;
  virtual TestOutcome evaluate(const ProjectedSubmodel& s) const = 0;
};

class CosufficientTester final : public SubmodelTester {
 public:
  CosufficientTester(ReplicateBundle bundle, const VarianceEstimate& variance,
                     RayleighCalibration cal = RayleighCalibration::asymptotic);
  TestMethod method() const override { return TestMethod::cosufficient; }
  const MatrixXd& responses() const override { return bundle_.y_reps; }
  TestOutcome evaluate(const ProjectedSubmodel& s) const override;
  const ReplicateBundle& bundle() const { return bundle_; }

 private:
  ReplicateBundle bundle_;
  int nu_;
  RayleighCalibration cal_;
};

class AncillaryTester final : public SubmodelTester {
 public:
  AncillaryTester(const VectorXd& y, const VarianceEstimate& variance,
                  TailSide tail = TailSide::upper);
  TestMethod method() const override { return TestMethod::ancillary; }
  const MatrixXd& responses() const override { return y_; }
  TestOutcome evaluate(const ProjectedSubmodel& s) const override;

 private:
  MatrixXd y_;
  double sigma2_;
  int nu_;
  TailSide tail_;
};

/// F test against a fixed encompassing set. The encompassing model itself
/// (df1 = 0) cannot be rejected against itself and gets p = 1.
class FTester final : public SubmodelTester {
 public:
  FTester(const MatrixXd& x, const VectorXd& y, const ModelSubset& encompassing, bool intercept,
          TestMethod tag = TestMethod::naive_f);
  TestMethod method() const override { return tag_; }
  const MatrixXd& responses() const override { return y_; }
  TestOutcome evaluate(const ProjectedSubmodel& s) const override;

 private:
  MatrixXd y_;
  ModelSubset encompassing_;
  double rss_full_;
  Index df2_;
  TestMethod tag_;
};

}  // namespace confsets
