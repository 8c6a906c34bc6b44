#include "confsets/randomize.hpp"

#include <cmath>
#include <span>
#include <string>

#include "confsets/errors.hpp"
#include "confsets/kernels.hpp"
#include "confsets/rng.hpp"

namespace confsets {

GammaPlan gamma_coefficients(int k, double sigma) {
  if (k < 2) throw DomainError("need k >= 2 replicates, got " + std::to_string(k));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");

  GammaPlan plan;
  plan.k = k;
  plan.sigma = sigma;
  plan.a.resize(k - 1);
  plan.b.resize(k - 1);

  // Unit-sigma recursion; sum_b2 carries sum_{j<=i} b_j^2.
  double sum_b2 = 0.0;
  for (int i = 0; i < k - 1; ++i) {
    const double radicand = (k - 1) - sum_b2;
    if (!(radicand > 0.0))
      throw NumericalError("non-positive radicand in Gamma recursion at i=" + std::to_string(i));
    const double a = std::sqrt(radicand);
    const double b = (1.0 + sum_b2) / a;
    plan.a(i) = sigma * a;
    plan.b(i) = sigma * b;
    sum_b2 += b * b;
  }

  plan.gamma = MatrixXd::Zero(k, k);
  plan.gamma.row(0).setOnes();
  for (int i = 1; i < k; ++i) {
    plan.gamma(i, i - 1) = plan.a(i - 1);
    for (int j = i; j < k; ++j) plan.gamma(i, j) = -plan.b(i - 1);
  }
  return plan;
}

ReplicateBundle pseudo_replicates(const VectorXd& y, const GammaPlan& plan,
                                  std::uint64_t noise_seed) {
  Rng rng(noise_seed);
  const MatrixXd noise = standard_normal_matrix(y.size(), plan.k - 1, rng);
  return pseudo_replicates(y, plan, noise, noise_seed);
}

ReplicateBundle pseudo_replicates(const VectorXd& y, const GammaPlan& plan, const MatrixXd& noise,
                                  std::uint64_t noise_seed) {
  const Index n = y.size();
  if (n < 1) throw DimensionMismatch("empty response");
  if (plan.gamma.rows() != plan.k || plan.k < 2) throw DomainError("invalid GammaPlan");
  if (noise.rows() != n || noise.cols() != plan.k - 1)
    throw DimensionMismatch("noise matrix must be n x (k-1)");

  MatrixXd stacked(n, plan.k);
  stacked.col(0) = y;
  stacked.rightCols(plan.k - 1) = noise;

  ReplicateBundle out;
  out.noise_seed = noise_seed;
  out.sigma_used = plan.sigma;
  out.y_reps.resize(n, plan.k);
  const auto rows = static_cast<std::size_t>(n);
  const auto k = static_cast<std::size_t>(plan.k);
  for (int j = 0; j < plan.k; ++j) {
    const VectorXd w = plan.gamma.col(j);
    kernels::gemv_cols(stacked.data(), rows, k, rows, {w.data(), k},
                       {out.y_reps.col(j).data(), rows});
  }
  return out;
}

MatrixXd q_replicates(const ReplicateBundle& bundle, const ComplementBasis& basis) {
  if (basis.u.rows() != bundle.y_reps.rows())
    throw DimensionMismatch("basis and replicates disagree on n");
  MatrixXd q = basis.u.transpose() * bundle.y_reps;
  for (Index j = 0; j < q.cols(); ++j) {
    const double norm = q.col(j).norm();
    if (!(norm > 1e-12))
      throw DegenerateProjection("replicate " + std::to_string(j) +
                                 " has (numerically) zero projection");
    q.col(j) /= norm;
  }
  return q;
}

}  // namespace confsets
