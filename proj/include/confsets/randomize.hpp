#pragma once

#include <cstdint>

#include "confsets/linalg.hpp"

namespace confsets {

/// Mixing matrix that turns [y L] (y ~ N(mu, sigma^2 I), L iid N(0,1)) into k
/// independent N(mu, k sigma^2 I) pseudo-replicates.
///
/// Row 0 is all ones. Row i (1-based, i < k) holds a_i in column i-1 and -b_i
/// in every later column, with a_i = (k - i) b_i so each row below the first
/// sums to zero.
struct GammaPlan {
  int k = 0;
  double sigma = 0.0;
  MatrixXd gamma;  ///< k x k
  VectorXd a;      ///< length k-1, already scaled by sigma
  VectorXd b;      ///< length k-1, already scaled by sigma
};

GammaPlan gamma_coefficients(int k, double sigma);

struct ReplicateBundle {
  MatrixXd y_reps;  ///< n x k
  std::uint64_t noise_seed = 0;
  double sigma_used = 0.0;
};

/// [y L] * gamma with L drawn from Rng(noise_seed).
ReplicateBundle pseudo_replicates(const VectorXd& y, const GammaPlan& plan,
                                  std::uint64_t noise_seed);

/// Same, with a caller-supplied n x (k-1) noise matrix.
ReplicateBundle pseudo_replicates(const VectorXd& y, const GammaPlan& plan, const MatrixXd& noise,
                                  std::uint64_t noise_seed = 0);

/// Columns U^T y_i / ||U^T y_i||, an (n - d_theta) x k matrix.
MatrixXd q_replicates(const ReplicateBundle& bundle, const ComplementBasis& basis);

}  // namespace confsets
