#pragma once

// Reference distributions used to calibrate the model tests.

namespace confsets {

enum class TailSide { upper, lower, two_sided };

double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);

double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);
double chi2_quantile(double p, double df);

double f_cdf(double x, double df1, double df2);
double f_sf(double x, double df1, double df2);

double t_cdf(double x, double df);
double t_sf(double x, double df);

/// Tail probability of `x` under chi2_df on the requested side. The two-sided
/// value is twice the smaller tail, capped at 1.
double chi2_tail(double x, double df, TailSide side);

/// Null density of the cosine between two independent uniform directions in
/// R^m (equivalently Fisher's sample correlation from m points):
/// Gamma(m/2) / (sqrt(pi) Gamma((m-1)/2)) * (1 - r^2)^((m-3)/2), m >= 2.
/// Evaluated in log space so large m does not overflow.
double fisher_corr_density(double r, int m);

/// CDF of the same law: (1 + r)/2 ~ Beta((m-1)/2, (m-1)/2).
double fisher_corr_cdf(double r, int m);

/// Chernoff bound on P(|chi2_nu/nu - 1| > delta):
/// 2 exp{-nu [delta - log(1 + delta)] / 2}, capped at 1.
double mrcv_tail_bound(int nu, double delta);

}  // namespace confsets
