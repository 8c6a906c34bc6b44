#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "confsets/dist.hpp"
#include "confsets/errors.hpp"
#include "oracles.hpp"

using namespace confsets;

TEST_CASE("dist: closed-form anchors") {
  CHECK(chi2_cdf(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(0.0) == 0.5);
  for (double x : {0.5, 5.0, 20.0}) CHECK(chi2_quantile(chi2_cdf(x, 7), 7) == doctest::Approx(x).epsilon(1e-8));
}

TEST_CASE("dist: chi2 upper tail against the even-df series") {
  for (int df : {2, 4, 10, 40, 120})
    for (double x : {0.3, 1.0, 7.5, 30.0, 150.0}) {
      CAPTURE(df);
      CAPTURE(x);
      const double ref = oracle::chi2_sf_even(x, df);
      CHECK(std::abs(chi2_sf(x, df) - ref) <= 1e-10 * std::max(ref, 1e-300) + 1e-300);
      CHECK(chi2_cdf(x, df) + chi2_sf(x, df) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("dist: normal against erfc, quantile round trip") {
  for (double z : {-8.0, -2.5, -0.3, 0.7, 3.1}) {
    CHECK(normal_cdf(z) == doctest::Approx(oracle::normal_cdf(z)).epsilon(1e-12));
    CHECK(normal_sf(z) == doctest::Approx(oracle::normal_cdf(-z)).epsilon(1e-12));
  }
  for (double p : {1e-6, 0.025, 0.5, 0.9, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("dist: F and t against quadrature of their densities") {
  // F(2, 2) has cdf x / (1 + x).
  for (double x : {0.1, 1.0, 4.0}) CHECK(f_cdf(x, 2, 2) == doctest::Approx(x / (1 + x)).epsilon(1e-12));
  // t with 1 df is Cauchy.
  for (double x : {-3.0, 0.0, 0.5, 10.0})
    CHECK(t_cdf(x, 1) == doctest::Approx(0.5 + std::atan(x) / M_PI).epsilon(1e-12));
  // t with 5 df via Simpson on the density.
  const double c5 = std::tgamma(3.0) / (std::sqrt(5 * M_PI) * std::tgamma(2.5));
  auto dens = [c5](double u) { return c5 * std::pow(1 + u * u / 5, -3.0); };
  const double ref = 0.5 + oracle::simpson(dens, 0.0, 1.7, 2000);
  CHECK(t_cdf(1.7, 5) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(t_sf(1.7, 5) == doctest::Approx(1 - ref).epsilon(1e-9));
  CHECK(f_sf(3.0, 4, 9) == doctest::Approx(1 - f_cdf(3.0, 4, 9)).epsilon(1e-12));
}

TEST_CASE("dist: chi2_tail sides") {
  const double lo = chi2_cdf(3.0, 10);
  CHECK(chi2_tail(3.0, 10, TailSide::lower) == doctest::Approx(lo));
  CHECK(chi2_tail(3.0, 10, TailSide::upper) == doctest::Approx(1 - lo));
  CHECK(chi2_tail(3.0, 10, TailSide::two_sided) == doctest::Approx(2 * lo));
  CHECK(chi2_tail(10.0, 10, TailSide::two_sided) <= 1.0);
}

TEST_CASE("dist: domain errors") {
  CHECK_THROWS_AS(chi2_cdf(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(chi2_quantile(1.0, 3.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(f_cdf(1.0, -1.0, 2.0), DomainError);
  CHECK_THROWS_AS(fisher_corr_density(0.1, 1), DomainError);
  CHECK_THROWS_AS(mrcv_tail_bound(0, 0.5), DomainError);
  CHECK_THROWS_AS(mrcv_tail_bound(10, 0.0), DomainError);
}

TEST_CASE("fisher_corr_density: m = 3 is uniform") {
  for (double r : {-0.9, -0.2, 0.0, 0.4, 0.99}) CHECK(fisher_corr_density(r, 3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fisher_corr_density: normalisation, variance, Gaussian approximation") {
  const double total = oracle::simpson([](double r) { return fisher_corr_density(r, 50); }, -1, 1, 20000);
  CHECK(std::abs(total - 1.0) < 1e-6);

  const double var100 =
      oracle::simpson([](double r) { return r * r * fisher_corr_density(r, 100); }, -1, 1, 20000);
  CHECK(std::abs(var100 * 100 - 1.0) < 0.05);

  // N(0, 1/m) on the r ~ 1/sqrt(m) scale; relative error is O(c^4 / m).
  for (int m : {200, 400, 1000})
    for (double c : {0.0, 0.5, 1.0, 2.0}) {
      const double r = c / std::sqrt(m);
      const double approx = std::sqrt(m / (2 * M_PI)) * std::exp(-m * r * r / 2);
      CHECK(std::abs(fisher_corr_density(r, m) / approx - 1.0) < 0.05);
    }
  // Large m stays finite (log-space constant).
  CHECK(std::isfinite(fisher_corr_density(0.01, 5000)));
}

TEST_CASE("fisher_corr_cdf: agrees with integrated density") {
  for (int m : {4, 20, 97}) {
    const oracle::FisherCorrelation ref(m);
    for (double r : {-0.5, -0.1, 0.0, 0.2, 0.6}) CHECK(fisher_corr_cdf(r, m) == doctest::Approx(ref.cdf(r)).epsilon(1e-5));
  }
}

TEST_CASE("mrcv_tail_bound: monotone, vanishing, dominates Monte Carlo") {
  double prev = 1.0;
  for (double d = 0.01; d < 20; d *= 1.3) {
    const double b = mrcv_tail_bound(50, d);
    CHECK(b <= prev + 1e-15);
    CHECK(b >= 0.0);
    prev = b;
  }
  CHECK(mrcv_tail_bound(50, 1e6) < 1e-300);
  CHECK(mrcv_tail_bound(50, std::numeric_limits<double>::infinity()) == 0.0);

  std::mt19937_64 rng(2026);
  std::chi_squared_distribution<double> chi(50);
  int exceed = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i)
    if (std::abs(chi(rng) / 50 - 1) > 0.5) ++exceed;
  CHECK(static_cast<double>(exceed) / draws <= mrcv_tail_bound(50, 0.5));
}
