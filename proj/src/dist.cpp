#include "confsets/dist.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "confsets/errors.hpp"

namespace confsets {

namespace bm = boost::math;

namespace {

void require_df(double df, const char* what) {
  if (!(df > 0.0) || !std::isfinite(df))
    throw DomainError(std::string(what) + " must be a positive finite number");
}

void require_prob(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probability must lie in (0, 1)");
}

}  // namespace

double normal_cdf(double z) {
  if (std::isnan(z)) throw DomainError("normal_cdf of NaN");
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_sf(double z) {
  if (std::isnan(z)) throw DomainError("normal_sf of NaN");
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  require_prob(p);
  return bm::quantile(bm::normal_distribution<double>(), p);
}

double chi2_cdf(double x, double df) {
  require_df(df, "df");
  if (std::isnan(x)) throw DomainError("chi2_cdf of NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return bm::cdf(bm::chi_squared_distribution<double>(df), x);
}

double chi2_sf(double x, double df) {
  require_df(df, "df");
  if (std::isnan(x)) throw DomainError("chi2_sf of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return bm::cdf(bm::complement(bm::chi_squared_distribution<double>(df), x));
}

double chi2_quantile(double p, double df) {
  require_prob(p);
  require_df(df, "df");
  return bm::quantile(bm::chi_squared_distribution<double>(df), p);
}

double f_cdf(double x, double df1, double df2) {
  require_df(df1, "df1");
  require_df(df2, "df2");
  if (std::isnan(x)) throw DomainError("f_cdf of NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return bm::cdf(bm::fisher_f_distribution<double>(df1, df2), x);
}

double f_sf(double x, double df1, double df2) {
  require_df(df1, "df1");
  require_df(df2, "df2");
  if (std::isnan(x)) throw DomainError("f_sf of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return bm::cdf(bm::complement(bm::fisher_f_distribution<double>(df1, df2), x));
}

double t_cdf(double x, double df) {
  require_df(df, "df");
  if (std::isnan(x)) throw DomainError("t_cdf of NaN");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return bm::cdf(bm::students_t_distribution<double>(df), x);
}

double t_sf(double x, double df) {
  require_df(df, "df");
  if (std::isnan(x)) throw DomainError("t_sf of NaN");
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return bm::cdf(bm::complement(bm::students_t_distribution<double>(df), x));
}

double chi2_tail(double x, double df, TailSide side) {
  switch (side) {
    case TailSide::upper:
      return chi2_sf(x, df);
    case TailSide::lower:
      return chi2_cdf(x, df);
    case TailSide::two_sided:
      return std::min(1.0, 2.0 * std::min(chi2_cdf(x, df), chi2_sf(x, df)));
  }
  return 1.0;
}

double fisher_corr_density(double r, int m) {
  if (m < 2) throw DomainError("fisher_corr_density needs m >= 2");
  if (std::isnan(r)) throw DomainError("fisher_corr_density of NaN");
  if (r <= -1.0 || r >= 1.0) return 0.0;
  const double md = m;
  const double log_c =
      std::lgamma(md / 2.0) - 0.5 * std::log(std::numbers::pi) - std::lgamma((md - 1.0) / 2.0);
  return std::exp(log_c + 0.5 * (md - 3.0) * std::log1p(-r * r));
}

double fisher_corr_cdf(double r, int m) {
  if (m < 2) throw DomainError("fisher_corr_cdf needs m >= 2");
  if (std::isnan(r)) throw DomainError("fisher_corr_cdf of NaN");
  if (r <= -1.0) return 0.0;
  if (r >= 1.0) return 1.0;
  const double a = (m - 1.0) / 2.0;
  return bm::ibeta(a, a, 0.5 * (1.0 + r));
}

double mrcv_tail_bound(int nu, double delta) {
  if (nu < 1) throw DomainError("nu must be >= 1");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (std::isinf(delta)) return 0.0;
  // Chernoff with the chi2_nu mgf evaluated for T = chi2_nu / nu: the upper
  // tail gives exp{-nu (delta - log(1 + delta)) / 2} and the lower tail is
  // dominated by the same expression.
  const double expo = -0.5 * nu * (delta - std::log1p(delta));
  return std::min(1.0, 2.0 * std::exp(expo));
}

}  // namespace confsets
