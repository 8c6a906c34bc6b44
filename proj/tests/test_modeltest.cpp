#include <doctest.h>

#include <cmath>
#include <vector>

#include "confsets/confset.hpp"
#include "confsets/errors.hpp"
#include "confsets/modeltest.hpp"
#include "confsets/rng.hpp"
#include "oracles.hpp"

using namespace confsets;

namespace {

struct NullSetup {
  MatrixXd x;
  ModelSubset truth;
};

NullSetup null_setup(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  return {standard_normal_matrix(n, p, rng), ModelSubset({0, 1, 2}, p)};
}

VectorXd null_response(const MatrixXd& x, Rng& rng) {
  return x.col(0) - 0.5 * x.col(1) + 2 * x.col(2) + standard_normal_matrix(x.rows(), 1, rng).col(0);
}

}  // namespace

TEST_CASE("rayleigh_statistic: orthogonal and aligned inputs") {
  CHECK(rayleigh_statistic(MatrixXd::Identity(10, 4)) == doctest::Approx(0.0));
  MatrixXd q = MatrixXd::Zero(98, 2);
  q(5, 0) = q(5, 1) = 1.0;
  CHECK(rayleigh_statistic(q) == doctest::Approx(7.0));
  CHECK(rayleigh_null_sd(2) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(rayleigh_statistic(MatrixXd::Identity(5, 1)), DomainError);
  CHECK_THROWS_AS(rayleigh_statistic(2 * MatrixXd::Identity(5, 2)), DomainError);
}

TEST_CASE("rayleigh_p_value: calibrations") {
  CHECK(rayleigh_p_value(1.0, 2, RayleighCalibration::asymptotic) ==
        doctest::Approx(oracle::normal_cdf(-1.0)));
  CHECK(rayleigh_p_value(1.0, 2, RayleighCalibration::exact_variance) ==
        doctest::Approx(oracle::normal_cdf(-std::sqrt(2.0))));
}

TEST_CASE("cosufficient_test: exact null variance of the Rayleigh sum is (k-1)/k") {
  const NullSetup s = null_setup(60, 3, 1);
  Rng rng(2);
  for (int k : {2, 5}) {
    std::vector<double> r;
    for (int rep = 0; rep < 3000; ++rep) {
      const VectorXd y = null_response(s.x, rng);
      r.push_back(cosufficient_test(s.truth, s.x, y, k, VarianceEstimate::oracle(1.0), rng(), false,
                                    RayleighCalibration::asymptotic)
                      .statistic);
    }
    const double target = (k - 1.0) / k;
    // SE of a sample variance of near-normal data: var * sqrt(2 / (N - 1)).
    CHECK(std::abs(oracle::variance(r) - target) < 4 * target * std::sqrt(2.0 / 2999));
  }
}

TEST_CASE("cosufficient_test: null rejection rates at k = 2") {
  const NullSetup s = null_setup(100, 3, 3);
  Rng rng(4);
  int rej_exact = 0, rej_asym = 0;
  const int reps = 2000;
  for (int rep = 0; rep < reps; ++rep) {
    const VectorXd y = null_response(s.x, rng);
    const std::uint64_t seed = rng();
    if (cosufficient_test(s.truth, s.x, y, 2, VarianceEstimate::oracle(1.0), seed, false,
                          RayleighCalibration::exact_variance)
            .p_value <= 0.05)
      ++rej_exact;
    if (cosufficient_test(s.truth, s.x, y, 2, VarianceEstimate::oracle(1.0), seed, false).p_value <=
        0.05)
      ++rej_asym;
  }
  CHECK(std::abs(rej_exact / double(reps) - 0.05) <= 0.02);
  // Literal statistic has sd 1/sqrt(2) at k = 2.
  const double asym_rate = oracle::normal_cdf(-1.6448536269514722 * std::sqrt(2.0));
  CHECK(std::abs(rej_asym / double(reps) - asym_rate) <= 0.007);
}

TEST_CASE("cosufficient_test: pairwise inner products follow the sample-correlation law") {
  const NullSetup s = null_setup(100, 3, 5);
  const ComplementBasis cb = complement_basis(Design::from_columns(s.x, s.truth, false));
  Rng rng(6);
  std::vector<double> ip;
  for (int rep = 0; rep < 2000; ++rep) {
    const VectorXd y = null_response(s.x, rng);
    const MatrixXd q = q_replicates(pseudo_replicates(y, gamma_coefficients(3, 1.0), rng()), cb);
    ip.push_back(q.col(0).dot(q.col(2)));
  }
  const oracle::FisherCorrelation f(97);
  CHECK(oracle::ks_pvalue(ip, [&](double r) { return f.cdf(r); }) > 0.01);
}

TEST_CASE("cosufficient_test: power against an omitted strong signal") {
  const NullSetup s = null_setup(100, 3, 7);
  Rng rng(8);
  int rej = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    const VectorXd y = s.x.rowwise().sum() + standard_normal_matrix(100, 1, rng).col(0);
    if (cosufficient_test(ModelSubset({0, 1}, 3), s.x, y, 2, VarianceEstimate::oracle(1.0), rng(),
                          false)
            .p_value <= 0.05)
      ++rej;
  }
  CHECK(rej >= reps / 2);
}

TEST_CASE("co-sufficient and ancillary statistics are scale and translation invariant") {
  const NullSetup s = null_setup(50, 4, 9);
  Rng rng(10);
  const VectorXd y = null_response(s.x, rng);
  const VarianceEstimate v = VarianceEstimate::oracle(1.3);
  const TestOutcome base = cosufficient_test(s.truth, s.x, y, 4, v, 55, false);
  const TestOutcome anc = ancillary_test(s.truth, s.x, y, v, false);
  for (double c : {-2.0, 0.01, 7.0}) {
    const VarianceEstimate vc = VarianceEstimate::oracle(1.3 * c * c);
    // A negative c also flips the auxiliary noise, so compare on |c| there.
    if (c > 0)
      CHECK(cosufficient_test(s.truth, s.x, VectorXd(c * y), 4, vc, 55, false).statistic ==
            doctest::Approx(base.statistic).epsilon(1e-8));
    CHECK(ancillary_test(s.truth, s.x, VectorXd(c * y), vc, false).statistic ==
          doctest::Approx(anc.statistic).epsilon(1e-8));
  }
  const VectorXd shifted = y + 3 * s.x.col(0) - s.x.col(2);
  CHECK(cosufficient_test(s.truth, s.x, shifted, 4, v, 55, false).statistic ==
        doctest::Approx(base.statistic).epsilon(1e-8));
}

TEST_CASE("ancillary_test: rss equal to sigma2 times df gives the chi2 median-ish tail") {
  Rng rng(11);
  const MatrixXd x = standard_normal_matrix(12, 2, rng);
  const VectorXd y = standard_normal_matrix(12, 1, rng).col(0);
  const ModelSubset all({0, 1}, 2);
  const double rss = ols_fit(Design(x, false), y).rss;
  const TestOutcome t = ancillary_test(all, x, y, VarianceEstimate::oracle(rss / 10), false);
  CHECK(t.statistic == doctest::Approx(10.0));
  CHECK(t.df1 == 10);
  CHECK(t.p_value == doctest::Approx(oracle::chi2_sf_even(10.0, 10)).epsilon(1e-10));
  CHECK(t.p_value == doctest::Approx(0.440).epsilon(1e-3));
}

TEST_CASE("ancillary_test: uniform p-values with known variance") {
  const NullSetup s = null_setup(40, 3, 12);
  Rng rng(13);
  std::vector<double> p;
  for (int rep = 0; rep < 2000; ++rep)
    p.push_back(ancillary_test(s.truth, s.x, null_response(s.x, rng), VarianceEstimate::oracle(1.0),
                               false)
                    .p_value);
  CHECK(oracle::ks_pvalue(p, oracle::uniform_cdf) > 0.01);
}

TEST_CASE("naive_f_test: degenerate, non-nested, and exact with a fixed encompassing set") {
  const NullSetup s = null_setup(60, 8, 14);
  Rng rng(15);
  const ModelSubset enc({0, 1, 2, 3, 4, 5}, 8);
  const VectorXd y0 = null_response(s.x, rng);
  CHECK_THROWS_AS(naive_f_test(enc, enc, s.x, y0, false), DegenerateDf);
  CHECK_THROWS_AS(naive_f_test(ModelSubset({7}, 8), enc, s.x, y0, false), NotNested);

  std::vector<double> p;
  for (int rep = 0; rep < 2000; ++rep)
    p.push_back(naive_f_test(s.truth, enc, s.x, null_response(s.x, rng), true).p_value);
  CHECK(oracle::ks_pvalue(p, oracle::uniform_cdf) > 0.01);
}

TEST_CASE("split_f_test: submodel outside the training reduction is rejected outright") {
  const NullSetup s = null_setup(50, 5, 16);
  Rng rng(17);
  const VectorXd y = null_response(s.x, rng);
  const Reducer fixed = [](const MatrixXd&, const VectorXd&) {
    ReductionResult r;
    r.selected = ModelSubset({0, 1, 2, 3}, 5);
    return r;
  };
  const SplitFOutcome out = split_f_test(ModelSubset({4}, 5), s.x, y, 0.6, fixed, false);
  CHECK(out.outcome.not_nested);
  CHECK(out.outcome.p_value == 0.0);
  const SplitFOutcome ok = split_f_test(s.truth, s.x, y, 0.6, fixed, false);
  CHECK(!ok.outcome.not_nested);
  CHECK(ok.outcome.df2 == 20 - 4);
}

TEST_CASE("vmf_departure: zero and linear cases") {
  Rng rng(18);
  const MatrixXd x = standard_normal_matrix(30, 3, rng);
  const ComplementBasis cb = complement_basis(Design(x, false));
  VectorXd lam(2);
  lam << 0.4, -1.0;
  const MatrixXd z_in = x.leftCols(2);
  CHECK(vmf_departure(cb, z_in, lam, 1.0).kappa < 1e-10);
  const MatrixXd z = standard_normal_matrix(30, 2, rng);
  CHECK(vmf_departure(cb, z, VectorXd::Zero(2), 1.0).kappa == 0.0);
  const DepartureDiagnostic one = vmf_departure(cb, z, lam, 1.0);
  const DepartureDiagnostic two = vmf_departure(cb, z, VectorXd(2 * lam), 1.0);
  CHECK(two.kappa == doctest::Approx(2 * one.kappa).epsilon(1e-12));
  CHECK(one.mean_direction.norm() == doctest::Approx(1.0));
  CHECK(one.kappa == doctest::Approx(27 * (cb.u.transpose() * z * lam).norm() / std::sqrt(2.0)));
  CHECK_THROWS_AS(vmf_departure(cb, z, lam, 0.0), DomainError);
}

TEST_CASE("sweep testers reproduce the single-model procedures") {
  const int n = 50, p = 10;
  Rng rng(19);
  const MatrixXd x = standard_normal_matrix(n, p, rng);
  const VectorXd y = x.col(0) + x.col(3) + standard_normal_matrix(n, 1, rng).col(0);
  const ModelSubset enc({0, 2, 3, 5, 8}, p);
  const VarianceEstimate v = VarianceEstimate::oracle(0.9);
  for (bool icpt : {false, true}) {
    CAPTURE(icpt);
    const CosufficientTester cos(pseudo_replicates(y, gamma_coefficients(3, std::sqrt(0.9)), 3), v);
    const AncillaryTester anc(y, v);
    const FTester ft(x, y, enc, icpt);
    const SubmodelTester* testers[] = {&cos, &anc, &ft};
    SweepOptions o;
    o.max_size = 3;
    o.intercept = icpt;
    o.keep_all_p_values = true;
    const auto sets = build_confidence_sets(x, enc, testers, o);
    SubmodelEnumerator it(enc, 3);
    ModelSubset m;
    std::size_t i = 0;
    while (it.next(m)) {
      CAPTURE(m.to_string());
      CHECK(sets[0].all_p_values[i] ==
            doctest::Approx(cosufficient_test(m, x, cos.bundle(), v, icpt).p_value).epsilon(1e-9));
      CHECK(sets[1].all_p_values[i] ==
            doctest::Approx(ancillary_test(m, x, y, v, icpt).p_value).epsilon(1e-9));
      const double pf = m == enc ? 1.0 : naive_f_test(m, enc, x, y, icpt).p_value;
      if (m.size() < enc.size()) CHECK(sets[2].all_p_values[i] == doctest::Approx(pf).epsilon(1e-9));
      ++i;
    }
    CHECK(i == sets[0].all_p_values.size());
  }
}
