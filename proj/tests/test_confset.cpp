#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "confsets/confset.hpp"
#include "confsets/errors.hpp"
#include "confsets/modeltest.hpp"
#include "confsets/rng.hpp"
#include "oracles.hpp"

using namespace confsets;

TEST_CASE("count_submodels: closed-form counts") {
  CHECK(count_submodels(15, 5) == 4943);
  CHECK(count_submodels(3, 3) == 7);
  CHECK(count_submodels(15, 3) == 575);
  for (int pool = 1; pool <= 12; ++pool)
    for (int m = 1; m <= pool; ++m) {
      std::int64_t ref = 0;
      for (int j = 1; j <= m; ++j) ref += oracle::binomial(pool, j);
      CHECK(count_submodels(pool, m) == ref);
    }
}

TEST_CASE("SubmodelEnumerator: lexicographic order against brute force") {
  const std::vector<int> members{2, 5, 7, 9, 11};
  const ModelSubset enc(members, 12);
  for (int m = 1; m <= 5; ++m) {
    const auto ref = oracle::all_subsets(5, m);
    SubmodelEnumerator it(enc, m);
    ModelSubset s;
    std::size_t i = 0;
    while (it.next(s)) {
      REQUIRE(i < ref.size());
      std::vector<int> mapped;
      for (int pos : ref[i]) mapped.push_back(members[static_cast<std::size_t>(pos)]);
      CHECK(s.indices() == mapped);
      ++i;
    }
    CHECK(i == ref.size());
  }
  CHECK_THROWS_AS(SubmodelEnumerator(enc, 0), DomainError);
  CHECK_THROWS_AS(SubmodelEnumerator(enc, 6), DomainError);
}

namespace {

struct Fixture {
  MatrixXd x;
  VectorXd y;
  ModelSubset enc;
};

Fixture fixture(std::uint64_t seed) {
  Rng rng(seed);
  Fixture f;
  f.x = standard_normal_matrix(60, 12, rng);
  f.y = f.x.col(0) + f.x.col(1) + f.x.col(2) + standard_normal_matrix(60, 1, rng).col(0);
  f.enc = ModelSubset({0, 1, 2, 4, 6, 9, 11}, 12);
  return f;
}

}  // namespace

TEST_CASE("build_confidence_set: alpha extremes and monotonicity") {
  const Fixture f = fixture(1);
  const AncillaryTester anc(f.y, VarianceEstimate::oracle(1.0));
  SweepOptions o;
  o.max_size = 4;
  o.alpha = 0.0;
  const ConfidenceSet all = build_confidence_set(f.x, f.enc, anc, o);
  CHECK(all.n_tested == count_submodels(7, 4));
  CHECK(static_cast<std::int64_t>(all.accepted.size()) == all.n_tested);
  o.alpha = 1.0;
  CHECK(build_confidence_set(f.x, f.enc, anc, o).accepted.empty());

  std::vector<ModelSubset> prev = all.accepted;
  for (double a : {0.01, 0.05, 0.2, 0.5}) {
    o.alpha = a;
    const ConfidenceSet s = build_confidence_set(f.x, f.enc, anc, o);
    for (const ModelSubset& m : s.accepted) CHECK(std::find(prev.begin(), prev.end(), m) != prev.end());
    for (double p : s.accepted_p) CHECK(p > a);
    prev = s.accepted;
  }
  o.alpha = 1.5;
  CHECK_THROWS_AS(build_confidence_set(f.x, f.enc, anc, o), DomainError);
}

TEST_CASE("build_confidence_set: workers do not change the result") {
  const Fixture f = fixture(2);
  const CosufficientTester cos(pseudo_replicates(f.y, gamma_coefficients(2, 1.0), 4),
                               VarianceEstimate::oracle(1.0));
  SweepOptions o;
  o.max_size = 4;
  o.keep_all_p_values = true;
  const ConfidenceSet one = build_confidence_set(f.x, f.enc, cos, o);
  o.workers = 3;
  const ConfidenceSet three = build_confidence_set(f.x, f.enc, cos, o);
  CHECK(one.accepted == three.accepted);
  CHECK(one.accepted_p == three.accepted_p);
  CHECK(one.all_p_values == three.all_p_values);
  CHECK(one.contains(ModelSubset({0, 1, 2}, 12)) == three.contains(ModelSubset({0, 1, 2}, 12)));
}

TEST_CASE("build_confidence_set: collinear columns make submodels undetermined") {
  Fixture f = fixture(3);
  f.x.col(4) = f.x.col(0);
  const ModelSubset enc({0, 1, 4}, 12);
  const AncillaryTester anc(f.y, VarianceEstimate::oracle(1.0));
  SweepOptions o;
  o.max_size = 3;
  o.alpha = 0.0;
  const ConfidenceSet s = build_confidence_set(f.x, enc, anc, o);
  CHECK(s.n_tested == 7);
  CHECK(s.n_undetermined == 2);  // {1,5} and {1,2,5} in 1-based labels
  CHECK(s.accepted.size() == 5);
}

TEST_CASE("summarize: counting examples") {
  ConfidenceSet one;
  one.encompassing = ModelSubset({0, 1, 2}, 3);
  one.accepted = {ModelSubset({0, 1}, 3)};
  SummaryReport r = summarize(one);
  CHECK(r.inclusion_freq == std::vector<double>{1.0, 1.0, 0.0});
  CHECK(!r.empty);

  ConfidenceSet singles;
  singles.encompassing = ModelSubset({0, 1, 2, 3, 4}, 5);
  for (int j = 0; j < 5; ++j) singles.accepted.push_back(ModelSubset({j}, 5));
  r = summarize(singles);
  for (double v : r.inclusion_freq) CHECK(v == doctest::Approx(0.2));
  // Of the four models lacking variable 1, one contains variable 2.
  REQUIRE(!r.substitutions.empty());
  CHECK(r.substitutions.front().freq == doctest::Approx(0.25));
  CHECK(r.substitutions.front().support == 4);

  ConfidenceSet none;
  none.encompassing = ModelSubset({0, 1}, 2);
  r = summarize(none);
  CHECK(r.empty);
  CHECK(r.inclusion_freq == std::vector<double>{0.0, 0.0});
}

TEST_CASE("summarize: signal variables dominate accepted models") {
  const Fixture f = fixture(4);
  const CosufficientTester cos(pseudo_replicates(f.y, gamma_coefficients(2, 1.0), 8),
                               VarianceEstimate::oracle(1.0));
  SweepOptions o;
  o.max_size = 5;
  const ConfidenceSet s = build_confidence_set(f.x, f.enc, cos, o);
  REQUIRE(!s.accepted.empty());
  const SummaryReport r = summarize(s);
  const double weakest_signal = std::min({r.inclusion_freq[0], r.inclusion_freq[1], r.inclusion_freq[2]});
  for (std::size_t j = 3; j < r.inclusion_freq.size(); ++j) CHECK(r.inclusion_freq[j] < weakest_signal);
}
