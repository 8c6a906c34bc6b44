#include <doctest.h>

#include <cmath>
#include <set>

#include "confsets/errors.hpp"
#include "confsets/simharness.hpp"
#include "oracles.hpp"

using namespace confsets;

namespace {

double sample_cov(const VectorXd& a, const VectorXd& b) {
  return ((a.array() - a.mean()) * (b.array() - b.mean())).sum() / static_cast<double>(a.size() - 1);
}

SimulationConfig small_config() {
  SimulationConfig c;
  c.n = 60;
  c.p = 30;
  c.t = 1.0;
  c.rho = 0.1;
  c.replicates = 6;
  c.seed = 77;
  c.k_values = {2};
  c.max_model_size = 3;
  c.max_keep = 6;
  return c;
}

}  // namespace

TEST_CASE("gen_toeplitz_design: covariance structure") {
  const int n = 5000;
  Rng rng(1);
  const MatrixXd x0 = gen_toeplitz_design(n, 4, 0.0, rng);
  const double se0 = 1.0 / std::sqrt(n);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(sample_cov(x0.col(i), x0.col(i)) - 1) < 3 * std::sqrt(2.0 / n));
    for (int j = i + 1; j < 4; ++j) CHECK(std::abs(sample_cov(x0.col(i), x0.col(j))) < 3 * se0);
  }
  const MatrixXd x5 = gen_toeplitz_design(n, 4, 0.5, rng);
  // Var(x_i x_{i+2}) = 1 + rho^4 for jointly normal unit-variance pairs.
  CHECK(std::abs(sample_cov(x5.col(0), x5.col(2)) - 0.25) < 3 * std::sqrt(1.0625 / n));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sample_cov(x5.col(i), x5.col(i)) - 1) < 3 * std::sqrt(2.0 / n));
  CHECK_THROWS_AS(gen_toeplitz_design(10, 3, 1.0, rng), DomainError);
}

TEST_CASE("gen_response: noise and signal variances") {
  const int n = 5000;
  Rng rng(2);
  const MatrixXd x = gen_toeplitz_design(n, 5, 0.0, rng);
  const VectorXd noise = gen_response(x, 0.0, 2.0, rng);
  CHECK(std::abs(sample_cov(noise, noise) - 2.0) < 3 * 2.0 * std::sqrt(2.0 / n));
  const VectorXd exact = gen_response(x, 1.5, 0.0, rng);
  CHECK((exact - 1.5 * (x.col(0) + x.col(1) + x.col(2))).cwiseAbs().maxCoeff() == 0.0);
  const VectorXd y = gen_response(x, 1.0, 1.0, rng);
  CHECK(std::abs(sample_cov(y, y) - 4.0) < 3 * 4.0 * std::sqrt(2.0 / n));
  CHECK_THROWS_AS(gen_response(MatrixXd::Ones(5, 2), 1.0, 1.0, rng), DomainError);
}

TEST_CASE("config validation names the offending field") {
  SimulationConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.rho = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("rho must lie in [0,1)"), DomainError);
  c = small_config();
  c.k_values = {1};
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_config();
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("method_specs: display order") {
  SimulationConfig c;
  const auto specs = c.method_specs();
  REQUIRE(specs.size() == 10);
  CHECK(specs[0].label() == "Cox + co-sufficient (k = 2)");
  CHECK(specs[1].k == 8);
  CHECK(specs[3].test == TestMethod::naive_f);
  CHECK(specs[4].reducer == ReducerKind::lasso);
  CHECK(specs[8].label() == "split Cox + split F test");
  CHECK(specs[9].reducer_tag() == "lasso");
}

TEST_CASE("replicates: deterministic and sharing one dataset") {
  const SimulationConfig c = small_config();
  const Dataset a = generate_dataset(c, 3), b = generate_dataset(c, 3);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(dataset_hash(a.x, a.y) != dataset_hash(generate_dataset(c, 4).x, generate_dataset(c, 4).y));

  const auto r1 = run_replicate_all(c, 2);
  const auto r2 = run_replicate_all(c, 2);
  REQUIRE(r1.size() == c.method_specs().size());
  std::set<std::uint64_t> hashes;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].covered == r2[i].covered);
    CHECK(r1[i].set_size == r2[i].set_size);
    hashes.insert(r1[i].data_hash);
  }
  CHECK(hashes.size() == 1);

  const ReplicateResult single = run_replicate(c, c.method_specs()[1], 2);
  CHECK(single.set_size == r1[1].set_size);
  CHECK(single.covered == r1[1].covered);
}

TEST_CASE("run_experiment: logical invariants and aggregation") {
  SimulationConfig c = small_config();
  c.replicates = 12;
  c.workers = 2;
  const ExperimentTable table = run_experiment(c);
  CHECK(table.rows.size() == c.method_specs().size());
  for (const ReplicateResult& r : table.replicate_results)
    if (r.covered) CHECK(r.survived);
  for (const ExperimentRow& row : table.rows) {
    int n = 0, cov = 0;
    for (const ReplicateResult& r : table.replicate_results)
      if (r.spec == row.spec && !r.failed) {
        ++n;
        cov += r.covered;
      }
    CHECK(row.replicates == n);
    if (n > 0) {
      CHECK(row.coverage == doctest::Approx(static_cast<double>(cov) / n));
      CHECK(row.coverage_se == doctest::Approx(std::sqrt(row.coverage * (1 - row.coverage) / n)));
    }
  }
  c.workers = 1;
  const ExperimentTable serial = run_experiment(c);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].coverage == serial.rows[i].coverage);
    CHECK(table.rows[i].mean_size == serial.rows[i].mean_size);
  }
}

TEST_CASE("run_experiment: one replicate has no standard errors") {
  SimulationConfig c = small_config();
  c.replicates = 1;
  c.methods = {TestMethod::ancillary};
  const ExperimentTable t = run_experiment(c);
  for (const ExperimentRow& row : t.rows) {
    CHECK(std::isnan(row.coverage_se));
    CHECK(std::isnan(row.size_se));
  }
}

TEST_CASE("run_experiment: doubling replicates shrinks the coverage SE by about sqrt(2)") {
  SimulationConfig c = small_config();
  c.t = 0.6;
  c.methods = {TestMethod::naive_f};
  c.reducers = {ReducerKind::cox};
  c.replicates = 150;
  const double se1 = run_experiment(c).rows.at(0).coverage_se;
  c.replicates = 300;
  const double se2 = run_experiment(c).rows.at(0).coverage_se;
  CAPTURE(se1);
  CAPTURE(se2);
  CHECK(se2 / se1 >= 0.6);
  CHECK(se2 / se1 <= 0.85);
}

TEST_CASE("oracle reducer at alpha = 0 always covers") {
  SimulationConfig c = small_config();
  c.reducers = {ReducerKind::oracle};
  c.alpha = 0.0;
  c.replicates = 5;
  const ExperimentTable t = run_experiment(c);
  for (const ExperimentRow& row : t.rows) {
    CAPTURE(row.spec.label());
    CHECK(row.coverage == 1.0);
    CHECK(row.survival == 1.0);
  }
}

TEST_CASE("known variance and a fixed encompassing set give nominal co-sufficient coverage") {
  SimulationConfig c = small_config();
  c.n = 100;
  c.p = 10;
  c.max_keep = 5;
  c.reducers = {ReducerKind::oracle};
  c.methods = {TestMethod::cosufficient, TestMethod::ancillary};
  c.variance = VarianceMode::known;
  c.calibration = RayleighCalibration::exact_variance;
  c.replicates = 400;
  const ExperimentTable t = run_experiment(c);
  for (const ExperimentRow& row : t.rows) {
    CAPTURE(row.spec.label());
    CHECK(std::abs(row.coverage - 0.95) < 0.035);
  }
}

namespace {

ExperimentTable synthetic_cell(const MethodSpec& spec, int covered, int total, int size) {
  ExperimentTable t;
  ExperimentRow row;
  row.spec = spec;
  t.rows.push_back(row);
  for (int i = 0; i < total; ++i) {
    ReplicateResult r;
    r.spec = spec;
    r.replicate = i;
    r.survived = true;
    r.covered = i < covered;
    r.set_size = size + (i % 3);
    t.replicate_results.push_back(r);
  }
  return t;
}

std::vector<FactorCell> half_fraction(const MethodSpec& spec, const int covered[4], int total,
                                      const int sizes[4]) {
  const int levels[4][3] = {{-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}, {1, 1, 1}};
  std::vector<FactorCell> cells;
  for (int i = 0; i < 4; ++i)
    cells.push_back({levels[i][0], levels[i][1], levels[i][2],
                     synthetic_cell(spec, covered[i], total, sizes[i])});
  return cells;
}

}  // namespace

TEST_CASE("marginal_effects: odds-ratio arithmetic") {
  const MethodSpec spec{ReducerKind::cox, TestMethod::ancillary, 0};
  const int sizes[4] = {10, 10, 10, 10};

  const int same[4] = {60, 60, 60, 60};
  auto e = marginal_effects(half_fraction(spec, same, 100, sizes));
  REQUIRE(e.size() == 1);
  REQUIRE(e[0].coverage_odds);
  for (double v : *e[0].coverage_odds) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
  REQUIRE(e[0].log_size);
  for (double v : *e[0].log_size) CHECK(std::abs(v) < 1e-10);

  const int by_n[4] = {50, 50, 80, 80};
  e = marginal_effects(half_fraction(spec, by_n, 100, sizes));
  REQUIRE(e[0].coverage_odds);
  CHECK((*e[0].coverage_odds)[0] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK((*e[0].coverage_odds)[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK((*e[0].coverage_odds)[2] == doctest::Approx(1.0).epsilon(1e-6));

  const int extreme[4] = {0, 100, 0, 100};
  const int zero_sizes[4] = {0, 0, 0, 0};
  e = marginal_effects(half_fraction(spec, extreme, 100, sizes));
  CHECK(!e[0].coverage_odds);
  CHECK(e[0].log_size);

  std::vector<FactorCell> flat = half_fraction(spec, extreme, 100, zero_sizes);
  for (FactorCell& c : flat)
    for (ReplicateResult& r : c.table.replicate_results) r.set_size = 0;
  e = marginal_effects(flat);
  CHECK(!e[0].coverage_odds);
  CHECK(!e[0].log_size);

  // Size contrast: cells at t = +1 have sizes larger by a constant on the log scale.
  const int t_sizes[4] = {3, 63, 3, 63};
  e = marginal_effects(half_fraction(spec, same, 99, t_sizes));
  REQUIRE(e[0].log_size);
  CHECK((*e[0].log_size)[1] > 2.5);
  CHECK(std::abs((*e[0].log_size)[0]) < 1e-8);

  CHECK_THROWS_AS(marginal_effects({}), DomainError);
}
