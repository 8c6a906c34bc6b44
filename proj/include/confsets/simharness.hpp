#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confsets/confset.hpp"
#include "confsets/linalg.hpp"
#include "confsets/modeltest.hpp"
#include "confsets/rng.hpp"

namespace confsets {

enum class ReducerKind { cox, lasso, oracle };
enum class VarianceMode { mrcv, known };

std::string to_string(ReducerKind r);
ReducerKind parse_reducer(const std::string& s);
TestMethod parse_test_method(const std::string& s);

/// One row of an experiment table: a reducer paired with a testing procedure.
struct MethodSpec {
  ReducerKind reducer = ReducerKind::cox;
  TestMethod test = TestMethod::cosufficient;
  int k = 0;  ///< replicate count for the co-sufficient test

  /// CSV `method` column: cosufficient_k2, ancillary, naive_f, split_f.
  std::string method_tag() const;
  /// CSV `reducer` column.
  std::string reducer_tag() const;
  /// Row label in the rendered table, e.g. "Cox + co-sufficient (k = 2)".
  std::string label() const;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

struct SimulationConfig {
  int n = 100;
  int p = 400;
  double rho = 0.1;
  double t = 1.0;
  double sigma2 = 1.0;
  int replicates = 500;
  std::uint64_t seed = 1;
  std::vector<TestMethod> methods = {TestMethod::cosufficient, TestMethod::ancillary,
                                     TestMethod::naive_f, TestMethod::split_f};
  std::vector<int> k_values = {2, 8};
  std::vector<ReducerKind> reducers = {ReducerKind::cox, ReducerKind::lasso};
  double alpha = 0.05;
  int max_model_size = 5;
  int max_keep = 15;
  double gamma_frac = 0.6;
  double split_frac = 0.6;
  VarianceMode variance = VarianceMode::mrcv;
  RayleighCalibration calibration = RayleighCalibration::asymptotic;
  int workers = 1;

  /// Throws DomainError with a message naming the offending field.
  void validate() const;
  /// Table rows in display order: per reducer the co-sufficient rows (one per
  /// k), ancillary, naive F; then the split-sample rows.
  std::vector<MethodSpec> method_specs() const;
};

struct ReplicateResult {
  MethodSpec spec;
  int replicate = 0;
  bool failed = false;
  std::string error;
  bool survived = false;  ///< E* within the encompassing set
  bool covered = false;   ///< E* in the confidence set
  std::int64_t set_size = 0;
  std::int64_t n_tested = 0;
  std::int64_t n_undetermined = 0;
  int encompassing_size = 0;
  /// p-value of E* recomputed through the single-model procedure (NaN when E*
  /// did not survive).
  double p_true = 0.0;
  std::uint64_t seed_used = 0;
  std::uint64_t data_hash = 0;
};

struct ExperimentRow {
  MethodSpec spec;
  int replicates = 0;  ///< successful replicates
  int failures = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;  ///< NaN when unavailable
  double survival = 0.0;
  double survival_se = 0.0;
  double mean_size = 0.0;
  double size_se = 0.0;
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  std::vector<ReplicateResult> replicate_results;  ///< replicate-major order
};

/// Rows iid N(0, Sigma) with Sigma_ij = rho^|i-j|, via x_j = rho x_{j-1} + sqrt(1-rho^2) z_j.
MatrixXd gen_toeplitz_design(int n, int p, double rho, Rng& rng);

/// y = t (x_1 + x_2 + x_3) + sigma eps.
VectorXd gen_response(const MatrixXd& x, double t, double sigma2, Rng& rng);

/// The generating model {1, 2, 3}.
ModelSubset true_model(int p);

std::uint64_t replicate_seed(std::uint64_t master, int replicate_index);
/// Shuffle seed of the Cox grid; `split` selects the training-half stream.
std::uint64_t grid_seed(std::uint64_t replicate_seed, bool split);
/// Seed of the auxiliary noise matrix L for a co-sufficient row.
std::uint64_t noise_seed(std::uint64_t replicate_seed, const MethodSpec& spec);
std::uint64_t dataset_hash(const MatrixXd& x, const VectorXd& y);

struct Dataset {
  MatrixXd x;
  VectorXd y;
};
Dataset generate_dataset(const SimulationConfig& config, int replicate_index);

/// Runs every configured method on replicate `replicate_index`, sharing the
/// dataset, reductions and variance estimate across methods.
std::vector<ReplicateResult> run_replicate_all(const SimulationConfig& config,
                                               int replicate_index);

ReplicateResult run_replicate(const SimulationConfig& config, const MethodSpec& spec,
                              int replicate_index);

ExperimentTable run_experiment(const SimulationConfig& config);

/// Aggregates replicate results into table rows (means and standard errors).
std::vector<ExperimentRow> aggregate(const std::vector<MethodSpec>& specs,
                                     const std::vector<ReplicateResult>& results);

/// One cell of a two-level factorial: factor codes in {-1, +1} for (n, t, rho).
struct FactorCell {
  int n_level = -1;
  int t_level = -1;
  int rho_level = -1;
  ExperimentTable table;
};

struct EffectsRow {
  MethodSpec spec;
  /// Odds ratios for moving (n, t, rho) from low to high; empty when not
  /// estimable (a cell with 0% or 100% coverage).
  std::optional<std::array<double, 3>> coverage_odds;
  /// Differences in log(|M| + 1) for the same moves.
  std::optional<std::array<double, 3>> log_size;
};

/// Main-effects logistic fit (coverage) and linear fit on log(|M| + 1) over
/// replicate-level outcomes, factors coded +-1.
std::vector<EffectsRow> marginal_effects(const std::vector<FactorCell>& cells);

}  // namespace confsets
