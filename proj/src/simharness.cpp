#include "confsets/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "confsets/errors.hpp"
#include "confsets/randomize.hpp"
#include "confsets/reduce.hpp"
#include "confsets/varest.hpp"

namespace confsets {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_split(const MethodSpec& s) { return s.test == TestMethod::split_f; }

ReductionResult reduce_with(ReducerKind kind, const MatrixXd& x, const VectorXd& y,
                            const SimulationConfig& cfg, std::uint64_t shuffle_seed) {
  switch (kind) {
    case ReducerKind::cox: {
      CoxOptions opts;
      opts.max_keep = cfg.max_keep;
      return cox_reduction(x, y, opts, shuffle_seed);
    }
    case ReducerKind::lasso:
      return undertuned_lasso(x, y, cfg.max_keep);
    case ReducerKind::oracle: {
      ReductionResult r;
      r.method = ReductionMethod::fixed;
      r.selected =
          ModelSubset::range(0, std::min(cfg.max_keep, static_cast<int>(x.cols())), static_cast<int>(x.cols()));
      return r;
    }
  }
  throw DomainError("unknown reducer");
}

VarianceEstimate estimate_variance(const SimulationConfig& cfg, const MatrixXd& x,
                                   const VectorXd& y) {
  if (cfg.variance == VarianceMode::known) return VarianceEstimate::oracle(cfg.sigma2);
  const int keep = cfg.max_keep;
  const Screener screener = [keep](const MatrixXd& xs, const VectorXd& ys) {
    return undertuned_lasso(xs, ys, keep).selected;
  };
  VarianceOptions opts;
  opts.gamma_frac = cfg.gamma_frac;
  return mrcv_variance(x, y, screener, opts);
}

void fill_from_set(ReplicateResult& r, const ConfidenceSet& set, const ModelSubset& truth) {
  r.set_size = static_cast<std::int64_t>(set.accepted.size());
  r.n_tested = set.n_tested;
  r.n_undetermined = set.n_undetermined;
  r.covered = set.contains(truth);
}

}  // namespace

std::string to_string(ReducerKind r) {
  switch (r) {
    case ReducerKind::cox:
      return "cox";
    case ReducerKind::lasso:
      return "lasso";
    case ReducerKind::oracle:
      return "oracle";
  }
  return "?";
}

ReducerKind parse_reducer(const std::string& s) {
  if (s == "cox") return ReducerKind::cox;
  if (s == "lasso") return ReducerKind::lasso;
  if (s == "oracle") return ReducerKind::oracle;
  throw DomainError("unknown reducer '" + s + "' (expected cox, lasso or oracle)");
}

TestMethod parse_test_method(const std::string& s) {
  if (s == "cosufficient") return TestMethod::cosufficient;
  if (s == "ancillary") return TestMethod::ancillary;
  if (s == "naive_f" || s == "naive-f") return TestMethod::naive_f;
  if (s == "split_f" || s == "split-f") return TestMethod::split_f;
  throw DomainError("unknown method '" + s +
                    "' (expected cosufficient, ancillary, naive-f or split-f)");
}

std::string MethodSpec::method_tag() const {
  if (test == TestMethod::cosufficient) return "cosufficient_k" + std::to_string(k);
  return to_string(test);
}

std::string MethodSpec::reducer_tag() const { return to_string(reducer); }

std::string MethodSpec::label() const {
  std::string red = reducer == ReducerKind::cox     ? "Cox"
                    : reducer == ReducerKind::lasso ? "Lasso"
                                                    : "Oracle";
  switch (test) {
    case TestMethod::cosufficient:
      return red + " + co-sufficient (k = " + std::to_string(k) + ")";
    case TestMethod::ancillary:
      return red + " + ancillary";
    case TestMethod::naive_f:
      return red + " + F test";
    case TestMethod::split_f:
      return "split " + red + " + split F test";
  }
  return red;
}

void SimulationConfig::validate() const {
  if (n < 20) throw DomainError("n must be >= 20");
  if (p < 4) throw DomainError("p must be >= 4");
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0,1)");
  if (!std::isfinite(t)) throw DomainError("t must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be >= 0");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0,1)");
  if (max_model_size < 1) throw DomainError("max_model_size must be >= 1");
  if (max_keep < 3) throw DomainError("max_keep must be >= 3");
  if (!(gamma_frac > 0.5 && gamma_frac <= 1.0)) throw DomainError("gamma_frac must lie in (0.5,1]");
  if (!(split_frac > 0.0 && split_frac < 1.0)) throw DomainError("split_frac must lie in (0,1)");
  if (workers < 1) throw DomainError("workers must be >= 1");
  if (methods.empty()) throw DomainError("methods must not be empty");
  if (reducers.empty()) throw DomainError("reducers must not be empty");
  for (TestMethod m : methods)
    if (m == TestMethod::cosufficient && k_values.empty())
      throw DomainError("k_values must not be empty when cosufficient is requested");
  for (int k : k_values)
    if (k < 2) throw DomainError("k_values entries must be >= 2");
}

std::vector<MethodSpec> SimulationConfig::method_specs() const {
  auto wants = [this](TestMethod m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };
  std::vector<MethodSpec> specs;
  for (ReducerKind r : reducers) {
    if (wants(TestMethod::cosufficient))
      for (int k : k_values) specs.push_back({r, TestMethod::cosufficient, k});
    if (wants(TestMethod::ancillary)) specs.push_back({r, TestMethod::ancillary, 0});
    if (wants(TestMethod::naive_f)) specs.push_back({r, TestMethod::naive_f, 0});
  }
  if (wants(TestMethod::split_f))
    for (ReducerKind r : reducers) specs.push_back({r, TestMethod::split_f, 0});
  return specs;
}

MatrixXd gen_toeplitz_design(int n, int p, double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0,1)");
  if (n < 1 || p < 1) throw DomainError("n and p must be positive");
  std::normal_distribution<double> z;
  const double innov = std::sqrt(1.0 - rho * rho);
  MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    double prev = z(rng);
    x(i, 0) = prev;
    for (int j = 1; j < p; ++j) {
      prev = rho * prev + innov * z(rng);
      x(i, j) = prev;
    }
  }
  return x;
}

VectorXd gen_response(const MatrixXd& x, double t, double sigma2, Rng& rng) {
  if (x.cols() < 3) throw DomainError("need p >= 3 for the generating model");
  if (!(sigma2 >= 0.0)) throw DomainError("sigma2 must be >= 0");
  std::normal_distribution<double> z;
  const double sigma = std::sqrt(sigma2);
  VectorXd y(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const double eps = z(rng);
    y(i) = t * (x(i, 0) + x(i, 1) + x(i, 2)) + sigma * eps;
  }
  return y;
}

ModelSubset true_model(int p) { return ModelSubset({0, 1, 2}, p); }

std::uint64_t replicate_seed(std::uint64_t master, int replicate_index) {
  return derive_seed(master, {static_cast<std::uint64_t>(replicate_index)});
}

std::uint64_t grid_seed(std::uint64_t rep_seed, bool split) {
  return derive_seed(rep_seed, {stream_key(split ? "split-cox-grid" : "cox-grid")});
}

std::uint64_t noise_seed(std::uint64_t rep_seed, const MethodSpec& spec) {
  return derive_seed(rep_seed, {stream_key("L"), stream_key(spec.reducer_tag()),
                                static_cast<std::uint64_t>(spec.k)});
}

std::uint64_t dataset_hash(const MatrixXd& x, const VectorXd& y) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const double* p, Index count) {
    const auto* b = reinterpret_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * sizeof(double); ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(x.data(), x.size());
  mix(y.data(), y.size());
  return h;
}

Dataset generate_dataset(const SimulationConfig& config, int replicate_index) {
  Rng rng(derive_seed(replicate_seed(config.seed, replicate_index), {stream_key("data")}));
  Dataset d;
  d.x = gen_toeplitz_design(config.n, config.p, config.rho, rng);
  d.y = gen_response(d.x, config.t, config.sigma2, rng);
  return d;
}

std::vector<ReplicateResult> run_replicate_all(const SimulationConfig& config,
                                               int replicate_index) {
  const std::vector<MethodSpec> specs = config.method_specs();
  const std::uint64_t rep_seed = replicate_seed(config.seed, replicate_index);
  const Dataset data = generate_dataset(config, replicate_index);
  const std::uint64_t hash = dataset_hash(data.x, data.y);
  const ModelSubset truth = true_model(config.p);

  std::vector<ReplicateResult> out(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out[i].spec = specs[i];
    out[i].replicate = replicate_index;
    out[i].seed_used = rep_seed;
    out[i].data_hash = hash;
    out[i].p_true = kNaN;
  }
  auto fail = [&](std::size_t i, const std::string& why) {
    out[i].failed = true;
    out[i].error = why;
  };

  const bool need_variance = std::any_of(specs.begin(), specs.end(), [](const MethodSpec& s) {
    return s.test == TestMethod::cosufficient || s.test == TestMethod::ancillary;
  });
  std::optional<VarianceEstimate> variance;
  std::string variance_error;
  if (need_variance) {
    try {
      variance = estimate_variance(config, data.x, data.y);
      if (!(variance->sigma2_hat > 0.0)) {
        variance_error = "variance estimate is zero";
        variance.reset();
      }
    } catch (const Error& e) {
      variance_error = e.what();
    }
  }

  SweepOptions sweep;
  sweep.alpha = config.alpha;
  sweep.intercept = false;

  // Full-sample reducers.
  for (ReducerKind red : config.reducers) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (specs[i].reducer == red && !is_split(specs[i])) idx.push_back(i);
    if (idx.empty()) continue;

    ReductionResult reduction;
    try {
      reduction = reduce_with(red, data.x, data.y, config,
                              grid_seed(rep_seed, false));
    } catch (const Error& e) {
      for (std::size_t i : idx) fail(i, e.what());
      continue;
    }
    const ModelSubset& enc = reduction.selected;
    const bool survived = truth.is_subset_of(enc);

    std::vector<std::unique_ptr<SubmodelTester>> testers;
    std::vector<std::size_t> tested;
    for (std::size_t i : idx) {
      out[i].survived = survived;
      out[i].encompassing_size = enc.size();
      const MethodSpec& s = specs[i];
      try {
        if (s.test == TestMethod::naive_f) {
          testers.push_back(std::make_unique<FTester>(data.x, data.y, enc, false));
        } else {
          if (!variance) throw InsufficientData("variance estimation failed: " + variance_error);
          if (s.test == TestMethod::ancillary) {
            testers.push_back(std::make_unique<AncillaryTester>(data.y, *variance));
          } else {
            const std::uint64_t l_seed = noise_seed(rep_seed, s);
            const GammaPlan plan = gamma_coefficients(s.k, std::sqrt(variance->sigma2_hat));
            testers.push_back(std::make_unique<CosufficientTester>(
                pseudo_replicates(data.y, plan, l_seed), *variance, config.calibration));
          }
        }
        tested.push_back(i);
      } catch (const Error& e) {
        fail(i, e.what());
      }
    }
    if (tested.empty()) continue;
    if (enc.empty()) continue;  // nothing to test: empty confidence set

    sweep.max_size = std::min(config.max_model_size, enc.size());
    std::vector<const SubmodelTester*> ptrs;
    for (const auto& t : testers) ptrs.push_back(t.get());
    const std::vector<ConfidenceSet> sets = build_confidence_sets(data.x, enc, ptrs, sweep);
    for (std::size_t j = 0; j < tested.size(); ++j) {
      ReplicateResult& r = out[tested[j]];
      fill_from_set(r, sets[j], truth);
      if (!survived || truth.size() > sweep.max_size) continue;
      // Single-model recomputation of E*'s p-value through the reference path.
      try {
        const MethodSpec& s = r.spec;
        if (s.test == TestMethod::naive_f) {
          r.p_true = truth == enc ? 1.0 : naive_f_test(truth, enc, data.x, data.y, false).p_value;
        } else if (s.test == TestMethod::ancillary) {
          r.p_true = ancillary_test(truth, data.x, data.y, *variance, false).p_value;
        } else {
          const auto& ct = static_cast<const CosufficientTester&>(*testers[j]);
          r.p_true = cosufficient_test(truth, data.x, ct.bundle(), *variance, false,
                                       config.calibration)
                         .p_value;
        }
      } catch (const Error&) {
        r.p_true = kNaN;
      }
    }
  }

  // Split-sample rows.
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!is_split(specs[i])) continue;
    ReplicateResult& r = out[i];
    try {
      const auto [train, test] = split_indices(config.n, config.split_frac);
      const MatrixXd x_train = take_rows(data.x, train);
      const VectorXd y_train = take_rows(data.y, train);
      const MatrixXd x_test = take_rows(data.x, test);
      const VectorXd y_test = take_rows(data.y, test);
      const ReductionResult reduction = reduce_with(specs[i].reducer, x_train, y_train, config,
                                                    grid_seed(rep_seed, true));
      const ModelSubset& enc = reduction.selected;
      r.survived = truth.is_subset_of(enc);
      r.encompassing_size = enc.size();
      if (enc.empty()) continue;
      const FTester tester(x_test, y_test, enc, false, TestMethod::split_f);
      sweep.max_size = std::min(config.max_model_size, enc.size());
      const ConfidenceSet set = build_confidence_set(x_test, enc, tester, sweep);
      fill_from_set(r, set, truth);
      if (r.survived && truth.size() <= sweep.max_size)
        r.p_true = truth == enc ? 1.0 : naive_f_test(truth, enc, x_test, y_test, false).p_value;
    } catch (const Error& e) {
      fail(i, e.what());
    }
  }
  return out;
}

ReplicateResult run_replicate(const SimulationConfig& config, const MethodSpec& spec,
                              int replicate_index) {
  SimulationConfig narrowed = config;
  narrowed.reducers = {spec.reducer};
  narrowed.methods = {spec.test};
  if (spec.test == TestMethod::cosufficient) narrowed.k_values = {spec.k};
  std::vector<ReplicateResult> all = run_replicate_all(narrowed, replicate_index);
  for (ReplicateResult& r : all)
    if (r.spec == spec) return r;
  throw DomainError("method not produced by configuration");
}

std::vector<ExperimentRow> aggregate(const std::vector<MethodSpec>& specs,
                                     const std::vector<ReplicateResult>& results) {
  std::vector<ExperimentRow> rows;
  for (const MethodSpec& s : specs) {
    ExperimentRow row;
    row.spec = s;
    double cov = 0, surv = 0, size = 0, size_sq = 0;
    for (const ReplicateResult& r : results) {
      if (!(r.spec == s)) continue;
      if (r.failed) {
        ++row.failures;
        continue;
      }
      ++row.replicates;
      cov += r.covered;
      surv += r.survived;
      size += static_cast<double>(r.set_size);
      size_sq += static_cast<double>(r.set_size) * static_cast<double>(r.set_size);
    }
    const double n = row.replicates;
    if (n > 0) {
      row.coverage = cov / n;
      row.survival = surv / n;
      row.mean_size = size / n;
    }
    if (n > 1) {
      row.coverage_se = std::sqrt(row.coverage * (1 - row.coverage) / n);
      row.survival_se = std::sqrt(row.survival * (1 - row.survival) / n);
      const double var = std::max(0.0, (size_sq - n * row.mean_size * row.mean_size) / (n - 1));
      row.size_se = std::sqrt(var / n);
    } else {
      row.coverage_se = row.survival_se = row.size_se = kNaN;
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentTable run_experiment(const SimulationConfig& config) {
  config.validate();
  const int reps = config.replicates;
  std::vector<std::vector<ReplicateResult>> per_rep(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++)
      per_rep[static_cast<std::size_t>(r)] = run_replicate_all(config, r);
  };
  const int workers = std::min(config.workers, reps);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  ExperimentTable table;
  for (auto& rep : per_rep)
    table.replicate_results.insert(table.replicate_results.end(), rep.begin(), rep.end());
  table.rows = aggregate(config.method_specs(), table.replicate_results);
  return table;
}

namespace {

struct Obs {
  double n, t, rho;
  bool covered;
  double log_size;
};

std::optional<Eigen::Vector4d> logistic_fit(const std::vector<Obs>& obs) {
  const Index m = static_cast<Index>(obs.size());
  Eigen::MatrixXd x(m, 4);
  VectorXd y(m);
  for (Index i = 0; i < m; ++i) {
    const Obs& o = obs[static_cast<std::size_t>(i)];
    x.row(i) << 1.0, o.n, o.t, o.rho;
    y(i) = o.covered ? 1.0 : 0.0;
  }
  Eigen::Vector4d beta = Eigen::Vector4d::Zero();
  for (int iter = 0; iter < 100; ++iter) {
    const VectorXd eta = x * beta;
    const VectorXd mu = (1.0 + (-eta.array()).exp()).inverse().matrix();
    const VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
    if ((w.array() < 1e-12).any()) return std::nullopt;
    const Eigen::Matrix4d info = x.transpose() * w.asDiagonal() * x;
    const Eigen::Vector4d score = x.transpose() * (y - mu);
    const Eigen::Vector4d step = info.ldlt().solve(score);
    if (!step.allFinite()) return std::nullopt;
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) return beta;
  }
  return std::nullopt;
}

}  // namespace

std::vector<EffectsRow> marginal_effects(const std::vector<FactorCell>& cells) {
  if (cells.size() < 4) throw DomainError("marginal effects need at least four factorial cells");
  for (const FactorCell& c : cells)
    for (int lv : {c.n_level, c.t_level, c.rho_level})
      if (lv != -1 && lv != 1) throw DomainError("factor levels must be coded -1 or +1");

  std::vector<MethodSpec> specs;
  for (const ExperimentRow& row : cells.front().table.rows) specs.push_back(row.spec);

  std::vector<EffectsRow> out;
  for (const MethodSpec& spec : specs) {
    EffectsRow eff;
    eff.spec = spec;
    std::vector<Obs> obs;
    bool separated = false;
    bool all_zero_size = true;
    for (const FactorCell& c : cells) {
      int n_cell = 0, covered = 0;
      for (const ReplicateResult& r : c.table.replicate_results) {
        if (!(r.spec == spec) || r.failed) continue;
        ++n_cell;
        covered += r.covered;
        if (r.set_size != 0) all_zero_size = false;
        obs.push_back({static_cast<double>(c.n_level), static_cast<double>(c.t_level),
                       static_cast<double>(c.rho_level), r.covered,
                       std::log(static_cast<double>(r.set_size) + 1.0)});
      }
      if (n_cell == 0 || covered == 0 || covered == n_cell) separated = true;
    }
    if (!separated) {
      if (auto beta = logistic_fit(obs))
        eff.coverage_odds = std::array<double, 3>{std::exp(2 * (*beta)(1)),
                                                  std::exp(2 * (*beta)(2)),
                                                  std::exp(2 * (*beta)(3))};
    }
    if (!all_zero_size && !obs.empty()) {
      const Index m = static_cast<Index>(obs.size());
      Eigen::MatrixXd x(m, 4);
      VectorXd y(m);
      for (Index i = 0; i < m; ++i) {
        const Obs& o = obs[static_cast<std::size_t>(i)];
        x.row(i) << 1.0, o.n, o.t, o.rho;
        y(i) = o.log_size;
      }
      const VectorXd g = x.colPivHouseholderQr().solve(y);
      eff.log_size = std::array<double, 3>{2 * g(1), 2 * g(2), 2 * g(3)};
    }
    out.push_back(eff);
  }
  return out;
}

}  // namespace confsets
