#include "confsets/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "confsets/confset.hpp"
#include "confsets/errors.hpp"
#include "confsets/kernels.hpp"
#include "confsets/randomize.hpp"
#include "confsets/reduce.hpp"
#include "confsets/rng.hpp"
#include "confsets/varest.hpp"

namespace confsets::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError(dir + ": cannot create output directory: " + ec.message());
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out << content;
  if (!out) throw InputError(path.string() + ": write failed");
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

json indices_json(const ModelSubset& m) {
  json a = json::array();
  for (int j : m.indices()) a.push_back(j + 1);
  return a;
}

json names_json(const ModelSubset& m, const std::vector<std::string>& names) {
  json a = json::array();
  for (int j : m.indices()) a.push_back(names[static_cast<std::size_t>(j)]);
  return a;
}

void check_request(const AnalysisRequest& r) {
  if (!(r.alpha > 0.0 && r.alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (r.k < 2) throw DomainError("k must be >= 2");
  if (r.max_model_size < 1) throw DomainError("max-model-size must be >= 1");
  if (r.max_keep < 1) throw DomainError("max-keep must be >= 1");
  if (!(r.gamma_frac > 0.5 && r.gamma_frac <= 1.0))
    throw DomainError("gamma-frac must lie in (0.5,1]");
  if (!(r.split_frac > 0.0 && r.split_frac < 1.0))
    throw DomainError("split-frac must lie in (0,1)");
  if (r.workers < 1) throw DomainError("workers must be >= 1");
  if (r.reducer == ReducerKind::oracle)
    throw DomainError("reducer must be cox or lasso for data analysis");
}

ReductionResult run_reducer(const AnalysisRequest& r, const MatrixXd& x, const VectorXd& y,
                            std::uint64_t shuffle_seed) {
  if (r.reducer == ReducerKind::cox) {
    CoxOptions opts;
    opts.max_keep = r.max_keep;
    opts.intercept = r.intercept;
    return cox_reduction(x, y, opts, shuffle_seed);
  }
  return undertuned_lasso(x, y, r.max_keep);
}

json reduction_json(const ReductionResult& red, const std::vector<std::string>& names) {
  json j;
  j["method"] = to_string(red.method);
  j["indices"] = indices_json(red.selected);
  j["names"] = names_json(red.selected, names);
  if (red.method == ReductionMethod::cox) {
    j["final_alpha"] = red.final_alpha;
    j["never_small_enough"] = red.never_small_enough;
  } else if (red.method == ReductionMethod::lasso) {
    j["lambda"] = red.lambda_chosen;
    j["path_exhausted"] = red.path_exhausted;
  }
  return j;
}

}  // namespace

int cmd_analyze(const AnalysisRequest& req, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    check_request(req);
    const std::string raw = slurp(req.data_path);
    std::istringstream raw_in(raw);
    const CsvDataset data = read_dataset_csv(raw_in, req.response_column, req.data_path);
    const int n = static_cast<int>(data.x.rows());
    const int p = static_cast<int>(data.x.cols());
    const int icpt = req.intercept ? 1 : 0;
    const int n_fit = req.method == TestMethod::split_f
                          ? static_cast<int>(req.split_frac * n + 1e-9)
                          : n;
    if (n_fit <= std::min(req.max_keep, p) + icpt + 1) {
      err << "error: " << n_fit << " rows available for reduction, too few for max-keep "
          << req.max_keep << "\n";
      return kPrecondition;
    }

    const std::uint64_t grid = derive_seed(req.seed, {stream_key("cox-grid")});
    const std::uint64_t split_grid = derive_seed(req.seed, {stream_key("split-cox-grid")});
    const std::uint64_t noise = derive_seed(req.seed, {stream_key("L")});

    SweepOptions sweep;
    sweep.alpha = req.alpha;
    sweep.intercept = req.intercept;
    sweep.workers = req.workers;

    json manifest;
    manifest["command"] = "analyze";
    manifest["parameters"] = {
        {"data_path", req.data_path},     {"response_column", req.response_column},
        {"alpha", req.alpha},             {"method", to_string(req.method)},
        {"k", req.k},                     {"max_model_size", req.max_model_size},
        {"max_keep", req.max_keep},       {"reducer", to_string(req.reducer)},
        {"gamma_frac", req.gamma_frac},   {"split_frac", req.split_frac},
        {"intercept", req.intercept},     {"workers", req.workers}};
    manifest["seeds"] = {{"master", req.seed},
                         {"cox_grid", grid},
                         {"split_cox_grid", split_grid},
                         {"noise_matrix", noise},
                         {"derivation", "splitmix64 chain over FNV-1a stream labels"}};
    manifest["data"] = {{"sha1", git_blob_sha1(raw)},
                        {"rows", n},
                        {"covariates", p},
                        {"response", data.response_name}};
    manifest["kernel_isa"] = kernels::isa_name(kernels::active_isa());

    ConfidenceSet set;
    if (req.method == TestMethod::split_f) {
      const auto [train, test] = split_indices(n, req.split_frac);
      const MatrixXd x_test = take_rows(data.x, test);
      const VectorXd y_test = take_rows(data.y, test);
      const ReductionResult red =
          run_reducer(req, take_rows(data.x, train), take_rows(data.y, train), split_grid);
      manifest["encompassing"] = reduction_json(red, data.covariate_names);
      manifest["split"] = {{"train_rows", train.size()}, {"test_rows", test.size()}};
      if (red.selected.empty()) throw InsufficientData("reduction selected no variables");
      const FTester tester(x_test, y_test, red.selected, req.intercept, TestMethod::split_f);
      sweep.max_size = std::min(req.max_model_size, red.selected.size());
      set = build_confidence_set(x_test, red.selected, tester, sweep);
    } else {
      const ReductionResult red = run_reducer(req, data.x, data.y, grid);
      manifest["encompassing"] = reduction_json(red, data.covariate_names);
      if (red.selected.empty()) throw InsufficientData("reduction selected no variables");
      std::unique_ptr<SubmodelTester> tester;
      if (req.method == TestMethod::naive_f) {
        tester = std::make_unique<FTester>(data.x, data.y, red.selected, req.intercept);
      } else {
        const int keep = req.max_keep;
        const Screener screener = [keep](const MatrixXd& xs, const VectorXd& ys) {
          return undertuned_lasso(xs, ys, keep).selected;
        };
        VarianceOptions vopts;
        vopts.gamma_frac = req.gamma_frac;
        vopts.intercept = req.intercept;
        const VarianceEstimate var = mrcv_variance(data.x, data.y, screener, vopts);
        manifest["variance"] = {{"method", to_string(var.method)},
                                {"sigma2_hat", var.sigma2_hat},
                                {"nu", var.nu},
                                {"df1", var.df1},
                                {"df2", var.df2},
                                {"sigma2_half1", var.sigma2_half1},
                                {"sigma2_half2", var.sigma2_half2},
                                {"screen1", indices_json(var.screen1)},
                                {"screen2", indices_json(var.screen2)}};
        if (!(var.sigma2_hat > 0.0)) throw InsufficientData("variance estimate is zero");
        if (req.method == TestMethod::ancillary) {
          tester = std::make_unique<AncillaryTester>(data.y, var);
        } else {
          const GammaPlan plan = gamma_coefficients(req.k, std::sqrt(var.sigma2_hat));
          tester = std::make_unique<CosufficientTester>(pseudo_replicates(data.y, plan, noise),
                                                        var);
        }
      }
      sweep.max_size = std::min(req.max_model_size, red.selected.size());
      set = build_confidence_set(data.x, red.selected, *tester, sweep);
    }
    manifest["sweep"] = {{"max_size", set.max_size},
                         {"tested", set.n_tested},
                         {"undetermined", set.n_undetermined},
                         {"accepted", set.accepted.size()}};

    const fs::path dir = prepare_dir(req.output_path);
    std::ostringstream models;
    for (std::size_t i = 0; i < set.accepted.size(); ++i) {
      json line;
      line["indices"] = indices_json(set.accepted[i]);
      line["names"] = names_json(set.accepted[i], data.covariate_names);
      line["p_value"] = set.accepted_p[i];
      models << line.dump() << "\n";
    }
    write_file(dir / "models.jsonl", models.str());

    const SummaryReport summary = summarize(set);
    json sj;
    sj["accepted"] = summary.n_accepted;
    sj["empty"] = summary.empty;
    sj["inclusion"] = json::array();
    for (std::size_t i = 0; i < summary.variables.size(); ++i) {
      const int v = summary.variables[i];
      sj["inclusion"].push_back({{"index", v + 1},
                                 {"name", data.covariate_names[static_cast<std::size_t>(v)]},
                                 {"freq", summary.inclusion_freq[i]}});
    }
    sj["substitutions"] = json::array();
    for (const SubstitutionPair& s : summary.substitutions)
      sj["substitutions"].push_back(
          {{"absent", data.covariate_names[static_cast<std::size_t>(s.absent)]},
           {"present", data.covariate_names[static_cast<std::size_t>(s.present)]},
           {"freq", s.freq},
           {"support", s.support}});
    write_file(dir / "summary.json", sj.dump(2) + "\n");
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    out << "accepted " << set.accepted.size() << " of " << set.n_tested << " models (alpha "
        << req.alpha << ", " << set.encompassing.size() << " candidate variables)\n";
    return kOk;
  });
}

int cmd_simulate(const SimulateRequest& req, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const std::string raw = slurp(req.config_path);
    std::istringstream raw_in(raw);
    SimulationConfig config = parse_config(raw_in, req.config_path);
    if (req.workers) {
      if (*req.workers < 1) throw DomainError("workers must be >= 1");
      config.workers = *req.workers;
    }
    const ExperimentTable table = run_experiment(config);
    const std::vector<ResultsRow> rows = to_results_rows(table.rows);

    std::ostringstream csv;
    write_results_csv(csv, rows);
    const std::string rendered = render_table(rows, TableStyle::text);

    json manifest;
    manifest["command"] = "simulate";
    manifest["config_path"] = req.config_path;
    manifest["config_sha1"] = git_blob_sha1(raw);
    const std::string resolved = config_to_text(config);
    manifest["resolved_config"] = resolved;
    manifest["resolved_config_sha1"] = git_blob_sha1(resolved);
    manifest["results_sha1"] = git_blob_sha1(csv.str());
    manifest["kernel_isa"] = kernels::isa_name(kernels::active_isa());
    manifest["seeds"] = {
        {"master", config.seed},
        {"derivation",
         "replicate = splitmix64 chain (master, index); data, cox-grid, split-cox-grid and "
         "L(reducer, k) streams keyed by FNV-1a labels under the replicate seed"}};

    const std::vector<MethodSpec> specs = config.method_specs();
    json reps = json::array();
    for (int r = 0; r < config.replicates; ++r) {
      const std::uint64_t rs = replicate_seed(config.seed, r);
      json noise = json::object();
      for (const MethodSpec& s : specs)
        if (s.test == TestMethod::cosufficient)
          noise[s.reducer_tag() + "/" + s.method_tag()] = noise_seed(rs, s);
      reps.push_back({{"replicate", r},
                      {"seed", rs},
                      {"cox_grid", grid_seed(rs, false)},
                      {"split_cox_grid", grid_seed(rs, true)},
                      {"noise_matrix", noise}});
    }
    manifest["replicates"] = reps;

    json failures = json::array();
    for (const ExperimentRow& row : table.rows)
      failures.push_back({{"reducer", row.spec.reducer_tag()},
                          {"method", row.spec.method_tag()},
                          {"used", row.replicates},
                          {"failed", row.failures}});
    manifest["failures"] = failures;
    json errors = json::array();
    for (const ReplicateResult& r : table.replicate_results)
      if (r.failed && errors.size() < 50)
        errors.push_back({{"replicate", r.replicate},
                          {"reducer", r.spec.reducer_tag()},
                          {"method", r.spec.method_tag()},
                          {"error", r.error}});
    manifest["failure_messages"] = errors;

    const fs::path dir = prepare_dir(req.output_path);
    write_file(dir / "results.csv", csv.str());
    write_file(dir / "results.txt", rendered);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    out << rendered;
    return kOk;
  });
}

int cmd_report(const ReportRequest& req, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const std::string raw = slurp(req.results_path);
    std::istringstream in(raw);
    const std::vector<ResultsRow> rows = read_results_csv(in, req.results_path);
    out << render_table(rows, req.style);
    return kOk;
  });
}

}  // namespace confsets::cli
