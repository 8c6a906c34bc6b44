#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "confsets/cli.hpp"

int main(int argc, char** argv) {
  using namespace confsets;
  CLI::App app{"Confidence sets of sparse linear-regression models"};
  app.require_subcommand(1);

  cli::AnalysisRequest areq;
  std::string method = "cosufficient", reducer = "cox";
  auto* analyze = app.add_subcommand("analyze", "Build a confidence set of models for a CSV dataset");
  analyze->add_option("data", areq.data_path, "CSV file with a header row")->required();
  analyze->add_option("--response", areq.response_column, "Response column name")
      ->capture_default_str();
  analyze->add_option("--alpha", areq.alpha, "Test level")->capture_default_str();
  analyze->add_option("--method", method, "Testing procedure")
      ->check(CLI::IsMember({"cosufficient", "ancillary", "naive-f", "split-f"}))
      ->capture_default_str();
  analyze->add_option("--k", areq.k, "Pseudo-replicates for the co-sufficient test")
      ->capture_default_str();
  analyze->add_option("--reducer", reducer, "Variable reduction")
      ->check(CLI::IsMember({"cox", "lasso"}))
      ->capture_default_str();
  analyze->add_option("--max-model-size", areq.max_model_size, "Largest submodel tested")
      ->capture_default_str();
  analyze->add_option("--max-keep", areq.max_keep, "Reduction target size")->capture_default_str();
  analyze->add_option("--gamma-frac", areq.gamma_frac, "Row fraction for variance estimation")
      ->capture_default_str();
  analyze->add_option("--split-frac", areq.split_frac, "Training fraction for split-f")
      ->capture_default_str();
  analyze->add_option("--seed", areq.seed, "Master seed")->capture_default_str();
  analyze->add_flag("--intercept,!--no-intercept", areq.intercept, "Include an intercept");
  analyze->add_option("--workers", areq.workers, "Sweep worker threads")->capture_default_str();
  analyze->add_option("--out", areq.output_path, "Output directory")->capture_default_str();

  cli::SimulateRequest sreq;
  int workers = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation experiment from a config file");
  simulate->add_option("config", sreq.config_path, "key = value configuration")->required();
  simulate->add_option("--out", sreq.output_path, "Output directory")->capture_default_str();
  auto* wopt = simulate->add_option("--workers", workers, "Replicate worker threads");

  cli::ReportRequest rreq;
  std::string format = "text";
  auto* report = app.add_subcommand("report", "Render a results CSV as a table");
  report->add_option("results", rreq.results_path, "Results CSV")->required();
  report->add_option("--format", format, "Table style")
      ->check(CLI::IsMember({"text", "markdown"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kBadInput;
  }

  if (analyze->parsed()) {
    areq.method = parse_test_method(method);
    areq.reducer = parse_reducer(reducer);
    return cli::cmd_analyze(areq, std::cout, std::cerr);
  }
  if (simulate->parsed()) {
    if (*wopt) sreq.workers = workers;
    return cli::cmd_simulate(sreq, std::cout, std::cerr);
  }
  rreq.style = format == "markdown" ? TableStyle::markdown : TableStyle::text;
  return cli::cmd_report(rreq, std::cout, std::cerr);
}
