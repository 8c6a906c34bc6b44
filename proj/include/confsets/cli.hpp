#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "confsets/io.hpp"
#include "confsets/modeltest.hpp"
#include "confsets/simharness.hpp"

namespace confsets::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kBadInput = 2, kPrecondition = 3 };

struct AnalysisRequest {
  std::string data_path;
  std::string response_column = "y";
  double alpha = 0.05;
  TestMethod method = TestMethod::cosufficient;
  int k = 2;
  int max_model_size = 5;
  int max_keep = 15;
  ReducerKind reducer = ReducerKind::cox;
  double gamma_frac = 0.6;
  double split_frac = 0.6;
  std::uint64_t seed = 1;
  bool intercept = true;
  int workers = 1;
  std::string output_path = ".";  ///< directory receiving models.jsonl, summary.json, manifest.json
};

struct SimulateRequest {
  std::string config_path;
  std::string output_path = ".";  ///< directory receiving results.csv, results.txt, manifest.json
  std::optional<int> workers;     ///< overrides the config's workers key
};

struct ReportRequest {
  std::string results_path;
  TableStyle style = TableStyle::text;
};

/// Each command prints diagnostics to `err` and returns an ExitCode.
int cmd_analyze(const AnalysisRequest& req, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateRequest& req, std::ostream& out, std::ostream& err);
int cmd_report(const ReportRequest& req, std::ostream& out, std::ostream& err);

}  // namespace confsets::cli
