#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "confsets/linalg.hpp"
#include "confsets/simharness.hpp"

namespace confsets {

/// A numeric table read from CSV: the response column split from the covariates.
struct CsvDataset {
  std::string response_name;
  std::vector<std::string> covariate_names;  ///< file order, response removed
  MatrixXd x;
  VectorXd y;
};

/// Throws InputError with a "source:line:" prefix on malformed rows, ragged
/// rows, non-numeric or non-finite cells, and a missing response column.
CsvDataset read_dataset_csv(std::istream& in, const std::string& response,
                            const std::string& source = "<input>");
CsvDataset read_dataset_file(const std::string& path, const std::string& response);

/// Strict `key = value` parser; `#` starts a comment. Unknown or repeated keys
/// and unparsable values raise InputError, out-of-domain values DomainError.
SimulationConfig parse_config(std::istream& in, const std::string& source = "<config>");
SimulationConfig parse_config_file(const std::string& path);
/// Canonical `key = value` text; parse_config(config_to_text(c)) reproduces c.
std::string config_to_text(const SimulationConfig& config);

/// One line of the results CSV in its on-disk form.
struct ResultsRow {
  std::string method;
  std::string reducer;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double survival = 0.0;
  double survival_se = 0.0;
  double mean_size = 0.0;
  double size_se = 0.0;
};

inline constexpr std::string_view kResultsHeader =
    "method,reducer,coverage,coverage_se,survival,survival_se,mean_size,size_se";

std::vector<ResultsRow> to_results_rows(const std::vector<ExperimentRow>& rows);
/// Not-available SEs are written as NA.
void write_results_csv(std::ostream& out, const std::vector<ResultsRow>& rows);
/// Throws InputError on an empty file or any schema mismatch.
std::vector<ResultsRow> read_results_csv(std::istream& in, const std::string& source = "<results>");

/// Two decimals with the SE in parentheses: 0.955, 0.012 -> "0.96 (0.01)".
std::string format_probability(double value, double se);
/// Integer sizes: 1209.4, 43.2 -> "1209 (43)".
std::string format_size(double value, double se);
/// Display label for a results row, e.g. "Cox + ancillary".
std::string row_label(const ResultsRow& row);

enum class TableStyle { text, markdown };
std::string render_table(const std::vector<ResultsRow>& rows, TableStyle style);

/// Hex SHA-1 of "blob <len>\0<content>", as computed by git hash-object.
std::string git_blob_sha1(std::string_view content);

}  // namespace confsets
