#include "confsets/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "confsets/errors.hpp"

namespace confsets {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

// Comma-separated fields with optional double quotes ("" escapes a quote).
std::vector<std::string> split_csv_line(const std::string& line, const std::string& source,
                                        std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!trim(cur).empty()) throw InputError(where(source, lineno) + "stray quote in field");
      cur.clear();
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) throw InputError(where(source, lineno) + "unterminated quoted field");
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <class Int>
bool parse_int(const std::string& s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool blank_line(const std::string& line) { return trim(line).empty(); }

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string csv_number(double v) { return std::isfinite(v) ? shortest(v) : "NA"; }

}  // namespace

CsvDataset read_dataset_csv(std::istream& in, const std::string& response,
                            const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_line(line)) continue;
    header = split_csv_line(line, source, lineno);
    break;
  }
  if (header.empty()) throw InputError(source + ": empty file, expected a header row");

  std::set<std::string> seen;
  for (const std::string& h : header) {
    if (h.empty()) throw InputError(where(source, lineno) + "empty column name in header");
    if (!seen.insert(h).second)
      throw InputError(where(source, lineno) + "duplicate column '" + h + "'");
  }
  const auto it = std::find(header.begin(), header.end(), response);
  if (it == header.end())
    throw InputError(where(source, lineno) + "response column '" + response + "' not found");
  const std::size_t resp = static_cast<std::size_t>(it - header.begin());
  if (header.size() < 2) throw InputError(where(source, lineno) + "no covariate columns");

  CsvDataset data;
  data.response_name = response;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != resp) data.covariate_names.push_back(header[j]);

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_line(line)) continue;
    const std::vector<std::string> fields = split_csv_line(line, source, lineno);
    if (fields.size() != header.size())
      throw InputError(where(source, lineno) + "expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v))
        throw InputError(where(source, lineno) + "column '" + header[j] +
                         "': not a number: '" + fields[j] + "'");
      if (!std::isfinite(v))
        throw InputError(where(source, lineno) + "column '" + header[j] +
                         "': non-finite value '" + fields[j] + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw InputError(source + ": no data rows");

  const Index n = static_cast<Index>(rows);
  const Index cols = static_cast<Index>(header.size());
  data.x.resize(n, cols - 1);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (Index j = 0; j < cols; ++j) {
      const double v = values[static_cast<std::size_t>(i * cols + j)];
      if (static_cast<std::size_t>(j) == resp)
        data.y(i) = v;
      else
        data.x(i, c++) = v;
    }
  }
  return data;
}

CsvDataset read_dataset_file(const std::string& path, const std::string& response) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  return read_dataset_csv(in, response, path);
}

SimulationConfig parse_config(std::istream& in, const std::string& source) {
  SimulationConfig c;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (blank_line(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(where(source, lineno) + "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw InputError(where(source, lineno) + "missing key");
    if (value.empty()) throw InputError(where(source, lineno) + "missing value for '" + key + "'");
    if (!seen.insert(key).second)
      throw InputError(where(source, lineno) + "duplicate key '" + key + "'");

    auto bad = [&](const char* what) {
      return InputError(where(source, lineno) + key + ": expected " + what + ", got '" + value +
                        "'");
    };
    auto as_int = [&]() {
      int v = 0;
      if (!parse_int(value, v)) throw bad("an integer");
      return v;
    };
    auto as_double = [&]() {
      double v = 0.0;
      if (!parse_double(value, v) || !std::isfinite(v)) throw bad("a finite number");
      return v;
    };

    try {
      if (key == "n") c.n = as_int();
      else if (key == "p") c.p = as_int();
      else if (key == "rho") c.rho = as_double();
      else if (key == "t") c.t = as_double();
      else if (key == "sigma2") c.sigma2 = as_double();
      else if (key == "replicates") c.replicates = as_int();
      else if (key == "seed") {
        std::uint64_t s = 0;
        if (!parse_int(value, s)) throw bad("an unsigned integer");
        c.seed = s;
      } else if (key == "methods") {
        c.methods.clear();
        for (const std::string& m : split_list(value)) c.methods.push_back(parse_test_method(m));
      } else if (key == "k_values") {
        c.k_values.clear();
        for (const std::string& k : split_list(value)) {
          int v = 0;
          if (!parse_int(k, v)) throw bad("a comma-separated list of integers");
          c.k_values.push_back(v);
        }
      } else if (key == "reducers") {
        c.reducers.clear();
        for (const std::string& r : split_list(value)) c.reducers.push_back(parse_reducer(r));
      } else if (key == "alpha") c.alpha = as_double();
      else if (key == "max_model_size") c.max_model_size = as_int();
      else if (key == "max_keep") c.max_keep = as_int();
      else if (key == "gamma_frac") c.gamma_frac = as_double();
      else if (key == "split_frac") c.split_frac = as_double();
      else if (key == "variance") {
        if (value == "mrcv") c.variance = VarianceMode::mrcv;
        else if (value == "known") c.variance = VarianceMode::known;
        else throw bad("mrcv or known");
      } else if (key == "calibration") {
        if (value == "asymptotic") c.calibration = RayleighCalibration::asymptotic;
        else if (value == "exact_variance") c.calibration = RayleighCalibration::exact_variance;
        else throw bad("asymptotic or exact_variance");
      } else if (key == "workers") c.workers = as_int();
      else throw InputError(where(source, lineno) + "unknown key '" + key + "'");
    } catch (const DomainError& e) {
      std::string msg = e.what();
      if (constexpr std::string_view tag = "DomainError: "; msg.starts_with(tag))
        msg.erase(0, tag.size());
      throw DomainError(where(source, lineno) + msg);
    }
  }
  c.validate();
  return c;
}

SimulationConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  return parse_config(in, path);
}

std::string config_to_text(const SimulationConfig& c) {
  auto join = [](const auto& items, auto fn) {
    std::string s;
    for (const auto& item : items) {
      if (!s.empty()) s += ",";
      s += fn(item);
    }
    return s;
  };
  std::ostringstream out;
  out << "n = " << c.n << "\n"
      << "p = " << c.p << "\n"
      << "rho = " << shortest(c.rho) << "\n"
      << "t = " << shortest(c.t) << "\n"
      << "sigma2 = " << shortest(c.sigma2) << "\n"
      << "replicates = " << c.replicates << "\n"
      << "seed = " << c.seed << "\n"
      << "methods = "
      << join(c.methods, [](TestMethod m) { return to_string(m); }) << "\n"
      << "k_values = " << join(c.k_values, [](int k) { return std::to_string(k); }) << "\n"
      << "reducers = "
      << join(c.reducers, [](ReducerKind r) { return to_string(r); }) << "\n"
      << "alpha = " << shortest(c.alpha) << "\n"
      << "max_model_size = " << c.max_model_size << "\n"
      << "max_keep = " << c.max_keep << "\n"
      << "gamma_frac = " << shortest(c.gamma_frac) << "\n"
      << "split_frac = " << shortest(c.split_frac) << "\n"
      << "variance = " << (c.variance == VarianceMode::known ? "known" : "mrcv") << "\n"
      << "calibration = "
      << (c.calibration == RayleighCalibration::asymptotic ? "asymptotic" : "exact_variance")
      << "\n"
      << "workers = " << c.workers << "\n";
  return out.str();
}

std::vector<ResultsRow> to_results_rows(const std::vector<ExperimentRow>& rows) {
  std::vector<ResultsRow> out;
  out.reserve(rows.size());
  for (const ExperimentRow& r : rows)
    out.push_back({r.spec.method_tag(), r.spec.reducer_tag(), r.coverage, r.coverage_se,
                   r.survival, r.survival_se, r.mean_size, r.size_se});
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultsRow>& rows) {
  out << kResultsHeader << "\n";
  for (const ResultsRow& r : rows)
    out << r.method << "," << r.reducer << "," << csv_number(r.coverage) << ","
        << csv_number(r.coverage_se) << "," << csv_number(r.survival) << ","
        << csv_number(r.survival_se) << "," << csv_number(r.mean_size) << ","
        << csv_number(r.size_se) << "\n";
}

std::vector<ResultsRow> read_results_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<ResultsRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_line(line)) continue;
    const std::vector<std::string> f = split_csv_line(line, source, lineno);
    if (!have_header) {
      std::string joined;
      for (const std::string& h : f) joined += (joined.empty() ? "" : ",") + h;
      if (joined != kResultsHeader)
        throw InputError(where(source, lineno) + "header mismatch, expected '" +
                         std::string(kResultsHeader) + "'");
      have_header = true;
      continue;
    }
    if (f.size() != 8)
      throw InputError(where(source, lineno) + "expected 8 fields, found " +
                       std::to_string(f.size()));
    ResultsRow r;
    r.method = f[0];
    r.reducer = f[1];
    if (r.method.empty() || r.reducer.empty())
      throw InputError(where(source, lineno) + "empty method or reducer");
    double* targets[] = {&r.coverage, &r.coverage_se, &r.survival,
                         &r.survival_se, &r.mean_size, &r.size_se};
    for (int j = 0; j < 6; ++j) {
      const std::string& cell = f[static_cast<std::size_t>(j + 2)];
      const bool is_se = j % 2 == 1;
      if (is_se && cell == "NA") {
        *targets[j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (!parse_double(cell, *targets[j]) || !std::isfinite(*targets[j]))
        throw InputError(where(source, lineno) + "not a finite number: '" + cell + "'");
    }
    rows.push_back(r);
  }
  if (!have_header) throw InputError(source + ": empty results file");
  if (rows.empty()) throw InputError(source + ": results file has no rows");
  return rows;
}

std::string format_probability(double value, double se) {
  auto two = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", std::round(x * 100.0) / 100.0);
    return std::string(buf);
  };
  return two(value) + " (" + (std::isfinite(se) ? two(se) : "NA") + ")";
}

std::string format_size(double value, double se) {
  auto whole = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", std::round(x));
    return std::string(buf);
  };
  return whole(value) + " (" + (std::isfinite(se) ? whole(se) : "NA") + ")";
}

std::string row_label(const ResultsRow& row) {
  std::string red = row.reducer;
  if (red == "cox") red = "Cox";
  else if (red == "lasso") red = "Lasso";
  else if (red == "oracle") red = "Oracle";
  if (row.method == "split_f") return "split " + red + " + split F test";
  if (row.method == "naive_f") return red + " + F test";
  if (row.method == "ancillary") return red + " + ancillary";
  if (row.method.rfind("cosufficient_k", 0) == 0)
    return red + " + co-sufficient (k = " + row.method.substr(14) + ")";
  return red + " + " + row.method;
}

std::string render_table(const std::vector<ResultsRow>& rows, TableStyle style) {
  const std::vector<std::string> head = {"Method", "P(E* in M)", "P(E* in E)", "E|M|"};
  std::vector<std::vector<std::string>> cells;
  for (const ResultsRow& r : rows)
    cells.push_back({row_label(r), format_probability(r.coverage, r.coverage_se),
                     format_probability(r.survival, r.survival_se),
                     format_size(r.mean_size, r.size_se)});

  std::vector<std::size_t> width(head.size());
  for (std::size_t j = 0; j < head.size(); ++j) {
    width[j] = head[j].size();
    for (const auto& row : cells) width[j] = std::max(width[j], row[j].size());
  }

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    if (style == TableStyle::markdown) out << "| ";
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << (style == TableStyle::markdown ? " | " : "  ");
      if (j == 0)
        out << std::left << std::setw(static_cast<int>(width[j])) << row[j];
      else
        out << std::right << std::setw(static_cast<int>(width[j])) << row[j];
    }
    if (style == TableStyle::markdown) out << " |";
    out << "\n";
  };
  emit(head);
  if (style == TableStyle::markdown) {
    out << "|";
    for (std::size_t j = 0; j < head.size(); ++j)
      out << (j == 0 ? ":" : "-") << std::string(width[j], '-') << (j == 0 ? "-" : ":") << "|";
    out << "\n";
  } else {
    std::size_t total = 0;
    for (std::size_t w : width) total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
  }
  for (const auto& row : cells) emit(row);
  return out.str();
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw NumericalError("cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalError("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace confsets
