#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "confsets/linalg.hpp"
#include "confsets/modeltest.hpp"
#include "confsets/subset.hpp"

namespace confsets {

/// Sum_{j=1}^{max_size} C(pool, j).
std::int64_t count_submodels(int pool, int max_size);

/// Streams the non-empty subsets of `encompassing` with at most `max_size`
/// elements in lexicographic order: {1}, {1,2}, {1,2,3}, ..., {2}, ...
class SubmodelEnumerator {
 public:
  SubmodelEnumerator(ModelSubset encompassing, int max_size);
  bool next(ModelSubset& out);

 private:
  ModelSubset encompassing_;
  int max_size_;
  std::vector<int> pos_;
  bool done_ = false;
};

struct ConfidenceSet {
  std::vector<ModelSubset> accepted;
  std::vector<double> accepted_p;  ///< parallel to `accepted`
  double alpha = 0.05;
  TestMethod method = TestMethod::cosufficient;
  ModelSubset encompassing;
  int max_size = 0;
  std::int64_t n_tested = 0;
  std::int64_t n_undetermined = 0;
  /// Fraction of accepted models containing each member of `encompassing`.
  std::vector<double> inclusion_freq;
  /// p-value of every tested submodel in enumeration order (NaN when
  /// undetermined); filled only when SweepOptions::keep_all_p_values is set.
  std::vector<double> all_p_values;

  bool contains(const ModelSubset& model) const;
};

struct SweepOptions {
  double alpha = 0.05;
  int max_size = 5;
  bool intercept = false;
  int workers = 1;
  bool keep_all_p_values = false;
};

/// Runs every tester over every submodel of `encompassing`, sharing one
/// residual projection per submodel. Models with p > alpha are accepted;
/// alpha <= 0 accepts everything. A tester error on a submodel marks it
/// undetermined for that tester (excluded, counted).
std::vector<ConfidenceSet> build_confidence_sets(const MatrixXd& x,
                                                 const ModelSubset& encompassing,
                                                 std::span<const SubmodelTester* const> testers,
                                                 const SweepOptions& opts);

ConfidenceSet build_confidence_set(const MatrixXd& x, const ModelSubset& encompassing,
                                   const SubmodelTester& tester, const SweepOptions& opts);

struct SubstitutionPair {
  int absent = 0;   ///< variable v
  int present = 0;  ///< variable w
  double freq = 0.0;  ///< share of accepted models lacking v that contain w
  std::int64_t support = 0;  ///< number of accepted models lacking v
};

struct SummaryReport {
  std::vector<int> variables;  ///< members of the encompassing set
  std::vector<double> inclusion_freq;
  std::vector<SubstitutionPair> substitutions;  ///< strongest first
  std::int64_t n_accepted = 0;
  bool empty = false;
};

SummaryReport summarize(const ConfidenceSet& set, int top_pairs = 10);

}  // namespace confsets
