#pragma once

#include <string>
#include <vector>

namespace confsets {

/// Strictly increasing list of 0-based covariate indices drawn from
/// {0, ..., p_total - 1}. Rendered 1-based for people.
class ModelSubset {
 public:
  ModelSubset() = default;
  ModelSubset(std::vector<int> indices, int p_total);

  static ModelSubset range(int first, int count, int p_total);

  const std::vector<int>& indices() const { return indices_; }
  int p_total() const { return p_total_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }

  bool contains(int index) const;
  bool is_subset_of(const ModelSubset& other) const;

  /// "{1,2,3}" with 1-based labels.
  std::string to_string() const;

  friend bool operator==(const ModelSubset& a, const ModelSubset& b) {
    return a.indices_ == b.indices_ && a.p_total_ == b.p_total_;
  }
  friend bool operator<(const ModelSubset& a, const ModelSubset& b) {
    return a.indices_ < b.indices_;
  }

 private:
  std::vector<int> indices_;
  int p_total_ = 0;
};

}  // namespace confsets
