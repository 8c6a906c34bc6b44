#include "confsets/subset.hpp"

#include <algorithm>

#include "confsets/errors.hpp"

namespace confsets {

ModelSubset::ModelSubset(std::vector<int> indices, int p_total)
    : indices_(std::move(indices)), p_total_(p_total) {
  if (p_total_ < 0) throw DomainError("p_total must be nonnegative");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= p_total_)
      throw DomainError("index " + std::to_string(indices_[i]) + " outside [0, " +
                        std::to_string(p_total_) + ")");
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw DomainError("subset indices must be strictly increasing");
  }
}

ModelSubset ModelSubset::range(int first, int count, int p_total) {
  std::vector<int> idx(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = first + i;
  return ModelSubset(std::move(idx), p_total);
}

bool ModelSubset::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

bool ModelSubset::is_subset_of(const ModelSubset& other) const {
  return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                       indices_.end());
}

std::string ModelSubset::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(indices_[i] + 1);
  }
  return out + "}";
}

}  // namespace confsets
