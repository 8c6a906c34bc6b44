#include "confsets/confset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "confsets/errors.hpp"

namespace confsets {

std::int64_t count_submodels(int pool, int max_size) {
  if (pool < 0 || max_size < 0) throw DomainError("count_submodels needs nonnegative arguments");
  std::int64_t total = 0;
  std::int64_t c = 1;  // C(pool, j)
  for (int j = 1; j <= std::min(pool, max_size); ++j) {
    c = c * (pool - j + 1) / j;
    total += c;
  }
  return total;
}

SubmodelEnumerator::SubmodelEnumerator(ModelSubset encompassing, int max_size)
    : encompassing_(std::move(encompassing)), max_size_(max_size) {
  if (max_size_ < 1 || max_size_ > encompassing_.size())
    throw DomainError("max_size must lie in [1, |encompassing|]");
}

bool SubmodelEnumerator::next(ModelSubset& out) {
  if (done_) return false;
  const int pool = encompassing_.size();
  if (pos_.empty()) {
    pos_.push_back(0);
  } else if (static_cast<int>(pos_.size()) < max_size_ && pos_.back() + 1 < pool) {
    pos_.push_back(pos_.back() + 1);
  } else {
    while (!pos_.empty()) {
      if (++pos_.back() < pool) break;
      pos_.pop_back();
    }
    if (pos_.empty()) {
      done_ = true;
      return false;
    }
  }
  std::vector<int> idx;
  idx.reserve(pos_.size());
  for (int p : pos_) idx.push_back(encompassing_.indices()[static_cast<std::size_t>(p)]);
  out = ModelSubset(std::move(idx), encompassing_.p_total());
  return true;
}

bool ConfidenceSet::contains(const ModelSubset& model) const {
  return std::binary_search(accepted.begin(), accepted.end(), model);
}

namespace {

constexpr double kUndetermined = std::numeric_limits<double>::quiet_NaN();

struct NodeResult {
  ModelSubset model;
  std::vector<double> p;  ///< per tester; NaN = undetermined
  std::int64_t skipped = 0;  ///< >0: a singular node standing for this many submodels
};

class Sweeper {
 public:
  Sweeper(const MatrixXd& x, const ModelSubset& enc, std::span<const SubmodelTester* const> testers,
          const SweepOptions& opts)
      : x_(x), enc_(enc), testers_(testers), opts_(opts) {
    const Index n = x.rows();
    Index total = 0;
    for (const SubmodelTester* t : testers_) {
      if (t->responses().rows() != n) throw DimensionMismatch("tester responses must have n rows");
      offsets_.push_back(total);
      total += t->responses().cols();
    }
    stacked_.resize(n, total);
    for (std::size_t i = 0; i < testers_.size(); ++i)
      stacked_.middleCols(offsets_[i], testers_[i]->responses().cols()) = testers_[i]->responses();
  }

  void run_branch(int first, std::vector<NodeResult>& out) const {
    const Index n = x_.rows();
    const int icpt = opts_.intercept ? 1 : 0;
    IncrementalBasis basis(n, opts_.max_size + icpt);
    std::vector<MatrixXd> levels(static_cast<std::size_t>(opts_.max_size + 1));
    levels[0] = stacked_;
    if (opts_.intercept) {
      const VectorXd ones = VectorXd::Ones(n);
      basis.push(ones.data());
      basis.project_out_column(0, levels[0]);
    }
    std::vector<int> chosen;
    visit(first, 1, basis, levels, chosen, out);
  }

 private:
  void visit(int pos, int depth, IncrementalBasis& basis, std::vector<MatrixXd>& levels,
             std::vector<int>& chosen, std::vector<NodeResult>& out) const {
    const int pool = enc_.size();
    const int var = enc_.indices()[static_cast<std::size_t>(pos)];
    chosen.push_back(var);
    bool pushed = true;
    try {
      basis.push(x_.col(var).data());
    } catch (const SingularDesign&) {
      pushed = false;
    }
    NodeResult node;
    node.model = ModelSubset(chosen, enc_.p_total());
    if (!pushed) {
      node.skipped = 1 + count_submodels(pool - 1 - pos, opts_.max_size - depth);
      node.p.assign(testers_.size(), kUndetermined);
      out.push_back(std::move(node));
      chosen.pop_back();
      return;
    }
    MatrixXd& r = levels[static_cast<std::size_t>(depth)];
    r = levels[static_cast<std::size_t>(depth - 1)];
    basis.project_out_column(basis.size() - 1, r);

    node.p.resize(testers_.size());
    const Index d_theta = basis.size();
    for (std::size_t t = 0; t < testers_.size(); ++t) {
      const ProjectedSubmodel view{node.model, x_.rows(), d_theta, r.col(offsets_[t]).data()};
      try {
        node.p[t] = testers_[t]->evaluate(view).p_value;
      } catch (const Error&) {
        node.p[t] = kUndetermined;
      }
    }
    out.push_back(std::move(node));

    if (depth < opts_.max_size)
      for (int next = pos + 1; next < pool; ++next)
        visit(next, depth + 1, basis, levels, chosen, out);
    basis.pop();
    chosen.pop_back();
  }

  const MatrixXd& x_;
  const ModelSubset& enc_;
  std::span<const SubmodelTester* const> testers_;
  SweepOptions opts_;
  MatrixXd stacked_;
  std::vector<Index> offsets_;
};

void fill_inclusion(ConfidenceSet& set) {
  const auto& vars = set.encompassing.indices();
  set.inclusion_freq.assign(vars.size(), 0.0);
  if (set.accepted.empty()) return;
  for (const ModelSubset& m : set.accepted)
    for (int v : m.indices()) {
      const auto it = std::lower_bound(vars.begin(), vars.end(), v);
      set.inclusion_freq[static_cast<std::size_t>(it - vars.begin())] += 1.0;
    }
  for (double& f : set.inclusion_freq) f /= static_cast<double>(set.accepted.size());
}

}  // namespace

std::vector<ConfidenceSet> build_confidence_sets(const MatrixXd& x,
                                                 const ModelSubset& encompassing,
                                                 std::span<const SubmodelTester* const> testers,
                                                 const SweepOptions& opts) {
  if (encompassing.p_total() != x.cols())
    throw DimensionMismatch("encompassing set and design disagree on p");
  if (opts.max_size < 1 || opts.max_size > encompassing.size())
    throw DomainError("max_size must lie in [1, |encompassing|]");
  if (opts.alpha > 1.0 || std::isnan(opts.alpha)) throw DomainError("alpha must be <= 1");

  const Sweeper sweeper(x, encompassing, testers, opts);
  const int pool = encompassing.size();
  std::vector<std::vector<NodeResult>> branches(static_cast<std::size_t>(pool));
  const int workers = std::clamp(opts.workers, 1, std::max(1, pool));
  if (workers == 1) {
    for (int b = 0; b < pool; ++b) sweeper.run_branch(b, branches[static_cast<std::size_t>(b)]);
  } else {
    std::vector<std::jthread> pool_threads;
    for (int w = 0; w < workers; ++w)
      pool_threads.emplace_back([&, w] {
        for (int b = w; b < pool; b += workers)
          sweeper.run_branch(b, branches[static_cast<std::size_t>(b)]);
      });
  }

  std::vector<ConfidenceSet> sets(testers.size());
  for (std::size_t t = 0; t < testers.size(); ++t) {
    ConfidenceSet& s = sets[t];
    s.alpha = opts.alpha;
    s.method = testers[t]->method();
    s.encompassing = encompassing;
    s.max_size = opts.max_size;
    s.n_tested = count_submodels(pool, opts.max_size);
  }
  for (const auto& branch : branches)
    for (const NodeResult& node : branch)
      for (std::size_t t = 0; t < testers.size(); ++t) {
        ConfidenceSet& s = sets[t];
        if (node.skipped > 0) {
          s.n_undetermined += node.skipped;
          if (opts.keep_all_p_values)
            s.all_p_values.insert(s.all_p_values.end(), static_cast<std::size_t>(node.skipped),
                                  kUndetermined);
          continue;
        }
        const double p = node.p[t];
        if (opts.keep_all_p_values) s.all_p_values.push_back(p);
        if (std::isnan(p)) {
          ++s.n_undetermined;
        } else if (opts.alpha <= 0.0 || p > opts.alpha) {
          s.accepted.push_back(node.model);
          s.accepted_p.push_back(p);
        }
      }
  for (ConfidenceSet& s : sets) fill_inclusion(s);
  return sets;
}

ConfidenceSet build_confidence_set(const MatrixXd& x, const ModelSubset& encompassing,
                                   const SubmodelTester& tester, const SweepOptions& opts) {
  const SubmodelTester* one[] = {&tester};
  return std::move(build_confidence_sets(x, encompassing, one, opts).front());
}

SummaryReport summarize(const ConfidenceSet& set, int top_pairs) {
  SummaryReport rep;
  rep.variables = set.encompassing.indices();
  rep.n_accepted = static_cast<std::int64_t>(set.accepted.size());
  rep.inclusion_freq.assign(rep.variables.size(), 0.0);
  if (set.accepted.empty()) {
    rep.empty = true;
    return rep;
  }
  const std::size_t pool = rep.variables.size();
  std::vector<std::int64_t> incl(pool, 0);
  // lacking[v] = accepted models without v; together[v][w] = those with w.
  std::vector<std::int64_t> lacking(pool, 0);
  std::vector<std::int64_t> together(pool * pool, 0);
  std::vector<char> member(pool);
  for (const ModelSubset& m : set.accepted) {
    std::fill(member.begin(), member.end(), 0);
    for (int v : m.indices()) {
      const auto it = std::lower_bound(rep.variables.begin(), rep.variables.end(), v);
      member[static_cast<std::size_t>(it - rep.variables.begin())] = 1;
    }
    for (std::size_t a = 0; a < pool; ++a) {
      if (member[a]) {
        ++incl[a];
        continue;
      }
      ++lacking[a];
      for (std::size_t b = 0; b < pool; ++b)
        if (member[b]) ++together[a * pool + b];
    }
  }
  for (std::size_t a = 0; a < pool; ++a)
    rep.inclusion_freq[a] = static_cast<double>(incl[a]) / static_cast<double>(rep.n_accepted);
  for (std::size_t a = 0; a < pool; ++a) {
    if (lacking[a] == 0) continue;
    for (std::size_t b = 0; b < pool; ++b) {
      if (a == b || together[a * pool + b] == 0) continue;
      rep.substitutions.push_back({rep.variables[a], rep.variables[b],
                                   static_cast<double>(together[a * pool + b]) /
                                       static_cast<double>(lacking[a]),
                                   lacking[a]});
    }
  }
  std::stable_sort(rep.substitutions.begin(), rep.substitutions.end(),
                   [](const SubstitutionPair& l, const SubstitutionPair& r) {
                     if (l.freq != r.freq) return l.freq > r.freq;
                     return l.support > r.support;
                   });
  if (static_cast<int>(rep.substitutions.size()) > top_pairs)
    rep.substitutions.resize(static_cast<std::size_t>(top_pairs));
  return rep;
}

}  // namespace confsets
