#ifndef CURVECAST_CLASSIFY_HPP
#define CURVECAST_CLASSIFY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "curvecast/features.hpp"
#include "curvecast/rng.hpp"

namespace curvecast {

enum class ModelKind { naive_bayes, decision_tree, bagged_trees };

inline std::string_view model_name(ModelKind k) {
  switch (k) {
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::bagged_trees: return "bagged_trees";
  }
  return "?";
}

struct TrainOptions {
  int max_depth = 6;
  int min_leaf = 3;
  int n_trees = 25;
  bool bootstrap = true;
};

struct NbModel {
  std::array<double, 2> log_prior;
  std::array<std::array<double, kFeatureCount>, 2> mean;
  std::array<std::array<double, kFeatureCount>, 2> var;  // floored, never zero
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int n_pos = 0;
  int n_neg = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_count() const {
    int k = 0;
    for (const auto& n : nodes)
      if (n.feature < 0) ++k;
    return k;
  }
};

struct BaggedModel {
  std::vector<TreeModel> trees;
};

// All labels equal at training time degrades to a constant predictor; callers
// can see this happened through the flag.
struct TrainedModel {
  ModelKind kind;
  bool degenerate = false;
  int degenerate_label = 0;
  std::variant<NbModel, TreeModel, BaggedModel> impl;
};

namespace detail {

inline double entropy2(int n_pos, int n_neg) {
  std::map<int, int> c{{0, n_neg}, {1, n_pos}};
  return entropy_bits(c, n_pos + n_neg);
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Scans every feature for the information-gain-maximizing threshold. Ties keep
// the lowest feature index and then the smallest threshold because candidates
// are visited in that order and only a strictly better gain replaces the best.
inline BestSplit find_split(const std::vector<FeatureVector>& rows, const std::vector<int>& labels,
                            const std::vector<int>& idx, int min_leaf) {
  const int n = static_cast<int>(idx.size());
  int total_pos = 0;
  for (int i : idx) total_pos += labels[i];
  const double h_node = entropy2(total_pos, n - total_pos);
  BestSplit best;
  std::vector<std::pair<double, int>> vals(n);
  for (int f = 0; f < kFeatureCount; ++f) {
    for (int i = 0; i < n; ++i) vals[i] = {rows[idx[i]][f], labels[idx[i]]};
    std::sort(vals.begin(), vals.end());
    int left_pos = 0;
    for (int i = 0; i < n - 1; ++i) {
      left_pos += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;  // can only cut between distinct values
      const int nl = i + 1, nr = n - nl;
      const int lp = left_pos, rp = total_pos - left_pos;
      const bool left_ok = nl >= min_leaf || lp == 0 || lp == nl;
      const bool right_ok = nr >= min_leaf || rp == 0 || rp == nr;
      if (!left_ok || !right_ok) continue;
      const double gain = h_node - (static_cast<double>(nl) / n) * entropy2(lp, nl - lp) -
                          (static_cast<double>(nr) / n) * entropy2(rp, nr - rp);
      if (gain > best.gain + 1e-12) {
        best = {f, (vals[i].first + vals[i + 1].first) / 2.0, gain};
      }
    }
  }
  return best;
}

inline int build_tree(const std::vector<FeatureVector>& rows, const std::vector<int>& labels,
                      std::vector<int> idx, int depth, const TrainOptions& opts, TreeModel& tree) {
  int n_pos = 0;
  for (int i : idx) n_pos += labels[i];
  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, n_pos, static_cast<int>(idx.size()) - n_pos});
  if (n_pos == 0 || n_pos == static_cast<int>(idx.size()) || depth >= opts.max_depth)
    return node_id;
  BestSplit s = find_split(rows, labels, idx, opts.min_leaf);
  if (s.feature < 0 || s.gain <= 1e-12) return node_id;
  std::vector<int> left_idx, right_idx;
  for (int i : idx) (rows[i][s.feature] <= s.threshold ? left_idx : right_idx).push_back(i);
  tree.nodes[node_id].feature = s.feature;
  tree.nodes[node_id].threshold = s.threshold;
  int l = build_tree(rows, labels, std::move(left_idx), depth + 1, opts, tree);
  tree.nodes[node_id].left = l;
  int r = build_tree(rows, labels, std::move(right_idx), depth + 1, opts, tree);
  tree.nodes[node_id].right = r;
  return node_id;
}

inline double tree_score(const TreeModel& tree, const FeatureVector& x) {
  int at = 0;
  while (tree.nodes[at].feature >= 0)
    at = x[tree.nodes[at].feature] <= tree.nodes[at].threshold ? tree.nodes[at].left
                                                               : tree.nodes[at].right;
  const TreeNode& leaf = tree.nodes[at];
  return (leaf.n_pos + 1.0) / (leaf.n_pos + leaf.n_neg + 2.0);
}

inline NbModel fit_nb(const std::vector<FeatureVector>& rows, const std::vector<int>& labels) {
  const int n = static_cast<int>(rows.size());
  NbModel m{};
  int n_class[2] = {0, 0};
  for (int y : labels) ++n_class[y];
  for (int c = 0; c < 2; ++c)
    m.log_prior[c] = std::log((n_class[c] + 1.0) / (n + 2.0));

  std::array<double, kFeatureCount> global_mean{}, global_var{};
  for (const auto& r : rows)
    for (int f = 0; f < kFeatureCount; ++f) global_mean[f] += r[f];
  for (int f = 0; f < kFeatureCount; ++f) global_mean[f] /= n;
  for (const auto& r : rows)
    for (int f = 0; f < kFeatureCount; ++f) {
      double d = r[f] - global_mean[f];
      global_var[f] += d * d;
    }
  for (int f = 0; f < kFeatureCount; ++f) global_var[f] /= n;

  for (int c = 0; c < 2; ++c) {
    m.mean[c].fill(0.0);
    m.var[c].fill(0.0);
  }
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < kFeatureCount; ++f) m.mean[labels[i]][f] += rows[i][f];
  for (int c = 0; c < 2; ++c)
    for (int f = 0; f < kFeatureCount; ++f)
      if (n_class[c] > 0) m.mean[c][f] /= n_class[c];
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < kFeatureCount; ++f) {
      double d = rows[i][f] - m.mean[labels[i]][f];
      m.var[labels[i]][f] += d * d;
    }
  for (int c = 0; c < 2; ++c)
    for (int f = 0; f < kFeatureCount; ++f) {
      if (n_class[c] > 0) m.var[c][f] /= n_class[c];
      // floor keeps constant features from collapsing the likelihood
      m.var[c][f] = std::max(m.var[c][f], 1e-6 * (global_var[f] + 1.0));
    }
  return m;
}

inline double nb_score(const NbModel& m, const FeatureVector& x) {
  double log_like[2];
  for (int c = 0; c < 2; ++c) {
    double s = m.log_prior[c];
    for (int f = 0; f < kFeatureCount; ++f) {
      const double v = m.var[c][f];
      const double d = x[f] - m.mean[c][f];
      s += -0.5 * std::log(2.0 * M_PI * v) - d * d / (2.0 * v);
    }
    log_like[c] = s;
  }
  // p1 = 1 / (1 + exp(l0 - l1)), stable for large gaps
  const double delta = log_like[0] - log_like[1];
  if (delta > 700) return 0.0;
  if (delta < -700) return 1.0;
  return 1.0 / (1.0 + std::exp(delta));
}

}  // namespace detail

inline TrainedModel train(ModelKind kind, const FeatureMatrix& m, std::uint64_t seed,
                          const TrainOptions& opts = {}) {
  if (m.size() < 2) throw std::invalid_argument("train requires >= 2 rows");
  TrainedModel model;
  model.kind = kind;
  const int n = static_cast<int>(m.size());
  int n_pos = std::accumulate(m.labels.begin(), m.labels.end(), 0);
  if (n_pos == 0 || n_pos == n) {
    model.degenerate = true;
    model.degenerate_label = n_pos == 0 ? 0 : 1;
    return model;
  }
  switch (kind) {
    case ModelKind::naive_bayes:
      model.impl = detail::fit_nb(m.rows, m.labels);
      break;
    case ModelKind::decision_tree: {
      TreeModel tree;
      std::vector<int> idx(m.size());
      std::iota(idx.begin(), idx.end(), 0);
      detail::build_tree(m.rows, m.labels, std::move(idx), 0, opts, tree);
      model.impl = std::move(tree);
      break;
    }
    case ModelKind::bagged_trees: {
      BaggedModel bag;
      for (int b = 0; b < opts.n_trees; ++b) {
        std::vector<int> idx;
        if (opts.bootstrap) {
          Rng rng(mix_seed(seed, "bootstrap", static_cast<std::uint64_t>(b)));
          for (int i = 0; i < n; ++i)
            idx.push_back(static_cast<int>(rng.uniform_index(m.size())));
        } else {
          idx.resize(m.size());
          std::iota(idx.begin(), idx.end(), 0);
        }
        TreeModel tree;
        detail::build_tree(m.rows, m.labels, std::move(idx), 0, opts, tree);
        bag.trees.push_back(std::move(tree));
      }
      model.impl = std::move(bag);
      break;
    }
  }
  return model;
}

inline double predict_score(const TrainedModel& model, const FeatureVector& x) {
  if (model.degenerate) return model.degenerate_label == 1 ? 1.0 : 0.0;
  switch (model.kind) {
    case ModelKind::naive_bayes:
      return detail::nb_score(std::get<NbModel>(model.impl), x);
    case ModelKind::decision_tree:
      return detail::tree_score(std::get<TreeModel>(model.impl), x);
    case ModelKind::bagged_trees: {
      const auto& bag = std::get<BaggedModel>(model.impl);
      double s = 0.0;
      for (const auto& t : bag.trees) s += detail::tree_score(t, x);
      return s / static_cast<double>(bag.trees.size());
    }
  }
  return 0.5;
}

struct UndefinedAucError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mann-Whitney form via average ranks: (R_pos - n_pos(n_pos+1)/2) / (n_pos n_neg).
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("auc requires aligned non-empty scores and labels");
  const int n = static_cast<int>(scores.size());
  int n_pos = std::accumulate(labels.begin(), labels.end(), 0);
  int n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedAucError("auc needs both classes present");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (i + 1 + j) / 2.0;  // mean of ranks i+1 .. j
    for (int t = i; t < j; ++t)
      if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Class-weighted F1 over both classes; a class with empty precision+recall
// contributes zero.
inline double f_measure(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw std::invalid_argument("f_measure requires aligned non-empty inputs");
  const int n = static_cast<int>(labels.size());
  double weighted = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    int tp = 0, fp = 0, fn = 0, support = 0;
    for (int i = 0; i < n; ++i) {
      if (labels[i] == cls) ++support;
      if (predictions[i] == cls && labels[i] == cls) ++tp;
      if (predictions[i] == cls && labels[i] != cls) ++fp;
      if (predictions[i] != cls && labels[i] == cls) ++fn;
    }
    const double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 = prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    weighted += (static_cast<double>(support) / n) * f1;
  }
  return weighted;
}

struct FoldScore {
  double auc = std::numeric_limits<double>::quiet_NaN();  // NaN when the fold has one class
  double f = 0.0;
};

struct EvalReport {
  ModelKind model;
  double auc = 0.0;       // pooled over all out-of-fold scores
  double f_measure = 0.0; // pooled, threshold 0.5
  std::vector<FoldScore> fold_scores;
  int n = 0;
  int folds = 0;
  bool leave_one_out = false;  // set when n < 10 forced fold count down to n
  std::uint64_t seed = 0;
};

// Stratified k-fold: each class is shuffled with its own derived stream and
// dealt round-robin, so per-class fold occupancy differs by at most one. The
// second class continues dealing where the first stopped, which also keeps
// overall fold sizes within one of each other and leaves no fold empty.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int folds,
                                         std::uint64_t seed) {
  std::vector<int> assignment(labels.size(), -1);
  std::size_t offset = 0;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    Rng rng(mix_seed(seed, "strata", static_cast<std::uint64_t>(cls)));
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j)
      assignment[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(folds));
    offset = (offset + members.size()) % static_cast<std::size_t>(folds);
  }
  return assignment;
}

inline EvalReport cross_validate(ModelKind kind, const FeatureMatrix& m, std::uint64_t seed,
                                 const TrainOptions& opts = {}) {
  const int n = static_cast<int>(m.size());
  if (n < 2) throw std::invalid_argument("cross_validate requires >= 2 rows");
  int n_pos = std::accumulate(m.labels.begin(), m.labels.end(), 0);
  if (n_pos == 0 || n_pos == n)
    throw UndefinedAucError("cross_validate needs both classes in the data");

  EvalReport report;
  report.model = kind;
  report.n = n;
  report.seed = seed;
  report.leave_one_out = n < 10;
  report.folds = report.leave_one_out ? n : 10;

  const std::vector<int> fold_of = stratified_folds(m.labels, report.folds, seed);
  std::vector<double> pooled_scores(m.size());
  for (int k = 0; k < report.folds; ++k) {
    FeatureMatrix train_m;
    train_m.attribute = m.attribute;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (fold_of[i] == k) {
        test_rows.push_back(i);
      } else {
        train_m.ids.push_back(m.ids[i]);
        train_m.rows.push_back(m.rows[i]);
        train_m.labels.push_back(m.labels[i]);
      }
    }
    TrainedModel model = train(kind, train_m, mix_seed(seed, "fold", static_cast<std::uint64_t>(k)),
                               opts);
    std::vector<double> fold_s;
    std::vector<int> fold_pred, fold_y;
    for (std::size_t i : test_rows) {
      double s = predict_score(model, m.rows[i]);
      pooled_scores[i] = s;
      fold_s.push_back(s);
      fold_pred.push_back(s >= 0.5 ? 1 : 0);
      fold_y.push_back(m.labels[i]);
    }
    FoldScore fs;
    int fold_pos = std::accumulate(fold_y.begin(), fold_y.end(), 0);
    if (fold_pos > 0 && fold_pos < static_cast<int>(fold_y.size()))
      fs.auc = auc(fold_s, fold_y);
    fs.f = f_measure(fold_pred, fold_y);
    report.fold_scores.push_back(fs);
  }

  report.auc = auc(pooled_scores, m.labels);
  std::vector<int> pooled_pred(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) pooled_pred[i] = pooled_scores[i] >= 0.5 ? 1 : 0;
  report.f_measure = f_measure(pooled_pred, m.labels);
  return report;
}

}  // namespace curvecast

#endif  // CURVECAST_CLASSIFY_HPP
