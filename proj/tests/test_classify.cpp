#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "curvecast/classify.hpp"
#include "curvecast/rng.hpp"

using namespace curvecast;

namespace {

// Sparse matrix builder: one active feature column, everything else zero.
FeatureMatrix one_feature(const std::vector<std::pair<double, int>>& data,
                          int feature = kNSearches) {
  FeatureMatrix m;
  m.attribute = "gender";
  for (std::size_t i = 0; i < data.size(); ++i) {
    FeatureVector v{};
    v[feature] = data[i].first;
    m.ids.push_back("p" + std::to_string(i));
    m.rows.push_back(v);
    m.labels.push_back(data[i].second);
  }
  return m;
}

FeatureMatrix noisy_matrix(std::uint64_t seed, int n, bool informative) {
  Rng rng(seed);
  FeatureMatrix m;
  m.attribute = "gender";
  for (int i = 0; i < n; ++i) {
    FeatureVector v{};
    for (int f : {kNSearches, kNCallsTotal, kNSmsIn, kCallDurationTotal, kNAlarmsSet})
      v[f] = rng.uniform(0, 20);
    int label;
    if (informative) {
      label = v[kNSearches] + v[kNCallsTotal] > 20 ? 1 : 0;
    } else {
      label = i % 2;  // balanced and independent of the features
    }
    m.ids.push_back("p" + std::to_string(i));
    m.rows.push_back(v);
    m.labels.push_back(label);
  }
  return m;
}

// Pair-counting reference: (concordant + half the ties) / (n_pos * n_neg).
double auc_by_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0;
  int n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    ++n_pos;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  for (int y : labels) n_neg += y == 0;
  return num / (static_cast<double>(n_pos) * n_neg);
}

}  // namespace

TEST_CASE("tree on a separable pair makes one pure split at the midpoint") {
  FeatureMatrix m = one_feature({{0, 0}, {10, 1}});
  TrainedModel model = train(ModelKind::decision_tree, m, 1);
  const auto& tree = std::get<TreeModel>(model.impl);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == kNSearches);
  CHECK(tree.nodes[0].threshold == 5.0);
  CHECK(tree.leaf_count() == 2);
  FeatureVector lo{}, hi{};
  hi[kNSearches] = 10;
  // size-1 pure leaves score with Laplace correction
  CHECK(predict_score(model, lo) == Catch::Approx(1.0 / 3));
  CHECK(predict_score(model, hi) == Catch::Approx(2.0 / 3));
}

TEST_CASE("pure leaf of three positives scores 0.8") {
  FeatureMatrix m = one_feature({{0, 0}, {1, 0}, {2, 0}, {10, 1}, {11, 1}, {12, 1}});
  TrainedModel model = train(ModelKind::decision_tree, m, 1);
  FeatureVector hi{}, lo{};
  hi[kNSearches] = 11;
  CHECK(predict_score(model, hi) == Catch::Approx(0.8));  // (3+1)/(3+2)
  CHECK(predict_score(model, lo) == Catch::Approx(0.2));
}

TEST_CASE("tree never splits a mixed node into an undersized impure child") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    FeatureMatrix m = noisy_matrix(seed, 40, true);
    TrainedModel model = train(ModelKind::decision_tree, m, seed);
    const auto& tree = std::get<TreeModel>(model.impl);
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) continue;
      const int size = node.n_pos + node.n_neg;
      const bool pure = node.n_pos == 0 || node.n_neg == 0;
      if (size < 3 && size < 40) CHECK(pure);
    }
  }
}

TEST_CASE("naive bayes on class-symmetric data scores one half everywhere") {
  FeatureMatrix m = one_feature({{1, 0}, {3, 0}, {1, 1}, {3, 1}});
  TrainedModel model = train(ModelKind::naive_bayes, m, 1);
  for (double x : {0.0, 1.0, 2.0, 3.0, 50.0}) {
    FeatureVector v{};
    v[kNSearches] = x;
    CHECK(predict_score(model, v) == Catch::Approx(0.5).margin(1e-9));
  }
}

TEST_CASE("naive bayes separates well-separated gaussians") {
  FeatureMatrix m = one_feature({{0, 0}, {1, 0}, {2, 0}, {100, 1}, {101, 1}, {102, 1}});
  TrainedModel model = train(ModelKind::naive_bayes, m, 1);
  FeatureVector lo{}, hi{};
  hi[kNSearches] = 101;
  lo[kNSearches] = 1;
  CHECK(predict_score(model, hi) > 0.99);
  CHECK(predict_score(model, lo) < 0.01);
}

TEST_CASE("single-class training data degrades to a constant predictor") {
  FeatureMatrix m = one_feature({{0, 1}, {5, 1}, {9, 1}});
  for (auto kind : {ModelKind::naive_bayes, ModelKind::decision_tree, ModelKind::bagged_trees}) {
    TrainedModel model = train(kind, m, 1);
    CHECK(model.degenerate);
    FeatureVector v{};
    CHECK(predict_score(model, v) == 1.0);
  }
}

TEST_CASE("ensemble of one full-sample tree predicts exactly like the tree") {
  FeatureMatrix m = noisy_matrix(9, 50, true);
  TrainOptions opts;
  opts.n_trees = 1;
  opts.bootstrap = false;
  TrainedModel bag = train(ModelKind::bagged_trees, m, 123, opts);
  TrainedModel tree = train(ModelKind::decision_tree, m, 456);
  for (const auto& row : m.rows) CHECK(predict_score(bag, row) == predict_score(tree, row));
}

TEST_CASE("bagging is deterministic in the seed") {
  FeatureMatrix m = noisy_matrix(10, 40, true);
  TrainedModel a = train(ModelKind::bagged_trees, m, 77);
  TrainedModel b = train(ModelKind::bagged_trees, m, 77);
  TrainedModel c = train(ModelKind::bagged_trees, m, 78);
  bool any_diff = false;
  for (const auto& row : m.rows) {
    CHECK(predict_score(a, row) == predict_score(b, row));
    any_diff = any_diff || predict_score(a, row) != predict_score(c, row);
  }
  CHECK(any_diff);  // a different seed draws different bootstraps
}

TEST_CASE("auc matches the worked examples") {
  CHECK(auc({0.9, 0.8, 0.4, 0.3}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.9, 0.4, 0.8, 0.3}, {1, 1, 0, 0}) == 0.75);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}) == 0.5);
}

TEST_CASE("auc equals the pair-counting definition, ties included") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      scores.push_back(static_cast<double>(rng.uniform_index(8)) / 8.0);  // deliberate ties
      labels.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    if (std::accumulate(labels.begin(), labels.end(), 0) % 40 == 0) labels[0] ^= 1;
    CHECK(auc(scores, labels) == Catch::Approx(auc_by_pairs(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under strictly monotone rescaling") {
  std::vector<double> scores = {0.1, 0.7, 0.7, 0.3, 0.9, 0.2};
  std::vector<int> labels = {0, 1, 0, 0, 1, 1};
  std::vector<double> warped;
  for (double s : scores) warped.push_back(std::exp(3.0 * s) - 0.5);
  CHECK(auc(scores, labels) == auc(warped, labels));
}

TEST_CASE("flipping every label mirrors auc around one half") {
  std::vector<double> scores = {0.1, 0.7, 0.65, 0.3, 0.9, 0.2, 0.4};
  std::vector<int> labels = {0, 1, 0, 0, 1, 1, 0};
  std::vector<int> flipped;
  for (int y : labels) flipped.push_back(1 - y);
  CHECK(auc(scores, labels) + auc(scores, flipped) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("auc without both classes is an error") {
  CHECK_THROWS_AS(auc({0.1, 0.9}, {1, 1}), UndefinedAucError);
  CHECK_THROWS_AS(auc({0.1, 0.9}, {0, 0}), UndefinedAucError);
}

TEST_CASE("weighted f measure matches the worked examples") {
  CHECK(f_measure({1, 0, 1, 0}, {1, 0, 1, 0}) == 1.0);
  // predicting everything positive on a balanced pair
  CHECK(f_measure({1, 1}, {1, 0}) == Catch::Approx(1.0 / 3));
  // total miss
  CHECK(f_measure({0, 1, 0, 1}, {1, 0, 1, 0}) == 0.0);
}

TEST_CASE("stratified folds are exact for a balanced twenty-row matrix") {
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 2);
  std::vector<int> fold_of = stratified_folds(labels, 10, 42);
  std::vector<int> pos_in(10, 0), neg_in(10, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    REQUIRE(fold_of[i] >= 0);
    REQUIRE(fold_of[i] < 10);
    (labels[i] == 1 ? pos_in : neg_in)[fold_of[i]] += 1;
  }
  for (int k = 0; k < 10; ++k) {
    CHECK(pos_in[k] == 1);
    CHECK(neg_in[k] == 1);
  }
}

TEST_CASE("per-class fold occupancy never differs by more than one") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> labels;
    int n = 11 + static_cast<int>(rng.uniform_index(60));
    for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.uniform_index(2)));
    labels[0] = 0;
    labels[1] = 1;
    std::vector<int> fold_of = stratified_folds(labels, 10, trial);
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<int> count(10, 0);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) ++count[fold_of[i]];
      auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      CHECK(*hi - *lo <= 1);
    }
  }
}

TEST_CASE("cross validation is deterministic and separable data scores a full auc") {
  FeatureMatrix m = one_feature({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0},
                                 {50, 1}, {51, 1}, {52, 1}, {53, 1}, {54, 1}, {55, 1}, {56, 1}});
  EvalReport a = cross_validate(ModelKind::naive_bayes, m, 42);
  EvalReport b = cross_validate(ModelKind::naive_bayes, m, 42);
  CHECK(a.auc == b.auc);
  CHECK(a.f_measure == b.f_measure);
  REQUIRE(a.fold_scores.size() == b.fold_scores.size());
  for (std::size_t i = 0; i < a.fold_scores.size(); ++i)
    CHECK(a.fold_scores[i].f == b.fold_scores[i].f);
  CHECK(a.auc == 1.0);
  CHECK(a.folds == 10);
  CHECK_FALSE(a.leave_one_out);
}

TEST_CASE("small samples fall back to leave-one-out with a warning") {
  FeatureMatrix m = one_feature({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {50, 1}, {51, 1}, {52, 1}});
  EvalReport r = cross_validate(ModelKind::naive_bayes, m, 7);
  CHECK(r.leave_one_out);
  CHECK(r.folds == 7);
  CHECK(r.n == 7);
  CHECK(r.fold_scores.size() == 7);
}

TEST_CASE("label noise produces a null auc near one half") {
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FeatureMatrix m = noisy_matrix(seed * 97, 200, false);
    total += cross_validate(ModelKind::naive_bayes, m, seed).auc;
  }
  double mean = total / 10.0;
  CHECK(mean > 0.4);
  CHECK(mean < 0.6);
}

TEST_CASE("cross validation rejects single-class matrices") {
  FeatureMatrix m = one_feature({{0, 1}, {1, 1}, {2, 1}, {3, 1}});
  CHECK_THROWS_AS(cross_validate(ModelKind::naive_bayes, m, 1), UndefinedAucError);
}
