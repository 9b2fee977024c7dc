#include <gtest/gtest.h>

#include <random>
#include <set>

#include "rodeo/matching.hpp"
#include "test_support.hpp"

using namespace rodeo;
using fixture::lb;

TEST(CostMatrix, Entries) {
  const std::vector<LabeledBox> t{lb(0, 0, 2, 2, 0)};
  const std::vector<LabeledBox> same{lb(0, 0, 2, 2, 0)};
  const std::vector<LabeledBox> other{lb(0, 0, 2, 2, 1)};
  EXPECT_DOUBLE_EQ(cost_matrix(t, same, {1.0, 1.0})(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(cost_matrix(t, other, {1.0, 1.0})(0, 0), -1.0);
  const std::vector<LabeledBox> far{lb(1e6, 0, 2, 2, 0)};
  EXPECT_NEAR(cost_matrix(t, far, {1.0, 0.0})(0, 0), 1.0, 1e-5);
  EXPECT_THROW(cost_matrix(t, std::vector<LabeledBox>{}, {}), std::invalid_argument);
}

TEST(ClassWeight, Examples) {
  const std::vector<LabeledBox> t{lb(0, 0, 2, 2, 0), lb(10, 0, 2, 2, 1)};
  EXPECT_EQ(class_weight(t, t), 1.0);
  EXPECT_EQ(class_weight(t, std::vector<LabeledBox>{}), 0.0);
  const std::vector<LabeledBox> swapped{lb(0, 0, 2, 2, 1), lb(10, 0, 2, 2, 0)};
  EXPECT_EQ(class_weight(t, swapped), 0.0);
}

TEST(ClassWeight, IndependentLabelsNearZero) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> cls(0, 3);
  std::vector<LabeledBox> t, p;
  for (int i = 0; i < 10000; ++i) {
    // far apart on a line so the preliminary assignment is the identity
    t.push_back(lb(i * 10.0, 0, 2, 2, cls(rng)));
    p.push_back(lb(i * 10.0, 0, 2, 2, cls(rng)));
  }
  EXPECT_LT(class_weight(t, p), 0.05);
}

TEST(MatchImage, Cardinalities) {
  const std::vector<LabeledBox> one{lb(0, 0, 1, 1, 0)};
  auto m = match_image(one, one);
  ASSERT_EQ(m.matched.size(), 1u);
  EXPECT_EQ(m.matched[0].target, 0u);
  EXPECT_EQ(m.matched[0].prediction, 0u);

  const std::vector<LabeledBox> three{lb(0, 0, 1, 1, 0), lb(5, 0, 1, 1, 0), lb(9, 0, 1, 1, 1)};
  const std::vector<LabeledBox> two{lb(5, 0, 1, 1, 0), lb(0, 0, 1, 1, 0)};
  m = match_image(three, two);
  EXPECT_EQ(m.matched.size(), 2u);
  EXPECT_EQ(m.unmatched_targets, (std::vector<std::size_t>{2}));
  EXPECT_TRUE(m.unmatched_predictions.empty());

  m = match_image(three, std::vector<LabeledBox>{});
  EXPECT_EQ(m.unmatched_targets.size(), 3u);
  m = match_image(std::vector<LabeledBox>{}, two);
  EXPECT_EQ(m.unmatched_predictions.size(), 2u);
}

TEST(MatchProperty, OptimalAgainstBruteForce) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> n(1, 6);
  for (int i = 0; i < 500; ++i) {
    const auto t = fixture::random_boxes(rng, n(rng), 3);
    const auto p = fixture::random_boxes(rng, n(rng), 3);
    const double w_cls = class_weight(t, p);
    const auto cost = cost_matrix(t, p, {1.0, w_cls});
    const auto m = match_image(t, p);
    double total = 0.0;
    for (const auto& pr : m.matched) total += cost(pr.target, pr.prediction);
    EXPECT_NEAR(total, fixture::brute_force_min_cost(cost), 1e-12);

    // partition invariants
    std::set<std::size_t> ts, ps;
    for (const auto& pr : m.matched) {
      EXPECT_TRUE(ts.insert(pr.target).second);
      EXPECT_TRUE(ps.insert(pr.prediction).second);
    }
    for (auto u : m.unmatched_targets) EXPECT_TRUE(ts.insert(u).second);
    for (auto u : m.unmatched_predictions) EXPECT_TRUE(ps.insert(u).second);
    EXPECT_EQ(ts.size(), t.size());
    EXPECT_EQ(ps.size(), p.size());
    EXPECT_EQ(m.matched.size(), std::min(t.size(), p.size()));
  }
}

TEST(MatchProperty, RelabelingAndDeterminism) {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::size_t> n(1, 6);
  const std::vector<int> bijection{2, 0, 1};
  for (int i = 0; i < 300; ++i) {
    auto t = fixture::random_boxes(rng, n(rng), 3);
    auto p = fixture::random_boxes(rng, n(rng), 3);
    const auto m = match_image(t, p);
    const auto again = match_image(t, p);
    EXPECT_EQ(m.matched, again.matched);
    const auto cost = cost_matrix(t, p, {1.0, class_weight(t, p)});
    double total = 0.0;
    for (const auto& pr : m.matched) total += cost(pr.target, pr.prediction);

    for (auto& b : t) b.class_id = bijection[b.class_id];
    for (auto& b : p) b.class_id = bijection[b.class_id];
    const auto relabeled = match_image(t, p);
    const auto cost2 = cost_matrix(t, p, {1.0, class_weight(t, p)});
    double total2 = 0.0;
    for (const auto& pr : relabeled.matched) total2 += cost2(pr.target, pr.prediction);
    EXPECT_NEAR(total, total2, 1e-12);
  }
}
