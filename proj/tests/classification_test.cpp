#include "dpeval/classification.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace dpeval {
namespace {

PredictionSet TwoEntities(double s1, bool a1, double s2, bool a2) {
  return PredictionSet("x", {{"a", 1, s1, a1, {}}, {"b", 1, s2, a2, {}}});
}

TEST(Confusion, Degenerate) {
  const PredictionSet s("x", {{"a", 1, 1.0, true, {}}, {"b", 1, 1.0, true, {}},
                              {"c", 1, 1.0, true, {}}});
  EXPECT_EQ(confusion_at_threshold(s, 0.5), (ConfusionCounts{3, 0, 0, 0}));
}

TEST(Confusion, SeparableAndInverted) {
  EXPECT_EQ(confusion_at_threshold(TwoEntities(0.9, true, 0.4, false), 0.5),
            (ConfusionCounts{1, 0, 1, 0}));
  EXPECT_EQ(confusion_at_threshold(TwoEntities(0.9, false, 0.4, true), 0.5),
            (ConfusionCounts{0, 1, 0, 1}));
}

TEST(Confusion, ScoreEqualToThresholdIsPositive) {
  EXPECT_EQ(confusion_at_threshold(TwoEntities(0.5, true, 0.5, false), 0.5).fp, 1u);
  EXPECT_THROW(confusion_at_threshold(TwoEntities(0.5, true, 0.5, false), 1.1), InvalidArgument);
}

TEST(PrecisionRecallF1, Perfect) {
  const ConfusionCounts c{1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(precision(c).value, 1.0);
  EXPECT_DOUBLE_EQ(recall(c).value, 1.0);
  EXPECT_DOUBLE_EQ(f1(c).value, 1.0);
  EXPECT_FALSE(f1(c).undefined);
}

TEST(PrecisionRecallF1, TwoThirds) {
  const ConfusionCounts c{2, 1, 0, 1};
  EXPECT_NEAR(precision(c).value, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(recall(c).value, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f1(c).value, 2.0 / 3.0, 1e-15);
}

TEST(PrecisionRecallF1, NoPredictedPositivesIsFlagged) {
  const ConfusionCounts c{0, 0, 0, 3};
  EXPECT_EQ(precision(c).value, 0.0);
  EXPECT_TRUE(precision(c).undefined);
  EXPECT_EQ(recall(c).value, 0.0);
  EXPECT_FALSE(recall(c).undefined);
  EXPECT_EQ(f1(c).value, 0.0);
  EXPECT_TRUE(f1(c).undefined);
}

TEST(Mcc, Examples) {
  EXPECT_DOUBLE_EQ(mcc({1, 0, 1, 0}).value, 1.0);
  // (50*30 - 10*10) / sqrt(60*60*40*40) = 1400 / 2400
  EXPECT_NEAR(mcc({50, 10, 30, 10}).value, 1400.0 / 2400.0, 1e-15);
  EXPECT_DOUBLE_EQ(mcc({0, 1, 0, 1}).value, -1.0);
  EXPECT_TRUE(mcc({3, 0, 0, 0}).undefined);
}

TEST(Gmeasure, Examples) {
  EXPECT_DOUBLE_EQ(gmeasure({4, 0, 5, 0}).value, 1.0);
  // recall 0.5, pf 0.25: 2 * 0.5 * 0.75 / 1.25 = 0.6
  EXPECT_NEAR(gmeasure({1, 1, 3, 1}).value, 0.6, 1e-15);
  EXPECT_EQ(gmeasure({0, 1, 3, 2}).value, 0.0);
  EXPECT_FALSE(gmeasure({0, 1, 3, 2}).undefined);
  EXPECT_TRUE(gmeasure({0, 2, 0, 2}).undefined);  // recall 0 and pf 1
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(TwoEntities(0.9, true, 0.1, false)), 1.0);
  const PredictionSet s("x", {{"a", 1, 0.8, true, {}}, {"b", 1, 0.4, true, {}},
                              {"c", 1, 0.6, false, {}}, {"d", 1, 0.2, false, {}}});
  EXPECT_DOUBLE_EQ(auc(s), 0.75);
  EXPECT_DOUBLE_EQ(auc(TwoEntities(0.5, true, 0.5, false)), 0.5);
}

TEST(Auc, SingleClassIsAnError) {
  EXPECT_THROW(auc(TwoEntities(0.5, true, 0.2, true)), UndefinedMetric);
  EXPECT_THROW(auc(TwoEntities(0.5, false, 0.2, false)), UndefinedMetric);
}

TEST(AucProperties, MatchesEnumerationSweepAndSymmetries) {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 300; ++iter) {
    auto es = oracle::random_instance(rng, 2 + rng() % 40, 1, 8);
    es[0].actual = true;
    es[1].actual = false;
    const auto set = oracle::to_set(es);
    std::vector<double> pos, neg;
    for (const auto& r : set.records()) (r.actual ? pos : neg).push_back(r.score);

    const double a = auc(set);
    ASSERT_NEAR(a, oracle::auc_pairs(pos, neg), 1e-12);
    ASSERT_NEAR(a, oracle::auc_roc_sweep(pos, neg), 1e-12);

    std::vector<EntityPrediction> flipped = set.records(), cubed = set.records();
    for (auto& r : flipped) r.actual = !r.actual;
    for (auto& r : cubed) r.score = r.score * r.score * r.score;
    ASSERT_NEAR(auc(PredictionSet("f", flipped)), 1.0 - a, 1e-12);
    ASSERT_EQ(auc(PredictionSet("c", cubed)), a);
  }
}

TEST(MetricRanges, FuzzedCounts) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> d(0, 6);
  for (int iter = 0; iter < 5000; ++iter) {
    const ConfusionCounts c{static_cast<std::uint64_t>(d(rng)), static_cast<std::uint64_t>(d(rng)),
                            static_cast<std::uint64_t>(d(rng)), static_cast<std::uint64_t>(d(rng))};
    if (c.total() == 0) continue;
    for (auto v : {precision(c), recall(c), f1(c), gmeasure(c)}) {
      ASSERT_GE(v.value, 0.0);
      ASSERT_LE(v.value, 1.0);
    }
    ASSERT_GE(mcc(c).value, -1.0);
    ASSERT_LE(mcc(c).value, 1.0);
    const double ir = inspection_ratio(c);
    ASSERT_GE(ir, 0.0);
    ASSERT_LE(ir, 1.0);
  }
}

TEST(InspectionRatio, Examples) {
  EXPECT_DOUBLE_EQ(inspection_ratio({2, 3, 4, 1}), 0.3);
  EXPECT_DOUBLE_EQ(inspection_ratio({0, 3, 4, 0}), 0.0);
  EXPECT_DOUBLE_EQ(inspection_ratio({3, 0, 0, 2}), 1.0);
  EXPECT_THROW(inspection_ratio({}), InvalidArgument);
}

TEST(StratifiedWeightedAverage, Examples) {
  const std::vector<double> v{1.0, 0.0}, w{10, 90};
  EXPECT_DOUBLE_EQ(stratified_weighted_average(v, w), 0.1);
  const std::vector<double> v3{0.2, 0.4, 0.9}, w3{5, 5, 5};
  EXPECT_NEAR(stratified_weighted_average(v3, w3), 0.5, 1e-15);
  const std::vector<double> v1{0.37}, w1{12};
  EXPECT_DOUBLE_EQ(stratified_weighted_average(v1, w1), 0.37);
  const std::vector<double> zero{0, 0};
  EXPECT_THROW(stratified_weighted_average(v, zero), InvalidArgument);
  EXPECT_THROW(stratified_weighted_average(v, w1), InvalidArgument);
}

}  // namespace
}  // namespace dpeval
