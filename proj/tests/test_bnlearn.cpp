#include <gtest/gtest.h>

#include "bkbforge/bnlearn.hpp"
#include "oracles.hpp"

using namespace bkbforge;

namespace {

double structure_score(const ProbEngine& e, const std::vector<VarMask>& g, const BnLearnOptions& opt) {
  double s = 0;
  for (VarId v = 0; v < g.size(); ++v) s += bn_family_score(e, v, g[v], g.size(), opt);
  return s;
}

}  // namespace

TEST(BnLearn, IndependentDataGivesEmptyGraph) {
  Dataset d(oracle::make_variables({2, 2}), {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  for (auto variant : {BnVariant::kLamBacchus, BnVariant::kSuzuki}) {
    const auto m = learn_bn(d, {1, variant});
    EXPECT_EQ(m.bn.parents, (std::vector<VarMask>{0, 0}));
    EXPECT_DOUBLE_EQ(m.mdl.data_bits, 8.0);
  }
}

TEST(BnLearn, MatchesExhaustiveStructureSearch) {
  oracle::Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = oracle::uniform(rng, 1, 4), k = oracle::uniform(rng, 0, 3);
    const auto d = oracle::random_dataset(rng, n, 3, oracle::uniform(rng, 10, 60));
    BnLearnOptions opt{k, t % 2 ? BnVariant::kSuzuki : BnVariant::kLamBacchus, 4.0};
    const auto m = learn_bn(d, opt);
    ProbEngine e(d);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : oracle::all_dags(n, k)) best = std::min(best, structure_score(e, g, opt));
    EXPECT_TRUE(oracle::acyclic_by_dfs(m.bn.parents));
    EXPECT_NEAR(structure_score(e, m.bn.parents, opt), best, 1e-9);
  }
}

TEST(BnLearn, CptsFromCounts) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const auto bn = fit_bn(e, d.variables(), {0b10, 0});
  EXPECT_DOUBLE_EQ(*bn.conditional(0, {0, 0}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*bn.conditional(0, {0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(bn.joint({0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(bn.joint({1, 1}), 0.0);
}

TEST(BnLearn, UnseenParentConfigurationAbstains) {
  // B never takes value 1 together with A = 1, so p(C | A=1, B=1) is unknown.
  Dataset d(oracle::make_variables({2, 2, 2}), {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}});
  ProbEngine e(d);
  const auto bn = fit_bn(e, d.variables(), {0, 0, 0b011});
  EXPECT_FALSE(bn.conditional(2, {1, 1, 0}).has_value());
  EXPECT_TRUE(bn_classify(bn, {1, 1, 0}, 2).abstained());
  EXPECT_EQ(*bn_classify(bn, {0, 1, 0}, 2).best, 1u);
}

TEST(BnLearn, BkbTranslation) {
  Dataset one(oracle::make_variables({2}), {{0}, {1}, {1}});
  ProbEngine e1(one);
  EXPECT_EQ(bn_to_bkb(fit_bn(e1, one.variables(), {0})).size(), 2u);

  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const auto chain = fit_bn(e, d.variables(), {0, 0b01});
  const auto bkb = bn_to_bkb(chain);
  EXPECT_EQ(bkb.size(), 6u);
  EXPECT_TRUE(validate_mutex(bkb).empty());
  for (const auto& w : oracle::all_worlds(d.variables())) {
    EXPECT_NEAR(world_probability(bkb, w), chain.joint(w), 1e-12);
  }
}

TEST(BnLearn, BkbTranslationOnRandomNetworks) {
  oracle::Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    const auto d = oracle::random_dataset(rng, 3, 3, 30);
    const auto m = learn_bn(d, {2, BnVariant::kSuzuki});
    const auto bkb = bn_to_bkb(m.bn);
    EXPECT_TRUE(validate_mutex(bkb).empty());
    for (const auto& w : oracle::all_worlds(d.variables())) {
      EXPECT_NEAR(world_probability(bkb, w), m.bn.joint(w), 1e-12);
    }
  }
}

TEST(BnLearn, CausalRuleSetsPartitionSnodes) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const auto bkb = bn_to_bkb(fit_bn(e, d.variables(), {0, 0b01}));
  const auto crs = causal_rule_sets(bkb);
  ASSERT_EQ(crs.size(), 2u);
  EXPECT_EQ(crs[0].snodes.size() + crs[1].snodes.size(), bkb.size());
  for (const auto& r : crs)
    for (auto i : r.snodes) EXPECT_EQ(bkb.snodes()[i].head.var, r.variable);
}

TEST(BnLearn, CrsImprovementNeverLowersWeight) {
  oracle::Rng rng(37);
  for (int t = 0; t < 100; ++t) {
    const auto d = oracle::random_dataset(rng, oracle::uniform(rng, 2, 4), 3, oracle::uniform(rng, 10, 40));
    ProbEngine e(d);
    const auto worlds = dedupe_worlds(d);
    const auto dags = oracle::all_dags(d.num_variables(), 2);
    const auto bkb = bn_to_bkb(fit_bn(e, d.variables(), dags[oracle::uniform(rng, 0, dags.size() - 1)]));
    const auto improved = crs_improve(bkb, e);
    EXPECT_GE(mutual_info_weight(improved, e, worlds), mutual_info_weight(bkb, e, worlds) - 1e-9);
    EXPECT_EQ(improved.size(), bkb.size());
    const auto again = crs_improve(improved, e);
    EXPECT_NEAR(mutual_info_weight(again, e, worlds), mutual_info_weight(improved, e, worlds), 1e-9);
  }
}

TEST(BnLearn, CrsImprovementKeepsRootOnlyModels) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const auto bkb = bn_to_bkb(fit_bn(e, d.variables(), {0, 0}));
  EXPECT_EQ(crs_improve(bkb, e).snodes(), bkb.snodes());
}

TEST(BnLearn, WorldEntropyOfEmptyGraph) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const auto bn = fit_bn(e, d.variables(), {0, 0});
  EXPECT_NEAR(bn_world_entropy(bn, e, {0, 0}), -2 * 0.75 * std::log2(0.75), 1e-15);
}
