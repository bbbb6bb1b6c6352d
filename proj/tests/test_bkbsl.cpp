#include <gtest/gtest.h>

#include "bkbforge/bkbsl.hpp"
#include "bkbforge/io.hpp"
#include "oracles.hpp"

using namespace bkbforge;

TEST(Bkbsl, RepeatedRowEncodesForFree) {
  Dataset d(oracle::make_variables({2, 3}), std::vector<Assignment>(5, Assignment{1, 2}));
  const auto r = learn(d, {1});
  ASSERT_EQ(r.worlds.size(), 1u);
  EXPECT_DOUBLE_EQ(source_conditioned_probability(r.model, {1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(r.mdl.data_bits, 0.0);
  EXPECT_DOUBLE_EQ(r.data_bits_with_priors, 0.0);
}

TEST(Bkbsl, TrainingWorldsArePositive) {
  oracle::Rng rng(5);
  for (int t = 0; t < 15; ++t) {
    const auto d = oracle::random_dataset(rng, oracle::uniform(rng, 2, 5), 3, oracle::uniform(rng, 5, 40));
    const auto r = learn(d, {2});
    EXPECT_EQ(r.per_world_scores.size(), r.worlds.size());
    EXPECT_EQ(r.model.fragment_index.size(), r.worlds.size());
    EXPECT_TRUE(mutex_audit(r.model).empty());
    for (const auto& w : r.worlds) {
      EXPECT_GT(source_conditioned_probability(r.model, w.assignment), 0.0);
      EXPECT_GE(source_conditioned_probability(r.model, w.assignment), world_probability(r.model, w.assignment) - 1e-15);
    }
    EXPECT_TRUE(std::isfinite(r.mdl.data_bits));
    EXPECT_LE(r.model_bits_without_sources, r.mdl.model_bits);
    EXPECT_GE(r.data_bits_with_priors, r.mdl.data_bits - 1e-9);
    const auto again = data_mdl_of(r.model, d);
    EXPECT_DOUBLE_EQ(again.data_bits, r.mdl.data_bits);
    EXPECT_DOUBLE_EQ(again.data_bits_with_priors, r.data_bits_with_priors);
  }
}

TEST(Bkbsl, DataMdlReportsUncoveredWorlds) {
  Dataset train(oracle::make_variables({2, 2}), {{0, 0}, {0, 0}});
  const auto r = learn(train, {1});
  Dataset other(train.variables(), {{0, 0}, {1, 1}, {1, 0}});
  try {
    data_mdl_of(r.model, other);
    FAIL() << "expected CannotEncodeError";
  } catch (const CannotEncodeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2 data world"), std::string::npos);
    EXPECT_NE(msg.find("A=1"), std::string::npos);
  }
  Dataset wider(oracle::make_variables({2, 2, 2}), {{0, 0, 0}});
  EXPECT_THROW(data_mdl_of(r.model, wider), InputError);
  EXPECT_THROW(Dataset(train.variables(), {}), InputError);
}

TEST(Bkbsl, ReportsAreDeterministic) {
  oracle::Rng rng(8);
  const auto d = oracle::random_dataset(rng, 5, 3, 60);
  LearnOptions one{2};
  one.threads = 1;
  LearnOptions many{2};
  many.threads = 8;
  const auto a = report_json(learn(d, one)).dump();
  EXPECT_EQ(a, report_json(learn(d, many)).dump());
  EXPECT_EQ(a, report_json(learn(d, many)).dump());
  EXPECT_EQ(to_json(learn(d, one).model).dump(), to_json(learn(d, many).model).dump());
}

TEST(Bkbsl, RowOrderDoesNotChangeTheDistribution) {
  oracle::Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    const auto d = oracle::random_dataset(rng, 3, 3, 25);
    auto rows = d.rows();
    std::shuffle(rows.begin(), rows.end(), rng);
    const Dataset shuffled(d.variables(), rows);
    const auto a = learn(d, {2}), b = learn(shuffled, {2});
    EXPECT_EQ(a.model.bkb.size(), b.model.bkb.size());
    EXPECT_NEAR(a.mdl.data_bits, b.mdl.data_bits, 1e-9);
    for (const auto& w : oracle::all_worlds(d.variables())) {
      EXPECT_NEAR(world_probability(a.model, w), world_probability(b.model, w), 1e-12);
    }
  }
}

TEST(Bkbsl, GreedyBackend) {
  oracle::Rng rng(2);
  const auto d = oracle::random_dataset(rng, 6, 3, 40);
  LearnOptions opt{2};
  opt.backend = parse_backend("greedy");
  const auto g = learn(d, opt);
  const auto e = learn(d, {2});
  for (const auto& w : g.worlds) EXPECT_GT(source_conditioned_probability(g.model, w.assignment), 0.0);
  for (std::size_t t = 0; t < g.worlds.size(); ++t) {
    EXPECT_GE(g.per_world_scores[t].entropy, e.per_world_scores[t].entropy - 1e-9);
  }
  EXPECT_THROW(parse_backend("ilp"), InputError);
}

TEST(Bkbsl, ReliabilityOverridesReachPriors) {
  Dataset d(oracle::make_variables({2, 2}), {{0, 0}, {0, 0}, {0, 0}, {1, 1}});
  const auto base = learn(d, {1});
  for (const auto& sv : base.model.source_vars) {
    for (std::size_t k = 0; k < sv.sources.size(); ++k) {
      EXPECT_DOUBLE_EQ(sv.prior(k), sv.sources[k].first == "row_0" ? 0.75 : 0.25);
    }
  }
  LearnOptions opt{1};
  opt.reliabilities = {{"row_3", 3.0}};
  const auto flipped = learn(d, opt);
  for (const auto& sv : flipped.model.source_vars) {
    for (std::size_t k = 0; k < sv.sources.size(); ++k) EXPECT_DOUBLE_EQ(sv.prior(k), 0.5);
  }
}
