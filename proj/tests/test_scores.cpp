#include <gtest/gtest.h>

#include "bkbforge/bnlearn.hpp"
#include "bkbforge/scores.hpp"
#include "oracles.hpp"

using namespace bkbforge;

TEST(Scores, BkbModelBitsSubstitution) {
  Bkb one(oracle::make_variables({2, 2}));
  one.add(SNode{{0, 0}, {}, 0.5});
  EXPECT_DOUBLE_EQ(bkb_model_bits(one, 2.0, 32), 34.0);
  EXPECT_DOUBLE_EQ(bkb_model_bits(Bkb(oracle::make_variables({2})), 2.0, 32), 0.0);

  Bkb two(oracle::make_variables({2, 2, 2}));
  two.add(SNode{{0, 0}, {{1, 0}}, 0.5});
  two.add(SNode{{1, 0}, {{0, 0}, {2, 0}}, 0.5});
  EXPECT_DOUBLE_EQ(bkb_model_bits(two, 3.0, 32), 79.0);
}

TEST(Scores, DataBitsBasics) {
  const auto vars = oracle::make_variables({2});
  std::vector<World> one{{{0}, 3, 0}};
  const std::vector<double> q1{1.0};
  EXPECT_DOUBLE_EQ(data_bits(one, q1, vars), 0.0);

  std::vector<World> two{{{0}, 2, 0}, {{1}, 2, 2}};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_DOUBLE_EQ(data_bits(two, half, vars), 4.0);
  EXPECT_NEAR(data_bits(two, half, vars), 4.0 * empirical_world_entropy(two), 1e-12);

  const std::vector<double> zero{0.5, 0.0};
  try {
    data_bits(two, zero, vars);
    FAIL() << "expected CannotEncodeError";
  } catch (const CannotEncodeError& e) {
    EXPECT_NE(std::string(e.what()).find("A=1"), std::string::npos);
  }
}

TEST(Scores, CrossEntropyExamples) {
  const auto vars = oracle::make_variables({2});
  std::vector<World> two{{{0}, 3, 0}, {{1}, 1, 1}};
  const std::vector<double> p{0.75, 0.25};
  EXPECT_NEAR(cross_entropy_cd(two, p, vars), 0.0, 1e-15);
  std::vector<World> single{{{0}, 5, 0}};
  const std::vector<double> h{0.5};
  EXPECT_NEAR(cross_entropy_cd(single, h, vars), 1.0, 1e-15);
}

TEST(Scores, CrossEntropyIdentityOnRandomModels) {
  oracle::Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto d = oracle::random_dataset(rng, 4, 2, oracle::uniform(rng, 3, 30));
    const auto worlds = dedupe_worlds(d);
    std::vector<double> q;
    double left = 1.0;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
      q.push_back(oracle::uniform_real(rng, 0.01, 1.0) * left / 2);
      left -= q.back();
    }
    const double n = static_cast<double>(d.num_rows());
    EXPECT_NEAR(cross_entropy_cd(worlds, q, d.variables()),
                data_bits(worlds, q, d.variables()) / n - empirical_world_entropy(worlds), 1e-12);
  }
}

TEST(Scores, BnModelBitsVariants) {
  const std::vector<VarMask> empty{0};
  const std::vector<std::size_t> binary{2};
  EXPECT_DOUBLE_EQ(bn_model_bits(empty, binary, 4, BnVariant::kLamBacchus, 32), 32.0);
  EXPECT_DOUBLE_EQ(bn_model_bits(empty, binary, 4, BnVariant::kSuzuki, 32), 1.0);

  // Same single-variable BN through bn_mdl: N=4 with counts 2/2.
  Dataset d(oracle::make_variables({2}), {{0}, {0}, {1}, {1}});
  ProbEngine e(d);
  const auto bn = fit_bn(e, d.variables(), {0});
  const auto lb = bn_mdl(bn, d, BnVariant::kLamBacchus);
  EXPECT_DOUBLE_EQ(lb.model_bits, 32.0);
  EXPECT_DOUBLE_EQ(lb.data_bits, 4.0);
  EXPECT_DOUBLE_EQ(bn_mdl(bn, d, BnVariant::kSuzuki).model_bits, 1.0);
  EXPECT_DOUBLE_EQ(bn_mdl(bn, d, BnVariant::kLamBacchus, 8.0).data_bits, lb.data_bits);
  EXPECT_EQ(parse_bn_variant("suzuki"), BnVariant::kSuzuki);
  EXPECT_THROW(parse_bn_variant("bic"), InputError);
}

TEST(Scores, ConversionCostExamples) {
  const std::vector<VarMask> isolated{0};
  const std::vector<std::size_t> binary{2};
  EXPECT_DOUBLE_EQ(bkb_conversion_cost(isolated, binary).exact, 0.0);

  const std::vector<VarMask> edge{0, 1};
  const std::vector<std::size_t> two{2, 2};
  const auto c = bkb_conversion_cost(edge, two, 32);
  EXPECT_DOUBLE_EQ(c.exact, 3.0);
  EXPECT_GE(c.bound, 3.0);
}

TEST(Scores, ConversionCostBelowBound) {
  oracle::Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = oracle::uniform(rng, 1, 5);
    std::vector<std::size_t> ar(n);
    for (auto& a : ar) a = oracle::uniform(rng, 2, 4);
    const auto dags = oracle::all_dags(n, 2);
    const auto& g = dags[oracle::uniform(rng, 0, dags.size() - 1)];
    const auto c = bkb_conversion_cost(g, ar);
    EXPECT_LE(c.exact, c.bound + 1e-9);
  }
}

// For a factorized model q = prod p(x|pi) on the data worlds, C_D moves
// opposite to the mutual-information sum once the structure-independent
// terms are fixed: C_D + sum_tau p_tau sum_i log2(p(x,pi) / (p(x) p(pi))) is
// the same for every structure, and that sum equals sum_i I(X_i; Pi_i).
TEST(Scores, CrossEntropyTracksMutualInformationSum) {
  oracle::Rng rng(17);
  int checked = 0;
  for (int t = 0; t < 60 && checked < 30; ++t) {
    const std::size_t n = oracle::uniform(rng, 2, 4);
    const auto d = oracle::random_dataset(rng, n, 2, oracle::uniform(rng, 6, 12));
    const auto worlds = dedupe_worlds(d);
    if (worlds.size() > 6) continue;
    ++checked;
    ProbEngine e(d);
    const double rows = static_cast<double>(d.num_rows());
    std::optional<double> constant;
    std::vector<std::pair<double, double>> points;
    for (const auto& g : oracle::all_dags(n, n - 1)) {
      std::vector<double> q;
      double w = 0;
      for (const auto& world : worlds) {
        double prob = 1.0;
        for (VarId v = 0; v < n; ++v) {
          std::vector<INode> parents;
          for (VarId p : mask_to_vars(g[v])) parents.push_back({p, world.assignment[p]});
          const Query pi(parents);
          const INode head{v, world.assignment[v]};
          const double joint = e.joint(pi.with(head)).value(), parent = e.joint(pi).value();
          prob *= joint / parent;
          w += static_cast<double>(world.multiplicity) / rows *
               std::log2(joint / (e.joint(Query({head})).value() * parent));
        }
        q.push_back(prob);
      }
      double rv = 0;
      for (VarId v = 0; v < n; ++v) rv += rv_mutual_info(e, v, mask_to_vars(g[v]));
      EXPECT_NEAR(w, rv, 1e-12);
      const double cd = cross_entropy_cd(worlds, q, d.variables());
      points.push_back({cd, w});
      if (!constant) constant = cd + w;
      EXPECT_NEAR(cd + w, *constant, 1e-9);
    }
    for (const auto& a : points)
      for (const auto& b : points)
        if (b.second > a.second + 1e-9) EXPECT_LT(b.first, a.first);
  }
  EXPECT_GE(checked, 20);
}
