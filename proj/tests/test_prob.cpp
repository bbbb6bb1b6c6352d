#include <gtest/gtest.h>

#include <thread>

#include "bkbforge/prob.hpp"
#include "oracles.hpp"

using namespace bkbforge;

TEST(Prob, ToyJointProbabilities) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  EXPECT_DOUBLE_EQ(e.joint(Query{}).value(), 1.0);
  EXPECT_DOUBLE_EQ(e.joint({{0, 0}}).value(), 0.75);
  EXPECT_DOUBLE_EQ(e.joint({{0, 0}, {1, 0}}).value(), 0.5);
  EXPECT_DOUBLE_EQ(e.joint({{0, 1}, {1, 1}}).value(), 0.0);
  EXPECT_THROW(e.joint({{2, 0}}), InputError);
  EXPECT_THROW(e.joint({{0, 2}}), InputError);
  EXPECT_THROW(Query({{0, 0}, {0, 1}}), InputError);
}

TEST(Prob, WorldQueryIsMultiplicityOverN) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  for (const auto& w : dedupe_worlds(d)) {
    std::vector<INode> q;
    for (VarId v = 0; v < w.assignment.size(); ++v) q.push_back({v, w.assignment[v]});
    EXPECT_DOUBLE_EQ(e.joint(q).value(), static_cast<double>(w.multiplicity) / 4.0);
  }
}

TEST(Prob, InstantiatedEntropyExamples) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const std::vector<INode> b0{{1, 0}};
  // p(A=0, B=0) = 2/4 and p(B=0) = 3/4 on these rows.
  EXPECT_NEAR(inst_cond_entropy(e, {0, 0}, b0), -0.5 * std::log2(0.5 / 0.75), 1e-15);
  EXPECT_NEAR(inst_cond_entropy(e, {0, 0}, {}), -0.75 * std::log2(0.75), 1e-15);
  EXPECT_NEAR(inst_cond_entropy(e, {1, 1}, std::vector<INode>{{0, 1}}), 0.0, 1e-15);
  EXPECT_THROW(inst_cond_entropy(e, {0, 0}, std::vector<INode>{{0, 1}}), InputError);
}

TEST(Prob, InstantiatedMutualInfoExamples) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const std::vector<INode> b0{{1, 0}};
  EXPECT_NEAR(inst_mutual_info(e, {0, 0}, b0), 0.5 * std::log2(0.5 / (0.75 * 0.75)), 1e-15);
  EXPECT_LT(inst_mutual_info(e, {0, 0}, b0), 0.0);
  EXPECT_DOUBLE_EQ(inst_mutual_info(e, {0, 0}, {}), 0.0);
}

TEST(Prob, RvMutualInfoToy) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d);
  const std::vector<VarId> b{1};
  // Full 2x2 table: p(00)=1/2, p(01)=1/4, p(10)=1/4, p(11)=0.
  const double expected = 0.5 * std::log2(0.5 / (0.75 * 0.75)) + 2 * 0.25 * std::log2(0.25 / (0.75 * 0.25));
  EXPECT_NEAR(rv_mutual_info(e, 0, b), expected, 1e-15);
  EXPECT_DOUBLE_EQ(rv_mutual_info(e, 0, {}), 0.0);
}

TEST(Prob, CopiedVariableMutualInfoIsEntropy) {
  Dataset d(oracle::make_variables({3, 3}), {{0, 0}, {1, 1}, {2, 2}, {0, 0}, {1, 1}, {0, 0}});
  ProbEngine e(d);
  const std::vector<VarId> p{1};
  EXPECT_NEAR(rv_mutual_info(e, 0, p), rv_entropy(e, 0), 1e-12);
}

TEST(Prob, MutualInfoIdentityOnRandomData) {
  oracle::Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    const auto d = oracle::random_dataset(rng, 3, 3, oracle::uniform(rng, 5, 40));
    ProbEngine e(d);
    for (VarId v = 0; v < 3; ++v) {
      std::vector<VarId> parents;
      for (VarId p = 0; p < 3; ++p) {
        if (p != v && oracle::uniform(rng, 0, 1)) parents.push_back(p);
      }
      const double i = rv_mutual_info(e, v, parents);
      EXPECT_NEAR(i, rv_entropy(e, v) - rv_cond_entropy(e, v, parents), 1e-12);
      EXPECT_GE(i, -1e-12);
    }
  }
}

TEST(Prob, MutualInfoMatchesFullTable) {
  oracle::Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto d = oracle::random_dataset(rng, 3, 3, 30);
    ProbEngine e(d);
    std::map<std::pair<StateId, std::pair<StateId, StateId>>, double> joint;
    std::map<StateId, double> px;
    std::map<std::pair<StateId, StateId>, double> pp;
    for (const auto& r : d.rows()) {
      joint[{r[0], {r[1], r[2]}}] += 1.0 / 30;
      px[r[0]] += 1.0 / 30;
      pp[{r[1], r[2]}] += 1.0 / 30;
    }
    double mi = 0;
    for (const auto& [k, p] : joint) mi += p * std::log2(p / (px[k.first] * pp[k.second]));
    const std::vector<VarId> parents{1, 2};
    EXPECT_NEAR(rv_mutual_info(e, 0, parents), mi, 1e-12);
  }
}

TEST(Prob, MemoIsTransparentAndCountsUniqueKeys) {
  oracle::Rng rng(9);
  const auto d = oracle::random_dataset(rng, 4, 3, 50);
  ProbEngine e(d);
  std::set<std::string> keys;
  std::uint64_t total = 0;
  for (int i = 0; i < 500; ++i) {
    std::vector<INode> q;
    for (VarId v = 0; v < 4; ++v) {
      if (oracle::uniform(rng, 0, 1)) q.push_back({v, static_cast<StateId>(oracle::uniform(rng, 0, d.variable(v).arity() - 1))});
    }
    std::shuffle(q.begin(), q.end(), rng);
    const Query query(q);
    keys.insert(query.key());
    EXPECT_EQ(e.joint(query).count, e.count_uncached(query));
    ++total;
  }
  EXPECT_EQ(e.counter().unique, keys.size());
  EXPECT_EQ(e.counter().total, total);
  EXPECT_LE(e.counter().unique, e.counter().total);
}

TEST(Prob, ConcurrentFirstComputationsCountOnce) {
  oracle::Rng rng(1);
  const auto d = oracle::random_dataset(rng, 4, 2, 64);
  ProbEngine e(d);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (StateId a = 0; a < 2; ++a)
        for (StateId b = 0; b < 2; ++b) e.joint({{0, a}, {3, b}});
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(e.counter().unique, 4u);
  EXPECT_EQ(e.counter().total, 32u);
}

TEST(Prob, LaplaceSmoothing) {
  const auto d = oracle::toy_dataset();
  ProbEngine e(d, 1.0);
  EXPECT_DOUBLE_EQ(e.joint({{0, 1}, {1, 1}}).value(), 1.0 / 8.0);
  EXPECT_THROW(ProbEngine(d, -1.0), InputError);
}
