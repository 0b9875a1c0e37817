#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gaecausal/eval.hpp"
#include "oracles.hpp"

using namespace gaecausal;

namespace {

BinaryGraph graph(std::size_t d, std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
  BinaryGraph g(d);
  for (auto [i, j] : edges) g.set(i, j);
  return g;
}

BinaryGraph random_graph(std::size_t d, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(p);
  BinaryGraph g(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j && keep(rng)) g.set(i, j);
  return g;
}

// Reference SHD: per unordered pair, 0 if the two patterns agree, otherwise 1.
std::size_t pairwise_shd(const BinaryGraph& p, const BinaryGraph& t) {
  std::size_t s = 0;
  for (std::size_t i = 0; i < p.d(); ++i)
    for (std::size_t j = i + 1; j < p.d(); ++j)
      if (p.has(i, j) != t.has(i, j) || p.has(j, i) != t.has(j, i)) ++s;
  return s;
}

}  // namespace

TEST(Threshold, ZeroMatrixIsEmpty) {
  const ThresholdResult r = threshold(WeightedAdjacency(4), 0.3);
  EXPECT_EQ(r.graph.edge_count(), 0u);
  EXPECT_EQ(r.repairs, 0u);
}

TEST(Threshold, SingleEdgeAgainstTau) {
  WeightedAdjacency a(3);
  a(0, 1) = 0.5;
  EXPECT_EQ(threshold(a, 0.3).graph, graph(3, {{0, 1}}));
  EXPECT_EQ(threshold(a, 0.6).graph.edge_count(), 0u);
  a(0, 1) = -0.5;
  EXPECT_EQ(threshold(a, 0.3).graph, graph(3, {{0, 1}}));
}

TEST(Threshold, StrictInequality) {
  WeightedAdjacency a(2);
  a(0, 1) = 0.3;
  EXPECT_EQ(threshold(a, 0.3).graph.edge_count(), 0u);
}

TEST(Threshold, DropsSelfLoops) {
  WeightedAdjacency a(2);
  a(0, 0) = 5.0;
  a(1, 0) = 1.0;
  const ThresholdResult r = threshold(a, 0.3);
  EXPECT_EQ(r.graph, graph(2, {{1, 0}}));
  EXPECT_EQ(r.repairs, 0u);
}

TEST(Threshold, RepairsTwoCycleByWeakestEdge) {
  WeightedAdjacency a(2);
  a(0, 1) = 0.4;
  a(1, 0) = -0.9;
  const ThresholdResult r = threshold(a, 0.3);
  EXPECT_EQ(r.graph, graph(2, {{1, 0}}));
  EXPECT_EQ(r.repairs, 1u);
}

TEST(Threshold, RepairsThreeCycle) {
  WeightedAdjacency a(3);
  a(0, 1) = 1.0;
  a(1, 2) = 0.8;
  a(2, 0) = 0.5;
  const ThresholdResult r = threshold(a, 0.3);
  EXPECT_EQ(r.graph, graph(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(r.repairs, 1u);
}

TEST(Threshold, OutputAlwaysAcyclicAndMonotoneInTau) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = oracle::random_matrix(6, 6, rng);
    const WeightedAdjacency a(m);
    std::size_t previous = 36;
    for (double tau : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      const ThresholdResult r = threshold(a, tau);
      EXPECT_TRUE(is_dag(r.graph));
      EXPECT_FALSE(oracle::has_cycle(r.graph.to_matrix()));
      // Before repair the kept set shrinks with τ; the repaired graph stays a subset of it.
      std::size_t kept = 0;
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
          const bool in = i != j && std::abs(m(i, j)) > tau;
          kept += in ? 1 : 0;
          if (r.graph.has(i, j)) EXPECT_TRUE(in);
        }
      EXPECT_LE(kept, previous);
      EXPECT_EQ(r.graph.edge_count() + r.repairs, kept);
      previous = kept;
    }
  }
}

TEST(Threshold, NegativeTauThrows) {
  EXPECT_THROW(threshold(WeightedAdjacency(2), -0.1), PreconditionError);
}

TEST(IsDag, Examples) {
  EXPECT_TRUE(is_dag(BinaryGraph(4)));
  EXPECT_FALSE(is_dag(graph(3, {{0, 1}, {1, 2}, {2, 0}})));
  EXPECT_FALSE(is_dag(graph(2, {{1, 1}})));
  BinaryGraph upper(6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) upper.set(i, j);
  EXPECT_TRUE(is_dag(upper));
}

TEST(IsDag, AgreesWithOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const BinaryGraph g = random_graph(2 + trial % 7, 0.25, rng);
    EXPECT_EQ(is_dag(g), !oracle::has_cycle(g.to_matrix())) << "trial " << trial;
  }
}

TEST(Shd, IdenticalIsZero) {
  const BinaryGraph g = graph(4, {{0, 1}, {2, 3}, {0, 3}});
  const GraphMetrics m = shd(g, g);
  EXPECT_EQ(m.shd, 0u);
  EXPECT_DOUBLE_EQ(m.tpr, 1.0);
}

TEST(Shd, ReversalCostsOne) {
  const GraphMetrics m = shd(graph(3, {{1, 0}}), graph(3, {{0, 1}}));
  EXPECT_EQ(m.shd, 1u);
  EXPECT_EQ(m.reversed, 1u);
  EXPECT_EQ(m.extra, 0u);
  EXPECT_EQ(m.missing, 0u);
  EXPECT_EQ(m.tpr, 0.0);
}

TEST(Shd, MissingEdge) {
  const GraphMetrics m = shd(graph(3, {{0, 1}}), graph(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(m.shd, 1u);
  EXPECT_EQ(m.missing, 1u);
  EXPECT_DOUBLE_EQ(m.tpr, 0.5);
}

TEST(Shd, ExtraEdge) {
  const GraphMetrics m = shd(graph(3, {{0, 1}, {0, 2}}), graph(3, {{0, 1}}));
  EXPECT_EQ(m.shd, 1u);
  EXPECT_EQ(m.extra, 1u);
}

TEST(Shd, BidirectedPredictionAgainstOneTrueEdge) {
  const GraphMetrics m = shd(graph(2, {{0, 1}, {1, 0}}), graph(2, {{0, 1}}));
  EXPECT_EQ(m.shd, 1u);
  EXPECT_EQ(m.extra, 1u);
  EXPECT_EQ(m.reversed, 0u);
}

TEST(Shd, MismatchedSizeThrows) {
  EXPECT_THROW(shd(BinaryGraph(2), BinaryGraph(3)), PreconditionError);
}

// On acyclic predictions every disagreeing pair costs exactly one unit.
TEST(Shd, MatchesPairwiseOracleOnDags) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 3 + trial % 6;
    BinaryGraph p = threshold(WeightedAdjacency(oracle::random_matrix(d, d, rng)), 0.6).graph;
    BinaryGraph t = threshold(WeightedAdjacency(oracle::random_matrix(d, d, rng)), 0.6).graph;
    const GraphMetrics m = shd(p, t);
    EXPECT_EQ(m.shd, pairwise_shd(p, t)) << "trial " << trial;
    EXPECT_EQ(m.shd, m.extra + m.missing + m.reversed);
    EXPECT_EQ(shd(t, p).shd, m.shd);
    EXPECT_EQ(shd(t, p).extra, m.missing);
    EXPECT_EQ(shd(t, p).reversed, m.reversed);
    if (t.edge_count() > 0) {
      EXPECT_DOUBLE_EQ(m.tpr, tpr(p, t));
      EXPECT_GE(m.tpr, 0.0);
      EXPECT_LE(m.tpr, 1.0);
    }
  }
}

TEST(Tpr, Examples) {
  const BinaryGraph t = graph(3, {{0, 1}, {1, 2}});
  EXPECT_DOUBLE_EQ(tpr(t, t), 1.0);
  EXPECT_DOUBLE_EQ(tpr(BinaryGraph(3), t), 0.0);
  EXPECT_DOUBLE_EQ(tpr(graph(3, {{0, 1}, {2, 1}}), t), 0.5);
  EXPECT_THROW(tpr(t, BinaryGraph(3)), PreconditionError);
}

TEST(Tpr, OneExactlyWhenEveryTrueEdgePredicted) {
  const BinaryGraph t = graph(4, {{0, 1}, {1, 2}, {0, 3}});
  BinaryGraph p = t;
  p.set(2, 3);
  EXPECT_DOUBLE_EQ(tpr(p, t), 1.0);
  p.set(0, 3, false);
  EXPECT_LT(tpr(p, t), 1.0);
}

TEST(MeanStd, Examples) {
  const std::vector<double> one{3.5};
  EXPECT_EQ(mean_std(one).mean, 3.5);
  EXPECT_EQ(mean_std(one).std, 0.0);
  const std::vector<double> two{2.0, 4.0};
  EXPECT_DOUBLE_EQ(mean_std(two).mean, 3.0);
  EXPECT_DOUBLE_EQ(mean_std(two).std, std::sqrt(2.0));
  const std::vector<double> four(4, 7.0);
  EXPECT_EQ(mean_std(four).std, 0.0);
  EXPECT_THROW(mean_std(std::vector<double>{}), PreconditionError);
}

TEST(Aggregate, SummarisesEachField) {
  std::vector<GraphMetrics> runs(2);
  runs[0].shd = 2;
  runs[0].tpr = 0.5;
  runs[0].wall_time_seconds = 1.0;
  runs[1].shd = 4;
  runs[1].tpr = 1.0;
  runs[1].wall_time_seconds = 3.0;
  const MetricsSummary s = aggregate(runs);
  EXPECT_EQ(s.runs, 2u);
  EXPECT_DOUBLE_EQ(s.shd.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.shd.std, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s.tpr.mean, 0.75);
  EXPECT_DOUBLE_EQ(s.wall_time_seconds.mean, 2.0);
  EXPECT_THROW(aggregate(std::vector<GraphMetrics>{}), PreconditionError);
}
