//
// Copyright 2026 The FedWalk Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "fedwalk/error.h"
#include "fedwalk/walker.h"
#include "fixtures.h"

namespace fedwalk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Everything the walk phase consumes, built directly from a graph.
struct Inputs {
  std::vector<DeviceView> views;
  BinAssignment bins;
  std::vector<DegreeVector> vectors;
  DissimilarityMatrix dissim;
  Hct tree;

  Inputs(const Graph& g, double epsilon, std::uint64_t seed) {
    views = MakeDeviceViews(g);
    const std::size_t k = DefaultBinCount(g.num_vertices());
    auto rng = RandomSource::For(seed, RandomSource::Role::kBinPlan);
    bins = AssignBins(g.num_vertices(), k, rng);
    for (const auto& v : views) vectors.push_back(LocalDegreeVector(v, bins, epsilon, rng));
    std::vector<OrderedDegreeMatrix> ms;
    for (const auto& v : views) ms.push_back(BuildOrderedDegreeMatrix(v, vectors, k));
    dissim = ComputeDissimilarityMatrix(ms);
    tree = BuildHct(dissim);
  }

  WalkEngine Engine(const WalkConfig& config) const {
    return WalkEngine(views, vectors, bins, dissim, tree, config);
  }
};

double TotalVariation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::fabs(a[i] - b[i]);
  return 0.5 * tv;
}

// Leaves 0..4 hang off a left caterpillar, 5..9 off a right one; the root
// joins the two halves.
Hct TwoHalves() {
  std::vector<std::pair<Hct::NodeId, Hct::NodeId>> merges = {
      {0, 1}, {10, 2}, {11, 3}, {12, 4}, {5, 6}, {14, 7}, {15, 8}, {16, 9}, {13, 17}};
  return Hct::FromMerges(10, merges);
}

TEST(EncoderScoreTest, Examples) {
  Hct tree = TwoHalves();
  DissimilarityMatrix d(10);
  d.set(0, 1, 3.0);
  d.set(0, 9, 2.0);
  EXPECT_EQ(EncoderScore(4, 4, d, tree), 0.0);
  EXPECT_EQ(EncoderScore(0, 1, d, tree), -6.0);
  EXPECT_EQ(EncoderScore(0, 9, d, tree), -20.0);
  EXPECT_EQ(EncoderScore(9, 0, d, tree), -20.0);
}

TEST(EncodeVertexTest, ZeroBudgetIsUniform) {
  Hct tree = TwoHalves();
  DissimilarityMatrix d(10);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < i; ++j) d.set(i, j, 1.0 + static_cast<double>(i + j));
  }
  auto rng = RandomSource::For(1, RandomSource::Role::kFixture);
  std::vector<double> freq(10, 0.0);
  const int n = 100000;
  for (int t = 0; t < n; ++t) freq[EncodeVertex(3, d, tree, 0.0, rng)] += 1.0 / n;
  EXPECT_LE(TotalVariation(freq, std::vector<double>(10, 0.1)), 0.02);
}

TEST(EncodeVertexTest, InfiniteBudgetIsIdentity) {
  Hct tree = TwoHalves();
  DissimilarityMatrix d(10);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < i; ++j) d.set(i, j, 0.5);
  }
  auto rng = RandomSource::For(2, RandomSource::Role::kFixture);
  for (VertexId v = 0; v < 10; ++v) {
    for (int t = 0; t < 20; ++t) EXPECT_EQ(EncodeVertex(v, d, tree, kInf, rng), v);
  }
}

TEST(EncodeVertexTest, FrequenciesMatchClosedForm) {
  // Tree ((0,1),2); dissim(0,1) = 0.5, dissim(0,2) = 1, dissim(1,2) = 2.
  const std::vector<std::pair<Hct::NodeId, Hct::NodeId>> merges = {{0, 1}, {3, 2}};
  Hct tree = Hct::FromMerges(3, merges);
  DissimilarityMatrix d(3);
  d.set(0, 1, 0.5);
  d.set(0, 2, 1.0);
  d.set(1, 2, 2.0);
  const double eps = 1.0;
  // Source 0: scores 0, -0.5 * 2, -1 * 3.
  const double w[] = {1.0, std::exp(-1.0), std::exp(-3.0)};
  const double z = w[0] + w[1] + w[2];
  const std::vector<double> expected = {w[0] / z, w[1] / z, w[2] / z};
  auto rng = RandomSource::For(3, RandomSource::Role::kFixture);
  std::vector<double> freq(3, 0.0);
  const int n = 100000;
  for (int t = 0; t < n; ++t) freq[EncodeVertex(0, d, tree, eps, rng)] += 1.0 / n;
  EXPECT_LE(TotalVariation(freq, expected), 0.02);
}

TEST(PredictTwoHopTest, SingletonPoolIsDeterministic) {
  Hct tree = TwoHalves();
  // Bin 0 holds {1, 6}; vertex 1 is the unique nearest bin-0 vertex to 0.
  BinAssignment bins{2, {1, 0, 1, 1, 1, 1, 0, 1, 1, 1}};
  const std::vector<double> c_u = {1.0, 0.0};
  auto rng = RandomSource::For(4, RandomSource::Role::kFixture);
  for (int t = 0; t < 50; ++t) EXPECT_EQ(PredictTwoHop(0, c_u, tree, bins, rng), 1u);
}

TEST(PredictTwoHopTest, NegativeVectorFallsBackToUniform) {
  Hct tree = TwoHalves();
  BinAssignment bins{2, {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}};
  const std::vector<double> c_u = {-0.7, -2.0};
  auto rng = RandomSource::For(5, RandomSource::Role::kFixture);
  std::vector<double> freq(10, 0.0);
  const int n = 90000;
  for (int t = 0; t < n; ++t) freq[PredictTwoHop(4, c_u, tree, bins, rng)] += 1.0 / n;
  EXPECT_EQ(freq[4], 0.0);
  std::vector<double> expected(10, 1.0 / 9.0);
  expected[4] = 0.0;
  EXPECT_LE(TotalVariation(freq, expected), 0.02);
}

TEST(PredictTwoHopTest, RoundedPoolFromTreeDistance) {
  // Tree (((0,1),2),((3,4),5)); bins: 0 -> {0, 2, 3, 5}, 1 -> {1, 4}.
  const std::vector<std::pair<Hct::NodeId, Hct::NodeId>> merges = {
      {0, 1}, {6, 2}, {3, 4}, {8, 5}, {7, 9}};
  Hct tree = Hct::FromMerges(6, merges);
  BinAssignment bins{2, {0, 1, 0, 0, 1, 0}};
  const VertexId u = 0;
  const std::vector<double> c_u = {2.4, 0.6};

  // Oracle: per bin, sort non-u members by (tree distance, id) and keep
  // round(c) of them.
  std::set<VertexId> pool;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<std::pair<std::size_t, VertexId>> ranked;
    for (VertexId x = 0; x < 6; ++x) {
      if (x != u && bins.bin_of[x] == j) ranked.emplace_back(tree.TreeDistance(u, x), x);
    }
    std::sort(ranked.begin(), ranked.end());
    const std::size_t keep = static_cast<std::size_t>(std::llround(c_u[j]));
    for (std::size_t i = 0; i < keep && i < ranked.size(); ++i) pool.insert(ranked[i].second);
  }
  ASSERT_EQ(pool, (std::set<VertexId>{1, 2, 5}));

  auto rng = RandomSource::For(6, RandomSource::Role::kFixture);
  std::map<VertexId, int> seen;
  for (int t = 0; t < 3000; ++t) ++seen[PredictTwoHop(u, c_u, tree, bins, rng)];
  std::set<VertexId> drawn;
  for (const auto& [v, count] : seen) {
    drawn.insert(v);
    EXPECT_NEAR(count / 3000.0, 1.0 / 3.0, 0.05);
  }
  EXPECT_EQ(drawn, pool);
}

TEST(PredictTwoHopTest, PoolCappedAtBinSize) {
  Hct tree = TwoHalves();
  BinAssignment bins{2, {0, 0, 0, 1, 1, 1, 1, 1, 1, 1}};
  const std::vector<double> c_u = {50.0, 0.0};
  auto rng = RandomSource::For(7, RandomSource::Role::kFixture);
  std::set<VertexId> drawn;
  for (int t = 0; t < 500; ++t) drawn.insert(PredictTwoHop(0, c_u, tree, bins, rng));
  EXPECT_EQ(drawn, (std::set<VertexId>{1, 2}));
}

TEST(ClosedFormTest, PublishedValues) {
  EXPECT_DOUBLE_EQ(ExpectedMessages(40, 0.0), 39.0);
  EXPECT_NEAR(ExpectedMessages(40, 0.2), 32.30, 0.01);
  EXPECT_EQ(ExpectedMessages(1, 0.3), 0.0);
  for (double p : {0.0, 0.5, 1.0}) EXPECT_EQ(ExpectedMessages(2, p), 1.0);
}

TEST(ClosedFormTest, ExactFormSolvesRecurrence) {
  for (std::size_t l = 1; l <= 60; ++l) {
    for (int step = 0; step <= 20; ++step) {
      const double p = 0.05 * step;
      EXPECT_NEAR(ExactExpectedMessages(l, p), RecurrenceExpectedMessages(l, p), 1e-9)
          << "l=" << l << " p=" << p;
    }
  }
  EXPECT_NEAR(RecurrenceExpectedMessages(4, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(ExactExpectedMessages(4, 1.0), 2.0, 1e-12);
}

TEST(ClosedFormTest, PublishedFormAgreesWithRecurrenceOnlyWithoutPredictor) {
  for (std::size_t l = 1; l <= 60; ++l) {
    EXPECT_NEAR(ExpectedMessages(l, 0.0), RecurrenceExpectedMessages(l, 0.0), 1e-9);
  }
  // With the predictor on, the two differ (e.g. l=4, p=1: 1 versus 2).
  EXPECT_NEAR(ExpectedMessages(4, 1.0), 1.0, 1e-12);
  EXPECT_GT(std::fabs(ExpectedMessages(40, 0.2) - RecurrenceExpectedMessages(40, 0.2)), 0.1);
}

TEST(ClosedFormTest, Savings) {
  EXPECT_EQ(ExpectedSavings(40, 0.0, 100, 80), 0.0);
  EXPECT_NEAR(ExpectedSavings(40, 0.2, 1, 1), 6.70, 0.01);
  double last = -1.0;
  for (std::size_t gamma = 1; gamma < 10; ++gamma) {
    const double s = ExpectedSavings(40, 0.3, 50, gamma);
    EXPECT_GE(s, last);
    last = s;
  }
  for (std::size_t l = 1; l <= 60; ++l) {
    for (int step = 0; step <= 20; ++step) {
      EXPECT_GE(ExpectedSavings(l, 0.05 * step, 1, 1), -1e-12);
    }
  }
}

TEST(WalkConfigTest, Validation) {
  WalkConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.length = 1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.p = 1.5;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.gamma = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.epsilon = -1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  EXPECT_EQ(ParsePredictorRecords("predicted-hop"), PredictorRecords::kPredictedHop);
  EXPECT_EQ(ToString(PredictorRecords::kSkippedHop), "skipped-hop");
  EXPECT_THROW(ParsePredictorRecords("both"), std::invalid_argument);
}

TEST(RunWalkTest, NoPredictorUsesLMinusOneMessages) {
  Graph g = testing::ErdosRenyi(40, 0.2, 1);
  Inputs in(g, 2.0, 1);
  WalkConfig config;
  config.p = 0.0;
  auto engine = in.Engine(config);
  auto rng = RandomSource::For(1, RandomSource::Role::kWalk);
  for (VertexId v = 0; v < 40; ++v) {
    if (g.degree(v) == 0) continue;
    auto r = engine.RunWalk(v, rng);
    EXPECT_EQ(r.stats.device_to_device, 39u);
    EXPECT_EQ(r.stats.device_to_server, 1u);
    EXPECT_EQ(r.walk.encoded.size(), 40u);
  }
}

TEST(RunWalkTest, LengthTwoUsesOneMessage) {
  Graph g = testing::Cycle(6);
  Inputs in(g, 2.0, 2);
  WalkConfig config;
  config.length = 2;
  config.p = 1.0;
  auto engine = in.Engine(config);
  auto rng = RandomSource::For(2, RandomSource::Role::kWalk);
  auto r = engine.RunWalk(0, rng);
  EXPECT_EQ(r.stats.device_to_device, 1u);
  EXPECT_EQ(r.walk.encoded.size(), 2u);
  EXPECT_EQ(r.walk.hops, std::vector<HopKind>{HopKind::kEdge});
}

TEST(RunWalkTest, LengthAndPathInvariants) {
  Graph g = testing::ErdosRenyi(30, 0.15, 3);
  Inputs in(g, 1.0, 3);
  auto rng = RandomSource::For(3, RandomSource::Role::kWalk);
  for (std::size_t l : {2u, 3u, 7u, 40u}) {
    for (double p : {0.0, 0.4, 1.0}) {
      for (auto records : {PredictorRecords::kSkippedHop, PredictorRecords::kPredictedHop}) {
        WalkConfig config;
        config.length = l;
        config.p = p;
        config.records = records;
        auto engine = in.Engine(config);
        for (VertexId v = 0; v < 30; ++v) {
          if (g.degree(v) == 0) continue;
          auto r = engine.RunWalk(v, rng);
          ASSERT_EQ(r.walk.encoded.size(), l);
          ASSERT_EQ(r.walk.true_path.size(), l);
          ASSERT_EQ(r.walk.hops.size(), l - 1);
          EXPECT_LE(r.stats.device_to_device, l - 1);
          EXPECT_EQ(r.walk.true_path.front(), v);
          for (std::size_t i = 0; i + 1 < l; ++i) {
            if (r.walk.hops[i] == HopKind::kEdge) {
              EXPECT_TRUE(g.has_edge(r.walk.true_path[i], r.walk.true_path[i + 1]));
            }
            EXPECT_LT(r.walk.true_path[i], 30u);
          }
        }
      }
    }
  }
}

TEST(RunWalkTest, NoiselessNoPredictorEncodesIdentically) {
  Graph g = testing::ErdosRenyi(25, 0.2, 4);
  Inputs in(g, kInf, 4);
  WalkConfig config;
  config.epsilon = kInf;
  config.p = 0.0;
  auto engine = in.Engine(config);
  auto rng = RandomSource::For(4, RandomSource::Role::kWalk);
  // Identity needs dissim(v, x) > 0 for x != v; vertices with identical
  // matrices can swap, so compare only where the row maximum is unique.
  for (VertexId v = 0; v < 25; ++v) {
    if (g.degree(v) == 0) continue;
    auto r = engine.RunWalk(v, rng);
    for (std::size_t i = 0; i < r.walk.encoded.size(); ++i) {
      const VertexId t = r.walk.true_path[i];
      bool unique = true;
      for (VertexId x = 0; x < 25; ++x) unique &= x == t || in.dissim(t, x) > 0.0;
      if (unique) EXPECT_EQ(r.walk.encoded[i], t);
    }
  }
}

TEST(RunWalkTest, IsolatedStartRejected) {
  const std::vector<std::pair<VertexId, VertexId>> edges = {{0, 1}, {1, 2}};
  Graph g = Graph::FromEdges(4, edges);
  Inputs in(g, 1.0, 5);
  auto engine = in.Engine(WalkConfig{});
  auto rng = RandomSource::For(5, RandomSource::Role::kWalk);
  EXPECT_THROW(engine.RunWalk(3, rng), std::invalid_argument);
}

TEST(RunWalkTest, SkippedHopRecordsNeighborOfPrevious) {
  Graph g = testing::ErdosRenyi(30, 0.2, 6);
  Inputs in(g, 1.0, 6);
  WalkConfig config;
  config.p = 1.0;
  config.length = 10;
  config.epsilon = kInf;
  auto engine = in.Engine(config);
  auto rng = RandomSource::For(6, RandomSource::Role::kWalk);
  auto r = engine.RunWalk(0 + (g.degree(0) == 0), rng);
  // p = 1: pairs of (edge, predicted) hops, then a final edge hop.
  EXPECT_EQ(r.stats.device_to_device, 5u);
  for (std::size_t i = 0; i + 2 < 10; i += 2) {
    EXPECT_EQ(r.walk.hops[i], HopKind::kEdge);
    EXPECT_EQ(r.walk.hops[i + 1], HopKind::kPredicted);
  }
  EXPECT_EQ(r.walk.hops.back(), HopKind::kEdge);
}

TEST(RunWalkTest, MonteCarloMatchesExactExpectation) {
  Graph g = testing::ErdosRenyi(40, 0.25, 7);
  Inputs in(g, 2.0, 7);
  for (std::size_t l : {5u, 10u, 40u}) {
    for (double p : {0.0, 0.1, 0.2, 0.3, 0.4}) {
      WalkConfig config;
      config.length = l;
      config.p = p;
      auto engine = in.Engine(config);
      auto rng = RandomSource::For(l * 100 + static_cast<std::uint64_t>(p * 10),
                                   RandomSource::Role::kWalk);
      const int walks = 4000;
      double sum = 0.0;
      double sum_sq = 0.0;
      for (int w = 0; w < walks; ++w) {
        VertexId start = 0;
        do {
          start = static_cast<VertexId>(rng.UniformIndex(40));
        } while (g.degree(start) == 0);
        const double m = static_cast<double>(engine.RunWalk(start, rng).stats.device_to_device);
        sum += m;
        sum_sq += m * m;
      }
      const double mean = sum / walks;
      const double se = std::sqrt(std::max(sum_sq / walks - mean * mean, 0.0) / walks);
      EXPECT_LE(std::fabs(mean - ExactExpectedMessages(l, p)), 3.0 * se + 1e-12)
          << "l=" << l << " p=" << p;
    }
  }
}

TEST(CorpusTest, WalkCountsAndAccounting) {
  Graph g = testing::Cycle(10);
  Inputs in(g, 2.0, 8);
  WalkConfig config;
  config.gamma = 1;
  config.length = 6;
  auto engine = in.Engine(config);
  std::vector<WalkEvent> events;
  Corpus c = engine.GenerateCorpus(8, 1, [&](const WalkEvent& e) { events.push_back(e); });
  EXPECT_EQ(c.walks.size(), 10u);
  EXPECT_EQ(c.stats.device_to_server, 10u);
  EXPECT_EQ(c.stats.server_to_device, 10u + 10u);
  EXPECT_EQ(c.stats.broadcast_messages, 10u);
  EXPECT_EQ(c.stats.broadcast_bytes, 10u * engine.BroadcastBytes());
  std::size_t hops = 0;
  for (const auto& e : events) hops += e.kind == WalkEvent::Kind::kHop ? 1 : 0;
  EXPECT_EQ(hops, c.stats.device_to_device);
  std::set<VertexId> starts;
  for (const auto& w : c.walks) starts.insert(w.true_path.front());
  EXPECT_EQ(starts.size(), 10u);
}

TEST(CorpusTest, IsolatedVerticesDoNotStartWalks) {
  const std::vector<std::pair<VertexId, VertexId>> edges = {{0, 1}, {1, 2}, {2, 0}};
  Graph g = Graph::FromEdges(5, edges);
  Inputs in(g, 2.0, 9);
  WalkConfig config;
  config.gamma = 3;
  config.length = 5;
  auto engine = in.Engine(config);
  Corpus c = engine.GenerateCorpus(9);
  EXPECT_EQ(c.walks.size(), 9u);
  for (const auto& w : c.walks) EXPECT_LT(w.true_path.front(), 3u);
}

TEST(CorpusTest, DeterministicAndThreadIndependent) {
  Graph g = testing::ErdosRenyi(50, 0.1, 10);
  Inputs in(g, 2.0, 10);
  WalkConfig config;
  config.gamma = 3;
  config.length = 12;
  auto engine = in.Engine(config);
  Corpus a = engine.GenerateCorpus(10, 1);
  Corpus b = engine.GenerateCorpus(10, 4);
  WalkEngine fresh = in.Engine(config);
  Corpus c = fresh.GenerateCorpus(10, 1);
  ASSERT_EQ(a.walks.size(), b.walks.size());
  std::ostringstream sa;
  std::ostringstream sb;
  std::ostringstream sc;
  WriteCorpus(a, sa);
  WriteCorpus(b, sb);
  WriteCorpus(c, sc);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str(), sc.str());
  EXPECT_EQ(a.stats, b.stats);
  Corpus d = engine.GenerateCorpus(11, 1);
  std::ostringstream sd;
  WriteCorpus(d, sd);
  EXPECT_NE(sa.str(), sd.str());
}

TEST(CorpusTest, FileRoundTrip) {
  Corpus c;
  c.walks.push_back({{3, 1, 4}, {}, {}});
  c.walks.push_back({{1, 5}, {}, {}});
  std::ostringstream out;
  out << "# header\n";
  WriteCorpus(c, out);
  std::istringstream in(out.str());
  auto walks = ReadCorpus(in, "corpus");
  ASSERT_EQ(walks.size(), 2u);
  EXPECT_EQ(walks[0], (std::vector<VertexId>{3, 1, 4}));
  EXPECT_EQ(walks[1], (std::vector<VertexId>{1, 5}));
  std::istringstream bad("1 x 2\n");
  EXPECT_THROW(ReadCorpus(bad, "bad"), ParseError);
}

}  // namespace
}  // namespace fedwalk
