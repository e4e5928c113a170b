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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "fedwalk/embedding.h"
#include "fedwalk/error.h"
#include "fedwalk/privacy.h"

namespace fedwalk {
namespace {

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Oracle(const std::vector<double>& c, const std::vector<double>& ctx,
              const std::vector<std::vector<double>>& negs) {
  double loss = std::log1p(std::exp(-Dot(ctx, c)));
  for (const auto& n : negs) loss += std::log1p(std::exp(Dot(n, c)));
  return loss;
}

std::vector<double> RandomVector(std::size_t d, RandomSource& rng, double scale) {
  std::vector<double> v(d);
  for (auto& x : v) x = scale * (2.0 * rng.Uniform() - 1.0);
  return v;
}

double RelativeError(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

TEST(SigmoidTest, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(Sigmoid(0.0), 0.5);
  EXPECT_NEAR(LogSigmoid(0.0), -std::log(2.0), 1e-15);
  EXPECT_NEAR(LogSigmoid(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(LogSigmoid(800.0), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(LogSigmoid(-1e6)));
  EXPECT_EQ(Sigmoid(-1e6), 0.0);
  EXPECT_EQ(Sigmoid(1e6), 1.0);
}

TEST(SkipGramGradientTest, ZeroVectors) {
  const std::vector<double> zero(8, 0.0);
  const std::vector<std::vector<double>> negs(5, zero);
  auto g = SkipGramPairGradient(zero, zero, negs);
  EXPECT_NEAR(g.loss, -6.0 * std::log(0.5), 1e-12);
  for (double x : g.center) EXPECT_EQ(x, 0.0);
}

TEST(SkipGramGradientTest, MatchesFiniteDifferences) {
  auto rng = RandomSource::For(1, RandomSource::Role::kFixture);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.UniformIndex(16);
    const std::size_t k = rng.UniformIndex(6);
    auto c = RandomVector(d, rng, 1.0);
    auto ctx = RandomVector(d, rng, 1.0);
    std::vector<std::vector<double>> negs;
    for (std::size_t j = 0; j < k; ++j) negs.push_back(RandomVector(d, rng, 1.0));
    auto g = SkipGramPairGradient(c, ctx, negs);
    EXPECT_NEAR(g.loss, Oracle(c, ctx, negs), 1e-12);

    auto check = [&](std::vector<double>& x, const std::vector<double>& grad) {
      for (std::size_t i = 0; i < d; ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = Oracle(c, ctx, negs);
        x[i] = saved - h;
        const double down = Oracle(c, ctx, negs);
        x[i] = saved;
        const double fd = (up - down) / (2 * h);
        if (std::fabs(fd) > 1e-4) EXPECT_LE(RelativeError(fd, grad[i]), 1e-4);
        else EXPECT_NEAR(fd, grad[i], 1e-8);
      }
    };
    check(c, g.center);
    check(ctx, g.context);
    for (std::size_t j = 0; j < k; ++j) check(negs[j], g.negatives[j]);
  }
}

TEST(EmbeddingMatrixTest, InitRange) {
  SkipGramConfig config;
  config.dim = 16;
  auto rng = RandomSource::For(2, RandomSource::Role::kEmbedding);
  EmbeddingMatrix m = InitEmbeddings(30, config, rng);
  EXPECT_EQ(m.rows(), 30u);
  EXPECT_EQ(m.dim(), 16u);
  for (float x : m.input_values()) EXPECT_LT(std::fabs(x), 0.5f / 16.0f);
  for (float x : m.output_values()) EXPECT_EQ(x, 0.0f);
  EXPECT_TRUE(m.AllFinite());
}

TEST(SgdPairStepTest, TouchesOnlyInvolvedRows) {
  SkipGramConfig config;
  config.dim = 4;
  auto rng = RandomSource::For(3, RandomSource::Role::kEmbedding);
  EmbeddingMatrix m = InitEmbeddings(6, config, rng);
  for (std::size_t v = 0; v < 6; ++v) {
    for (auto& x : m.output(v)) x = 0.1f * static_cast<float>(v + 1);
  }
  const EmbeddingMatrix before = m;
  const std::vector<VertexId> negs = {4};
  const double loss = SgdPairStep(m, 1, 2, negs, 0.5f);
  EXPECT_GT(loss, 0.0);
  for (std::size_t v = 0; v < 6; ++v) {
    const bool in_changed = v == 1;
    const bool out_changed = v == 2 || v == 4;
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(m.input(v)[i] != before.input(v)[i], in_changed) << v;
      EXPECT_EQ(m.output(v)[i] != before.output(v)[i], out_changed) << v;
    }
  }
  // A step against the gradient lowers this pair's loss.
  EmbeddingMatrix again = m;
  EXPECT_LT(SgdPairStep(again, 1, 2, negs, 0.0f), loss);
}

std::vector<std::vector<VertexId>> TwoCliqueWalks(std::uint64_t seed) {
  // Cliques {0..4} and {5..9}; walks never cross.
  auto rng = RandomSource::For(seed, RandomSource::Role::kFixture);
  std::vector<std::vector<VertexId>> walks;
  for (int r = 0; r < 40; ++r) {
    for (VertexId s = 0; s < 10; ++s) {
      std::vector<VertexId> w = {s};
      const VertexId base = s < 5 ? 0 : 5;
      while (w.size() < 20) {
        VertexId next;
        do {
          next = base + static_cast<VertexId>(rng.UniformIndex(5));
        } while (next == w.back());
        w.push_back(next);
      }
      walks.push_back(std::move(w));
    }
  }
  return walks;
}

TEST(TrainSkipGramTest, SeparatesCliques) {
  auto walks = TwoCliqueWalks(4);
  SkipGramConfig config;
  config.dim = 16;
  config.window = 3;
  config.epochs = 3;
  EmbeddingMatrix m = TrainSkipGram(walks, 10, config, 4);
  ASSERT_TRUE(m.AllFinite());
  double within = 0.0;
  double across = 0.0;
  int nw = 0;
  int na = 0;
  for (VertexId a = 0; a < 10; ++a) {
    for (VertexId b = a + 1; b < 10; ++b) {
      const double c = CosineSimilarity(m.input(a), m.input(b));
      if ((a < 5) == (b < 5)) {
        within += c;
        ++nw;
      } else {
        across += c;
        ++na;
      }
    }
  }
  EXPECT_GT(within / nw, across / na + 0.3);
}

TEST(TrainSkipGramTest, LossDecreasesAcrossEpochs) {
  auto walks = TwoCliqueWalks(5);
  SkipGramConfig config;
  config.dim = 8;
  config.window = 2;
  config.epochs = 4;
  TrainingTrace trace;
  TrainSkipGram(walks, 10, config, 5, &trace);
  ASSERT_EQ(trace.epoch_mean_loss.size(), 4u);
  EXPECT_LT(trace.epoch_mean_loss.back(), trace.epoch_mean_loss.front());
  EXPECT_GT(trace.pairs, 0u);
}

TEST(TrainSkipGramTest, DeterministicForOneThread) {
  auto walks = TwoCliqueWalks(6);
  SkipGramConfig config;
  config.dim = 8;
  config.window = 2;
  EmbeddingMatrix a = TrainSkipGram(walks, 10, config, 6);
  EmbeddingMatrix b = TrainSkipGram(walks, 10, config, 6);
  EmbeddingMatrix c = TrainSkipGram(walks, 10, config, 7);
  EXPECT_TRUE(std::equal(a.input_values().begin(), a.input_values().end(),
                         b.input_values().begin()));
  EXPECT_FALSE(std::equal(a.input_values().begin(), a.input_values().end(),
                          c.input_values().begin()));
}

TEST(TrainSkipGramTest, UnvisitedVertexKeepsInitialization) {
  const std::vector<std::vector<VertexId>> walks = {{0, 1, 0, 1}};
  SkipGramConfig config;
  config.dim = 4;
  config.window = 1;
  EmbeddingMatrix m = TrainSkipGram(walks, 3, config, 8);
  ASSERT_EQ(m.rows(), 3u);
  EXPECT_TRUE(m.AllFinite());
}

TEST(SkipGramConfigTest, Validation) {
  SkipGramConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.dim = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.window = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.lr_start = -1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(EmbeddingIoTest, RoundTrip) {
  SkipGramConfig config;
  config.dim = 3;
  auto rng = RandomSource::For(9, RandomSource::Role::kEmbedding);
  EmbeddingMatrix m = InitEmbeddings(4, config, rng);
  std::ostringstream out;
  WriteEmbeddings(m, out);
  std::istringstream in("# provenance\n" + out.str());
  EmbeddingMatrix r = ReadEmbeddings(in, "emb");
  ASSERT_EQ(r.rows(), 4u);
  ASSERT_EQ(r.dim(), 3u);
  for (std::size_t v = 0; v < 4; ++v) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.input(v)[i], m.input(v)[i]);
  }
  std::istringstream bad("2 2\n0 1 2\n1 1\n");
  EXPECT_THROW(ReadEmbeddings(bad, "bad"), DataError);
}

TEST(CosineTest, Basics) {
  const std::vector<float> a = {1, 0};
  const std::vector<float> b = {0, 2};
  const std::vector<float> c = {3, 0};
  EXPECT_NEAR(CosineSimilarity(a, b), 0.0, 1e-12);
  EXPECT_NEAR(CosineSimilarity(a, c), 1.0, 1e-12);
}

}  // namespace
}  // namespace fedwalk
