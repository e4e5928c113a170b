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

#include "fedwalk/embedding.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fedwalk/error.h"
#include "fedwalk/simd/kernels.h"

namespace fedwalk {
namespace {

// Dot products are clipped here before the sigmoid, as in word2vec.
constexpr double kMaxExp = 30.0;

}  // namespace

void SkipGramConfig::Validate() const {
  if (dim < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  if (!(lr_end > 0.0) || !(lr_start >= lr_end)) {
    throw std::invalid_argument("learning rates must satisfy lr_start >= lr_end > 0");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), input_(rows * dim, 0.0f), output_(rows * dim, 0.0f) {}

bool EmbeddingMatrix::AllFinite() const {
  auto finite = [](float x) { return std::isfinite(x); };
  return std::all_of(input_.begin(), input_.end(), finite) &&
         std::all_of(output_.begin(), output_.end(), finite);
}

EmbeddingMatrix InitEmbeddings(std::size_t num_vertices, const SkipGramConfig& config,
                               RandomSource& rng) {
  config.Validate();
  EmbeddingMatrix m(num_vertices, config.dim);
  const double half = 0.5 / static_cast<double>(config.dim);
  for (std::size_t v = 0; v < num_vertices; ++v) {
    for (float& x : m.input(v)) {
      // Uniform in the open interval; the float cast may not reach +-half.
      float value = 0.0f;
      do {
        value = static_cast<float>((rng.Uniform() - 0.5) * 2.0 * half);
      } while (std::fabs(value) >= half);
      x = value;
    }
  }
  return m;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

PairGradient SkipGramPairGradient(std::span<const double> center,
                                  std::span<const double> context,
                                  std::span<const std::vector<double>> negatives) {
  const std::size_t d = center.size();
  PairGradient g;
  g.center.assign(d, 0.0);
  g.context.assign(d, 0.0);
  g.negatives.assign(negatives.size(), std::vector<double>(d, 0.0));

  const double pos = simd::Dot(context, center);
  g.loss -= LogSigmoid(pos);
  const double pos_coeff = Sigmoid(pos) - 1.0;  // d/dx of -log s(x)
  for (std::size_t i = 0; i < d; ++i) {
    g.center[i] += pos_coeff * context[i];
    g.context[i] = pos_coeff * center[i];
  }
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const double neg = simd::Dot(std::span<const double>(negatives[n]), center);
    g.loss -= LogSigmoid(-neg);
    const double neg_coeff = Sigmoid(neg);  // d/dx of -log s(-x)
    for (std::size_t i = 0; i < d; ++i) {
      g.center[i] += neg_coeff * negatives[n][i];
      g.negatives[n][i] = neg_coeff * center[i];
    }
  }
  return g;
}

double SgdPairStep(EmbeddingMatrix& matrix, VertexId center, VertexId context,
                   std::span<const VertexId> negatives, float lr) {
  const std::size_t d = matrix.dim();
  std::span<float> v = matrix.input(center);
  // Gradient for the center accumulates against pre-update output rows and
  // is applied last, so the step is a simultaneous update of all vectors.
  thread_local std::vector<float> center_step;
  center_step.assign(d, 0.0f);
  double loss = 0.0;

  auto update = [&](VertexId target, double label) {
    std::span<float> u = matrix.output(target);
    const double x = std::clamp(static_cast<double>(simd::Dot(u, v)), -kMaxExp, kMaxExp);
    loss -= label > 0.5 ? LogSigmoid(x) : LogSigmoid(-x);
    const float g = static_cast<float>((label - Sigmoid(x)) * lr);
    simd::Axpy(g, std::span<const float>(u), std::span<float>(center_step));
    simd::Axpy(g, std::span<const float>(v), u);
  };
  update(context, 1.0);
  for (VertexId neg : negatives) update(neg, 0.0);
  simd::Axpy(1.0f, std::span<const float>(center_step), v);
  return loss;
}

EmbeddingMatrix TrainSkipGram(std::span<const std::vector<VertexId>> walks,
                              std::size_t num_vertices, const SkipGramConfig& config,
                              std::uint64_t seed, TrainingTrace* trace) {
  config.Validate();
  if (walks.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  std::vector<double> counts(num_vertices, 0.0);
  std::uint64_t pairs_per_epoch = 0;
  for (const auto& walk : walks) {
    const std::size_t len = walk.size();
    for (std::size_t i = 0; i < len; ++i) {
      if (walk[i] >= num_vertices) {
        throw DataError("corpus vertex " + std::to_string(walk[i]) + " out of range");
      }
      counts[walk[i]] += 1.0;
      const std::size_t lo = i >= config.window ? i - config.window : 0;
      const std::size_t hi = std::min(len - 1, i + config.window);
      pairs_per_epoch += hi - lo;
    }
  }
  for (double& c : counts) c = std::pow(c, 0.75);
  const DiscreteSampler noise(counts);

  auto init_rng = RandomSource::For(seed, RandomSource::Role::kEmbedding, 0);
  EmbeddingMatrix m = InitEmbeddings(num_vertices, config, init_rng);

  const std::uint64_t total_steps = std::max<std::uint64_t>(1, pairs_per_epoch * config.epochs);
  const double lr_span = config.lr_start - config.lr_end;
  std::atomic<std::uint64_t> progress{0};
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, walks.size()));

  if (trace != nullptr) {
    trace->epoch_mean_loss.assign(config.epochs, 0.0);
    trace->pairs = pairs_per_epoch * config.epochs;
  }
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> thread_loss(threads, 0.0);
    auto worker = [&](std::size_t tid) {
      auto rng = RandomSource::For(seed, RandomSource::Role::kEmbedding,
                                   1 + epoch * threads + tid);
      std::vector<VertexId> negatives;
      negatives.reserve(config.negatives);
      const std::size_t begin = walks.size() * tid / threads;
      const std::size_t end = walks.size() * (tid + 1) / threads;
      double loss = 0.0;
      std::uint64_t local_steps = 0;
      for (std::size_t w = begin; w < end; ++w) {
        const auto& walk = walks[w];
        const std::size_t len = walk.size();
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t lo = i >= config.window ? i - config.window : 0;
          const std::size_t hi = std::min(len - 1, i + config.window);
          for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            const std::uint64_t step =
                threads == 1 ? progress.fetch_add(1, std::memory_order_relaxed)
                             : progress.load(std::memory_order_relaxed) + local_steps;
            ++local_steps;
            const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
            const float lr = static_cast<float>(
                std::max(config.lr_end, config.lr_start - lr_span * frac));
            negatives.clear();
            for (std::size_t s = 0; s < config.negatives; ++s) {
              const auto neg = static_cast<VertexId>(noise.Sample(rng));
              if (neg != walk[j]) negatives.push_back(neg);
            }
            loss += SgdPairStep(m, walk[i], walk[j], negatives, lr);
          }
          if (threads > 1 && local_steps >= 1024) {
            progress.fetch_add(local_steps, std::memory_order_relaxed);
            local_steps = 0;
          }
        }
      }
      if (threads > 1) progress.fetch_add(local_steps, std::memory_order_relaxed);
      thread_loss[tid] = loss;
    };
    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
      for (auto& th : pool) th.join();
    }
    if (trace != nullptr && pairs_per_epoch > 0) {
      double sum = 0.0;
      for (double x : thread_loss) sum += x;
      trace->epoch_mean_loss[epoch] = sum / static_cast<double>(pairs_per_epoch);
    }
  }
  FEDWALK_CHECK(m.AllFinite(), "non-finite embedding entry after training");
  return m;
}

void WriteEmbeddings(const EmbeddingMatrix& matrix, std::ostream& out) {
  out << matrix.rows() << ' ' << matrix.dim() << '\n';
  const auto old_precision = out.precision(std::numeric_limits<float>::max_digits10);
  for (std::size_t v = 0; v < matrix.rows(); ++v) {
    out << v;
    for (float x : matrix.input(v)) out << ' ' << x;
    out << '\n';
  }
  out.precision(old_precision);
}

EmbeddingMatrix ReadEmbeddings(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream header(line);
    if (!(header >> rows >> dim) || dim == 0) {
      throw ParseError(source, line_no, "expected `rows dim` header");
    }
    break;
  }
  EmbeddingMatrix m(rows, dim);
  std::vector<char> seen(rows, 0);
  std::size_t filled = 0;
  while (filled < rows && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::size_t v = 0;
    if (!(fields >> v) || v >= rows || seen[v]) {
      throw ParseError(source, line_no, "bad or repeated vertex id");
    }
    for (float& x : m.input(v)) {
      if (!(fields >> x)) throw ParseError(source, line_no, "too few embedding values");
    }
    seen[v] = 1;
    ++filled;
  }
  if (filled != rows) {
    throw DataError(source + ": expected " + std::to_string(rows) + " embedding rows");
  }
  return m;
}

double CosineSimilarity(std::span<const float> a, std::span<const float> b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

}  // namespace fedwalk
