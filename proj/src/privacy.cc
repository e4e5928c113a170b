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

#include "fedwalk/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fedwalk {
namespace {

void CheckEpsilon(double epsilon, bool allow_zero) {
  if (std::isnan(epsilon) || epsilon < 0.0 || (!allow_zero && epsilon == 0.0)) {
    throw std::invalid_argument("epsilon must be positive, got " +
                                std::to_string(epsilon));
  }
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

RandomSource RandomSource::For(std::uint64_t seed, Role role, std::uint64_t index) {
  return RandomSource(seed, (static_cast<std::uint64_t>(role) << 48) | index);
}

double RandomSource::Uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

std::size_t RandomSource::UniformIndex(std::size_t n) {
  if (n == 0) throw std::invalid_argument("UniformIndex over an empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

PrivacyParams::PrivacyParams(double epsilon) : epsilon_(epsilon) {
  CheckEpsilon(epsilon, /*allow_zero=*/false);
}

bool PrivacyParams::noiseless() const { return std::isinf(epsilon_); }

double LaplaceSample(double epsilon, RandomSource& rng) {
  CheckEpsilon(epsilon, /*allow_zero=*/false);
  if (std::isinf(epsilon)) return 0.0;
  const double scale = 1.0 / epsilon;
  // u in (-1/2, 1/2); the open endpoint is excluded by redrawing.
  double u = 0.0;
  double tail = 0.0;
  do {
    u = rng.Uniform() - 0.5;
    tail = 1.0 - 2.0 * std::fabs(u);
  } while (tail <= 0.0);
  return -scale * std::copysign(1.0, u) * std::log(tail);
}

std::vector<double> NoiseCounts(std::span<const double> counts, double epsilon,
                                RandomSource& rng) {
  CheckEpsilon(epsilon, /*allow_zero=*/false);
  std::vector<double> out(counts.begin(), counts.end());
  for (double& x : out) x += LaplaceSample(epsilon, rng);
  return out;
}

std::vector<double> ExponentialProbabilities(std::span<const double> scores,
                                             double epsilon) {
  if (scores.empty()) throw std::invalid_argument("empty score list");
  CheckEpsilon(epsilon, /*allow_zero=*/true);
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> weights(scores.size());
  if (std::isinf(epsilon)) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      weights[i] = scores[i] == top ? 1.0 : 0.0;
    }
  } else {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      weights[i] = std::exp(epsilon * (scores[i] - top));
    }
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return weights;
}

std::size_t ExponentialSample(std::span<const double> scores, double epsilon,
                              RandomSource& rng) {
  auto probabilities = ExponentialProbabilities(scores, epsilon);
  return DiscreteSampler(probabilities).Sample(rng);
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights)
    : cumulative_(weights.size()) {
  double running = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw std::invalid_argument("sampler weights must be non-negative");
    }
    running += weights[i];
    cumulative_[i] = running;
  }
  if (!(running > 0.0)) throw std::invalid_argument("sampler weights sum to zero");
}

std::size_t DiscreteSampler::Sample(RandomSource& rng) const {
  const double target = rng.Uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t index = static_cast<std::size_t>(it - cumulative_.begin());
  // Rounding can leave target == back(); also skip trailing zero weights.
  if (index >= cumulative_.size()) index = cumulative_.size() - 1;
  while (index > 0 && cumulative_[index] == cumulative_[index - 1]) --index;
  return index;
}

double DiscreteSampler::probability(std::size_t i) const {
  const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
  return (cumulative_[i] - lo) / cumulative_.back();
}

}  // namespace fedwalk
