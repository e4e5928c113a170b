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

#ifndef FEDWALK_PRIVACY_H_
#define FEDWALK_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fedwalk {

// Deterministic random stream. Identical (seed, stream) pairs produce
// identical draw sequences. Not shareable between threads.
class RandomSource {
 public:
  // Protocol roles get disjoint stream ranges: stream = role << 48 | index.
  enum class Role : std::uint64_t {
    kBinPlan = 1,
    kDeviceNoise = 2,
    kWalkSchedule = 3,
    kWalk = 4,
    kEmbedding = 5,
    kSplit = 6,
    kFixture = 7,
  };

  RandomSource(std::uint64_t seed, std::uint64_t stream);
  static RandomSource For(std::uint64_t seed, Role role, std::uint64_t index = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Uniform in [0, 1).
  double Uniform();
  // Uniform in {0, ..., n-1}; n must be positive.
  std::size_t UniformIndex(std::size_t n);
  bool Bernoulli(double p) { return Uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// Privacy budget of one mechanism invocation. +infinity is accepted as the
// noiseless limit (zero Laplace noise, argmax exponential mechanism).
class PrivacyParams {
 public:
  explicit PrivacyParams(double epsilon);
  double epsilon() const { return epsilon_; }
  bool noiseless() const;

 private:
  double epsilon_;
};

// One draw from Laplace(0, 1/epsilon) by inverse CDF. Throws
// std::invalid_argument for epsilon <= 0 or NaN.
double LaplaceSample(double epsilon, RandomSource& rng);

// counts[i] + Laplace(0, 1/epsilon), i.i.d. per element.
std::vector<double> NoiseCounts(std::span<const double> counts, double epsilon,
                                RandomSource& rng);

// Exponential-mechanism distribution exp(eps * s_i) / sum_j exp(eps * s_j),
// evaluated with a max shift. eps == 0 gives uniform; eps == +inf puts equal
// mass on every maximal score.
std::vector<double> ExponentialProbabilities(std::span<const double> scores,
                                             double epsilon);

// Draws index i with the probability above. Throws std::invalid_argument on
// an empty list, a non-finite score or a negative/NaN epsilon.
std::size_t ExponentialSample(std::span<const double> scores, double epsilon,
                              RandomSource& rng);

// Reusable inverse-CDF sampler over unnormalized non-negative weights.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights);

  std::size_t Sample(RandomSource& rng) const;
  std::size_t size() const { return cumulative_.size(); }
  double probability(std::size_t i) const;

 private:
  std::vector<double> cumulative_;
};

}  // namespace fedwalk

#endif  // FEDWALK_PRIVACY_H_
