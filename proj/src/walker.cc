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

#include "fedwalk/walker.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "fedwalk/error.h"

namespace fedwalk {
namespace {

std::vector<double> EncoderScoreRow(VertexId v, const DissimilarityMatrix& dissim,
                                    const Hct& tree) {
  const auto leaves = tree.LcaLeafCountRow(v);
  std::vector<double> scores(dissim.size());
  for (VertexId x = 0; x < scores.size(); ++x) {
    scores[x] = -dissim(v, x) * static_cast<double>(leaves[x]);
  }
  return scores;
}

std::vector<VertexId> BuildPredictorPool(VertexId u, std::span<const double> c_u,
                                         const Hct& tree, const BinAssignment& bins) {
  if (c_u.size() != bins.k) {
    throw std::invalid_argument("degree vector length does not match the bin count");
  }
  const auto distance = tree.TreeDistanceRow(u);
  const auto members = bins.Members();
  std::vector<VertexId> pool;
  for (std::size_t j = 0; j < bins.k; ++j) {
    std::vector<VertexId> candidates;
    candidates.reserve(members[j].size());
    for (VertexId x : members[j]) {
      if (x != u) candidates.push_back(x);
    }
    const double clamped = std::max(c_u[j], 0.0);
    const std::size_t want = std::min<std::size_t>(
        static_cast<std::size_t>(std::llround(clamped)), candidates.size());
    if (want == 0) continue;
    auto nearer = [&distance](VertexId a, VertexId b) {
      return distance[a] != distance[b] ? distance[a] < distance[b] : a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + want, candidates.end(),
                      nearer);
    pool.insert(pool.end(), candidates.begin(), candidates.begin() + want);
  }
  return pool;
}

VertexId DrawFromPool(VertexId u, std::span<const VertexId> pool, std::size_t n,
                      RandomSource& rng) {
  if (!pool.empty()) return pool[rng.UniformIndex(pool.size())];
  if (n < 2) throw std::invalid_argument("no vertex other than u to predict");
  const auto pick = static_cast<VertexId>(rng.UniformIndex(n - 1));
  return pick < u ? pick : pick + 1;
}

}  // namespace

std::string_view ToString(PredictorRecords records) {
  return records == PredictorRecords::kSkippedHop ? "skipped-hop" : "predicted-hop";
}

PredictorRecords ParsePredictorRecords(std::string_view text) {
  if (text == "skipped-hop") return PredictorRecords::kSkippedHop;
  if (text == "predicted-hop") return PredictorRecords::kPredictedHop;
  throw std::invalid_argument("predictor_records must be skipped-hop or predicted-hop, got " +
                              std::string(text));
}

void WalkConfig::Validate() const {
  if (length < 2) throw std::invalid_argument("walk length must be at least 2");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (gamma < 1) throw std::invalid_argument("gamma must be at least 1");
  if (std::isnan(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("encoder epsilon must be non-negative");
  }
}

CommStats& CommStats::operator+=(const CommStats& other) {
  device_to_device += other.device_to_device;
  device_to_server += other.device_to_server;
  server_to_device += other.server_to_device;
  device_to_device_bytes += other.device_to_device_bytes;
  device_to_server_bytes += other.device_to_server_bytes;
  server_to_device_bytes += other.server_to_device_bytes;
  broadcast_messages += other.broadcast_messages;
  broadcast_bytes += other.broadcast_bytes;
  return *this;
}

double EncoderScore(VertexId v1, VertexId v2, const DissimilarityMatrix& dissim,
                    const Hct& tree) {
  return -dissim(v1, v2) * static_cast<double>(tree.LcaLeafCount(v1, v2));
}

VertexId EncodeVertex(VertexId v, const DissimilarityMatrix& dissim, const Hct& tree,
                      double epsilon, RandomSource& rng) {
  const auto scores = EncoderScoreRow(v, dissim, tree);
  return static_cast<VertexId>(ExponentialSample(scores, epsilon, rng));
}

VertexId PredictTwoHop(VertexId u, std::span<const double> c_u, const Hct& tree,
                       const BinAssignment& bins, RandomSource& rng) {
  const auto pool = BuildPredictorPool(u, c_u, tree, bins);
  return DrawFromPool(u, pool, bins.num_vertices(), rng);
}

double ExpectedMessages(std::size_t length, double p) {
  if (length <= 1) return 0.0;
  if (length == 2) return 1.0;
  const double l = static_cast<double>(length);
  const double q = 1.0 + p;
  return (l - 2.0) / q +
         (2.0 - 2.0 * p - 1.0 / q) * (1.0 - std::pow(-p, l - 2.0)) / q;
}

double ExactExpectedMessages(std::size_t length, double p) {
  if (length <= 1) return 0.0;
  const double l = static_cast<double>(length);
  const double q = 1.0 + p;
  return 1.0 + (l - 2.0) / q - p * p * (1.0 - std::pow(-p, l - 2.0)) / (q * q);
}

double RecurrenceExpectedMessages(std::size_t length, double p) {
  if (length <= 1) return 0.0;
  double two_back = 0.0;  // E_1
  double one_back = 1.0;  // E_2
  for (std::size_t l = 3; l <= length; ++l) {
    const double next = p * (two_back + 1.0) + (1.0 - p) * (one_back + 1.0);
    two_back = one_back;
    one_back = next;
  }
  return one_back;
}

double ExpectedSavings(std::size_t length, double p, std::size_t num_vertices,
                       std::size_t gamma) {
  const double per_walk =
      static_cast<double>(length > 0 ? length - 1 : 0) - ExpectedMessages(length, p);
  return static_cast<double>(num_vertices) * static_cast<double>(gamma) * per_walk;
}

struct WalkEngine::Cache {
  explicit Cache(std::size_t n)
      : encoder_once(new std::once_flag[n]),
        encoder(n),
        pool_once(new std::once_flag[n]),
        pool(n) {}

  std::unique_ptr<std::once_flag[]> encoder_once;
  std::vector<DiscreteSampler> encoder;
  std::unique_ptr<std::once_flag[]> pool_once;
  std::vector<std::vector<VertexId>> pool;
};

WalkEngine::WalkEngine(std::span<const DeviceView> views,
                       std::span<const DegreeVector> vectors, const BinAssignment& bins,
                       const DissimilarityMatrix& dissim, const Hct& tree,
                       WalkConfig config)
    : views_(views),
      vectors_(vectors),
      bins_(bins),
      dissim_(dissim),
      tree_(tree),
      config_(config),
      cache_(std::make_unique<Cache>(views.size())) {
  config_.Validate();
  const std::size_t n = views.size();
  if (vectors.size() != n || bins.num_vertices() != n || dissim.size() != n ||
      tree.num_leaves() != n) {
    throw std::invalid_argument("walk inputs disagree on the vertex count");
  }
}

WalkEngine::~WalkEngine() = default;

VertexId WalkEngine::Encode(VertexId v, RandomSource& rng) const {
  std::call_once(cache_->encoder_once[v], [&] {
    cache_->encoder[v] = DiscreteSampler(
        ExponentialProbabilities(EncoderScoreRow(v, dissim_, tree_), config_.epsilon));
  });
  return static_cast<VertexId>(cache_->encoder[v].Sample(rng));
}

VertexId WalkEngine::Predict(VertexId u, RandomSource& rng) const {
  std::call_once(cache_->pool_once[u], [&] {
    cache_->pool[u] = BuildPredictorPool(u, vectors_[u], tree_, bins_);
  });
  return DrawFromPool(u, cache_->pool[u], views_.size(), rng);
}

WalkResult WalkEngine::RunWalk(VertexId start, RandomSource& rng,
                               const WalkEventSink& sink) const {
  if (start >= views_.size()) throw std::out_of_range("walk start out of range");
  if (views_[start].neighbors.empty()) {
    throw std::invalid_argument("walk start vertex " + std::to_string(start) +
                                " is isolated");
  }
  const std::size_t n = views_.size();
  WalkResult result;
  WalkSequence& walk = result.walk;
  CommStats& stats = result.stats;
  walk.encoded.reserve(config_.length);
  walk.true_path.reserve(config_.length);
  walk.hops.reserve(config_.length - 1);

  auto append = [&](VertexId v) {
    walk.true_path.push_back(v);
    walk.encoded.push_back(Encode(v, rng));
  };
  auto send = [&](VertexId from, VertexId to) {
    const std::uint64_t bytes = kTupleBytes + kIdBytes * walk.encoded.size();
    ++stats.device_to_device;
    stats.device_to_device_bytes += bytes;
    if (sink) sink({WalkEvent::Kind::kHop, from, to, bytes});
  };

  VertexId current = start;
  std::size_t budget = config_.length;
  for (;;) {
    // Device operation on `current`, holding a tuple with `budget`.
    if (budget == 1) {
      append(current);
      const std::uint64_t bytes = kIdBytes * walk.encoded.size();
      ++stats.device_to_server;
      stats.device_to_server_bytes += bytes;
      if (sink) sink({WalkEvent::Kind::kUpload, current, kServer, bytes});
      break;
    }
    const auto& neighbors = views_[current].neighbors;
    if (neighbors.empty()) {
      // Reached through a prediction; no edge to follow.
      append(current);
      auto pick = static_cast<VertexId>(rng.UniformIndex(n - 1));
      const VertexId next = pick < current ? pick : pick + 1;
      walk.hops.push_back(HopKind::kTeleport);
      send(current, next);
      current = next;
      budget -= 1;
      continue;
    }
    const VertexId u = neighbors[rng.UniformIndex(neighbors.size())];
    append(current);
    if (budget > 2 && rng.Uniform() < config_.p) {
      const VertexId predicted = Predict(u, rng);
      if (config_.records == PredictorRecords::kSkippedHop) {
        append(u);
        walk.hops.push_back(HopKind::kEdge);
      } else {
        append(predicted);
        walk.hops.push_back(HopKind::kPredicted);
      }
      walk.hops.push_back(HopKind::kPredicted);
      // A backtracking prediction still counts as one send.
      send(current, predicted);
      current = predicted;
      budget -= 2;
    } else {
      walk.hops.push_back(HopKind::kEdge);
      send(current, u);
      current = u;
      budget -= 1;
    }
  }
  FEDWALK_CHECK(walk.encoded.size() == config_.length, "walk length drifted");
  FEDWALK_CHECK(walk.hops.size() + 1 == config_.length, "hop record length drifted");
  FEDWALK_CHECK(stats.device_to_device + 1 <= config_.length,
                "walk used more than l-1 device messages");
  return result;
}

std::uint64_t WalkEngine::BroadcastBytes() const {
  const std::uint64_t n = views_.size();
  const std::uint64_t tree_bytes = n > 0 ? 3 * kIdBytes * (n - 1) : 0;
  const std::uint64_t dissim_bytes = kRealBytes * n * (n > 0 ? n - 1 : 0) / 2;
  return tree_bytes + dissim_bytes;
}

Corpus WalkEngine::GenerateCorpus(std::uint64_t seed, std::size_t threads,
                                  const WalkEventSink& sink) const {
  const std::size_t n = views_.size();
  Corpus corpus;
  const std::uint64_t broadcast = BroadcastBytes();
  for (VertexId v = 0; v < n; ++v) {
    ++corpus.stats.server_to_device;
    corpus.stats.server_to_device_bytes += broadcast;
    ++corpus.stats.broadcast_messages;
    corpus.stats.broadcast_bytes += broadcast;
    if (sink) sink({WalkEvent::Kind::kBroadcast, kServer, v, broadcast});
  }

  std::vector<VertexId> starts;
  for (VertexId v = 0; v < n; ++v) {
    if (!views_[v].neighbors.empty()) starts.push_back(v);
  }
  if (starts.empty()) return corpus;

  threads = std::max<std::size_t>(1, threads);
  constexpr std::size_t kChunk = 4096;
  corpus.walks.reserve(starts.size() * config_.gamma);
  for (std::size_t pass = 0; pass < config_.gamma; ++pass) {
    auto schedule = RandomSource::For(seed, RandomSource::Role::kWalkSchedule, pass);
    std::vector<VertexId> order = starts;
    std::shuffle(order.begin(), order.end(), schedule.engine());

    for (std::size_t base = 0; base < order.size(); base += kChunk) {
      const std::size_t count = std::min(kChunk, order.size() - base);
      std::vector<WalkResult> results(count);
      std::vector<std::vector<WalkEvent>> events(sink ? count : 0);
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= count) return;
          const std::size_t index = base + i;
          auto rng = RandomSource::For(seed, RandomSource::Role::kWalk, pass * n + index);
          WalkEventSink local;
          if (sink) {
            local = [&events, i](const WalkEvent& e) { events[i].push_back(e); };
          }
          results[i] = RunWalk(order[index], rng, local);
        }
      };
      const std::size_t workers = std::min(threads, count);
      if (workers == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
      }
      for (std::size_t i = 0; i < count; ++i) {
        ++corpus.stats.server_to_device;
        corpus.stats.server_to_device_bytes += kTupleBytes;
        if (sink) {
          sink({WalkEvent::Kind::kDispatch, kServer, order[base + i], kTupleBytes});
          for (const auto& e : events[i]) sink(e);
        }
        corpus.stats += results[i].stats;
        corpus.walks.push_back(std::move(results[i].walk));
      }
    }
  }
  return corpus;
}

void WriteCorpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.encoded.size(); ++i) {
      if (i > 0) out << ' ';
      out << walk.encoded[i];
    }
    out << '\n';
  }
}

std::vector<std::vector<VertexId>> ReadCorpus(std::istream& in, const std::string& source) {
  std::vector<std::vector<VertexId>> walks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<VertexId> walk;
    long long id = 0;
    while (fields >> id) {
      if (id < 0 || id > 0xfffffffeLL) throw ParseError(source, line_no, "bad vertex id");
      walk.push_back(static_cast<VertexId>(id));
    }
    if (!fields.eof()) throw ParseError(source, line_no, "malformed walk line");
    if (!walk.empty()) walks.push_back(std::move(walk));
  }
  return walks;
}

}  // namespace fedwalk
