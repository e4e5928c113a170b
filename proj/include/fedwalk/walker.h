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

#ifndef FEDWALK_WALKER_H_
#define FEDWALK_WALKER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedwalk/graph.h"
#include "fedwalk/hct.h"
#include "fedwalk/privacy.h"

namespace fedwalk {

// Payload byte model for the communication report.
inline constexpr std::uint64_t kIdBytes = 4;
inline constexpr std::uint64_t kRealBytes = 8;
inline constexpr std::uint64_t kTupleBytes = 16;

// Which vertex a device records when the two-hop predictor fires: the
// skipped 1-hop neighbor (walk reads v, u, u') or the predicted 2-hop
// vertex itself.
enum class PredictorRecords { kSkippedHop, kPredictedHop };

std::string_view ToString(PredictorRecords records);
PredictorRecords ParsePredictorRecords(std::string_view text);

struct WalkConfig {
  std::size_t length = 40;  // vertices per walk
  double epsilon = 2.0;     // encoder budget; 0 = uniform, +inf = identity
  double p = 0.2;           // predictor trigger probability
  std::size_t gamma = 80;   // walks per vertex
  PredictorRecords records = PredictorRecords::kSkippedHop;

  // Throws std::invalid_argument when a field is out of range.
  void Validate() const;
};

// How position i+1 of a walk relates to position i.
enum class HopKind : std::uint8_t {
  kEdge,       // genuine graph edge
  kPredicted,  // bridged by the two-hop predictor
  kTeleport,   // the device had no neighbors and restarted uniformly
};

struct WalkSequence {
  std::vector<VertexId> encoded;    // what the server receives
  std::vector<VertexId> true_path;  // diagnostics only
  std::vector<HopKind> hops;        // size length-1
};

struct CommStats {
  std::uint64_t device_to_device = 0;
  std::uint64_t device_to_server = 0;
  std::uint64_t server_to_device = 0;
  std::uint64_t device_to_device_bytes = 0;
  std::uint64_t device_to_server_bytes = 0;
  std::uint64_t server_to_device_bytes = 0;
  // Subset of server_to_device spent on the tree/dissimilarity broadcast.
  std::uint64_t broadcast_messages = 0;
  std::uint64_t broadcast_bytes = 0;

  CommStats& operator+=(const CommStats& other);
  friend bool operator==(const CommStats&, const CommStats&) = default;
};

inline constexpr VertexId kServer = 0xffffffffu;

struct WalkEvent {
  enum class Kind { kBroadcast, kDispatch, kHop, kUpload };
  Kind kind;
  VertexId from;  // kServer for server-originated messages
  VertexId to;    // kServer for uploads
  std::uint64_t bytes;
};
using WalkEventSink = std::function<void(const WalkEvent&)>;

// -dissim(v1, v2) * |leaves(T[v1 v v2])|
double EncoderScore(VertexId v1, VertexId v2, const DissimilarityMatrix& dissim,
                    const Hct& tree);

// Samples a surrogate for v over all of V with probability proportional to
// exp(epsilon * EncoderScore(v, .)).
VertexId EncodeVertex(VertexId v, const DissimilarityMatrix& dissim, const Hct& tree,
                      double epsilon, RandomSource& rng);

// Pool: for each bin j, the round(max(c_u[j], 0)) bin-j vertices nearest to u
// in the tree (ties by id, u excluded, capped at the bin size). Returns a
// uniform pool member, or a uniform vertex of V \ {u} when the pool is empty.
VertexId PredictTwoHop(VertexId u, std::span<const double> c_u, const Hct& tree,
                       const BinAssignment& bins, RandomSource& rng);

// Published closed form for the expected device-to-device messages of an
// l-vertex walk (E_1 = 0, E_2 = 1 handled explicitly).
double ExpectedMessages(std::size_t length, double p);
// Exact expectation of the simulated process: the solution of
// E_l = p (E_{l-2} + 1) + (1 - p)(E_{l-1} + 1), E_1 = 0, E_2 = 1.
double ExactExpectedMessages(std::size_t length, double p);
// The same recurrence evaluated step by step.
double RecurrenceExpectedMessages(std::size_t length, double p);
// |V| gamma [(l - 1) - E_l] with the published E_l.
double ExpectedSavings(std::size_t length, double p, std::size_t num_vertices,
                       std::size_t gamma);

struct WalkResult {
  WalkSequence walk;
  CommStats stats;
};

struct Corpus {
  std::vector<WalkSequence> walks;
  CommStats stats;
};

// Everything a device may consult while holding the walk token: its own view,
// the broadcast degree-vector dictionary, the bin plan, the tree and the
// dissimilarity matrix. Encoder distributions and predictor pools are cached
// lazily per vertex and are safe to build from several threads.
class WalkEngine {
 public:
  WalkEngine(std::span<const DeviceView> views, std::span<const DegreeVector> vectors,
             const BinAssignment& bins, const DissimilarityMatrix& dissim,
             const Hct& tree, WalkConfig config);
  ~WalkEngine();

  const WalkConfig& config() const { return config_; }
  std::size_t num_vertices() const { return views_.size(); }

  VertexId Encode(VertexId v, RandomSource& rng) const;
  VertexId Predict(VertexId u, RandomSource& rng) const;

  // Throws std::invalid_argument when `start` has no neighbors.
  WalkResult RunWalk(VertexId start, RandomSource& rng,
                     const WalkEventSink& sink = nullptr) const;

  // gamma passes over the non-isolated vertices in a per-pass shuffled order.
  // Walk w of pass r draws from stream (seed, kWalk, r * |V| + w), so the
  // corpus does not depend on `threads`. Events reach `sink` in corpus order.
  Corpus GenerateCorpus(std::uint64_t seed, std::size_t threads = 1,
                        const WalkEventSink& sink = nullptr) const;

  // Bytes of the tree plus dissimilarity broadcast to one device.
  std::uint64_t BroadcastBytes() const;

 private:
  struct Cache;

  std::span<const DeviceView> views_;
  std::span<const DegreeVector> vectors_;
  const BinAssignment& bins_;
  const DissimilarityMatrix& dissim_;
  const Hct& tree_;
  WalkConfig config_;
  std::unique_ptr<Cache> cache_;
};

// One walk per line, space-separated encoded ids.
void WriteCorpus(const Corpus& corpus, std::ostream& out);
std::vector<std::vector<VertexId>> ReadCorpus(std::istream& in, const std::string& source);

}  // namespace fedwalk

#endif  // FEDWALK_WALKER_H_
