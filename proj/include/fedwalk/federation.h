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

#ifndef FEDWALK_FEDERATION_H_
#define FEDWALK_FEDERATION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedwalk/embedding.h"
#include "fedwalk/eval.h"
#include "fedwalk/graph.h"
#include "fedwalk/hct.h"
#include "fedwalk/walker.h"

namespace fedwalk {

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class MessageKind : std::uint8_t {
  kGroupPlan,
  kDegreeVector,
  kVectorDictionary,
  kDegreeMatrix,
  kHctBroadcast,
  kWalkDispatch,
  kWalkHop,
  kWalkUpload,
};
inline constexpr std::size_t kNumMessageKinds = 8;

std::string_view ToString(MessageKind kind);

struct MessageRecord {
  MessageKind kind;
  VertexId src;  // kServer for the server
  VertexId dst;
  std::uint64_t bytes;
};

// Per-kind totals are always exact; individual records are kept up to
// `max_records`.
class MessageLog {
 public:
  explicit MessageLog(std::size_t max_records = std::numeric_limits<std::size_t>::max())
      : max_records_(max_records) {}

  // Throws InvariantError for a device-to-device message of any kind other
  // than walk-hop, or a walk-hop touching the server. A predicted hop may
  // land back on its sender.
  void Record(const MessageRecord& record);

  std::uint64_t count(MessageKind kind) const { return counts_[Slot(kind)]; }
  std::uint64_t bytes(MessageKind kind) const { return bytes_[Slot(kind)]; }
  std::uint64_t total_count() const;
  std::uint64_t device_to_device() const { return device_to_device_; }
  std::uint64_t device_to_server() const { return device_to_server_; }
  std::uint64_t server_to_device() const { return server_to_device_; }

  std::span<const MessageRecord> records() const { return records_; }
  bool truncated() const { return total_count() > records_.size(); }

  // One `kind src dst bytes` line per kept record; the server prints as SERVER.
  void Write(std::ostream& out) const;

 private:
  static std::size_t Slot(MessageKind kind) { return static_cast<std::size_t>(kind); }

  std::size_t max_records_;
  std::vector<MessageRecord> records_;
  std::uint64_t counts_[kNumMessageKinds] = {};
  std::uint64_t bytes_[kNumMessageKinds] = {};
  std::uint64_t device_to_device_ = 0;
  std::uint64_t device_to_server_ = 0;
  std::uint64_t server_to_device_ = 0;
};

// Resolved settings of one run. `k == 0` selects DefaultBinCount(|V|). The
// same epsilon drives the Laplace degree noise and the sequence encoder.
struct RunConfig {
  std::size_t k = 0;
  double epsilon = 2.0;
  std::size_t l = 40;
  double p = 0.2;
  std::size_t gamma = 80;
  std::size_t d = 128;
  std::size_t w = 10;
  std::uint64_t seed = 0;
  std::vector<double> train_ratios = {0.5};
  PredictorRecords predictor_records = PredictorRecords::kSkippedHop;
  std::size_t negatives = 5;
  std::size_t epochs = 1;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::size_t threads = 1;

  // Parses one `key = value` assignment; throws std::invalid_argument for an
  // unknown key or an unparsable value.
  void Set(std::string_view key, std::string_view value);
  void Validate() const;

  std::size_t ResolvedK(std::size_t num_vertices) const;
  WalkConfig Walk() const;
  SkipGramConfig SkipGram() const;

  // Key/value pairs in a fixed order; `threads` is reported but not hashed.
  std::vector<std::pair<std::string, std::string>> Echo() const;
  // FNV-1a over the hashed echo lines.
  std::uint64_t Hash() const;
  std::string HashHex() const;
  // `# fedwalk <version> config=<hash> seed=<seed>`
  std::string ProvenanceLine() const;
};

// A device knows its own neighbor list and whatever it has been sent.
class Device {
 public:
  explicit Device(DeviceView view) : view_(std::move(view)) {}

  VertexId id() const { return view_.vertex; }
  const DeviceView& view() const { return view_; }

  DegreeVector OnGroupPlan(const BinAssignment& plan, double epsilon,
                           RandomSource& rng) const;
  // The uploaded matrix carries degree rows only, not neighbor ids.
  OrderedDegreeMatrix OnVectorDictionary(std::span<const DegreeVector> dictionary,
                                         std::size_t k) const;

 private:
  DeviceView view_;
};

// Server state is built from message payloads only.
class Server {
 public:
  Server(std::size_t num_vertices, std::size_t k);

  const BinAssignment& PlanBins(RandomSource& rng);
  void OnDegreeVector(VertexId from, DegreeVector vector);
  std::span<const DegreeVector> dictionary() const { return vectors_; }
  // Throws InvariantError if the upload reveals neighbor ids.
  void OnDegreeMatrix(VertexId from, OrderedDegreeMatrix matrix);

  DissimilarityMatrix ComputeDissimilarity(std::size_t threads) const;

  const BinAssignment& bins() const { return bins_; }
  std::vector<DegreeVector> TakeVectors() { return std::move(vectors_); }

 private:
  std::size_t num_vertices_;
  std::size_t k_;
  BinAssignment bins_;
  std::vector<DegreeVector> vectors_;
  std::vector<OrderedDegreeMatrix> matrices_;
  std::vector<char> have_vector_;
  std::vector<char> have_matrix_;
};

struct HctArtifacts {
  BinAssignment bins;
  std::vector<DegreeVector> vectors;
  DissimilarityMatrix dissim;
  Hct tree;
};

HctArtifacts RunHctProtocol(std::span<const Device> devices, const RunConfig& config,
                            MessageLog& log);

struct WalkOutput {
  Corpus corpus;
  CommStats stats;
};

WalkOutput RunWalkProtocol(std::span<const Device> devices, const HctArtifacts& hct,
                           const RunConfig& config, MessageLog& log);

std::vector<Device> MakeDevices(const Graph& graph);

// Artifact files. Text formats start with the provenance line.
void WriteBins(const BinAssignment& bins, const std::string& provenance, std::ostream& out);
BinAssignment ReadBins(std::istream& in, const std::string& source);
void WriteVectors(std::span<const DegreeVector> vectors, const std::string& provenance,
                  std::ostream& out);
std::vector<DegreeVector> ReadVectors(std::istream& in, const std::string& source);

void SaveHctArtifacts(const std::filesystem::path& dir, const HctArtifacts& hct,
                      const RunConfig& config);
HctArtifacts LoadHctArtifacts(const std::filesystem::path& dir);

std::string CommReportJson(const WalkOutput& walks, const MessageLog& log,
                           const RunConfig& config, std::size_t num_vertices);
std::string MetricsJson(std::span<const EvalResult> results, const RunConfig& config);

struct PipelinePaths {
  std::filesystem::path edges;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path out_dir;
};

struct PipelineResult {
  std::vector<EvalResult> metrics;
  CommStats walk_stats;
  std::size_t num_vertices = 0;
  std::size_t num_walks = 0;
};

// hct -> walks -> skipgram -> eval, persisting every intermediate artifact
// under out_dir. Errors keep their category and are prefixed with the stage.
PipelineResult RunPipeline(const PipelinePaths& paths, const RunConfig& config);

// Must be called from inside a catch block. Rethrows the active exception
// as the same category (DataError, InvariantError, std::invalid_argument)
// with "<stage>: " prepended to its message.
[[noreturn]] void RethrowWithStage(std::string_view stage);

template <typename Body>
auto RunStage(std::string_view stage, Body&& body) -> decltype(body()) {
  try {
    return body();
  } catch (...) {
    RethrowWithStage(stage);
  }
}

}  // namespace fedwalk

#endif  // FEDWALK_FEDERATION_H_
