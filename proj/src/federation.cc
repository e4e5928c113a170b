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

#include "fedwalk/federation.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "fedwalk/error.h"

namespace fedwalk {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kKindNames[kNumMessageKinds] = {
    "group-plan",  "degree-vector", "vector-dictionary", "degree-matrix",
    "hct-broadcast", "walk-dispatch", "walk-hop",        "walk-upload",
};

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t ParseSize(std::string_view key, std::string_view text) {
  text = Trim(text);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" +
                                std::string(text) + "'");
  }
  return static_cast<std::size_t>(value);
}

double ParseReal(std::string_view key, std::string_view text) {
  text = Trim(text);
  if (text == "inf" || text == "+inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || std::isnan(value)) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" +
                                std::string(text) + "'");
  }
  return value;
}

// Shortest text that parses back to the same double.
std::string FormatReal(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  return in;
}

void CheckWritten(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

MessageKind KindOf(WalkEvent::Kind kind) {
  switch (kind) {
    case WalkEvent::Kind::kBroadcast:
      return MessageKind::kHctBroadcast;
    case WalkEvent::Kind::kDispatch:
      return MessageKind::kWalkDispatch;
    case WalkEvent::Kind::kHop:
      return MessageKind::kWalkHop;
    case WalkEvent::Kind::kUpload:
      return MessageKind::kWalkUpload;
  }
  throw InvariantError("unknown walk event kind");
}

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    auto item = Trim(text.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string_view ToString(MessageKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

void MessageLog::Record(const MessageRecord& record) {
  const bool from_server = record.src == kServer;
  const bool to_server = record.dst == kServer;
  FEDWALK_CHECK(!(from_server && to_server), "server cannot message itself");
  const bool device_pair = !from_server && !to_server;
  if (record.kind == MessageKind::kWalkHop) {
    FEDWALK_CHECK(device_pair, "walk-hop must connect two devices");
  } else {
    FEDWALK_CHECK(!device_pair, std::string("device-to-device ") +
                                    std::string(ToString(record.kind)) + " message");
  }
  ++counts_[Slot(record.kind)];
  bytes_[Slot(record.kind)] += record.bytes;
  if (device_pair) {
    ++device_to_device_;
  } else if (to_server) {
    ++device_to_server_;
  } else {
    ++server_to_device_;
  }
  if (records_.size() < max_records_) records_.push_back(record);
}

std::uint64_t MessageLog::total_count() const {
  std::uint64_t total = 0;
  for (auto c : counts_) total += c;
  return total;
}

void MessageLog::Write(std::ostream& out) const {
  auto endpoint = [](VertexId id) {
    return id == kServer ? std::string("SERVER") : std::to_string(id);
  };
  for (const auto& r : records_) {
    out << ToString(r.kind) << ' ' << endpoint(r.src) << ' ' << endpoint(r.dst) << ' '
        << r.bytes << '\n';
  }
  if (truncated()) {
    out << "# truncated: " << records_.size() << " of " << total_count()
        << " records kept\n";
  }
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  key = Trim(key);
  if (key == "k") {
    k = ParseSize(key, value);
  } else if (key == "epsilon") {
    epsilon = ParseReal(key, value);
  } else if (key == "l") {
    l = ParseSize(key, value);
  } else if (key == "p") {
    p = ParseReal(key, value);
  } else if (key == "gamma") {
    gamma = ParseSize(key, value);
  } else if (key == "d") {
    d = ParseSize(key, value);
  } else if (key == "w") {
    w = ParseSize(key, value);
  } else if (key == "seed") {
    seed = ParseSize(key, value);
  } else if (key == "train_ratios" || key == "T_R") {
    train_ratios.clear();
    for (const auto& item : SplitList(value)) train_ratios.push_back(ParseReal(key, item));
  } else if (key == "predictor_records") {
    predictor_records = ParsePredictorRecords(Trim(value));
  } else if (key == "negatives") {
    negatives = ParseSize(key, value);
  } else if (key == "epochs") {
    epochs = ParseSize(key, value);
  } else if (key == "lr_start") {
    lr_start = ParseReal(key, value);
  } else if (key == "lr_end") {
    lr_end = ParseReal(key, value);
  } else if (key == "threads") {
    threads = ParseSize(key, value);
  } else {
    throw std::invalid_argument("unknown config key: " + std::string(key));
  }
}

void RunConfig::Validate() const {
  Walk().Validate();
  SkipGram().Validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (train_ratios.empty()) throw std::invalid_argument("train_ratios is empty");
  for (double r : train_ratios) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("train ratio must lie in (0, 1)");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

std::size_t RunConfig::ResolvedK(std::size_t num_vertices) const {
  return k == 0 ? DefaultBinCount(num_vertices) : k;
}

WalkConfig RunConfig::Walk() const {
  WalkConfig c;
  c.length = l;
  c.epsilon = epsilon;
  c.p = p;
  c.gamma = gamma;
  c.records = predictor_records;
  return c;
}

SkipGramConfig RunConfig::SkipGram() const {
  SkipGramConfig c;
  c.dim = d;
  c.window = w;
  c.negatives = negatives;
  c.lr_start = lr_start;
  c.lr_end = lr_end;
  c.epochs = epochs;
  c.threads = threads;
  return c;
}

std::vector<std::pair<std::string, std::string>> RunConfig::Echo() const {
  std::string ratios;
  for (std::size_t i = 0; i < train_ratios.size(); ++i) {
    if (i > 0) ratios += ",";
    ratios += FormatReal(train_ratios[i]);
  }
  return {
      {"k", k == 0 ? "auto" : std::to_string(k)},
      {"epsilon", FormatReal(epsilon)},
      {"l", std::to_string(l)},
      {"p", FormatReal(p)},
      {"gamma", std::to_string(gamma)},
      {"d", std::to_string(d)},
      {"w", std::to_string(w)},
      {"seed", std::to_string(seed)},
      {"train_ratios", ratios},
      {"predictor_records", std::string(ToString(predictor_records))},
      {"negatives", std::to_string(negatives)},
      {"epochs", std::to_string(epochs)},
      {"lr_start", FormatReal(lr_start)},
      {"lr_end", FormatReal(lr_end)},
      {"threads", std::to_string(threads)},
  };
}

std::uint64_t RunConfig::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [key, value] : Echo()) {
    if (key == "threads") continue;
    for (char c : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string RunConfig::HashHex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(Hash()));
  return buf;
}

std::string RunConfig::ProvenanceLine() const {
  return "# fedwalk " + std::string(kToolVersion) + " config=" + HashHex() +
         " seed=" + std::to_string(seed);
}

DegreeVector Device::OnGroupPlan(const BinAssignment& plan, double epsilon,
                                 RandomSource& rng) const {
  return LocalDegreeVector(view_, plan, epsilon, rng);
}

OrderedDegreeMatrix Device::OnVectorDictionary(std::span<const DegreeVector> dictionary,
                                               std::size_t k) const {
  OrderedDegreeMatrix full = BuildOrderedDegreeMatrix(view_, dictionary, k);
  auto values = full.values();
  return OrderedDegreeMatrix(full.cols(), std::vector<double>(values.begin(), values.end()),
                             {});
}

Server::Server(std::size_t num_vertices, std::size_t k)
    : num_vertices_(num_vertices),
      k_(k),
      vectors_(num_vertices),
      matrices_(num_vertices),
      have_vector_(num_vertices, 0),
      have_matrix_(num_vertices, 0) {}

const BinAssignment& Server::PlanBins(RandomSource& rng) {
  bins_ = AssignBins(num_vertices_, k_, rng);
  return bins_;
}

void Server::OnDegreeVector(VertexId from, DegreeVector vector) {
  FEDWALK_CHECK(from < num_vertices_ && !have_vector_[from], "unexpected degree vector");
  FEDWALK_CHECK(vector.size() == k_, "degree vector has the wrong length");
  vectors_[from] = std::move(vector);
  have_vector_[from] = 1;
}

void Server::OnDegreeMatrix(VertexId from, OrderedDegreeMatrix matrix) {
  FEDWALK_CHECK(from < num_vertices_ && !have_matrix_[from], "unexpected degree matrix");
  FEDWALK_CHECK(matrix.row_vertices().empty(), "degree matrix upload carries neighbor ids");
  FEDWALK_CHECK(matrix.cols() == k_ && matrix.rows() >= 1, "malformed degree matrix");
  matrices_[from] = std::move(matrix);
  have_matrix_[from] = 1;
}

DissimilarityMatrix Server::ComputeDissimilarity(std::size_t threads) const {
  FEDWALK_CHECK(std::all_of(have_matrix_.begin(), have_matrix_.end(),
                            [](char c) { return c != 0; }),
                "clustering started before every device replied");
  return ComputeDissimilarityMatrix(matrices_, threads);
}

std::vector<Device> MakeDevices(const Graph& graph) {
  std::vector<Device> devices;
  devices.reserve(graph.num_vertices());
  for (auto& view : MakeDeviceViews(graph)) devices.emplace_back(std::move(view));
  return devices;
}

HctArtifacts RunHctProtocol(std::span<const Device> devices, const RunConfig& config,
                            MessageLog& log) {
  const std::size_t n = devices.size();
  if (n == 0) throw DataError("graph has no vertices");
  for (VertexId v = 0; v < n; ++v) {
    FEDWALK_CHECK(devices[v].id() == v, "device registry must be indexed by vertex id");
  }
  const std::size_t k = config.ResolvedK(n);
  if (k > n) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds |V| = " +
                                std::to_string(n));
  }
  Server server(n, k);
  auto plan_rng = RandomSource::For(config.seed, RandomSource::Role::kBinPlan);
  const BinAssignment& plan = server.PlanBins(plan_rng);

  // Round 1: group plan out, noised degree vectors back.
  const std::uint64_t plan_bytes = kIdBytes * (n + 1);
  for (const Device& device : devices) {
    log.Record({MessageKind::kGroupPlan, kServer, device.id(), plan_bytes});
    auto rng = RandomSource::For(config.seed, RandomSource::Role::kDeviceNoise, device.id());
    DegreeVector vector = device.OnGroupPlan(plan, config.epsilon, rng);
    log.Record({MessageKind::kDegreeVector, device.id(), kServer, kRealBytes * k});
    server.OnDegreeVector(device.id(), std::move(vector));
  }

  // Round 2: dictionary out, ordered degree matrices back.
  const std::uint64_t dictionary_bytes = kRealBytes * k * n;
  for (const Device& device : devices) {
    log.Record({MessageKind::kVectorDictionary, kServer, device.id(), dictionary_bytes});
    OrderedDegreeMatrix matrix = device.OnVectorDictionary(server.dictionary(), k);
    log.Record({MessageKind::kDegreeMatrix, device.id(), kServer,
                kRealBytes * matrix.values().size()});
    server.OnDegreeMatrix(device.id(), std::move(matrix));
  }

  HctArtifacts out;
  out.dissim = server.ComputeDissimilarity(config.threads);
  out.tree = BuildHct(out.dissim);
  out.bins = server.bins();
  out.vectors = server.TakeVectors();
  return out;
}

WalkOutput RunWalkProtocol(std::span<const Device> devices, const HctArtifacts& hct,
                           const RunConfig& config, MessageLog& log) {
  std::vector<DeviceView> views;
  views.reserve(devices.size());
  for (const Device& device : devices) views.push_back(device.view());
  if (hct.tree.num_leaves() != views.size() || hct.dissim.size() != views.size() ||
      hct.vectors.size() != views.size() || hct.bins.num_vertices() != views.size()) {
    throw DataError("tree artifacts were built for " + std::to_string(hct.tree.num_leaves()) +
                    " vertices, graph has " + std::to_string(views.size()));
  }
  WalkEngine engine(views, hct.vectors, hct.bins, hct.dissim, hct.tree, config.Walk());
  WalkOutput out;
  out.corpus = engine.GenerateCorpus(
      config.seed, config.threads,
      [&log](const WalkEvent& e) { log.Record({KindOf(e.kind), e.from, e.to, e.bytes}); });
  out.stats = out.corpus.stats;
  FEDWALK_CHECK(log.count(MessageKind::kWalkHop) == out.stats.device_to_device,
                "device-to-device traffic without matching walk-hop records");
  return out;
}

void WriteBins(const BinAssignment& bins, const std::string& provenance, std::ostream& out) {
  out << provenance << '\n' << "k " << bins.k << '\n';
  for (VertexId v = 0; v < bins.num_vertices(); ++v) out << v << ' ' << bins.bin_of[v] << '\n';
}

BinAssignment ReadBins(std::istream& in, const std::string& source) {
  BinAssignment bins;
  std::string line;
  std::size_t line_no = 0;
  bool have_k = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    if (!have_k) {
      std::string tag;
      if (!(fields >> tag >> bins.k) || tag != "k" || bins.k == 0) {
        throw ParseError(source, line_no, "expected `k <bins>`");
      }
      have_k = true;
      continue;
    }
    std::size_t v = 0;
    std::uint32_t bin = 0;
    if (!(fields >> v >> bin) || v != bins.bin_of.size() || bin >= bins.k) {
      throw ParseError(source, line_no, "expected `vertex bin` in vertex order");
    }
    bins.bin_of.push_back(bin);
  }
  if (!have_k) throw DataError(source + ": missing bin count");
  return bins;
}

void WriteVectors(std::span<const DegreeVector> vectors, const std::string& provenance,
                  std::ostream& out) {
  out << provenance << '\n';
  for (VertexId v = 0; v < vectors.size(); ++v) {
    out << v;
    for (double x : vectors[v]) out << ' ' << FormatReal(x);
    out << '\n';
  }
}

std::vector<DegreeVector> ReadVectors(std::istream& in, const std::string& source) {
  std::vector<DegreeVector> vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::size_t v = 0;
    if (!(fields >> v) || v != vectors.size()) {
      throw ParseError(source, line_no, "expected vectors in vertex order");
    }
    DegreeVector vec;
    std::string token;
    while (fields >> token) vec.push_back(ParseReal("vector entry", token));
    if (vec.empty() || (!vectors.empty() && vec.size() != vectors.front().size())) {
      throw ParseError(source, line_no, "degree vectors must share one non-zero length");
    }
    vectors.push_back(std::move(vec));
  }
  return vectors;
}

void SaveHctArtifacts(const std::filesystem::path& dir, const HctArtifacts& hct,
                      const RunConfig& config) {
  std::filesystem::create_directories(dir);
  const std::string provenance = config.ProvenanceLine();
  {
    auto out = OpenForWrite(dir / "bins.txt");
    WriteBins(hct.bins, provenance, out);
    CheckWritten(out, dir / "bins.txt");
  }
  {
    auto out = OpenForWrite(dir / "vectors.txt");
    WriteVectors(hct.vectors, provenance, out);
    CheckWritten(out, dir / "vectors.txt");
  }
  {
    auto out = OpenForWrite(dir / "hct.txt");
    out << provenance << '\n';
    hct.tree.Write(out);
    CheckWritten(out, dir / "hct.txt");
  }
  DissimilarityHeader header;
  header.num_vertices = hct.dissim.size();
  header.k = hct.bins.k;
  header.epsilon = config.epsilon;
  header.seed = config.seed;
  header.config_hash = config.Hash();
  WriteDissimilarity(dir / "dissim.bin", hct.dissim, header);
}

HctArtifacts LoadHctArtifacts(const std::filesystem::path& dir) {
  HctArtifacts hct;
  {
    auto in = OpenForRead(dir / "bins.txt");
    hct.bins = ReadBins(in, (dir / "bins.txt").string());
  }
  {
    auto in = OpenForRead(dir / "vectors.txt");
    hct.vectors = ReadVectors(in, (dir / "vectors.txt").string());
  }
  {
    auto in = OpenForRead(dir / "hct.txt");
    hct.tree = Hct::Read(in, (dir / "hct.txt").string());
  }
  hct.dissim = ReadDissimilarity(dir / "dissim.bin");
  const std::size_t n = hct.tree.num_leaves();
  if (hct.bins.num_vertices() != n || hct.vectors.size() != n || hct.dissim.size() != n) {
    throw DataError(dir.string() + ": tree artifacts disagree on the vertex count");
  }
  if (!hct.vectors.empty() && hct.vectors.front().size() != hct.bins.k) {
    throw DataError(dir.string() + ": degree vectors do not have k entries");
  }
  return hct;
}

namespace {

Json Provenance(const RunConfig& config) {
  Json j;
  j["tool"] = "fedwalk";
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = config.HashHex();
  j["seed"] = config.seed;
  return j;
}

Json ConfigJson(const RunConfig& config) {
  Json j = Json::object();
  for (const auto& [key, value] : config.Echo()) j[key] = value;
  return j;
}

}  // namespace

std::string CommReportJson(const WalkOutput& walks, const MessageLog& log,
                           const RunConfig& config, std::size_t num_vertices) {
  const auto& s = walks.stats;
  const double num_walks = static_cast<double>(walks.corpus.walks.size());
  Json j;
  j["provenance"] = Provenance(config);
  j["num_vertices"] = num_vertices;
  j["num_walks"] = walks.corpus.walks.size();
  j["walk_length"] = config.l;
  j["p"] = config.p;
  j["device_to_device"] = s.device_to_device;
  j["device_to_device_bytes"] = s.device_to_device_bytes;
  j["device_to_server"] = s.device_to_server;
  j["device_to_server_bytes"] = s.device_to_server_bytes;
  j["server_to_device"] = s.server_to_device;
  j["server_to_device_bytes"] = s.server_to_device_bytes;
  j["broadcast_messages"] = s.broadcast_messages;
  j["broadcast_bytes"] = s.broadcast_bytes;
  j["per_walk_device_to_device_mean"] =
      num_walks > 0 ? static_cast<double>(s.device_to_device) / num_walks : 0.0;
  j["per_walk_device_to_device_expected"] = ExpectedMessages(config.l, config.p);
  j["per_walk_device_to_device_expected_exact"] = ExactExpectedMessages(config.l, config.p);
  j["per_walk_excludes_broadcast"] = true;
  Json kinds = Json::object();
  for (std::size_t i = 0; i < kNumMessageKinds; ++i) {
    const auto kind = static_cast<MessageKind>(i);
    kinds[std::string(ToString(kind))] = {{"count", log.count(kind)},
                                          {"bytes", log.bytes(kind)}};
  }
  j["messages_by_kind"] = kinds;
  j["message_log_truncated"] = log.truncated();
  j["config"] = ConfigJson(config);
  return j.dump(2) + "\n";
}

std::string MetricsJson(std::span<const EvalResult> results, const RunConfig& config) {
  Json j;
  j["provenance"] = Provenance(config);
  j["thresholding"] = "top-k per test vertex, k = its true label count";
  Json rows = Json::array();
  for (const auto& r : results) {
    Json row;
    row["T_R"] = r.train_ratio;
    row["micro_f1"] = r.f1.micro;
    row["macro_f1"] = r.f1.macro;
    row["per_label_f1"] = r.f1.per_label;
    row["skipped_labels"] = r.skipped_labels;
    row["train_size"] = r.train_size;
    row["test_size"] = r.test_size;
    row["seed"] = r.seed;
    rows.push_back(std::move(row));
  }
  j["results"] = std::move(rows);
  j["config"] = ConfigJson(config);
  return j.dump(2) + "\n";
}

void RethrowWithStage(std::string_view stage) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    throw;
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(prefix + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(prefix + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw DataError(prefix + e.what());
  } catch (const std::exception& e) {
    throw InvariantError(prefix + e.what());
  }
}

PipelineResult RunPipeline(const PipelinePaths& paths, const RunConfig& config) {
  config.Validate();
  const auto& dir = paths.out_dir;
  const std::string provenance = config.ProvenanceLine();

  Graph graph = RunStage("load", [&] {
    std::filesystem::create_directories(dir);
    return LoadEdgeList(paths.edges);
  });
  std::optional<LabelSet> labels;
  if (paths.labels) {
    labels = RunStage("load", [&] { return LoadLabels(*paths.labels, graph); });
  }

  RunStage("load", [&] {
    auto out = OpenForWrite(dir / "config.txt");
    out << provenance << '\n';
    for (const auto& [key, value] : config.Echo()) out << key << " = " << value << '\n';
    CheckWritten(out, dir / "config.txt");
    auto ids = OpenForWrite(dir / "id_map.txt");
    ids << provenance << '\n';
    WriteIdMap(graph, ids);
    CheckWritten(ids, dir / "id_map.txt");
  });

  const std::vector<Device> devices = MakeDevices(graph);
  MessageLog log;
  HctArtifacts hct = RunStage("hct", [&] {
    HctArtifacts out = RunHctProtocol(devices, config, log);
    SaveHctArtifacts(dir, out, config);
    return out;
  });

  WalkOutput walks = RunStage("walk", [&] {
    WalkOutput out = RunWalkProtocol(devices, hct, config, log);
    auto corpus = OpenForWrite(dir / "corpus.txt");
    corpus << provenance << '\n';
    WriteCorpus(out.corpus, corpus);
    CheckWritten(corpus, dir / "corpus.txt");
    auto report = OpenForWrite(dir / "comm_report.json");
    report << CommReportJson(out, log, config, graph.num_vertices());
    CheckWritten(report, dir / "comm_report.json");
    auto messages = OpenForWrite(dir / "messages.log");
    messages << provenance << '\n';
    log.Write(messages);
    CheckWritten(messages, dir / "messages.log");
    return out;
  });

  EmbeddingMatrix embeddings = RunStage("embed", [&] {
    std::vector<std::vector<VertexId>> sequences;
    sequences.reserve(walks.corpus.walks.size());
    for (const auto& walk : walks.corpus.walks) sequences.push_back(walk.encoded);
    EmbeddingMatrix m =
        TrainSkipGram(sequences, graph.num_vertices(), config.SkipGram(), config.seed);
    auto out = OpenForWrite(dir / "embeddings.txt");
    out << provenance << '\n';
    WriteEmbeddings(m, out);
    CheckWritten(out, dir / "embeddings.txt");
    return m;
  });

  PipelineResult result;
  result.walk_stats = walks.stats;
  result.num_vertices = graph.num_vertices();
  result.num_walks = walks.corpus.walks.size();
  if (labels) {
    result.metrics = RunStage("eval", [&] {
      std::vector<EvalResult> metrics;
      for (double ratio : config.train_ratios) {
        metrics.push_back(EvaluateEmbeddings(embeddings, *labels, {ratio, config.seed}));
      }
      auto out = OpenForWrite(dir / "metrics.json");
      out << MetricsJson(metrics, config);
      CheckWritten(out, dir / "metrics.json");
      return metrics;
    });
  }
  return result;
}

}  // namespace fedwalk
