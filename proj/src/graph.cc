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

#include "fedwalk/graph.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "fedwalk/error.h"

namespace fedwalk {
namespace {

std::string_view StripComment(std::string_view line) {
  if (auto pos = line.find('#'); pos != std::string_view::npos) {
    line = line.substr(0, pos);
  }
  return line;
}

bool IsSeparator(char c) {
  return c == ' ' || c == '\t' || c == ',' || c == '\r';
}

// Splits on whitespace and commas.
std::vector<std::string_view> Tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSeparator(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !IsSeparator(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool ParseUnsigned(std::string_view token, std::uint64_t& value) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  return in;
}

}  // namespace

Graph Graph::FromEdges(std::size_t num_vertices,
                       std::span<const std::pair<VertexId, VertexId>> edges) {
  std::vector<std::vector<VertexId>> adjacency(num_vertices);
  for (auto [u, v] : edges) {
    if (u >= num_vertices || v >= num_vertices) {
      throw DataError("edge endpoint out of range: " + std::to_string(u) +
                      " " + std::to_string(v));
    }
    if (u == v) throw DataError("self-loop on vertex " + std::to_string(u));
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }
  Graph g;
  g.offsets_.reserve(num_vertices + 1);
  g.offsets_.push_back(0);
  for (auto& row : adjacency) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.neighbors_.insert(g.neighbors_.end(), row.begin(), row.end());
    g.offsets_.push_back(g.neighbors_.size());
  }
  g.original_ids_.resize(num_vertices);
  for (std::size_t i = 0; i < num_vertices; ++i) g.original_ids_[i] = i;
  return g;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (VertexId v = 0; v < num_vertices(); ++v) best = std::max(best, degree(v));
  return best;
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

std::int64_t Graph::dense_id(std::uint64_t original) const {
  auto it = std::lower_bound(original_ids_.begin(), original_ids_.end(), original);
  if (it == original_ids_.end() || *it != original) return -1;
  return it - original_ids_.begin();
}

std::vector<std::pair<VertexId, VertexId>> Graph::Edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(num_edges());
  for (VertexId u = 0; u < num_vertices(); ++u) {
    for (VertexId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph LoadEdgeList(const std::filesystem::path& path) {
  auto in = OpenOrThrow(path);
  return LoadEdgeList(in, path.string());
}

// A line with a single id declares a (possibly isolated) vertex; this keeps
// WriteEdgeList -> LoadEdgeList lossless for graphs with isolated vertices.
Graph LoadEdgeList(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw_edges;
  std::vector<std::uint64_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = Tokens(StripComment(line));
    if (tokens.empty()) continue;
    if (tokens.size() > 2) {
      throw ParseError(source, line_no,
                       "expected two vertex ids (weighted edges are not supported)");
    }
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    if (!ParseUnsigned(tokens[0], a) ||
        (tokens.size() == 2 && !ParseUnsigned(tokens[1], b))) {
      throw ParseError(source, line_no, "malformed vertex id");
    }
    ids.push_back(a);
    if (tokens.size() == 1) continue;
    if (a == b) throw ParseError(source, line_no, "self-loop on vertex " + std::to_string(a));
    ids.push_back(b);
    raw_edges.emplace_back(a, b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  auto dense = [&ids](std::uint64_t original) {
    return static_cast<VertexId>(
        std::lower_bound(ids.begin(), ids.end(), original) - ids.begin());
  };
  std::vector<std::pair<VertexId, VertexId>> edges;
  edges.reserve(raw_edges.size());
  for (auto [a, b] : raw_edges) edges.emplace_back(dense(a), dense(b));

  Graph g = Graph::FromEdges(ids.size(), edges);
  g.original_ids_ = std::move(ids);
  return g;
}

void WriteEdgeList(const Graph& graph, std::ostream& out) {
  for (VertexId v = 0; v < graph.num_vertices(); ++v) {
    if (graph.degree(v) == 0) out << graph.original_id(v) << '\n';
  }
  for (auto [u, v] : graph.Edges()) {
    out << graph.original_id(u) << ' ' << graph.original_id(v) << '\n';
  }
}

std::vector<VertexId> LabelSet::LabeledVertices() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < labels.size(); ++v) {
    if (!labels[v].empty()) out.push_back(v);
  }
  return out;
}

LabelSet LoadLabels(const std::filesystem::path& path, const Graph& graph) {
  auto in = OpenOrThrow(path);
  return LoadLabels(in, path.string(), graph.original_ids());
}

LabelSet LoadLabels(std::istream& in, const std::string& source,
                    std::span<const std::uint64_t> original_ids) {
  LabelSet out;
  out.labels.resize(original_ids.size());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = StripComment(line);
    auto first = body.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    body = body.substr(first);
    auto split = body.find_first_of(" \t");
    if (split == std::string_view::npos) {
      throw ParseError(source, line_no, "expected `vertex l1,l2,...`");
    }
    std::uint64_t vertex = 0;
    if (!ParseUnsigned(body.substr(0, split), vertex)) {
      throw ParseError(source, line_no, "malformed vertex id");
    }
    auto it = std::lower_bound(original_ids.begin(), original_ids.end(), vertex);
    if (it == original_ids.end() || *it != vertex) {
      throw ParseError(source, line_no,
                       "vertex id out of range: " + std::to_string(vertex));
    }
    auto& row = out.labels[it - original_ids.begin()];
    for (std::string_view token : Tokens(body.substr(split))) {
      std::uint64_t label = 0;
      if (!ParseUnsigned(token, label) || label > 0xffffffffULL) {
        throw ParseError(source, line_no, "malformed label id");
      }
      row.push_back(static_cast<LabelId>(label));
      out.num_labels = std::max<std::size_t>(out.num_labels, label + 1);
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return out;
}

void WriteIdMap(const Graph& graph, std::ostream& out) {
  for (VertexId v = 0; v < graph.num_vertices(); ++v) {
    out << v << ' ' << graph.original_id(v) << '\n';
  }
}

std::vector<std::uint64_t> LoadIdMap(const std::filesystem::path& path) {
  auto in = OpenOrThrow(path);
  std::vector<std::uint64_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = Tokens(StripComment(line));
    if (tokens.empty()) continue;
    std::uint64_t dense = 0;
    std::uint64_t original = 0;
    if (tokens.size() != 2 || !ParseUnsigned(tokens[0], dense) ||
        !ParseUnsigned(tokens[1], original) || dense != ids.size()) {
      throw ParseError(path.string(), line_no, "malformed id-map row");
    }
    if (!ids.empty() && original <= ids.back()) {
      throw ParseError(path.string(), line_no, "id map must be ascending");
    }
    ids.push_back(original);
  }
  return ids;
}

std::vector<DeviceView> MakeDeviceViews(const Graph& graph) {
  std::vector<DeviceView> views(graph.num_vertices());
  for (VertexId v = 0; v < graph.num_vertices(); ++v) {
    auto row = graph.neighbors(v);
    views[v].vertex = v;
    views[v].neighbors.assign(row.begin(), row.end());
  }
  return views;
}

}  // namespace fedwalk
