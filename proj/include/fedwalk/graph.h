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

#ifndef FEDWALK_GRAPH_H_
#define FEDWALK_GRAPH_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fedwalk {

using VertexId = std::uint32_t;
using LabelId = std::uint32_t;

// Immutable undirected, unweighted graph with compacted vertex ids 0..n-1.
// `original_id(v)` recovers the id used in the source file.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list over dense ids 0..num_vertices-1. Duplicates and
  // reversed duplicates collapse; self-loops and out-of-range ids throw.
  static Graph FromEdges(std::size_t num_vertices,
                         std::span<const std::pair<VertexId, VertexId>> edges);

  std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const;
  bool has_edge(VertexId u, VertexId v) const;

  std::uint64_t original_id(VertexId v) const { return original_ids_[v]; }
  std::span<const std::uint64_t> original_ids() const { return original_ids_; }
  // Dense id for a file id, or -1 when the id is not a vertex of this graph.
  std::int64_t dense_id(std::uint64_t original) const;

  // Canonical edge list (u < v), sorted.
  std::vector<std::pair<VertexId, VertexId>> Edges() const;

 private:
  friend Graph LoadEdgeList(std::istream& in, const std::string& source);

  std::vector<std::size_t> offsets_;
  std::vector<VertexId> neighbors_;
  std::vector<std::uint64_t> original_ids_;  // sorted ascending
};

// The slice of the graph one device holds: its own id and neighbor list.
struct DeviceView {
  VertexId vertex = 0;
  std::vector<VertexId> neighbors;
};

struct LabelSet {
  std::vector<std::vector<LabelId>> labels;  // per dense vertex, sorted
  std::size_t num_labels = 0;

  std::vector<VertexId> LabeledVertices() const;
};

// Edge-list text: two non-negative integers per line, whitespace (or comma)
// separated, `#` starts a comment. File ids are compacted in ascending order.
Graph LoadEdgeList(const std::filesystem::path& path);
Graph LoadEdgeList(std::istream& in, const std::string& source);
void WriteEdgeList(const Graph& graph, std::ostream& out);

// Label text: `vertex l1,l2,...` per line, vertex given as a file id.
LabelSet LoadLabels(const std::filesystem::path& path, const Graph& graph);
LabelSet LoadLabels(std::istream& in, const std::string& source,
                    std::span<const std::uint64_t> original_ids);

// Two-column `dense_id original_id` text.
void WriteIdMap(const Graph& graph, std::ostream& out);
std::vector<std::uint64_t> LoadIdMap(const std::filesystem::path& path);

std::vector<DeviceView> MakeDeviceViews(const Graph& graph);

}  // namespace fedwalk

#endif  // FEDWALK_GRAPH_H_
