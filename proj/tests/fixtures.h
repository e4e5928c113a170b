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

#ifndef FEDWALK_TESTS_FIXTURES_H_
#define FEDWALK_TESTS_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "fedwalk/graph.h"
#include "fedwalk/privacy.h"

namespace fedwalk::testing {

inline Graph ErdosRenyi(std::size_t n, double p, std::uint64_t seed) {
  auto rng = RandomSource::For(seed, RandomSource::Role::kFixture, n);
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      if (rng.Uniform() < p) edges.emplace_back(u, v);
    }
  }
  return Graph::FromEdges(n, edges);
}

struct LabeledGraph {
  Graph graph;
  LabelSet labels;
};

// Planted partition: vertex v belongs to block v * blocks / n and is
// labeled with its block.
inline LabeledGraph StochasticBlockModel(std::size_t n, std::size_t blocks, double p_in,
                                         double p_out, std::uint64_t seed) {
  auto rng = RandomSource::For(seed, RandomSource::Role::kFixture, 1000003 + n);
  auto block = [&](VertexId v) { return v * blocks / n; };
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      if (rng.Uniform() < (block(u) == block(v) ? p_in : p_out)) edges.emplace_back(u, v);
    }
  }
  LabeledGraph out{Graph::FromEdges(n, edges), {}};
  out.labels.num_labels = blocks;
  out.labels.labels.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    out.labels.labels[v] = {static_cast<LabelId>(block(v))};
  }
  return out;
}

inline Graph Path(std::size_t n) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return Graph::FromEdges(n, edges);
}

inline Graph Cycle(std::size_t n) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId v = 0; v < n; ++v) edges.emplace_back(v, static_cast<VertexId>((v + 1) % n));
  return Graph::FromEdges(n, edges);
}

}  // namespace fedwalk::testing

#endif  // FEDWALK_TESTS_FIXTURES_H_
