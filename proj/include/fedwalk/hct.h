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

#ifndef FEDWALK_HCT_H_
#define FEDWALK_HCT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedwalk/graph.h"
#include "fedwalk/privacy.h"
#include "fedwalk/simd/kernels.h"

namespace fedwalk {

// floor(ln n), at least 1.
std::size_t DefaultBinCount(std::size_t num_vertices);

struct BinAssignment {
  std::size_t k = 0;
  std::vector<std::uint32_t> bin_of;  // per vertex, in [0, k)

  std::size_t num_vertices() const { return bin_of.size(); }
  // Vertex ids of each bin, ascending.
  std::vector<std::vector<VertexId>> Members() const;
};

// Random plan with every bin non-empty: a shuffled round-robin deal, so bin
// sizes differ by at most one. Requires 1 <= k <= num_vertices.
BinAssignment AssignBins(std::size_t num_vertices, std::size_t k,
                         RandomSource& rng);

// Noised per-bin neighbor counts. Entries may be negative.
using DegreeVector = std::vector<double>;

std::vector<double> CountNeighborsPerBin(const DeviceView& view,
                                         const BinAssignment& bins);
DegreeVector LocalDegreeVector(const DeviceView& view, const BinAssignment& bins,
                               double epsilon, RandomSource& rng);

inline double EstimatedDegree(std::span<const double> vector) {
  double sum = 0.0;
  for (double x : vector) sum += x;
  return sum;
}

// Neighbors' degree vectors stacked in ascending estimated degree (ties by
// vertex id). A vertex without neighbors gets a single all-zero row and an
// empty `row_vertices`.
class OrderedDegreeMatrix {
 public:
  OrderedDegreeMatrix() = default;
  OrderedDegreeMatrix(std::size_t cols, std::vector<double> values,
                      std::vector<VertexId> row_vertices);

  std::size_t rows() const { return cols_ == 0 ? 0 : values_.size() / cols_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<const double> values() const { return values_; }
  std::span<const VertexId> row_vertices() const { return row_vertices_; }

 private:
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<VertexId> row_vertices_;
};

// `vectors` is the broadcast dictionary indexed by vertex id. Throws
// DataError when a neighbor has no vector of length k.
OrderedDegreeMatrix BuildOrderedDegreeMatrix(const DeviceView& view,
                                             std::span<const DegreeVector> vectors,
                                             std::size_t k);

// Dynamic time warping over matrix rows with L1 row cost:
//   cost(i,j) = min(cost(i-1,j), cost(i,j-1), cost(i-1,j-1)) + |a_i - b_j|_1
// with cost(0,0) = |a_0 - b_0|_1 and the first row/column accumulating along
// their single predecessor. Throws std::invalid_argument on an empty matrix or
// a column mismatch.
double DtwDissimilarity(const OrderedDegreeMatrix& a, const OrderedDegreeMatrix& b);
double DtwDissimilarity(const OrderedDegreeMatrix& a, const OrderedDegreeMatrix& b,
                        const simd::KernelTable& kernels);

// Dense symmetric |V|x|V| table stored as a packed lower triangle (diagonal
// included) of doubles.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  explicit DissimilarityMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return packed_[Index(i, j)]; }
  void set(std::size_t i, std::size_t j, double value) { packed_[Index(i, j)] = value; }

  // Row-major lower triangle: (0,0), (1,0), (1,1), (2,0), ...
  std::span<const double> packed() const { return packed_; }
  std::span<double> packed() { return packed_; }

  static std::size_t Index(std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> packed_;
};

// All pairwise DTW values; rows are spread over `threads` workers.
DissimilarityMatrix ComputeDissimilarityMatrix(
    std::span<const OrderedDegreeMatrix> matrices, std::size_t threads = 1);

struct DissimilarityHeader {
  std::uint64_t num_vertices = 0;
  std::uint64_t k = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Binary file: 8-byte magic "FWDISM01", the header fields in declaration
// order (little-endian), then the packed lower triangle.
void WriteDissimilarity(const std::filesystem::path& path,
                        const DissimilarityMatrix& matrix,
                        const DissimilarityHeader& header);
DissimilarityMatrix ReadDissimilarity(const std::filesystem::path& path,
                                      DissimilarityHeader* header = nullptr);

// Binary hierarchical clustering tree. Leaves are nodes 0..n-1 and leaf v is
// vertex v; internal node n+t is created by merge t. The root is 2n-2.
class Hct {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kNone = 0xffffffffu;

  Hct() = default;
  // merges[t] = (left child, right child) of internal node n + t.
  static Hct FromMerges(std::size_t num_leaves,
                        std::span<const std::pair<NodeId, NodeId>> merges);

  std::size_t num_leaves() const { return num_leaves_; }
  std::size_t num_internal() const { return num_leaves_ == 0 ? 0 : num_leaves_ - 1; }
  std::size_t num_nodes() const { return parent_.size(); }
  NodeId root() const { return root_; }
  bool is_leaf(NodeId node) const { return node < num_leaves_; }
  NodeId left(NodeId node) const { return left_[node]; }
  NodeId right(NodeId node) const { return right_[node]; }
  NodeId parent(NodeId node) const { return parent_[node]; }
  std::size_t leaf_count(NodeId node) const { return range_end_[node] - range_begin_[node]; }
  std::size_t depth(NodeId node) const { return depth_[node]; }

  // Least common ancestor of two leaves; both must be < num_leaves().
  NodeId Lca(VertexId a, VertexId b) const;
  // |leaves(T[a v b])|; 1 when a == b.
  std::size_t LcaLeafCount(VertexId a, VertexId b) const;
  // Edges on the leaf-to-leaf path; 0 when a == b.
  std::size_t TreeDistance(VertexId a, VertexId b) const;

  // The same queries from one source against every leaf, in O(n).
  std::vector<std::uint32_t> LcaLeafCountRow(VertexId source) const;
  std::vector<std::uint32_t> TreeDistanceRow(VertexId source) const;

  // Leaves in left-to-right order.
  std::span<const VertexId> leaf_order() const { return leaf_order_; }

  // Throws InvariantError unless the tree is a full binary tree over exactly
  // num_leaves() leaves with consistent parent links and leaf counts.
  void Validate() const;

  void Write(std::ostream& out) const;
  static Hct Read(std::istream& in, const std::string& source);

 private:
  void CheckLeaf(VertexId v) const;
  bool Contains(NodeId node, VertexId leaf) const {
    const std::uint32_t pos = leaf_position_[leaf];
    return range_begin_[node] <= pos && pos < range_end_[node];
  }

  std::size_t num_leaves_ = 0;
  NodeId root_ = kNone;
  std::vector<NodeId> left_;
  std::vector<NodeId> right_;
  std::vector<NodeId> parent_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> range_begin_;
  std::vector<std::uint32_t> range_end_;
  std::vector<std::uint32_t> leaf_position_;
  std::vector<VertexId> leaf_order_;
  std::vector<std::vector<NodeId>> ancestors_;  // ancestors_[j][node] = 2^j-th ancestor
};

// Average-linkage agglomerative clustering. Among equally distant candidate
// pairs the one with the lexicographically smallest (min id, max id) merges
// first; the merged cluster takes the next internal node id.
Hct BuildHct(const DissimilarityMatrix& dissim);

// Upper bound on the expected inflation of a noised DTW dissimilarity over
// its noiseless value: 3 k max_degree^2 / (2 epsilon).
double DissimilarityNoiseBound(std::size_t k, std::size_t max_degree, double epsilon);

}  // namespace fedwalk

#endif  // FEDWALK_HCT_H_
