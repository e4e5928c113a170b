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

#include "fedwalk/hct.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "fedwalk/error.h"

namespace fedwalk {

std::size_t DefaultBinCount(std::size_t num_vertices) {
  if (num_vertices < 3) return 1;
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::log(static_cast<double>(num_vertices)))));
}

std::vector<std::vector<VertexId>> BinAssignment::Members() const {
  std::vector<std::vector<VertexId>> out(k);
  for (VertexId v = 0; v < bin_of.size(); ++v) out[bin_of[v]].push_back(v);
  return out;
}

BinAssignment AssignBins(std::size_t num_vertices, std::size_t k,
                         RandomSource& rng) {
  if (k < 1 || k > num_vertices) {
    throw std::invalid_argument("bin count " + std::to_string(k) +
                                " outside [1, " + std::to_string(num_vertices) + "]");
  }
  std::vector<VertexId> order(num_vertices);
  std::iota(order.begin(), order.end(), VertexId{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  BinAssignment bins;
  bins.k = k;
  bins.bin_of.resize(num_vertices);
  for (std::size_t i = 0; i < num_vertices; ++i) {
    bins.bin_of[order[i]] = static_cast<std::uint32_t>(i % k);
  }
  return bins;
}

std::vector<double> CountNeighborsPerBin(const DeviceView& view,
                                         const BinAssignment& bins) {
  std::vector<double> counts(bins.k, 0.0);
  for (VertexId u : view.neighbors) {
    if (u >= bins.num_vertices()) {
      throw DataError("bin plan does not cover vertex " + std::to_string(u));
    }
    counts[bins.bin_of[u]] += 1.0;
  }
  return counts;
}

DegreeVector LocalDegreeVector(const DeviceView& view, const BinAssignment& bins,
                               double epsilon, RandomSource& rng) {
  return NoiseCounts(CountNeighborsPerBin(view, bins), epsilon, rng);
}

OrderedDegreeMatrix::OrderedDegreeMatrix(std::size_t cols, std::vector<double> values,
                                         std::vector<VertexId> row_vertices)
    : cols_(cols), values_(std::move(values)), row_vertices_(std::move(row_vertices)) {
  if (cols_ == 0 || values_.size() % cols_ != 0) {
    throw std::invalid_argument("ordered degree matrix has a ragged shape");
  }
}

OrderedDegreeMatrix BuildOrderedDegreeMatrix(const DeviceView& view,
                                             std::span<const DegreeVector> vectors,
                                             std::size_t k) {
  if (view.neighbors.empty()) {
    return OrderedDegreeMatrix(k, std::vector<double>(k, 0.0), {});
  }
  struct Row {
    double estimate;
    VertexId vertex;
  };
  std::vector<Row> rows;
  rows.reserve(view.neighbors.size());
  for (VertexId u : view.neighbors) {
    if (u >= vectors.size() || vectors[u].size() != k) {
      throw DataError("missing degree vector for neighbor " + std::to_string(u) +
                      " of vertex " + std::to_string(view.vertex));
    }
    rows.push_back({EstimatedDegree(vectors[u]), u});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.estimate != b.estimate ? a.estimate < b.estimate : a.vertex < b.vertex;
  });
  std::vector<double> values;
  values.reserve(rows.size() * k);
  std::vector<VertexId> order;
  order.reserve(rows.size());
  for (const Row& r : rows) {
    values.insert(values.end(), vectors[r.vertex].begin(), vectors[r.vertex].end());
    order.push_back(r.vertex);
  }
  return OrderedDegreeMatrix(k, std::move(values), std::move(order));
}

double DtwDissimilarity(const OrderedDegreeMatrix& a, const OrderedDegreeMatrix& b) {
  return DtwDissimilarity(a, b, simd::ActiveKernels());
}

double DtwDissimilarity(const OrderedDegreeMatrix& a, const OrderedDegreeMatrix& b,
                        const simd::KernelTable& kernels) {
  if (a.rows() == 0 || b.rows() == 0) {
    throw std::invalid_argument("DTW needs matrices with at least one row");
  }
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("DTW column mismatch: " + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.cols()));
  }
  const std::size_t x = a.rows();
  const std::size_t y = b.rows();
  const std::size_t k = a.cols();
  auto dist = [&](std::size_t i, std::size_t j) {
    return kernels.l1_distance_f64(a.row(i).data(), b.row(j).data(), k);
  };
  std::vector<double> prev(y);
  std::vector<double> cur(y);
  cur[0] = dist(0, 0);
  for (std::size_t j = 1; j < y; ++j) cur[j] = cur[j - 1] + dist(0, j);
  for (std::size_t i = 1; i < x; ++i) {
    std::swap(prev, cur);
    cur[0] = prev[0] + dist(i, 0);
    for (std::size_t j = 1; j < y; ++j) {
      cur[j] = std::min({prev[j], cur[j - 1], prev[j - 1]}) + dist(i, j);
    }
  }
  return cur[y - 1];
}

DissimilarityMatrix::DissimilarityMatrix(std::size_t n)
    : n_(n), packed_(n * (n + 1) / 2, 0.0) {}

DissimilarityMatrix ComputeDissimilarityMatrix(
    std::span<const OrderedDegreeMatrix> matrices, std::size_t threads) {
  const std::size_t n = matrices.size();
  DissimilarityMatrix out(n);
  const simd::KernelTable& kernels = simd::ActiveKernels();
  // Rows are handed out longest first; row i owns entries (i, 0..i-1).
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t taken = next.fetch_add(1, std::memory_order_relaxed);
      if (taken >= n) return;
      const std::size_t i = n - 1 - taken;
      for (std::size_t j = 0; j < i; ++j) {
        out.set(i, j, DtwDissimilarity(matrices[i], matrices[j], kernels));
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

namespace {

constexpr char kDissimMagic[8] = {'F', 'W', 'D', 'I', 'S', 'M', '0', '1'};

template <typename T>
void WritePod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in, const std::string& source) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw DataError(source + ": truncated dissimilarity header");
  }
  return value;
}

}  // namespace

void WriteDissimilarity(const std::filesystem::path& path,
                        const DissimilarityMatrix& matrix,
                        const DissimilarityHeader& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kDissimMagic, sizeof(kDissimMagic));
  WritePod(out, std::uint64_t{matrix.size()});
  WritePod(out, header.k);
  WritePod(out, header.epsilon);
  WritePod(out, header.seed);
  WritePod(out, header.config_hash);
  auto packed = matrix.packed();
  out.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size() * sizeof(double)));
  if (!out) throw DataError("short write to " + path.string());
}

DissimilarityMatrix ReadDissimilarity(const std::filesystem::path& path,
                                      DissimilarityHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  const std::string source = path.string();
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kDissimMagic, sizeof(magic)) != 0) {
    throw DataError(source + ": not a dissimilarity matrix file");
  }
  DissimilarityHeader h;
  h.num_vertices = ReadPod<std::uint64_t>(in, source);
  h.k = ReadPod<std::uint64_t>(in, source);
  h.epsilon = ReadPod<double>(in, source);
  h.seed = ReadPod<std::uint64_t>(in, source);
  h.config_hash = ReadPod<std::uint64_t>(in, source);
  DissimilarityMatrix matrix(h.num_vertices);
  auto packed = matrix.packed();
  if (!in.read(reinterpret_cast<char*>(packed.data()),
               static_cast<std::streamsize>(packed.size() * sizeof(double)))) {
    throw DataError(source + ": truncated dissimilarity payload");
  }
  if (header != nullptr) *header = h;
  return matrix;
}

Hct Hct::FromMerges(std::size_t num_leaves,
                    std::span<const std::pair<NodeId, NodeId>> merges) {
  if (num_leaves == 0) throw std::invalid_argument("HCT needs at least one leaf");
  if (merges.size() != num_leaves - 1) {
    throw std::invalid_argument("HCT over " + std::to_string(num_leaves) +
                                " leaves needs " + std::to_string(num_leaves - 1) +
                                " merges, got " + std::to_string(merges.size()));
  }
  const std::size_t total = 2 * num_leaves - 1;
  Hct t;
  t.num_leaves_ = num_leaves;
  t.left_.assign(total, kNone);
  t.right_.assign(total, kNone);
  t.parent_.assign(total, kNone);
  for (std::size_t m = 0; m < merges.size(); ++m) {
    const NodeId node = static_cast<NodeId>(num_leaves + m);
    for (NodeId child : {merges[m].first, merges[m].second}) {
      if (child >= node || t.parent_[child] != kNone) {
        throw std::invalid_argument("invalid merge " + std::to_string(m) +
                                    ": child " + std::to_string(child));
      }
      t.parent_[child] = node;
    }
    if (merges[m].first == merges[m].second) {
      throw std::invalid_argument("merge joins a node with itself");
    }
    t.left_[node] = merges[m].first;
    t.right_[node] = merges[m].second;
  }
  t.root_ = static_cast<NodeId>(total - 1);

  t.depth_.assign(total, 0);
  t.range_begin_.assign(total, 0);
  t.range_end_.assign(total, 0);
  t.leaf_position_.assign(num_leaves, 0);
  t.leaf_order_.reserve(num_leaves);
  // Iterative post-order: (node, expanded).
  std::vector<std::pair<NodeId, bool>> stack{{t.root_, false}};
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (t.is_leaf(node)) {
      t.range_begin_[node] = static_cast<std::uint32_t>(t.leaf_order_.size());
      t.leaf_position_[node] = t.range_begin_[node];
      t.leaf_order_.push_back(node);
      t.range_end_[node] = t.range_begin_[node] + 1;
      continue;
    }
    if (expanded) {
      t.range_begin_[node] = t.range_begin_[t.left_[node]];
      t.range_end_[node] = t.range_end_[t.right_[node]];
      continue;
    }
    stack.push_back({node, true});
    t.depth_[t.left_[node]] = t.depth_[node] + 1;
    t.depth_[t.right_[node]] = t.depth_[node] + 1;
    stack.push_back({t.right_[node], false});
    stack.push_back({t.left_[node], false});
  }

  std::size_t levels = 1;
  while ((std::size_t{1} << levels) < total) ++levels;
  t.ancestors_.assign(levels, std::vector<NodeId>(total, kNone));
  t.ancestors_[0] = t.parent_;
  for (std::size_t j = 1; j < levels; ++j) {
    for (std::size_t node = 0; node < total; ++node) {
      const NodeId mid = t.ancestors_[j - 1][node];
      t.ancestors_[j][node] = mid == kNone ? kNone : t.ancestors_[j - 1][mid];
    }
  }
  t.Validate();
  return t;
}

void Hct::CheckLeaf(VertexId v) const {
  if (v >= num_leaves_) {
    throw std::out_of_range("vertex " + std::to_string(v) + " is not a leaf of the HCT");
  }
}

Hct::NodeId Hct::Lca(VertexId a, VertexId b) const {
  CheckLeaf(a);
  CheckLeaf(b);
  if (a == b) return a;
  NodeId node = a;
  for (std::size_t j = ancestors_.size(); j-- > 0;) {
    const NodeId up = ancestors_[j][node];
    if (up != kNone && !Contains(up, b)) node = up;
  }
  return parent_[node];
}

std::size_t Hct::LcaLeafCount(VertexId a, VertexId b) const {
  return leaf_count(Lca(a, b));
}

std::size_t Hct::TreeDistance(VertexId a, VertexId b) const {
  const NodeId lca = Lca(a, b);
  return depth_[a] + depth_[b] - 2 * depth_[lca];
}

std::vector<std::uint32_t> Hct::LcaLeafCountRow(VertexId source) const {
  CheckLeaf(source);
  std::vector<std::uint32_t> row(num_leaves_, 0);
  row[source] = 1;
  for (NodeId node = source; parent_[node] != kNone; node = parent_[node]) {
    const NodeId up = parent_[node];
    const NodeId sibling = left_[up] == node ? right_[up] : left_[up];
    const auto count = static_cast<std::uint32_t>(leaf_count(up));
    for (std::uint32_t pos = range_begin_[sibling]; pos < range_end_[sibling]; ++pos) {
      row[leaf_order_[pos]] = count;
    }
  }
  return row;
}

std::vector<std::uint32_t> Hct::TreeDistanceRow(VertexId source) const {
  CheckLeaf(source);
  std::vector<std::uint32_t> row(num_leaves_, 0);
  for (NodeId node = source; parent_[node] != kNone; node = parent_[node]) {
    const NodeId up = parent_[node];
    const NodeId sibling = left_[up] == node ? right_[up] : left_[up];
    for (std::uint32_t pos = range_begin_[sibling]; pos < range_end_[sibling]; ++pos) {
      const VertexId leaf = leaf_order_[pos];
      row[leaf] = depth_[source] + depth_[leaf] - 2 * depth_[up];
    }
  }
  return row;
}

void Hct::Validate() const {
  const std::size_t total = parent_.size();
  FEDWALK_CHECK(num_leaves_ >= 1 && total == 2 * num_leaves_ - 1,
                "HCT node count is not 2|V|-1");
  FEDWALK_CHECK(parent_[root_] == kNone, "HCT root has a parent");
  std::size_t internal = 0;
  for (NodeId node = 0; node < total; ++node) {
    if (node != root_) {
      FEDWALK_CHECK(parent_[node] != kNone, "HCT node without parent");
      const NodeId up = parent_[node];
      FEDWALK_CHECK(left_[up] == node || right_[up] == node, "HCT parent link mismatch");
    }
    if (is_leaf(node)) {
      FEDWALK_CHECK(left_[node] == kNone && right_[node] == kNone, "HCT leaf with children");
      FEDWALK_CHECK(leaf_count(node) == 1, "HCT leaf count != 1");
      FEDWALK_CHECK(leaf_order_[leaf_position_[node]] == node, "HCT leaf bijection broken");
    } else {
      ++internal;
      FEDWALK_CHECK(left_[node] != kNone && right_[node] != kNone,
                    "HCT internal node is not binary");
      FEDWALK_CHECK(leaf_count(node) == leaf_count(left_[node]) + leaf_count(right_[node]),
                    "HCT leaf counts inconsistent");
    }
  }
  FEDWALK_CHECK(internal == num_leaves_ - 1, "HCT internal node count is not |V|-1");
  FEDWALK_CHECK(leaf_count(root_) == num_leaves_, "HCT root does not cover every leaf");
}

void Hct::Write(std::ostream& out) const {
  for (VertexId v = 0; v < num_leaves_; ++v) out << "leaf " << v << '\n';
  for (NodeId node = static_cast<NodeId>(num_leaves_); node < parent_.size(); ++node) {
    out << node << ' ' << left_[node] << ' ' << right_[node] << '\n';
  }
}

Hct Hct::Read(std::istream& in, const std::string& source) {
  std::size_t leaves = 0;
  std::vector<std::pair<NodeId, NodeId>> merges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "leaf") {
      std::size_t v = 0;
      if (!(fields >> v) || v != leaves || !merges.empty()) {
        throw ParseError(source, line_no, "leaves must be listed first as 0..n-1");
      }
      ++leaves;
      continue;
    }
    std::size_t node = 0;
    std::size_t l = 0;
    std::size_t r = 0;
    std::istringstream triple(line);
    if (!(triple >> node >> l >> r) || node != leaves + merges.size()) {
      throw ParseError(source, line_no, "expected `node left right` in creation order");
    }
    merges.emplace_back(static_cast<NodeId>(l), static_cast<NodeId>(r));
  }
  try {
    return FromMerges(leaves, merges);
  } catch (const std::invalid_argument& e) {
    throw DataError(source + ": " + e.what());
  }
}

Hct BuildHct(const DissimilarityMatrix& dissim) {
  const std::size_t n = dissim.size();
  if (n == 0) throw std::invalid_argument("cannot cluster an empty vertex set");
  using NodeId = Hct::NodeId;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();

  // Cluster-to-cluster distances live in the packed triangle indexed by slot;
  // a merged cluster reuses the slot of one of its parts.
  std::vector<double> dist(dissim.packed().begin(), dissim.packed().end());
  auto d = [&dist](std::size_t a, std::size_t b) -> double& {
    return dist[DissimilarityMatrix::Index(a, b)];
  };
  std::vector<NodeId> id(n);
  std::iota(id.begin(), id.end(), NodeId{0});
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  // Nearest neighbour among active clusters with a larger id; ties go to the
  // smaller id, which makes the global (distance, id, id) minimum the merge.
  std::vector<std::size_t> nn(n, kNoSlot);
  std::vector<double> nn_dist(n, kInf);

  auto refresh = [&](std::size_t s) {
    nn[s] = kNoSlot;
    nn_dist[s] = kInf;
    for (std::size_t t = 0; t < n; ++t) {
      if (!active[t] || id[t] <= id[s]) continue;
      const double value = d(s, t);
      if (nn[s] == kNoSlot || value < nn_dist[s] ||
          (value == nn_dist[s] && id[t] < id[nn[s]])) {
        nn[s] = t;
        nn_dist[s] = value;
      }
    }
  };
  for (std::size_t s = 0; s < n; ++s) refresh(s);

  std::vector<std::pair<NodeId, NodeId>> merges;
  merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best = kNoSlot;
    for (std::size_t s = 0; s < n; ++s) {
      if (!active[s] || nn[s] == kNoSlot) continue;
      if (best == kNoSlot || nn_dist[s] < nn_dist[best] ||
          (nn_dist[s] == nn_dist[best] && id[s] < id[best])) {
        best = s;
      }
    }
    FEDWALK_CHECK(best != kNoSlot, "no merge candidate left");
    const std::size_t a = best;
    const std::size_t b = nn[best];
    merges.emplace_back(id[a], id[b]);

    const double wa = static_cast<double>(size[a]);
    const double wb = static_cast<double>(size[b]);
    for (std::size_t t = 0; t < n; ++t) {
      if (!active[t] || t == a || t == b) continue;
      d(a, t) = (wa * d(a, t) + wb * d(b, t)) / (wa + wb);
    }
    active[b] = 0;
    size[a] += size[b];
    id[a] = static_cast<NodeId>(n + step);

    nn[a] = kNoSlot;
    nn_dist[a] = kInf;
    for (std::size_t t = 0; t < n; ++t) {
      if (!active[t] || t == a) continue;
      if (nn[t] == a || nn[t] == b) {
        refresh(t);
      } else if (d(t, a) < nn_dist[t] || nn[t] == kNoSlot) {
        nn[t] = a;
        nn_dist[t] = d(t, a);
      }
    }
  }
  return Hct::FromMerges(n, merges);
}

double DissimilarityNoiseBound(std::size_t k, std::size_t max_degree, double epsilon) {
  const double deg = static_cast<double>(max_degree);
  return 3.0 * static_cast<double>(k) * deg * deg / (2.0 * epsilon);
}

}  // namespace fedwalk
