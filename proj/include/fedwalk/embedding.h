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

#ifndef FEDWALK_EMBEDDING_H_
#define FEDWALK_EMBEDDING_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fedwalk/graph.h"
#include "fedwalk/privacy.h"

namespace fedwalk {

struct SkipGramConfig {
  std::size_t dim = 128;
  std::size_t window = 10;
  std::size_t negatives = 5;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::size_t epochs = 1;
  // > 1 enables lock-free parallel updates; output is then not bit-exact.
  std::size_t threads = 1;

  void Validate() const;
};

// Input vectors are the published embedding; output vectors are the context
// weights used only during training.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<float> input(std::size_t v) { return {input_.data() + v * dim_, dim_}; }
  std::span<const float> input(std::size_t v) const { return {input_.data() + v * dim_, dim_}; }
  std::span<float> output(std::size_t v) { return {output_.data() + v * dim_, dim_}; }
  std::span<const float> output(std::size_t v) const {
    return {output_.data() + v * dim_, dim_};
  }
  std::span<const float> input_values() const { return input_; }
  std::span<const float> output_values() const { return output_; }

  bool AllFinite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> input_;
  std::vector<float> output_;
};

// Input entries uniform in (-0.5/d, 0.5/d); output entries zero.
EmbeddingMatrix InitEmbeddings(std::size_t num_vertices, const SkipGramConfig& config,
                               RandomSource& rng);

// log(sigmoid(x)) without overflow for large |x|.
double LogSigmoid(double x);
double Sigmoid(double x);

// Negative-sampling loss of one (center, context) pair,
//   -log s(u_ctx . v) - sum_neg log s(-u_neg . v),
// and its gradient with respect to every vector involved.
struct PairGradient {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};
PairGradient SkipGramPairGradient(std::span<const double> center,
                                  std::span<const double> context,
                                  std::span<const std::vector<double>> negatives);

// One SGD step on the pair; returns the loss before the update. Only the
// center's input row and the context/negative output rows change.
double SgdPairStep(EmbeddingMatrix& matrix, VertexId center, VertexId context,
                   std::span<const VertexId> negatives, float lr);

struct TrainingTrace {
  std::vector<double> epoch_mean_loss;
  std::uint64_t pairs = 0;
};

// Every vertex within `window` positions of a center forms a pair; negatives
// come from the unigram^0.75 distribution over corpus occurrences; the
// learning rate decays linearly from lr_start to lr_end over all steps.
EmbeddingMatrix TrainSkipGram(std::span<const std::vector<VertexId>> walks,
                              std::size_t num_vertices, const SkipGramConfig& config,
                              std::uint64_t seed, TrainingTrace* trace = nullptr);

// Text: optional `#` header lines, then `rows dim`, then `vertex f1 ... fd`.
void WriteEmbeddings(const EmbeddingMatrix& matrix, std::ostream& out);
EmbeddingMatrix ReadEmbeddings(std::istream& in, const std::string& source);

double CosineSimilarity(std::span<const float> a, std::span<const float> b);

}  // namespace fedwalk

#endif  // FEDWALK_EMBEDDING_H_
