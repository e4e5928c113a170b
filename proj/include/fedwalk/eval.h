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

#ifndef FEDWALK_EVAL_H_
#define FEDWALK_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedwalk/embedding.h"
#include "fedwalk/graph.h"

namespace fedwalk {

struct SplitSpec {
  double train_ratio = 0.5;  // T_R, in (0, 1)
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<VertexId> train;
  std::vector<VertexId> test;
};

// Uniform split without replacement; round(T_R * n) vertices go to training.
// Throws std::invalid_argument when either side would be empty.
Split SplitVertices(std::span<const VertexId> labeled, const SplitSpec& spec);

// Row-major dense features, one row per vertex.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);
  static FeatureMatrix FromEmbeddings(const EmbeddingMatrix& embeddings);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct LogisticConfig {
  double l2 = 1e-4;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;
  // Standardize features with training-set mean and deviation.
  bool standardize = true;
};

struct BinaryModel {
  std::vector<double> weights;
  double bias = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t iterations = 0;
};

// One-vs-rest logistic regression; labels with no positive training vertex
// have no model and are listed in `skipped`.
struct ClassifierModel {
  std::size_t num_labels = 0;
  std::vector<std::optional<BinaryModel>> models;
  std::vector<LabelId> skipped;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;

  // P(label | x); -1 for skipped labels so they rank last.
  std::vector<double> Scores(std::span<const double> features) const;
};

// Full-batch gradient descent on mean logistic loss + (l2/2)|w|^2 (bias not
// penalized), step 1/L with L the smoothness bound of the objective.
BinaryModel FitBinaryLogistic(const FeatureMatrix& features,
                              std::span<const std::size_t> rows,
                              std::span<const double> targets, const LogisticConfig& config);

ClassifierModel TrainClassifier(const FeatureMatrix& features, const LabelSet& labels,
                                std::span<const VertexId> train,
                                const LogisticConfig& config = {});

// For each test vertex, the top-k labels by score where k is its true label
// count; ties go to the smaller label id.
std::vector<std::vector<LabelId>> PredictTopK(const ClassifierModel& model,
                                              const FeatureMatrix& features,
                                              std::span<const VertexId> test,
                                              std::span<const std::size_t> label_counts);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
  std::vector<double> per_label;
};

// Predictions and truth are aligned label sets over the same vertices.
F1Scores ComputeF1(std::span<const std::vector<LabelId>> predictions,
                   std::span<const std::vector<LabelId>> truth, std::size_t num_labels);
double MicroF1(std::span<const std::vector<LabelId>> predictions,
               std::span<const std::vector<LabelId>> truth, std::size_t num_labels);
double MacroF1(std::span<const std::vector<LabelId>> predictions,
               std::span<const std::vector<LabelId>> truth, std::size_t num_labels);

struct EvalResult {
  double train_ratio = 0.0;
  std::uint64_t seed = 0;
  F1Scores f1;
  std::vector<LabelId> skipped_labels;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// split -> train -> predict -> score.
EvalResult EvaluateEmbeddings(const EmbeddingMatrix& embeddings, const LabelSet& labels,
                              const SplitSpec& spec, const LogisticConfig& config = {});

}  // namespace fedwalk

#endif  // FEDWALK_EVAL_H_
