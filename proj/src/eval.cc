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

#include "fedwalk/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedwalk/error.h"
#include "fedwalk/simd/kernels.h"

namespace fedwalk {
namespace {

// Stable log(1 + exp(z)).
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

std::vector<Counts> CountPerLabel(std::span<const std::vector<LabelId>> predictions,
                                  std::span<const std::vector<LabelId>> truth,
                                  std::size_t num_labels) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("predictions and truth cover different vertex sets");
  }
  std::vector<Counts> counts(num_labels);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& pred = predictions[i];
    const auto& gold = truth[i];
    for (LabelId l : pred) {
      if (l >= num_labels) throw std::out_of_range("predicted label out of range");
      if (std::find(gold.begin(), gold.end(), l) != gold.end()) {
        ++counts[l].tp;
      } else {
        ++counts[l].fp;
      }
    }
    for (LabelId l : gold) {
      if (l >= num_labels) throw std::out_of_range("true label out of range");
      if (std::find(pred.begin(), pred.end(), l) == pred.end()) ++counts[l].fn;
    }
  }
  return counts;
}

double F1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

Split SplitVertices(std::span<const VertexId> labeled, const SplitSpec& spec) {
  if (!(spec.train_ratio > 0.0 && spec.train_ratio < 1.0)) {
    throw std::invalid_argument("train ratio must lie in (0, 1)");
  }
  const auto n = labeled.size();
  const auto train_size = static_cast<std::size_t>(
      std::llround(spec.train_ratio * static_cast<double>(n)));
  if (train_size == 0 || train_size >= n) {
    throw std::invalid_argument("degenerate split: " + std::to_string(train_size) +
                                " of " + std::to_string(n) + " vertices in training");
  }
  std::vector<VertexId> shuffled(labeled.begin(), labeled.end());
  auto rng = RandomSource::For(spec.seed, RandomSource::Role::kSplit);
  std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
  Split split;
  split.train.assign(shuffled.begin(), shuffled.begin() + train_size);
  split.test.assign(shuffled.begin() + train_size, shuffled.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

FeatureMatrix FeatureMatrix::FromEmbeddings(const EmbeddingMatrix& embeddings) {
  FeatureMatrix f(embeddings.rows(), embeddings.dim());
  for (std::size_t v = 0; v < embeddings.rows(); ++v) {
    auto src = embeddings.input(v);
    std::copy(src.begin(), src.end(), f.row(v).begin());
  }
  return f;
}

BinaryModel FitBinaryLogistic(const FeatureMatrix& features,
                              std::span<const std::size_t> rows,
                              std::span<const double> targets,
                              const LogisticConfig& config) {
  const std::size_t d = features.cols();
  const auto m = static_cast<double>(rows.size());
  if (rows.empty() || rows.size() != targets.size()) {
    throw std::invalid_argument("logistic fit needs aligned, non-empty rows and targets");
  }
  // Smoothness of mean logistic loss is at most mean(|x|^2 + 1) / 4.
  double mean_sq = 0.0;
  for (std::size_t r : rows) {
    auto x = features.row(r);
    mean_sq += simd::Dot(x, x) + 1.0;
  }
  mean_sq /= m;
  const double step = 1.0 / (0.25 * mean_sq + config.l2);

  BinaryModel model;
  model.weights.assign(d, 0.0);
  std::vector<double> grad(d);
  auto objective = [&](std::vector<double>* grad_w, double* grad_b) {
    double loss = 0.0;
    if (grad_w != nullptr) std::fill(grad_w->begin(), grad_w->end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto x = features.row(rows[i]);
      const double z = simd::Dot(std::span<const double>(model.weights), x) + model.bias;
      loss += Softplus(z) - targets[i] * z;
      if (grad_w != nullptr) {
        const double residual = (Logistic(z) - targets[i]) / m;
        simd::Axpy(residual, x, std::span<double>(*grad_w));
        gb += residual;
      }
    }
    loss /= m;
    double penalty = 0.0;
    for (double w : model.weights) penalty += w * w;
    loss += 0.5 * config.l2 * penalty;
    if (grad_w != nullptr) {
      simd::Axpy(config.l2, std::span<const double>(model.weights), std::span<double>(*grad_w));
      *grad_b = gb;
    }
    return loss;
  };

  double grad_b = 0.0;
  model.initial_loss = objective(&grad, &grad_b);
  double loss = model.initial_loss;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    double norm_sq = grad_b * grad_b;
    for (double g : grad) norm_sq += g * g;
    if (std::sqrt(norm_sq) < config.gradient_tolerance) break;
    simd::Axpy(-step, std::span<const double>(grad), std::span<double>(model.weights));
    model.bias -= step * grad_b;
    loss = objective(&grad, &grad_b);
    model.iterations = it + 1;
  }
  model.final_loss = loss;
  return model;
}

std::vector<double> ClassifierModel::Scores(std::span<const double> features) const {
  std::vector<double> x(features.begin(), features.end());
  if (!feature_mean.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - feature_mean[i]) / feature_scale[i];
  }
  std::vector<double> scores(num_labels, -1.0);
  for (std::size_t l = 0; l < num_labels; ++l) {
    if (!models[l]) continue;
    const auto& m = *models[l];
    scores[l] = Logistic(simd::Dot(std::span<const double>(m.weights),
                                   std::span<const double>(x)) + m.bias);
  }
  return scores;
}

ClassifierModel TrainClassifier(const FeatureMatrix& features, const LabelSet& labels,
                                std::span<const VertexId> train,
                                const LogisticConfig& config) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  const std::size_t d = features.cols();
  ClassifierModel model;
  model.num_labels = labels.num_labels;
  model.models.resize(labels.num_labels);

  // Training rows are copied (and optionally standardized) into a compact
  // matrix so every per-label fit reads contiguous memory.
  FeatureMatrix x(train.size(), d);
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i] >= features.rows()) {
      throw DataError("training vertex " + std::to_string(train[i]) + " has no embedding");
    }
    auto src = features.row(train[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  if (config.standardize) {
    model.feature_mean.assign(d, 0.0);
    model.feature_scale.assign(d, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t c = 0; c < d; ++c) model.feature_mean[c] += x.row(i)[c];
    }
    for (double& mu : model.feature_mean) mu /= static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        const double delta = x.row(i)[c] - model.feature_mean[c];
        model.feature_scale[c] += delta * delta;
      }
    }
    for (double& s : model.feature_scale) {
      s = std::sqrt(s / static_cast<double>(x.rows()));
      if (!(s > 1e-12)) s = 1.0;
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto row = x.row(i);
      for (std::size_t c = 0; c < d; ++c) {
        row[c] = (row[c] - model.feature_mean[c]) / model.feature_scale[c];
      }
    }
  }

  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<double> targets(train.size());
  for (LabelId l = 0; l < labels.num_labels; ++l) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& own = labels.labels[train[i]];
      targets[i] = std::binary_search(own.begin(), own.end(), l) ? 1.0 : 0.0;
      positives += targets[i] > 0.5 ? 1 : 0;
    }
    if (positives == 0) {
      model.skipped.push_back(l);
      continue;
    }
    model.models[l] = FitBinaryLogistic(x, rows, targets, config);
  }
  return model;
}

std::vector<std::vector<LabelId>> PredictTopK(const ClassifierModel& model,
                                              const FeatureMatrix& features,
                                              std::span<const VertexId> test,
                                              std::span<const std::size_t> label_counts) {
  if (label_counts.size() != test.size()) {
    throw std::invalid_argument("one label count per test vertex required");
  }
  std::vector<std::vector<LabelId>> out(test.size());
  std::vector<LabelId> order(model.num_labels);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::size_t k = std::min(label_counts[i], model.num_labels);
    if (k == 0) continue;
    const auto scores = model.Scores(features.row(test[i]));
    std::iota(order.begin(), order.end(), LabelId{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&scores](LabelId a, LabelId b) {
                        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    out[i].assign(order.begin(), order.begin() + k);
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

F1Scores ComputeF1(std::span<const std::vector<LabelId>> predictions,
                   std::span<const std::vector<LabelId>> truth, std::size_t num_labels) {
  const auto counts = CountPerLabel(predictions, truth, num_labels);
  F1Scores out;
  out.per_label.resize(num_labels);
  Counts pooled;
  for (std::size_t l = 0; l < num_labels; ++l) {
    out.per_label[l] = F1(counts[l].tp, counts[l].fp, counts[l].fn);
    pooled.tp += counts[l].tp;
    pooled.fp += counts[l].fp;
    pooled.fn += counts[l].fn;
  }
  // Pooled 2PR/(P+R) reduces to 2TP/(2TP+FP+FN).
  out.micro = F1(pooled.tp, pooled.fp, pooled.fn);
  out.macro = num_labels == 0
                  ? 0.0
                  : std::accumulate(out.per_label.begin(), out.per_label.end(), 0.0) /
                        static_cast<double>(num_labels);
  return out;
}

double MicroF1(std::span<const std::vector<LabelId>> predictions,
               std::span<const std::vector<LabelId>> truth, std::size_t num_labels) {
  return ComputeF1(predictions, truth, num_labels).micro;
}

double MacroF1(std::span<const std::vector<LabelId>> predictions,
               std::span<const std::vector<LabelId>> truth, std::size_t num_labels) {
  return ComputeF1(predictions, truth, num_labels).macro;
}

EvalResult EvaluateEmbeddings(const EmbeddingMatrix& embeddings, const LabelSet& labels,
                              const SplitSpec& spec, const LogisticConfig& config) {
  if (labels.labels.size() != embeddings.rows()) {
    throw DataError("label set and embeddings disagree on the vertex count");
  }
  const auto labeled = labels.LabeledVertices();
  const Split split = SplitVertices(labeled, spec);
  const FeatureMatrix features = FeatureMatrix::FromEmbeddings(embeddings);
  const ClassifierModel model = TrainClassifier(features, labels, split.train, config);

  std::vector<std::size_t> counts(split.test.size());
  std::vector<std::vector<LabelId>> truth(split.test.size());
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    truth[i] = labels.labels[split.test[i]];
    counts[i] = truth[i].size();
  }
  const auto predictions = PredictTopK(model, features, split.test, counts);

  EvalResult result;
  result.train_ratio = spec.train_ratio;
  result.seed = spec.seed;
  result.f1 = ComputeF1(predictions, truth, labels.num_labels);
  result.skipped_labels = model.skipped;
  result.train_size = split.train.size();
  result.test_size = split.test.size();
  return result;
}

}  // namespace fedwalk
