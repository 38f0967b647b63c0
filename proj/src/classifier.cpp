// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "imuplace/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "imuplace/error.hpp"

namespace imuplace {

int LogisticModel::PredictIndex(std::span<const double> features) const {
  const Eigen::Map<const Eigen::VectorXd> x(features.data(),
                                            static_cast<Eigen::Index>(
                                                features.size()));
  const Eigen::VectorXd z =
      ((x - feature_mean).array() / feature_scale.array()).matrix();
  const Eigen::VectorXd logits = weights * z + bias;
  int best = 0;
  for (int c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return best;
}

const std::string& LogisticModel::Predict(
    std::span<const double> features) const {
  return classes[static_cast<std::size_t>(PredictIndex(features))];
}

LogisticModel TrainClassifier(std::span<const FeatureVector> train,
                              const TrainConfig& cfg) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "no training samples");
  }
  const std::size_t dim = train.front().values.size();
  std::map<std::string, int> counts;
  for (const FeatureVector& fv : train) {
    if (fv.values.size() != dim) {
      throw Error(ErrorCode::kInvalidInput, "feature length varies");
    }
    ++counts[fv.activity];
  }
  if (counts.size() < 2) {
    throw Error(ErrorCode::kDegenerateLabels,
                "only class '" + counts.begin()->first + "' present");
  }
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  "class '" + label + "' has " + std::to_string(count) +
                      " training sample(s)");
    }
  }

  LogisticModel model;
  std::map<std::string, int> index;
  for (const auto& [label, count] : counts) {
    index[label] = static_cast<int>(model.classes.size());
    model.classes.push_back(label);
  }

  const auto n = static_cast<Eigen::Index>(train.size());
  const auto d = static_cast<Eigen::Index>(dim);
  const auto k = static_cast<Eigen::Index>(model.classes.size());

  Eigen::MatrixXd x(n, d);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FeatureVector& fv = train[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = fv.values[static_cast<std::size_t>(j)];
    }
    y(i, index[fv.activity]) = 1.0;
  }

  model.feature_mean = x.colwise().mean().transpose();
  model.feature_scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (x.col(j).array() - model.feature_mean[j]).square().mean();
    const double sd = std::sqrt(var);
    model.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = ((x.row(i).transpose() - model.feature_mean).array() /
                model.feature_scale.array())
                   .matrix()
                   .transpose();
  }

  model.weights = Eigen::MatrixXd::Zero(k, d);
  model.bias = Eigen::VectorXd::Zero(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::MatrixXd p = x * model.weights.transpose();
    p.rowwise() += model.bias.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = p.row(i).maxCoeff();
      p.row(i) = (p.row(i).array() - m).exp().matrix();
      p.row(i) /= p.row(i).sum();
    }
    const Eigen::MatrixXd residual = p - y;
    const Eigen::MatrixXd grad_w =
        inv_n * residual.transpose() * x + cfg.l2 * model.weights;
    const Eigen::VectorXd grad_b = inv_n * residual.colwise().sum().transpose();
    model.weights -= cfg.learning_rate * grad_w;
    model.bias -= cfg.learning_rate * grad_b;
  }
  return model;
}

double F1Report::F1For(const std::string& label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  return it == classes.end()
             ? -1.0
             : f1[static_cast<std::size_t>(it - classes.begin())];
}

F1Report ScorePredictions(std::span<const std::string> truth,
                          std::span<const std::string> predicted,
                          std::vector<std::string> classes) {
  if (truth.empty()) {
    throw Error(ErrorCode::kEmptyTestSet, "no test samples");
  }
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kLengthMismatch, "truth/prediction sizes differ");
  }
  for (const std::string& label : truth) {
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      classes.push_back(label);
    }
  }
  std::sort(classes.begin(), classes.end());

  F1Report report;
  report.classes = classes;
  for (const std::string& c : classes) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool is_true = truth[i] == c;
      const bool is_pred = predicted[i] == c;
      if (is_true && is_pred) tp += 1.0;
      if (!is_true && is_pred) fp += 1.0;
      if (is_true && !is_pred) fn += 1.0;
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    const double f1 = precision + recall > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    report.f1.push_back(f1);
  }
  double sum = 0.0;
  for (double f : report.f1) sum += f;
  report.macro = sum / static_cast<double>(report.f1.size());
  return report;
}

F1Report EvaluateF1(const LogisticModel& model,
                    std::span<const FeatureVector> test) {
  if (test.empty()) {
    throw Error(ErrorCode::kEmptyTestSet, "no test samples");
  }
  std::vector<std::string> truth;
  std::vector<std::string> predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());
  for (const FeatureVector& fv : test) {
    truth.push_back(fv.activity);
    predicted.push_back(model.Predict(fv.values));
  }
  return ScorePredictions(truth, predicted, model.classes);
}

}  // namespace imuplace
