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

#ifndef IMUPLACE_CLASSIFIER_HPP_
#define IMUPLACE_CLASSIFIER_HPP_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "imuplace/features.hpp"

namespace imuplace {

struct TrainConfig {
  double l2 = 1e-3;
  int iterations = 500;
  double learning_rate = 0.1;
};

// Multinomial logistic regression on z-scored features.
struct LogisticModel {
  std::vector<std::string> classes;  // sorted
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  Eigen::MatrixXd weights;  // classes x features
  Eigen::VectorXd bias;

  // Index into `classes`; ties resolve to the lowest index.
  int PredictIndex(std::span<const double> features) const;
  const std::string& Predict(std::span<const double> features) const;
};

// Full-batch gradient descent from zero weights. Throws kEmptyTrainingSet,
// kDegenerateLabels (one class) or kInsufficientData (< 2 samples in a
// class).
LogisticModel TrainClassifier(std::span<const FeatureVector> train,
                              const TrainConfig& cfg = {});

struct F1Report {
  std::vector<std::string> classes;
  std::vector<double> f1;
  double macro = 0.0;

  // F1 of `label`, or -1 when the label is not part of the report.
  double F1For(const std::string& label) const;
};

// One-vs-rest F1 for each class in model.classes plus any label only seen in
// `test`. F1 is 0 when precision + recall is 0.
F1Report EvaluateF1(const LogisticModel& model,
                    std::span<const FeatureVector> test);

// Same scoring applied to given predictions, for oracle checks.
F1Report ScorePredictions(std::span<const std::string> truth,
                          std::span<const std::string> predicted,
                          std::vector<std::string> classes);

}  // namespace imuplace

#endif  // IMUPLACE_CLASSIFIER_HPP_
