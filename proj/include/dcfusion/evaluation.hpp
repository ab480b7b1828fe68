// Copyright 2026 The dcfusion Authors.
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

#ifndef DCFUSION_EVALUATION_HPP
#define DCFUSION_EVALUATION_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "dcfusion/dataset.hpp"
#include "dcfusion/fusion.hpp"

namespace dcfusion {

enum class Metric { kEuclidean };

std::string_view MetricTag(Metric metric);
Metric ParseMetric(std::string_view tag);

/// Label of the nearest training column; ties go to the lowest column index.
int NnClassify(const ProjectedData& train, const Eigen::VectorXd& point,
               Metric metric = Metric::kEuclidean);

struct DimAccuracy {
  Eigen::Index dim = 0;
  double accuracy = 0.0;
};

/// Nearest-neighbour predictions for each eval column using the leading
/// `dim` rows of both projections.
std::vector<int> NnPredict(const ProjectedData& train, const ProjectedData& eval, Eigen::Index dim,
                           Metric metric = Metric::kEuclidean);

/// Accuracy for d = 1..k on the leading rows of k-dimensional projections.
std::vector<DimAccuracy> SweepDimensions(const ProjectedData& train, const ProjectedData& eval,
                                         Metric metric = Metric::kEuclidean);

/// Projects raw train/eval data with `model` and sweeps its whole spectrum.
/// Serial models give the single point d = Q.
std::vector<DimAccuracy> SweepDimensions(const ProjectionModel& model,
                                         const MultimodalDataset& raw_train,
                                         const MultimodalDataset& raw_eval,
                                         Metric metric = Metric::kEuclidean);

struct JCurve {
  /// values[q-1] = eta_1 + ... + eta_q.
  std::vector<double> values;
  /// Smallest q whose J is within PositiveThreshold of the maximum.
  Eigen::Index optimal_dim = 0;
};

/// Cumulative eigenvalue criterion. Throws ValidationError on an empty spectrum.
JCurve JCriterion(const Eigen::VectorXd& eigenvalues);

struct EvalConfig {
  /// Evaluate only this dimension instead of sweeping.
  std::optional<Eigen::Index> dim;
  RidgePolicy ridge;
  Metric metric = Metric::kEuclidean;
  bool scale_variance = false;
};

struct EvalReport {
  FusionMethod method = FusionMethod::kSerial;
  std::vector<DimAccuracy> accuracy_by_dim;
  Eigen::Index optimal_dim = 0;
  double optimal_accuracy = 0.0;
  /// Rows are true classes, columns predictions, at optimal_dim.
  Eigen::MatrixXi confusion;
  JCurve j_curve;
  Eigen::VectorXd eigenvalues;
  int count_positive = 0;
  int num_classes = 0;
  Eigen::Index model_dim = 0;
  std::vector<LabelValue> label_map;
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
};

/// Fits on raw training data, sweeps projected dimensions on the evaluation
/// data and reports the best one. Evaluation data is normalized with the
/// training statistics; its labels are mapped through the training label map.
EvalReport Evaluate(const MultimodalDataset& raw_train, const MultimodalDataset& raw_eval,
                    FusionMethod method, const EvalConfig& config = {});

nlohmann::json ReportToJson(const EvalReport& report);

/// Writes `<prefix>_report.json`, `<prefix>_accuracy.csv` ("dim,accuracy")
/// and `<prefix>_j.csv` ("q,J"; header only for serial fusion).
void WriteReport(const std::filesystem::path& dir, const std::string& prefix,
                 const EvalReport& report);

/// "method, optimal accuracy, dimension", e.g. "discriminative, 60.42%, 4".
std::string TableRow(const EvalReport& report);

}  // namespace dcfusion

#endif  // DCFUSION_EVALUATION_HPP
