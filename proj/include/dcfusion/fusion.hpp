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

#ifndef DCFUSION_FUSION_HPP
#define DCFUSION_FUSION_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "dcfusion/dataset.hpp"
#include "dcfusion/linalg.hpp"

namespace dcfusion {

/// Enumerators are in tag order, which is also the reporting order.
enum class FusionMethod { kCca, kDcca, kDiscriminative, kMcca, kSerial };

inline constexpr std::array<FusionMethod, 5> kAllMethods = {
    FusionMethod::kCca, FusionMethod::kDcca, FusionMethod::kDiscriminative, FusionMethod::kMcca,
    FusionMethod::kSerial};

std::string_view MethodTag(FusionMethod method);
/// Throws ConfigError on an unknown tag.
FusionMethod ParseMethod(std::string_view tag);

/// Throws ValidationError ("requires P=2 (got P=3)", ...) if the method cannot
/// run on `num_modalities` sets.
void CheckModalityCount(FusionMethod method, std::size_t num_modalities);

inline constexpr const char* kNormDPlusOrthonormal = "dplus-orthonormal";
inline constexpr const char* kNormSumConstraint = "sum-constraint-P";
inline constexpr const char* kNormIdentity = "identity";

struct FitOptions {
  /// Projected dimension; the method's default when empty.
  std::optional<Eigen::Index> dim;
  RidgePolicy ridge;
};

/// A fitted joint projection. Columns of the stacked omega are ordered by
/// decreasing eigenvalue; `d` is the number of leading columns in use.
struct ProjectionModel {
  FusionMethod method = FusionMethod::kSerial;
  /// Block k is m_k x spectrum_size().
  std::vector<Eigen::MatrixXd> omega_blocks;
  /// Empty for serial fusion.
  Eigen::VectorXd eigenvalues;
  Eigen::Index d = 0;
  int num_classes = 0;
  int count_positive = 0;
  double lambda = 0.0;
  CenteringStats centering;
  std::vector<LabelValue> label_map;
  std::string normalization = kNormDPlusOrthonormal;
  std::string scale = kPairwiseScaleTag;
  /// Columns RescaleToConstraint could not scale (zero projected energy).
  std::vector<Eigen::Index> unscaled_columns;

  std::vector<Eigen::Index> dims() const;
  Eigen::Index total_dim() const;
  Eigen::Index spectrum_size() const;
  /// Vertical concatenation of the omega blocks (Q x spectrum_size()).
  Eigen::MatrixXd Omega() const;
};

struct ProjectedData {
  /// d x n.
  Eigen::MatrixXd Y;
  ClassLabels labels;
};

/// Fits `method` on a centered dataset.
///
/// discriminative: class-indicator A, default d = min(count_positive, c).
/// mcca: A = I (no labels). cca / dcca: mcca / discriminative with P = 2.
/// serial: identity projection, d = Q.
ProjectionModel Fit(const MultimodalDataset& centered, FusionMethod method,
                    const FitOptions& options = {});

/// Centers raw data with the model's training statistics and returns
/// omega^T X using the first `dim` columns (model.d by default).
ProjectedData Project(const ProjectionModel& model, const MultimodalDataset& raw,
                      std::optional<Eigen::Index> dim = std::nullopt);

/// Rescales each eigenvector so that sum_k w_k^T x_k x_k^T w_k = P on the
/// given centered data. Serial models are returned unchanged.
ProjectionModel RescaleToConstraint(const ProjectionModel& model,
                                    const MultimodalDataset& centered);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json ModelToJson(const ProjectionModel& model);
ProjectionModel ModelFromJson(const nlohmann::json& j);
void SaveModel(const std::filesystem::path& path, const ProjectionModel& model);
ProjectionModel LoadModel(const std::filesystem::path& path);

}  // namespace dcfusion

#endif  // DCFUSION_FUSION_HPP
