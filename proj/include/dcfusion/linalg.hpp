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

#ifndef DCFUSION_LINALG_HPP
#define DCFUSION_LINALG_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcfusion/dataset.hpp"

namespace dcfusion {

/// Tag stored alongside eigenvalues: the objective is scaled by 1/(P-1).
inline constexpr const char* kPairwiseScaleTag = "1/(P-1)";

/// When D counts as singular, and how much identity to add if it does.
/// Both thresholds are relative to the mean diagonal trace(D)/Q.
struct RidgePolicy {
  double singular_rel = 1e-10;
  double ridge_rel = 1e-6;
  /// Forces D+ = D + lambda I regardless of the singularity test.
  std::optional<double> lambda_override;
};

struct BlockMatrices {
  /// Diagonal blocks x_k x_k^T, off-diagonal blocks x_k A x_m^T.
  Eigen::MatrixXd C;
  /// Block diagonal of x_k x_k^T.
  Eigen::MatrixXd D;
  /// D, or D + lambda I when D is singular.
  Eigen::MatrixXd D_plus;
  double lambda = 0.0;
  double min_eigenvalue_D = 0.0;
  std::vector<Eigen::Index> dims;

  std::size_t num_sets() const { return dims.size(); }
  Eigen::Index total_dim() const { return C.rows(); }
  bool regularized() const { return lambda > 0.0; }
};

/// Eigenpairs of (1/(P-1)) (D+)^{-1} (C - D), descending.
struct EigenSolution {
  Eigen::VectorXd eigenvalues;
  /// Q x k, D+-orthonormal columns, largest-|entry| of each column positive.
  Eigen::MatrixXd eigenvectors;
  /// ||S w - eta D+ w|| per pair, S = (C - D)/(P-1).
  Eigen::VectorXd residuals;
  std::string scale = kPairwiseScaleTag;
};

/// Dense n x n same-class indicator. Test/oracle use only.
Eigen::MatrixXd MaterializeClassIndicator(const ClassLabels& labels);

/// x_k A x_m^T via per-class column sums; A is never formed.
Eigen::MatrixXd WithinClassCorrelation(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& x_m,
                                       const ClassLabels& labels);

/// -x_k A x_m^T. For centered data this equals the cross-class sum.
Eigen::MatrixXd BetweenClassCorrelation(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& x_m,
                                        const ClassLabels& labels);

/// Builds C, D and D+ from centered modalities with A defined by `affinity`
/// (class labels for the discriminative model, singletons for MCCA).
BlockMatrices BuildBlockMatrices(const MultimodalDataset& dataset, const ClassLabels& affinity,
                                 const RidgePolicy& policy = {});

/// Same, using the dataset's own labels.
BlockMatrices BuildBlockMatrices(const MultimodalDataset& dataset,
                                 const RidgePolicy& policy = {});

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// Throws NumericError carrying the index of the first non-positive pivot.
Eigen::MatrixXd CholeskyLower(const Eigen::MatrixXd& spd);

/// The k largest eigenpairs via D+ = L L^T and a symmetric problem on
/// L^{-1}(C - D)L^{-T}. Computed as a full solve followed by truncation.
EigenSolution SolveGeneralized(const BlockMatrices& blocks, Eigen::Index k);

/// tau_pos = 1e-10 * max(1, |eta_1|).
double PositiveThreshold(const Eigen::VectorXd& eigenvalues);

/// Number of eigenvalues above PositiveThreshold.
int CountPositive(const Eigen::VectorXd& eigenvalues);
inline int CountPositive(const EigenSolution& solution) {
  return CountPositive(solution.eigenvalues);
}

}  // namespace dcfusion

#endif  // DCFUSION_LINALG_HPP
