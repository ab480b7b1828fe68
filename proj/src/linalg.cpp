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

#include "dcfusion/linalg.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include <fmt/format.h>

#include "dcfusion/errors.hpp"

namespace dcfusion {

namespace {

void CheckSampleCounts(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& x_m,
                       const ClassLabels& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (x_k.cols() != n || x_m.cols() != n) {
    throw DimensionError(fmt::format("sample count mismatch: {} and {} columns, {} labels",
                                     x_k.cols(), x_m.cols(), n));
  }
}

// Columns are x e_l: the per-class sums of samples.
Eigen::MatrixXd ClassSums(const Eigen::MatrixXd& x, const ClassLabels& labels) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x.rows(), labels.num_classes());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    sums.col(labels[static_cast<std::size_t>(j)]) += x.col(j);
  }
  return sums;
}

}  // namespace

Eigen::MatrixXd MaterializeClassIndicator(const ClassLabels& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0
                                                                                            : 0.0;
    }
  }
  return a;
}

Eigen::MatrixXd WithinClassCorrelation(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& x_m,
                                       const ClassLabels& labels) {
  CheckSampleCounts(x_k, x_m, labels);
  return ClassSums(x_k, labels) * ClassSums(x_m, labels).transpose();
}

Eigen::MatrixXd BetweenClassCorrelation(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& x_m,
                                        const ClassLabels& labels) {
  return -WithinClassCorrelation(x_k, x_m, labels);
}

BlockMatrices BuildBlockMatrices(const MultimodalDataset& dataset, const ClassLabels& affinity,
                                 const RidgePolicy& policy) {
  const std::size_t p = dataset.num_modalities();
  const Eigen::Index q = dataset.total_dim();
  if (static_cast<Eigen::Index>(affinity.size()) != dataset.samples()) {
    throw DimensionError(fmt::format("affinity covers {} samples, dataset has {}",
                                     affinity.size(), dataset.samples()));
  }

  BlockMatrices b;
  b.dims = dataset.dims();
  b.C = Eigen::MatrixXd::Zero(q, q);
  b.D = Eigen::MatrixXd::Zero(q, q);

  std::vector<Eigen::MatrixXd> sums;
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (const auto& m : dataset.modalities()) {
    sums.push_back(ClassSums(m.data(), affinity));
    offsets.push_back(offset);
    offset += m.dim();
  }

  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p; ++k) {
    const auto& xk = dataset.modality(k).data();
    Eigen::MatrixXd auto_corr = xk * xk.transpose();
    // Exactly symmetric so that the diagonal blocks of C and D agree bitwise.
    auto_corr = 0.5 * (auto_corr + auto_corr.transpose()).eval();
    b.C.block(offsets[k], offsets[k], xk.rows(), xk.rows()) = auto_corr;
    b.D.block(offsets[k], offsets[k], xk.rows(), xk.rows()) = auto_corr;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(auto_corr, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    for (std::size_t m = k + 1; m < p; ++m) {
      const Eigen::MatrixXd cross = sums[k] * sums[m].transpose();
      b.C.block(offsets[k], offsets[m], cross.rows(), cross.cols()) = cross;
      b.C.block(offsets[m], offsets[k], cross.cols(), cross.rows()) = cross.transpose();
    }
  }
  b.min_eigenvalue_D = min_eig;

  const double mean_diag = b.D.trace() / static_cast<double>(q);
  if (policy.lambda_override) {
    if (*policy.lambda_override < 0.0) throw ConfigError("ridge lambda must be nonnegative");
    b.lambda = *policy.lambda_override;
  } else if (min_eig <= policy.singular_rel * mean_diag) {
    // All-zero data has no scale to be relative to.
    b.lambda = policy.ridge_rel * (mean_diag > 0.0 ? mean_diag : 1.0);
  }
  b.D_plus = b.D;
  if (b.lambda > 0.0) b.D_plus.diagonal().array() += b.lambda;
  return b;
}

BlockMatrices BuildBlockMatrices(const MultimodalDataset& dataset, const RidgePolicy& policy) {
  return BuildBlockMatrices(dataset, dataset.labels(), policy);
}

Eigen::MatrixXd CholeskyLower(const Eigen::MatrixXd& spd) {
  const Eigen::Index n = spd.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = spd(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) {
      throw NumericError(fmt::format("matrix not positive definite: pivot {} is {}", j, pivot), j);
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    if (j + 1 < n) {
      const Eigen::Index rest = n - j - 1;
      l.col(j).tail(rest) =
          (spd.col(j).tail(rest) - l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose()) /
          ljj;
    }
  }
  return l;
}

EigenSolution SolveGeneralized(const BlockMatrices& blocks, Eigen::Index k) {
  const Eigen::Index q = blocks.total_dim();
  if (k < 1 || k > q) {
    throw DimensionError(fmt::format("requested {} eigenpairs of a {}-dimensional problem", k, q));
  }
  const std::size_t p = blocks.num_sets();
  const double factor = p > 1 ? 1.0 / static_cast<double>(p - 1) : 0.0;
  const Eigen::MatrixXd s = factor * (blocks.C - blocks.D);

  const Eigen::MatrixXd l = CholeskyLower(blocks.D_plus);
  const auto lower = l.triangularView<Eigen::Lower>();
  // M = L^{-1} S L^{-T}
  Eigen::MatrixXd m = lower.solve(s);
  m = lower.solve(m.transpose().eval());
  m = 0.5 * (m + m.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");

  EigenSolution sol;
  sol.eigenvalues.resize(k);
  Eigen::MatrixXd v(q, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sol.eigenvalues(i) = es.eigenvalues()(q - 1 - i);
    v.col(i) = es.eigenvectors().col(q - 1 - i);
  }
  sol.eigenvectors = l.transpose().triangularView<Eigen::Upper>().solve(v);

  for (Eigen::Index i = 0; i < k; ++i) {
    auto w = sol.eigenvectors.col(i);
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w(arg) < 0.0) w = -w;
  }

  sol.residuals.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto w = sol.eigenvectors.col(i);
    sol.residuals(i) = (s * w - sol.eigenvalues(i) * (blocks.D_plus * w)).norm();
  }
  return sol;
}

double PositiveThreshold(const Eigen::VectorXd& eigenvalues) {
  const double top = eigenvalues.size() > 0 ? std::abs(eigenvalues(0)) : 0.0;
  return 1e-10 * std::max(1.0, top);
}

int CountPositive(const Eigen::VectorXd& eigenvalues) {
  const double tau = PositiveThreshold(eigenvalues);
  return static_cast<int>((eigenvalues.array() > tau).count());
}

}  // namespace dcfusion
