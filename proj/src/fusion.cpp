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

#include "dcfusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dcfusion/errors.hpp"

namespace dcfusion {

std::string_view MethodTag(FusionMethod method) {
  switch (method) {
    case FusionMethod::kCca: return "cca";
    case FusionMethod::kDcca: return "dcca";
    case FusionMethod::kDiscriminative: return "discriminative";
    case FusionMethod::kMcca: return "mcca";
    case FusionMethod::kSerial: return "serial";
  }
  return "unknown";
}

FusionMethod ParseMethod(std::string_view tag) {
  for (FusionMethod m : kAllMethods) {
    if (MethodTag(m) == tag) return m;
  }
  throw ConfigError(fmt::format("unknown method '{}'", tag));
}

void CheckModalityCount(FusionMethod method, std::size_t num_modalities) {
  switch (method) {
    case FusionMethod::kCca:
    case FusionMethod::kDcca:
      if (num_modalities != 2) {
        throw ValidationError(
            fmt::format("requires P=2 (got P={})", num_modalities));
      }
      break;
    case FusionMethod::kDiscriminative:
    case FusionMethod::kMcca:
      if (num_modalities < 2) {
        throw ValidationError(
            fmt::format("requires P>=2 (got P={})", num_modalities));
      }
      break;
    case FusionMethod::kSerial:
      if (num_modalities < 1) throw ValidationError("requires P>=1");
      break;
  }
}

std::vector<Eigen::Index> ProjectionModel::dims() const {
  std::vector<Eigen::Index> out;
  for (const auto& b : omega_blocks) out.push_back(b.rows());
  return out;
}

Eigen::Index ProjectionModel::total_dim() const {
  Eigen::Index q = 0;
  for (const auto& b : omega_blocks) q += b.rows();
  return q;
}

Eigen::Index ProjectionModel::spectrum_size() const {
  return omega_blocks.empty() ? 0 : omega_blocks.front().cols();
}

Eigen::MatrixXd ProjectionModel::Omega() const {
  Eigen::MatrixXd omega(total_dim(), spectrum_size());
  Eigen::Index row = 0;
  for (const auto& b : omega_blocks) {
    omega.middleRows(row, b.rows()) = b;
    row += b.rows();
  }
  return omega;
}

namespace {

std::vector<Eigen::MatrixXd> SplitBlocks(const Eigen::MatrixXd& stacked,
                                         const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index row = 0;
  for (Eigen::Index m : dims) {
    blocks.emplace_back(stacked.middleRows(row, m));
    row += m;
  }
  return blocks;
}

}  // namespace

ProjectionModel Fit(const MultimodalDataset& centered, FusionMethod method,
                    const FitOptions& options) {
  CheckModalityCount(method, centered.num_modalities());
  for (const auto& m : centered.modalities()) {
    if (!m.IsCentered()) {
      throw ValidationError(fmt::format("modality '{}' is not centered", m.name()));
    }
  }
  const Eigen::Index q = centered.total_dim();
  if (options.dim && (*options.dim < 1 || *options.dim > q)) {
    throw DimensionError(fmt::format("dimension {} outside [1, {}]", *options.dim, q));
  }

  ProjectionModel model;
  model.method = method;
  model.num_classes = centered.labels().num_classes();
  model.label_map = centered.labels().label_map();
  model.centering = CenteringStats::Of(centered);

  if (method == FusionMethod::kSerial) {
    model.omega_blocks = SplitBlocks(Eigen::MatrixXd::Identity(q, q), centered.dims());
    model.d = options.dim.value_or(q);
    model.normalization = kNormIdentity;
    model.scale = "none";
    return model;
  }

  const bool discriminative =
      method == FusionMethod::kDiscriminative || method == FusionMethod::kDcca;
  const ClassLabels affinity = discriminative
                                   ? centered.labels()
                                   : ClassLabels::Singletons(static_cast<std::size_t>(
                                         centered.samples()));
  const BlockMatrices blocks = BuildBlockMatrices(centered, affinity, options.ridge);
  const EigenSolution sol = SolveGeneralized(blocks, q);

  model.omega_blocks = SplitBlocks(sol.eigenvectors, blocks.dims);
  model.eigenvalues = sol.eigenvalues;
  model.lambda = blocks.lambda;
  model.scale = sol.scale;
  model.count_positive = CountPositive(sol);
  if (options.dim) {
    model.d = *options.dim;
  } else if (discriminative) {
    model.d = std::max<Eigen::Index>(1, std::min(model.count_positive, model.num_classes));
  } else {
    model.d = q;
  }
  return model;
}

ProjectedData Project(const ProjectionModel& model, const MultimodalDataset& raw,
                      std::optional<Eigen::Index> dim) {
  if (raw.dims() != model.dims()) {
    throw DimensionError(fmt::format("data has modality dims [{}], model expects [{}]",
                                     fmt::join(raw.dims(), ","), fmt::join(model.dims(), ",")));
  }
  const Eigen::Index d = dim.value_or(model.d);
  if (d < 1 || d > model.spectrum_size()) {
    throw DimensionError(
        fmt::format("dimension {} outside [1, {}]", d, model.spectrum_size()));
  }
  const MultimodalDataset centered = ApplyCentering(model.centering, raw);
  ProjectedData out;
  out.Y = Eigen::MatrixXd::Zero(d, centered.samples());
  for (std::size_t k = 0; k < centered.num_modalities(); ++k) {
    out.Y.noalias() += model.omega_blocks[k].leftCols(d).transpose() * centered.modality(k).data();
  }
  out.labels = centered.labels();
  return out;
}

ProjectionModel RescaleToConstraint(const ProjectionModel& model,
                                    const MultimodalDataset& centered) {
  if (model.method == FusionMethod::kSerial) return model;
  if (centered.dims() != model.dims()) {
    throw DimensionError("rescale data does not match model dimensions");
  }
  ProjectionModel out = model;
  out.unscaled_columns.clear();
  const double p = static_cast<double>(model.omega_blocks.size());
  double data_energy = 0.0;
  for (const auto& m : centered.modalities()) data_energy += m.data().squaredNorm();

  for (Eigen::Index j = 0; j < model.spectrum_size(); ++j) {
    double energy = 0.0;
    double omega_norm2 = 0.0;
    for (std::size_t k = 0; k < model.omega_blocks.size(); ++k) {
      const auto w = model.omega_blocks[k].col(j);
      energy += (centered.modality(k).data().transpose() * w).squaredNorm();
      omega_norm2 += w.squaredNorm();
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (!(energy > eps * eps * omega_norm2 * data_energy)) {
      out.unscaled_columns.push_back(j);
      continue;
    }
    const double s = std::sqrt(p / energy);
    for (auto& block : out.omega_blocks) block.col(j) *= s;
  }
  out.normalization = kNormSumConstraint;
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

nlohmann::json MatrixRows(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json Vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd ToVector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd ToMatrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows) {
    throw ValidationError(fmt::format("model block has {} rows, expected {}", j.size(), rows));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError(fmt::format("model block row {} has {} entries, expected {}", i,
                                        row.size(), cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c));
  }
  return m;
}

}  // namespace

nlohmann::json ModelToJson(const ProjectionModel& model) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["method"] = std::string(MethodTag(model.method));
  j["d"] = model.d;
  j["c"] = model.num_classes;
  j["count_positive"] = model.count_positive;
  j["dims"] = model.dims();
  j["spectrum_size"] = model.spectrum_size();
  j["lambda"] = model.lambda;
  j["normalization"] = model.normalization;
  j["scale"] = model.scale;
  j["eigenvalues"] = Vector(model.eigenvalues);
  auto blocks = nlohmann::json::array();
  for (const auto& b : model.omega_blocks) blocks.push_back(MatrixRows(b));
  j["omega_blocks"] = std::move(blocks);
  auto means = nlohmann::json::array();
  auto scales = nlohmann::json::array();
  for (std::size_t k = 0; k < model.centering.means.size(); ++k) {
    means.push_back(Vector(model.centering.means[k]));
    scales.push_back(Vector(model.centering.scales[k]));
  }
  j["feature_means"] = std::move(means);
  j["feature_scales"] = std::move(scales);
  j["label_map"] = model.label_map;
  j["unscaled_columns"] = model.unscaled_columns;
  return j;
}

ProjectionModel ModelFromJson(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ValidationError(fmt::format("unsupported model format version {}", version));
    }
    ProjectionModel model;
    model.method = ParseMethod(j.at("method").get<std::string>());
    model.d = j.at("d").get<Eigen::Index>();
    model.num_classes = j.at("c").get<int>();
    model.count_positive = j.at("count_positive").get<int>();
    model.lambda = j.at("lambda").get<double>();
    model.normalization = j.at("normalization").get<std::string>();
    model.scale = j.at("scale").get<std::string>();
    model.eigenvalues = ToVector(j.at("eigenvalues"));
    const auto dims = j.at("dims").get<std::vector<Eigen::Index>>();
    const auto spectrum = j.at("spectrum_size").get<Eigen::Index>();
    const auto& blocks = j.at("omega_blocks");
    const auto& means = j.at("feature_means");
    const auto& scales = j.at("feature_scales");
    if (blocks.size() != dims.size() || means.size() != dims.size() ||
        scales.size() != dims.size()) {
      throw ValidationError("model modality count is inconsistent");
    }
    for (std::size_t k = 0; k < dims.size(); ++k) {
      model.omega_blocks.push_back(ToMatrix(blocks.at(k), dims[k], spectrum));
      model.centering.means.push_back(ToVector(means.at(k)));
      model.centering.scales.push_back(ToVector(scales.at(k)));
      if (model.centering.means.back().size() != dims[k] ||
          model.centering.scales.back().size() != dims[k]) {
        throw ValidationError(fmt::format("model centering for modality {} has wrong length", k));
      }
    }
    model.label_map = j.at("label_map").get<std::vector<LabelValue>>();
    model.unscaled_columns = j.value("unscaled_columns", std::vector<Eigen::Index>{});
    if (model.d < 1 || model.d > spectrum) {
      throw ValidationError(fmt::format("model d={} outside [1, {}]", model.d, spectrum));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed model file: {}", e.what()));
  }
}

void SaveModel(const std::filesystem::path& path, const ProjectionModel& model) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  out << ModelToJson(model).dump(2) << '\n';
}

ProjectionModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return ModelFromJson(j);
}

}  // namespace dcfusion
