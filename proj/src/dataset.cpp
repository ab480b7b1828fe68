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

#include "dcfusion/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "dcfusion/errors.hpp"

namespace dcfusion {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

std::vector<int> CountClasses(const std::vector<int>& labels, int c) {
  std::vector<int> counts(static_cast<std::size_t>(c), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

}  // namespace

// ---------------------------------------------------------------------------
// ClassLabels

ClassLabels ClassLabels::FromRaw(std::span<const LabelValue> raw) {
  std::vector<LabelValue> distinct(raw.begin(), raw.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) {
    throw LabelError(fmt::format("need at least 2 distinct labels, found {}", distinct.size()));
  }
  return FromRawWithMap(raw, distinct);
}

ClassLabels ClassLabels::FromRawWithMap(std::span<const LabelValue> raw,
                                        std::span<const LabelValue> label_map) {
  std::map<LabelValue, int> dense;
  for (std::size_t l = 0; l < label_map.size(); ++l) {
    if (!dense.emplace(label_map[l], static_cast<int>(l)).second) {
      throw LabelError(fmt::format("label map repeats value {}", label_map[l]));
    }
  }
  ClassLabels out;
  out.labels_.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto it = dense.find(raw[i]);
    if (it == dense.end()) {
      throw LabelError(fmt::format("label {} at line {} is not a known class", raw[i], i + 1));
    }
    out.labels_.push_back(it->second);
  }
  out.label_map_.assign(label_map.begin(), label_map.end());
  out.class_counts_ = CountClasses(out.labels_, static_cast<int>(label_map.size()));
  return out;
}

ClassLabels ClassLabels::FromDense(std::vector<int> dense, int num_classes) {
  for (int l : dense) {
    if (l < 0 || l >= num_classes) {
      throw LabelError(fmt::format("dense label {} outside [0, {})", l, num_classes));
    }
  }
  ClassLabels out;
  out.class_counts_ = CountClasses(dense, num_classes);
  out.labels_ = std::move(dense);
  out.label_map_.resize(static_cast<std::size_t>(num_classes));
  for (int l = 0; l < num_classes; ++l) out.label_map_[static_cast<std::size_t>(l)] = l;
  return out;
}

ClassLabels ClassLabels::Singletons(std::size_t n) {
  std::vector<int> dense(n);
  for (std::size_t i = 0; i < n; ++i) dense[i] = static_cast<int>(i);
  return FromDense(std::move(dense), static_cast<int>(n));
}

ClassLabels ClassLabels::Permuted(std::span<const std::size_t> order) const {
  ClassLabels out = *this;
  for (std::size_t i = 0; i < order.size(); ++i) out.labels_[i] = labels_[order[i]];
  return out;
}

// ---------------------------------------------------------------------------
// FeatureSet

FeatureSet::FeatureSet(Eigen::MatrixXd data, std::string name)
    : data_(std::move(data)), name_(std::move(name)) {
  means_ = Eigen::VectorXd::Zero(data_.rows());
  scales_ = Eigen::VectorXd::Ones(data_.rows());
}

FeatureSet::FeatureSet(Eigen::MatrixXd data, Eigen::VectorXd means, Eigen::VectorXd scales,
                       std::string name)
    : data_(std::move(data)), means_(std::move(means)), scales_(std::move(scales)),
      name_(std::move(name)) {
  if (means_.size() != data_.rows() || scales_.size() != data_.rows()) {
    throw DimensionError(fmt::format("modality '{}': {} features but {} means / {} scales",
                                     name_, data_.rows(), means_.size(), scales_.size()));
  }
}

bool FeatureSet::IsCentered() const {
  if (data_.size() == 0) return true;
  const double tol = 1e-9 * static_cast<double>(data_.cols()) * data_.cwiseAbs().maxCoeff();
  return (data_.rowwise().sum().cwiseAbs().array() <= tol).all();
}

// ---------------------------------------------------------------------------
// MultimodalDataset

MultimodalDataset::MultimodalDataset(std::vector<FeatureSet> modalities, ClassLabels labels)
    : modalities_(std::move(modalities)), labels_(std::move(labels)) {
  if (modalities_.empty()) throw ValidationError("dataset needs at least one modality");
  const Eigen::Index n = modalities_.front().samples();
  for (const auto& m : modalities_) {
    if (m.samples() != n) {
      throw AlignmentError(fmt::format("modality '{}' has {} samples, expected {}", m.name(),
                                       m.samples(), n));
    }
    if (m.dim() < 1) throw DimensionError(fmt::format("modality '{}' has no features", m.name()));
  }
  if (static_cast<Eigen::Index>(labels_.size()) != n) {
    throw AlignmentError(fmt::format("{} labels for {} samples", labels_.size(), n));
  }
  if (n < 2) throw ValidationError("dataset needs at least 2 samples");
}

Eigen::Index MultimodalDataset::total_dim() const {
  Eigen::Index q = 0;
  for (const auto& m : modalities_) q += m.dim();
  return q;
}

std::vector<Eigen::Index> MultimodalDataset::dims() const {
  std::vector<Eigen::Index> out;
  for (const auto& m : modalities_) out.push_back(m.dim());
  return out;
}

Eigen::MatrixXd MultimodalDataset::Stacked() const {
  Eigen::MatrixXd x(total_dim(), samples());
  Eigen::Index row = 0;
  for (const auto& m : modalities_) {
    x.middleRows(row, m.dim()) = m.data();
    row += m.dim();
  }
  return x;
}

MultimodalDataset MultimodalDataset::Permuted(std::span<const std::size_t> order) const {
  std::vector<FeatureSet> sets;
  for (const auto& m : modalities_) {
    Eigen::MatrixXd data(m.dim(), m.samples());
    for (std::size_t i = 0; i < order.size(); ++i) {
      data.col(static_cast<Eigen::Index>(i)) = m.data().col(static_cast<Eigen::Index>(order[i]));
    }
    sets.emplace_back(std::move(data), m.feature_means(), m.feature_scales(), m.name());
  }
  return MultimodalDataset(std::move(sets), labels_.Permuted(order));
}

CenteringStats CenteringStats::Of(const MultimodalDataset& dataset) {
  CenteringStats stats;
  for (const auto& m : dataset.modalities()) {
    stats.means.push_back(m.feature_means());
    stats.scales.push_back(m.feature_scales());
  }
  return stats;
}

// ---------------------------------------------------------------------------
// I/O

Eigen::MatrixXd ParseFeatureCsv(std::istream& in, const std::string& source,
                                const CsvOptions& options) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (options.header && line_no == 1) continue;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = trimmed.find(',', start);
      const std::string_view cell =
          Trim(trimmed.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(fmt::format("{}: non-numeric cell '{}' at row {}, column {}", source,
                                     cell, line_no, col + 1),
                         line_no, col + 1);
      }
      values.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      throw ParseError(fmt::format("{}: row {} has {} columns, expected {}", source, line_no, col,
                                   cols),
                       line_no, col);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(fmt::format("{}: no data rows", source), 0, 0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
    }
  }
  return out;
}

Eigen::MatrixXd ReadFeatureCsv(const std::filesystem::path& path, const CsvOptions& options) {
  auto in = OpenForRead(path);
  return ParseFeatureCsv(in, path.string(), options);
}

std::vector<LabelValue> ParseLabels(std::istream& in, const std::string& source) {
  std::vector<LabelValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view cell = Trim(line);
    if (cell.empty()) continue;
    LabelValue v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw ParseError(fmt::format("{}: non-integer label '{}' at row {}", source, cell, line_no),
                       line_no, 1);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<LabelValue> ReadLabels(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  return ParseLabels(in, path.string());
}

void WriteFeatureCsv(const std::filesystem::path& path, const FeatureSet& set) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  const auto& x = set.data();
  std::string line;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    line.clear();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (i > 0) line += ',';
      line += fmt::format("{}", x(i, j));
    }
    out << line << '\n';
  }
}

void WriteLabels(const std::filesystem::path& path, const ClassLabels& labels) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  for (int l : labels.labels()) out << labels.label_map()[static_cast<std::size_t>(l)] << '\n';
}

namespace {

std::vector<FeatureSet> LoadModalities(std::span<const std::filesystem::path> files,
                                       const CsvOptions& options) {
  if (files.empty()) throw ValidationError("at least one modality file is required");
  std::vector<FeatureSet> sets;
  for (const auto& path : files) {
    Eigen::MatrixXd table = ReadFeatureCsv(path, options);
    if (!sets.empty() && table.rows() != sets.front().samples()) {
      throw AlignmentError(fmt::format("'{}' has {} rows but '{}' has {}", path.string(),
                                       table.rows(), sets.front().name(),
                                       sets.front().samples()));
    }
    sets.emplace_back(table.transpose(), path.string());
  }
  return sets;
}

}  // namespace

MultimodalDataset LoadDataset(std::span<const std::filesystem::path> modality_files,
                              const std::filesystem::path& labels_file,
                              const CsvOptions& options) {
  auto sets = LoadModalities(modality_files, options);
  const auto raw = ReadLabels(labels_file);
  if (static_cast<Eigen::Index>(raw.size()) != sets.front().samples()) {
    throw AlignmentError(fmt::format("'{}' has {} labels but modalities have {} rows",
                                     labels_file.string(), raw.size(), sets.front().samples()));
  }
  return MultimodalDataset(std::move(sets), ClassLabels::FromRaw(raw));
}

MultimodalDataset LoadDatasetWithLabelMap(std::span<const std::filesystem::path> modality_files,
                                          const std::filesystem::path& labels_file,
                                          std::span<const LabelValue> label_map,
                                          const CsvOptions& options) {
  auto sets = LoadModalities(modality_files, options);
  const auto raw = ReadLabels(labels_file);
  if (static_cast<Eigen::Index>(raw.size()) != sets.front().samples()) {
    throw AlignmentError(fmt::format("'{}' has {} labels but modalities have {} rows",
                                     labels_file.string(), raw.size(), sets.front().samples()));
  }
  return MultimodalDataset(std::move(sets), ClassLabels::FromRawWithMap(raw, label_map));
}

// ---------------------------------------------------------------------------
// Normalization

MultimodalDataset Center(const MultimodalDataset& dataset, bool scale_variance) {
  std::vector<FeatureSet> sets;
  for (const auto& m : dataset.modalities()) {
    const Eigen::VectorXd residual_mean = m.data().rowwise().mean();
    Eigen::MatrixXd data = m.data().colwise() - residual_mean;
    Eigen::VectorXd means = m.feature_means() + m.feature_scales().cwiseProduct(residual_mean);
    Eigen::VectorXd scales = m.feature_scales();
    if (scale_variance) {
      const double denom = static_cast<double>(std::max<Eigen::Index>(data.cols() - 1, 1));
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const double sd = std::sqrt(data.row(i).squaredNorm() / denom);
        // Constant features stay as zeros.
        if (sd > 0.0) {
          data.row(i) /= sd;
          scales(i) *= sd;
        }
      }
    }
    sets.emplace_back(std::move(data), std::move(means), std::move(scales), m.name());
  }
  return MultimodalDataset(std::move(sets), dataset.labels());
}

MultimodalDataset ApplyCentering(const CenteringStats& stats, const MultimodalDataset& raw) {
  if (stats.means.size() != raw.num_modalities() || stats.scales.size() != raw.num_modalities()) {
    throw DimensionError(fmt::format("centering statistics cover {} modalities, data has {}",
                                     stats.means.size(), raw.num_modalities()));
  }
  std::vector<FeatureSet> sets;
  for (std::size_t k = 0; k < raw.num_modalities(); ++k) {
    const auto& m = raw.modality(k);
    if (stats.means[k].size() != m.dim() || stats.scales[k].size() != m.dim()) {
      throw DimensionError(fmt::format("modality {} has {} features but {} stored means", k,
                                       m.dim(), stats.means[k].size()));
    }
    Eigen::MatrixXd data = m.data().colwise() - stats.means[k];
    data.array().colwise() /= stats.scales[k].array();
    sets.emplace_back(std::move(data), stats.means[k], stats.scales[k], m.name());
  }
  return MultimodalDataset(std::move(sets), raw.labels());
}

}  // namespace dcfusion
