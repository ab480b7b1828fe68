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

#ifndef DCFUSION_DATASET_HPP
#define DCFUSION_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcfusion {

using LabelValue = std::int64_t;

/// Per-sample class ids, densely remapped to 0..c-1.
///
/// `label_map()[l]` is the original (file) value of dense class `l`. Dense ids
/// follow ascending order of the original values so the map is stable under
/// sample permutation.
class ClassLabels {
 public:
  ClassLabels() = default;

  /// Dense-remaps raw labels. Requires at least two distinct values.
  static ClassLabels FromRaw(std::span<const LabelValue> raw);

  /// Maps raw labels through an existing dense map (e.g. the training map).
  /// Classes may be empty here; unknown values are a LabelError.
  static ClassLabels FromRawWithMap(std::span<const LabelValue> raw,
                                    std::span<const LabelValue> label_map);

  /// Already-dense ids in [0, num_classes). Used by generators and tests.
  static ClassLabels FromDense(std::vector<int> dense, int num_classes);

  /// Every sample is its own class, so the class-indicator matrix is I.
  static ClassLabels Singletons(std::size_t n);

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& class_counts() const { return class_counts_; }
  const std::vector<LabelValue>& label_map() const { return label_map_; }
  int num_classes() const { return static_cast<int>(class_counts_.size()); }
  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }

  /// Copy with samples reordered: result[i] = this[order[i]].
  ClassLabels Permuted(std::span<const std::size_t> order) const;

 private:
  std::vector<int> labels_;
  std::vector<int> class_counts_;
  std::vector<LabelValue> label_map_;
};

/// One modality: m features (rows) by n samples (columns).
class FeatureSet {
 public:
  FeatureSet() = default;
  /// Takes raw (uncentered) data; means are zero and scales one.
  FeatureSet(Eigen::MatrixXd data, std::string name);
  FeatureSet(Eigen::MatrixXd data, Eigen::VectorXd means, Eigen::VectorXd scales,
             std::string name);

  const Eigen::MatrixXd& data() const { return data_; }
  /// Means subtracted from the raw data so far, in raw units.
  const Eigen::VectorXd& feature_means() const { return means_; }
  /// Per-feature divisors applied after centering (all ones unless variance
  /// scaling is enabled).
  const Eigen::VectorXd& feature_scales() const { return scales_; }
  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return data_.rows(); }
  Eigen::Index samples() const { return data_.cols(); }

  /// True when every row sums to zero within 1e-9 * n * max|entry|.
  bool IsCentered() const;

 private:
  Eigen::MatrixXd data_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  std::string name_;
};

/// P sample-aligned modalities plus their labels.
class MultimodalDataset {
 public:
  MultimodalDataset() = default;
  MultimodalDataset(std::vector<FeatureSet> modalities, ClassLabels labels);

  const std::vector<FeatureSet>& modalities() const { return modalities_; }
  const FeatureSet& modality(std::size_t k) const { return modalities_[k]; }
  const ClassLabels& labels() const { return labels_; }
  std::size_t num_modalities() const { return modalities_.size(); }
  Eigen::Index samples() const { return modalities_.front().samples(); }
  /// Q = m_1 + ... + m_P.
  Eigen::Index total_dim() const;
  std::vector<Eigen::Index> dims() const;

  /// Vertical stack of the modality matrices (Q x n).
  Eigen::MatrixXd Stacked() const;
  /// Consistent reordering of samples across all modalities and labels.
  MultimodalDataset Permuted(std::span<const std::size_t> order) const;

 private:
  std::vector<FeatureSet> modalities_;
  ClassLabels labels_;
};

/// Training-time normalization, replayed on evaluation data.
struct CenteringStats {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> scales;

  static CenteringStats Of(const MultimodalDataset& dataset);
};

struct CsvOptions {
  bool header = false;
};

/// Parses a comma-separated numeric table, one sample per row. Returns the
/// samples-by-features matrix as written in the file.
Eigen::MatrixXd ParseFeatureCsv(std::istream& in, const std::string& source,
                                const CsvOptions& options = {});
Eigen::MatrixXd ReadFeatureCsv(const std::filesystem::path& path,
                               const CsvOptions& options = {});
std::vector<LabelValue> ParseLabels(std::istream& in, const std::string& source);
std::vector<LabelValue> ReadLabels(const std::filesystem::path& path);

/// Writes samples-by-features CSV with round-trip precision.
void WriteFeatureCsv(const std::filesystem::path& path, const FeatureSet& set);
void WriteLabels(const std::filesystem::path& path, const ClassLabels& labels);

/// Loads uncentered modalities and dense-remapped labels.
MultimodalDataset LoadDataset(std::span<const std::filesystem::path> modality_files,
                              const std::filesystem::path& labels_file,
                              const CsvOptions& options = {});

/// Like LoadDataset but maps labels through a known label map.
MultimodalDataset LoadDatasetWithLabelMap(
    std::span<const std::filesystem::path> modality_files,
    const std::filesystem::path& labels_file, std::span<const LabelValue> label_map,
    const CsvOptions& options = {});

/// Subtracts each feature's sample mean (optionally dividing by its standard
/// deviation). Repeated centering accumulates into the stored means, so
/// Center(Center(x)) == Center(x) up to rounding.
MultimodalDataset Center(const MultimodalDataset& dataset, bool scale_variance = false);

/// Normalizes raw data with stored statistics. Never recomputes means.
MultimodalDataset ApplyCentering(const CenteringStats& stats, const MultimodalDataset& raw);

}  // namespace dcfusion

#endif  // DCFUSION_DATASET_HPP
