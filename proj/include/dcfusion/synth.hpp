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

#ifndef DCFUSION_SYNTH_HPP
#define DCFUSION_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dcfusion/dataset.hpp"

namespace dcfusion {

/// Latent class model: every sample has a latent vector (class centroid plus
/// Gaussian noise) that all modalities observe through their own random
/// linear map plus Gaussian observation noise.
struct SynthConfig {
  std::vector<Eigen::Index> dims;
  int num_classes = 2;
  Eigen::Index n_train = 0;
  Eigen::Index n_eval = 0;
  Eigen::Index signal_dim = 1;
  /// Per-feature signal power over observation noise power (linear).
  double snr = 1.0;
  /// Standard deviation of the per-sample latent noise around a centroid.
  double latent_noise = 1.0;
  std::uint64_t seed = 0;

  /// P=3, dims 20/30/25, c=6, 240/120 samples, signal_dim 8, snr 4,
  /// latent noise 2.5, seed 20240101.
  static SynthConfig Standard();

  /// Throws ConfigError on invalid settings.
  void Validate() const;
  /// Non-fatal advice, e.g. signal_dim < c - 1.
  std::vector<std::string> Warnings() const;
};

struct SynthData {
  MultimodalDataset train;
  MultimodalDataset eval;
};

/// Deterministic for a given config; portable across standard libraries.
SynthData Generate(const SynthConfig& config);

/// Writes train_m<k>.csv, train_labels.csv, eval_m<k>.csv, eval_labels.csv.
/// Returns the paths written, in that order.
std::vector<std::filesystem::path> WriteSynthData(const std::filesystem::path& dir,
                                                  const SynthData& data);

}  // namespace dcfusion

#endif  // DCFUSION_SYNTH_HPP
