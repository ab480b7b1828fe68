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

#include "dcfusion/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "dcfusion/errors.hpp"

namespace dcfusion {

namespace {

// Box-Muller on raw 64-bit draws; std::normal_distribution is not specified
// bit-exactly across standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double Next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1).
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Eigen::MatrixXd Matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Next();
    }
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

MultimodalDataset Draw(const SynthConfig& config, const Eigen::MatrixXd& centroids,
                       const std::vector<Eigen::MatrixXd>& maps,
                       const std::vector<double>& noise_sd, Eigen::Index n,
                       const std::string& split, GaussianSource& gauss) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  Eigen::MatrixXd latent(config.signal_dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = static_cast<int>(i % config.num_classes);
    labels[static_cast<std::size_t>(i)] = l;
    for (Eigen::Index r = 0; r < config.signal_dim; ++r) {
      latent(r, i) = centroids(r, l) + config.latent_noise * gauss.Next();
    }
  }
  std::vector<FeatureSet> sets;
  for (std::size_t k = 0; k < maps.size(); ++k) {
    Eigen::MatrixXd x = maps[k] * latent;
    x += noise_sd[k] * gauss.Matrix(x.rows(), x.cols());
    sets.emplace_back(std::move(x), fmt::format("{}_m{}", split, k));
  }
  return MultimodalDataset(std::move(sets),
                           ClassLabels::FromDense(std::move(labels), config.num_classes));
}

}  // namespace

SynthConfig SynthConfig::Standard() {
  SynthConfig config;
  config.dims = {20, 30, 25};
  config.num_classes = 6;
  config.n_train = 240;
  config.n_eval = 120;
  config.signal_dim = 8;
  config.snr = 4.0;
  config.latent_noise = 2.5;
  config.seed = 20240101;
  return config;
}

void SynthConfig::Validate() const {
  if (dims.empty()) throw ConfigError("synth: at least one modality dimension is required");
  for (Eigen::Index m : dims) {
    if (m < 1) throw ConfigError(fmt::format("synth: modality dimension {} must be positive", m));
  }
  if (num_classes < 2) throw ConfigError("synth: need at least 2 classes");
  if (n_train < num_classes) {
    throw ConfigError(fmt::format("synth: n_train={} cannot cover {} classes", n_train,
                                  num_classes));
  }
  if (n_eval < 1) throw ConfigError("synth: n_eval must be positive");
  if (signal_dim < 1) throw ConfigError("synth: signal_dim must be positive");
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw ConfigError(fmt::format("synth: snr must be positive and finite, got {}", snr));
  }
  if (!(latent_noise >= 0.0) || !std::isfinite(latent_noise)) {
    throw ConfigError("synth: latent noise must be nonnegative");
  }
}

std::vector<std::string> SynthConfig::Warnings() const {
  std::vector<std::string> out;
  if (signal_dim < num_classes - 1) {
    out.push_back(fmt::format("signal_dim={} is below c-1={}; classes cannot all separate",
                              signal_dim, num_classes - 1));
  }
  return out;
}

SynthData Generate(const SynthConfig& config) {
  config.Validate();
  GaussianSource gauss(config.seed);

  const Eigen::MatrixXd centroids = gauss.Matrix(config.signal_dim, config.num_classes);
  std::vector<Eigen::MatrixXd> maps;
  std::vector<double> noise_sd;
  const double latent_power = 1.0 + config.latent_noise * config.latent_noise;
  for (Eigen::Index m : config.dims) {
    Eigen::MatrixXd w = gauss.Matrix(m, config.signal_dim);
    w.colwise().normalize();
    const double signal_power =
        w.squaredNorm() * latent_power / static_cast<double>(m);
    noise_sd.push_back(std::sqrt(signal_power / config.snr));
    maps.push_back(std::move(w));
  }

  SynthData data{Draw(config, centroids, maps, noise_sd, config.n_train, "train", gauss),
                 Draw(config, centroids, maps, noise_sd, config.n_eval, "eval", gauss)};
  return data;
}

std::vector<std::filesystem::path> WriteSynthData(const std::filesystem::path& dir,
                                                  const SynthData& data) {
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const MultimodalDataset& set, const std::string& split) {
    for (std::size_t k = 0; k < set.num_modalities(); ++k) {
      const auto path = dir / fmt::format("{}_m{}.csv", split, k);
      WriteFeatureCsv(path, set.modality(k));
      written.push_back(path);
    }
    const auto labels = dir / fmt::format("{}_labels.csv", split);
    WriteLabels(labels, set.labels());
    written.push_back(labels);
  };
  emit(data.train, "train");
  emit(data.eval, "eval");
  return written;
}

}  // namespace dcfusion
