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

#include "dcfusion/evaluation.hpp"

#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "dcfusion/errors.hpp"
#include "dcfusion/linalg.hpp"

namespace dcfusion {

std::string_view MetricTag(Metric metric) {
  switch (metric) {
    case Metric::kEuclidean: return "euclidean";
  }
  return "unknown";
}

Metric ParseMetric(std::string_view tag) {
  if (tag == "euclidean") return Metric::kEuclidean;
  throw ConfigError(fmt::format("unknown metric '{}'", tag));
}

namespace {

void CheckRows(const ProjectedData& train, Eigen::Index rows) {
  if (train.Y.cols() == 0) throw ValidationError("empty training projection");
  if (train.Y.rows() < rows) {
    throw DimensionError(
        fmt::format("training projection has {} rows, need {}", train.Y.rows(), rows));
  }
}

int ArgMinFirst(const Eigen::ArrayXd& dist) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < dist.size(); ++j) {
    if (dist(j) < dist(best)) best = j;
  }
  return static_cast<int>(best);
}

double Accuracy(const std::vector<int>& predicted, const ClassLabels& truth) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// Squared distances are accumulated one coordinate at a time, in row order,
// so the incremental sweep and the one-shot NnPredict agree bit for bit.
Eigen::ArrayXd SquaredDistances(const Eigen::MatrixXd& train, const Eigen::VectorXd& point,
                                Eigen::Index dim) {
  Eigen::ArrayXd dist = Eigen::ArrayXd::Zero(train.cols());
  for (Eigen::Index r = 0; r < dim; ++r) {
    dist += (train.row(r).transpose().array() - point(r)).square();
  }
  return dist;
}

}  // namespace

int NnClassify(const ProjectedData& train, const Eigen::VectorXd& point, Metric) {
  if (point.size() != train.Y.rows()) {
    throw DimensionError(fmt::format("point has dimension {}, training projection has {}",
                                     point.size(), train.Y.rows()));
  }
  CheckRows(train, point.size());
  const auto dist = SquaredDistances(train.Y, point, point.size());
  return train.labels[static_cast<std::size_t>(ArgMinFirst(dist))];
}

std::vector<int> NnPredict(const ProjectedData& train, const ProjectedData& eval, Eigen::Index dim,
                           Metric) {
  CheckRows(train, dim);
  if (eval.Y.rows() < dim) throw DimensionError("evaluation projection too short");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(eval.Y.cols()));
  for (Eigen::Index i = 0; i < eval.Y.cols(); ++i) {
    const Eigen::VectorXd point = eval.Y.col(i);
    const auto dist = SquaredDistances(train.Y, point, dim);
    out.push_back(train.labels[static_cast<std::size_t>(ArgMinFirst(dist))]);
  }
  return out;
}

std::vector<DimAccuracy> SweepDimensions(const ProjectedData& train, const ProjectedData& eval,
                                         Metric) {
  const Eigen::Index k = std::min(train.Y.rows(), eval.Y.rows());
  CheckRows(train, k);
  const Eigen::Index n_eval = eval.Y.cols();
  Eigen::ArrayXXd dist = Eigen::ArrayXXd::Zero(train.Y.cols(), n_eval);
  std::vector<DimAccuracy> curve;
  std::vector<int> predicted(static_cast<std::size_t>(n_eval));
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index i = 0; i < n_eval; ++i) {
      dist.col(i) += (train.Y.row(r).transpose().array() - eval.Y(r, i)).square();
      predicted[static_cast<std::size_t>(i)] =
          train.labels[static_cast<std::size_t>(ArgMinFirst(dist.col(i)))];
    }
    curve.push_back({r + 1, Accuracy(predicted, eval.labels)});
  }
  return curve;
}

std::vector<DimAccuracy> SweepDimensions(const ProjectionModel& model,
                                         const MultimodalDataset& raw_train,
                                         const MultimodalDataset& raw_eval, Metric metric) {
  if (model.method == FusionMethod::kSerial) {
    const Eigen::Index q = model.total_dim();
    const auto train = Project(model, raw_train, q);
    const auto eval = Project(model, raw_eval, q);
    return {{q, Accuracy(NnPredict(train, eval, q, metric), eval.labels)}};
  }
  const auto train = Project(model, raw_train, model.spectrum_size());
  const auto eval = Project(model, raw_eval, model.spectrum_size());
  return SweepDimensions(train, eval, metric);
}

JCurve JCriterion(const Eigen::VectorXd& eigenvalues) {
  if (eigenvalues.size() == 0) throw ValidationError("J criterion needs a nonempty spectrum");
  JCurve curve;
  double running = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index q = 0; q < eigenvalues.size(); ++q) {
    running += eigenvalues(q);
    curve.values.push_back(running);
    best = std::max(best, running);
  }
  const double tau = PositiveThreshold(eigenvalues);
  for (std::size_t q = 0; q < curve.values.size(); ++q) {
    if (curve.values[q] >= best - tau) {
      curve.optimal_dim = static_cast<Eigen::Index>(q + 1);
      break;
    }
  }
  return curve;
}

EvalReport Evaluate(const MultimodalDataset& raw_train, const MultimodalDataset& raw_eval,
                    FusionMethod method, const EvalConfig& config) {
  if (raw_train.dims() != raw_eval.dims()) {
    throw DimensionError("training and evaluation modality dimensions differ");
  }
  const MultimodalDataset train_centered = Center(raw_train, config.scale_variance);
  FitOptions fit_options;
  fit_options.dim = config.dim;
  fit_options.ridge = config.ridge;
  const ProjectionModel model = Fit(train_centered, method, fit_options);

  // Express evaluation labels in the training label space.
  std::vector<LabelValue> eval_raw_labels;
  for (int l : raw_eval.labels().labels()) {
    eval_raw_labels.push_back(raw_eval.labels().label_map()[static_cast<std::size_t>(l)]);
  }
  const MultimodalDataset eval(raw_eval.modalities(),
                               ClassLabels::FromRawWithMap(eval_raw_labels, model.label_map));

  EvalReport report;
  report.method = method;
  report.eigenvalues = model.eigenvalues;
  report.count_positive = model.count_positive;
  report.num_classes = model.num_classes;
  report.model_dim = model.d;
  report.label_map = model.label_map;
  report.n_train = static_cast<std::size_t>(raw_train.samples());
  report.n_eval = static_cast<std::size_t>(eval.samples());

  const Eigen::Index k = config.dim ? *config.dim
                         : method == FusionMethod::kSerial ? model.total_dim()
                                                           : model.spectrum_size();
  const ProjectedData train_proj = Project(model, raw_train, k);
  const ProjectedData eval_proj = Project(model, eval, k);

  if (config.dim || method == FusionMethod::kSerial) {
    report.accuracy_by_dim = {
        {k, Accuracy(NnPredict(train_proj, eval_proj, k, config.metric), eval_proj.labels)}};
  } else {
    report.accuracy_by_dim = SweepDimensions(train_proj, eval_proj, config.metric);
  }

  report.optimal_dim = report.accuracy_by_dim.front().dim;
  report.optimal_accuracy = report.accuracy_by_dim.front().accuracy;
  for (const auto& point : report.accuracy_by_dim) {
    if (point.accuracy > report.optimal_accuracy) {
      report.optimal_accuracy = point.accuracy;
      report.optimal_dim = point.dim;
    }
  }

  const auto predicted = NnPredict(train_proj, eval_proj, report.optimal_dim, config.metric);
  report.confusion = Eigen::MatrixXi::Zero(model.num_classes, model.num_classes);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++report.confusion(eval_proj.labels[i], predicted[i]);
  }

  if (model.eigenvalues.size() > 0) report.j_curve = JCriterion(model.eigenvalues);
  return report;
}

nlohmann::json ReportToJson(const EvalReport& report) {
  nlohmann::json j;
  j["method"] = std::string(MethodTag(report.method));
  j["optimal_dim"] = report.optimal_dim;
  j["optimal_accuracy"] = report.optimal_accuracy;
  j["model_dim"] = report.model_dim;
  j["num_classes"] = report.num_classes;
  j["count_positive"] = report.count_positive;
  j["n_train"] = report.n_train;
  j["n_eval"] = report.n_eval;
  j["label_map"] = report.label_map;
  auto curve = nlohmann::json::array();
  for (const auto& p : report.accuracy_by_dim) {
    curve.push_back({{"dim", p.dim}, {"accuracy", p.accuracy}});
  }
  j["accuracy_by_dim"] = std::move(curve);
  auto confusion = nlohmann::json::array();
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    std::vector<int> row(report.confusion.cols());
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) row[c] = report.confusion(r, c);
    confusion.push_back(row);
  }
  j["confusion"] = std::move(confusion);
  j["eigenvalues"] =
      std::vector<double>(report.eigenvalues.data(),
                          report.eigenvalues.data() + report.eigenvalues.size());
  auto jc = nlohmann::json::array();
  for (std::size_t q = 0; q < report.j_curve.values.size(); ++q) {
    jc.push_back({{"q", q + 1}, {"J", report.j_curve.values[q]}});
  }
  j["j_curve"] = std::move(jc);
  j["j_optimal_dim"] = report.j_curve.optimal_dim;
  return j;
}

void WriteReport(const std::filesystem::path& dir, const std::string& prefix,
                 const EvalReport& report) {
  const auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw ValidationError(fmt::format("cannot write '{}'", (dir / name).string()));
    return out;
  };
  {
    auto out = open(prefix + "_report.json");
    out << ReportToJson(report).dump(2) << '\n';
  }
  {
    auto out = open(prefix + "_accuracy.csv");
    out << "dim,accuracy\n";
    for (const auto& p : report.accuracy_by_dim) out << fmt::format("{},{}\n", p.dim, p.accuracy);
  }
  {
    auto out = open(prefix + "_j.csv");
    out << "q,J\n";
    for (std::size_t q = 0; q < report.j_curve.values.size(); ++q) {
      out << fmt::format("{},{}\n", q + 1, report.j_curve.values[q]);
    }
  }
}

std::string TableRow(const EvalReport& report) {
  return fmt::format("{}, {:.2f}%, {}", MethodTag(report.method), 100.0 * report.optimal_accuracy,
                     report.optimal_dim);
}

}  // namespace dcfusion
