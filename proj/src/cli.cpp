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

#include "dcfusion/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "dcfusion/dataset.hpp"
#include "dcfusion/errors.hpp"
#include "dcfusion/evaluation.hpp"
#include "dcfusion/fusion.hpp"
#include "dcfusion/synth.hpp"

namespace dcfusion::cli {

namespace fs = std::filesystem;

namespace {

/// Options shared by the commands; each subcommand registers the subset it uses.
struct RunConfig {
  std::string method = "discriminative";
  std::vector<std::string> methods;
  std::vector<std::string> modalities;
  std::string labels;
  std::vector<std::string> train_modalities;
  std::string train_labels;
  std::vector<std::string> eval_modalities;
  std::string eval_labels;
  std::string model;
  std::string out;
  std::string out_dir = ".";
  std::string preset;
  std::string metric = "euclidean";
  std::optional<std::uint64_t> seed;
  std::optional<long> dim;
  std::optional<double> ridge;
  bool header = false;
  bool scale_variance = false;

  // synth
  std::vector<long> dims;
  std::optional<int> classes;
  std::optional<long> n_train;
  std::optional<long> n_eval;
  std::optional<long> signal_dim;
  std::optional<double> snr;
  std::optional<double> latent_noise;
};

std::vector<fs::path> ToPaths(const std::vector<std::string>& raw) {
  return {raw.begin(), raw.end()};
}

void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(fmt::format("missing {}", what));
  if (!fs::is_regular_file(path)) {
    throw ValidationError(fmt::format("{} '{}' does not exist", what, path));
  }
}

void RequireFiles(const std::vector<std::string>& paths, const std::string& what) {
  if (paths.empty()) throw ValidationError(fmt::format("missing {}", what));
  for (const auto& p : paths) RequireFile(p, what);
}

fs::path PrepareOutDir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) {
    throw ValidationError(fmt::format("output directory '{}' is not usable", dir));
  }
  return p;
}

SynthConfig PresetConfig(const RunConfig& cfg) {
  if (cfg.preset != "standard") {
    throw ValidationError(fmt::format("unknown preset '{}' (only 'standard')", cfg.preset));
  }
  SynthConfig sc = SynthConfig::Standard();
  if (cfg.seed) sc.seed = *cfg.seed;
  return sc;
}

RidgePolicy Ridge(const RunConfig& cfg) {
  RidgePolicy policy;
  if (cfg.ridge) {
    if (*cfg.ridge < 0.0) throw ValidationError("--ridge must be nonnegative");
    policy.lambda_override = *cfg.ridge;
  }
  return policy;
}

std::optional<Eigen::Index> Dim(const RunConfig& cfg) {
  if (!cfg.dim) return std::nullopt;
  if (*cfg.dim < 1) throw ValidationError("--dim must be positive");
  return static_cast<Eigen::Index>(*cfg.dim);
}

std::vector<FusionMethod> Methods(const std::vector<std::string>& tags) {
  std::set<FusionMethod> unique;
  for (const auto& t : tags) unique.insert(ParseMethod(t));
  return {unique.begin(), unique.end()};
}

struct TrainEval {
  MultimodalDataset train;
  MultimodalDataset eval;
};

TrainEval LoadTrainEval(const RunConfig& cfg) {
  if (!cfg.preset.empty()) {
    auto data = Generate(PresetConfig(cfg));
    return {std::move(data.train), std::move(data.eval)};
  }
  RequireFiles(cfg.train_modalities, "--train-modality file");
  RequireFile(cfg.train_labels, "--train-labels file");
  RequireFiles(cfg.eval_modalities, "--eval-modality file");
  RequireFile(cfg.eval_labels, "--eval-labels file");
  if (cfg.train_modalities.size() != cfg.eval_modalities.size()) {
    throw ValidationError("train and eval must list the same number of modalities");
  }
  CsvOptions csv{cfg.header};
  auto train = LoadDataset(ToPaths(cfg.train_modalities), cfg.train_labels, csv);
  // Evaluation may miss classes, so its labels are read without the
  // two-class requirement and remapped onto the training classes.
  auto eval = LoadDatasetWithLabelMap(ToPaths(cfg.eval_modalities), cfg.eval_labels,
                                      train.labels().label_map(), csv);
  return {std::move(train), std::move(eval)};
}

EvalConfig MakeEvalConfig(const RunConfig& cfg) {
  EvalConfig ec;
  ec.dim = Dim(cfg);
  ec.ridge = Ridge(cfg);
  ec.metric = ParseMetric(cfg.metric);
  ec.scale_variance = cfg.scale_variance;
  return ec;
}

std::string Spectrum(const Eigen::VectorXd& values, Eigen::Index limit) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < std::min(limit, values.size()); ++i) {
    parts.push_back(fmt::format("{:.6g}", values(i)));
  }
  std::string s = fmt::format("{}", fmt::join(parts, " "));
  if (values.size() > limit) s += " ...";
  return s;
}

// ---------------------------------------------------------------------------

int CmdFit(const RunConfig& cfg, std::ostream& out) {
  const FusionMethod method = ParseMethod(cfg.method);
  MultimodalDataset raw;
  if (!cfg.preset.empty()) {
    raw = Generate(PresetConfig(cfg)).train;
  } else {
    RequireFiles(cfg.modalities, "--modality file");
    RequireFile(cfg.labels, "--labels file");
    raw = LoadDataset(ToPaths(cfg.modalities), cfg.labels, CsvOptions{cfg.header});
  }
  CheckModalityCount(method, raw.num_modalities());
  const fs::path out_path =
      cfg.out.empty() ? PrepareOutDir(cfg.out_dir) / "model.json" : fs::path(cfg.out);

  FitOptions options;
  options.dim = Dim(cfg);
  options.ridge = Ridge(cfg);
  const MultimodalDataset centered = Center(raw, cfg.scale_variance);
  const ProjectionModel model = Fit(centered, method, options);
  SaveModel(out_path, model);

  out << fmt::format("method: {}\n", MethodTag(method));
  out << fmt::format("P: {}  Q: {}  n: {}  c: {}\n", raw.num_modalities(), raw.total_dim(),
                     raw.samples(), model.num_classes);
  if (model.eigenvalues.size() > 0) {
    out << fmt::format("eigenvalues: {}\n", Spectrum(model.eigenvalues, 10));
    out << fmt::format("lambda: {}\n", model.lambda);
  }
  out << fmt::format("count_positive: {}\n", model.count_positive);
  out << fmt::format("d: {}\n", model.d);
  out << fmt::format("model written to {}\n", out_path.string());
  return kExitOk;
}

int CmdProject(const RunConfig& cfg, std::ostream& out) {
  RequireFile(cfg.model, "--model file");
  RequireFiles(cfg.modalities, "--modality file");
  if (!cfg.labels.empty()) RequireFile(cfg.labels, "--labels file");
  if (cfg.out.empty()) throw ValidationError("missing --out file");

  const ProjectionModel model = LoadModel(cfg.model);
  const CsvOptions csv{cfg.header};
  std::vector<FeatureSet> sets;
  for (const auto& p : cfg.modalities) sets.emplace_back(ReadFeatureCsv(p, csv).transpose(), p);
  const auto n = static_cast<std::size_t>(sets.front().samples());
  ClassLabels labels = ClassLabels::FromDense(std::vector<int>(n, 0), 1);
  if (!cfg.labels.empty()) {
    labels = ClassLabels::FromRawWithMap(ReadLabels(cfg.labels), model.label_map);
  }
  const MultimodalDataset raw(std::move(sets), std::move(labels));
  const ProjectedData projected = Project(model, raw, Dim(cfg));

  std::ofstream file(cfg.out);
  if (!file) throw ValidationError(fmt::format("cannot write '{}'", cfg.out));
  for (Eigen::Index j = 0; j < projected.Y.cols(); ++j) {
    std::string line;
    for (Eigen::Index i = 0; i < projected.Y.rows(); ++i) {
      if (i > 0) line += ',';
      line += fmt::format("{}", projected.Y(i, j));
    }
    file << line << '\n';
  }
  out << fmt::format("projected {} samples to {} dimensions\n", projected.Y.cols(),
                     projected.Y.rows());
  return kExitOk;
}

struct MethodOutcome {
  std::string tag;
  std::optional<EvalReport> report;
  std::string error;
  int exit_code = kExitOk;
};

// Runs each method independently; a failing method becomes an error row.
std::vector<MethodOutcome> EvaluateMethods(const std::vector<FusionMethod>& methods,
                                           const TrainEval& data, const EvalConfig& ec,
                                           std::ostream& out) {
  std::vector<MethodOutcome> outcomes;
  for (FusionMethod m : methods) {
    MethodOutcome o{std::string(MethodTag(m)), std::nullopt, {}, kExitOk};
    try {
      CheckModalityCount(m, data.train.num_modalities());
      o.report = Evaluate(data.train, data.eval, m, ec);
      out << TableRow(*o.report) << '\n';
    } catch (const NumericError& e) {
      o.error = e.what();
      o.exit_code = kExitNumeric;
      out << fmt::format("{}, error: {}\n", o.tag, o.error);
    } catch (const ValidationError& e) {
      o.error = e.what();
      o.exit_code = kExitValidation;
      out << fmt::format("{}, error: {}\n", o.tag, o.error);
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

// Success if any method succeeded, else the first failure's code.
int MultiMethodExit(const std::vector<MethodOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (o.report) return kExitOk;
  }
  return outcomes.empty() ? kExitValidation : outcomes.front().exit_code;
}

int CmdEval(const RunConfig& cfg, std::ostream& out) {
  const auto methods =
      Methods(cfg.methods.empty() ? std::vector<std::string>{"discriminative"} : cfg.methods);
  const EvalConfig ec = MakeEvalConfig(cfg);
  const fs::path dir = PrepareOutDir(cfg.out_dir);
  const TrainEval data = LoadTrainEval(cfg);
  const auto outcomes = EvaluateMethods(methods, data, ec, out);
  for (const auto& o : outcomes) {
    if (o.report) WriteReport(dir, o.tag, *o.report);
  }
  return MultiMethodExit(outcomes);
}

int CmdSynth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  // Unset fields keep the standard preset's values.
  SynthConfig sc = cfg.preset.empty() ? SynthConfig::Standard() : PresetConfig(cfg);
  if (!cfg.dims.empty()) sc.dims.assign(cfg.dims.begin(), cfg.dims.end());
  if (cfg.classes) sc.num_classes = *cfg.classes;
  if (cfg.n_train) sc.n_train = *cfg.n_train;
  if (cfg.n_eval) sc.n_eval = *cfg.n_eval;
  if (cfg.signal_dim) sc.signal_dim = *cfg.signal_dim;
  if (cfg.seed) sc.seed = *cfg.seed;
  if (cfg.snr) sc.snr = *cfg.snr;
  if (cfg.latent_noise) sc.latent_noise = *cfg.latent_noise;
  sc.Validate();
  for (const auto& w : sc.Warnings()) err << "warning: " << w << '\n';

  const fs::path dir = PrepareOutDir(cfg.out_dir);
  const SynthData data = Generate(sc);
  const auto written = WriteSynthData(dir, data);

  out << fmt::format("P: {}  dims: {}  c: {}  n_train: {}  n_eval: {}\n", sc.dims.size(),
                     fmt::join(sc.dims, ","), sc.num_classes, sc.n_train, sc.n_eval);
  out << fmt::format("signal_dim: {}  snr: {}  latent_noise: {}  seed: {}\n", sc.signal_dim,
                     sc.snr, sc.latent_noise, sc.seed);
  out << fmt::format("wrote {} files\n", written.size());
  return kExitOk;
}

int CmdCompare(const RunConfig& cfg, std::ostream& out) {
  std::vector<FusionMethod> methods(kAllMethods.begin(), kAllMethods.end());
  if (!cfg.methods.empty()) methods = Methods(cfg.methods);
  const EvalConfig ec = MakeEvalConfig(cfg);
  const fs::path dir = PrepareOutDir(cfg.out_dir);
  const TrainEval data = LoadTrainEval(cfg);
  const auto outcomes = EvaluateMethods(methods, data, ec, out);

  std::ofstream file(dir / "compare.csv");
  if (!file) throw ValidationError("cannot write compare.csv");
  file << "method,optimal_accuracy,optimal_dim\n";
  for (const auto& o : outcomes) {
    if (o.report) {
      file << fmt::format("{},{},{}\n", o.tag, o.report->optimal_accuracy,
                          o.report->optimal_dim);
    } else {
      std::string msg = o.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      file << fmt::format("{},error: {},\n", o.tag, msg);
    }
  }
  file.close();
  return MultiMethodExit(outcomes);
}

// ---------------------------------------------------------------------------

void AddCommon(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--out-dir", cfg.out_dir, "Output directory")->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--seed", cfg.seed, "Seed for generated data")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--preset", cfg.preset, "Use a built-in synthetic dataset ('standard')");
}

void AddModelFlags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_flag("--scale-variance", cfg.scale_variance, "Scale features to unit variance");
  cmd->add_option("--ridge", cfg.ridge, "Ridge lambda added to D (default: automatic)");
  cmd->add_option("--metric", cfg.metric, "Nearest-neighbour metric")
      ->check(CLI::IsMember({"euclidean"}));
  cmd->add_option("--dim", cfg.dim, "Projected dimension");
  cmd->add_flag("--header", cfg.header, "Feature CSVs have a header row");
}

void AddTrainEvalFlags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--train-modality", cfg.train_modalities, "Training modality CSV (repeat)");
  cmd->add_option("--train-labels", cfg.train_labels, "Training labels file");
  cmd->add_option("--eval-modality", cfg.eval_modalities, "Evaluation modality CSV (repeat)");
  cmd->add_option("--eval-labels", cfg.eval_labels, "Evaluation labels file");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Discriminative multiset correlation fusion toolkit", "dcfusion"};
  app.require_subcommand(1);
  std::vector<std::string> all;
  for (FusionMethod m : kAllMethods) all.emplace_back(MethodTag(m));

  auto* fit = app.add_subcommand("fit", "Fit a projection model");
  AddCommon(fit, cfg);
  AddModelFlags(fit, cfg);
  fit->add_option("--method", cfg.method, "discriminative|mcca|cca|dcca|serial")
      ->check(CLI::IsMember(all));
  fit->add_option("--modality", cfg.modalities, "Modality CSV (repeat)");
  fit->add_option("--labels", cfg.labels, "Labels file");
  fit->add_option("--out", cfg.out, "Model file (default <out-dir>/model.json)");

  auto* project = app.add_subcommand("project", "Project data with a fitted model");
  project->add_option("--model", cfg.model, "Model file")->required();
  project->add_option("--modality", cfg.modalities, "Modality CSV (repeat)");
  project->add_option("--labels", cfg.labels, "Optional labels file");
  project->add_option("--out", cfg.out, "Projected CSV, one sample per row");
  project->add_option("--dim", cfg.dim, "Projected dimension (default: model d)");
  project->add_flag("--header", cfg.header, "Feature CSVs have a header row");

  auto* eval = app.add_subcommand("eval", "Fit on train, sweep dimensions on eval");
  AddCommon(eval, cfg);
  AddModelFlags(eval, cfg);
  AddTrainEvalFlags(eval, cfg);
  eval->add_option("--method", cfg.methods, "Method(s) to evaluate (repeat)")
      ->check(CLI::IsMember(all));

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  AddCommon(synth, cfg);
  synth->add_option("--dims", cfg.dims, "Modality dimensions, e.g. 20,30,25")->delimiter(',');
  synth->add_option("--classes", cfg.classes, "Number of classes");
  synth->add_option("--n-train", cfg.n_train, "Training samples");
  synth->add_option("--n-eval", cfg.n_eval, "Evaluation samples");
  synth->add_option("--signal-dim", cfg.signal_dim, "Latent dimension");
  synth->add_option("--snr", cfg.snr, "Signal-to-noise ratio (linear)");
  synth->add_option("--latent-noise", cfg.latent_noise, "Latent noise standard deviation");

  auto* compare = app.add_subcommand("compare", "Run several methods on the same data");
  AddCommon(compare, cfg);
  AddModelFlags(compare, cfg);
  AddTrainEvalFlags(compare, cfg);
  compare->add_option("--method", cfg.methods, "Method(s) to compare (default: all)")
      ->check(CLI::IsMember(all));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (fit->parsed()) return CmdFit(cfg, out);
    if (project->parsed()) return CmdProject(cfg, out);
    if (eval->parsed()) return CmdEval(cfg, out);
    if (synth->parsed()) return CmdSynth(cfg, out, err);
    if (compare->parsed()) return CmdCompare(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitValidation;
}

}  // namespace dcfusion::cli
