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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dcfusion/cli.hpp"
#include "dcfusion/evaluation.hpp"
#include "dcfusion/fusion.hpp"
#include "dcfusion/linalg.hpp"
#include "dcfusion/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dcfusion;
using namespace dcfusion::testing;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<Eigen::Index> RandomDims(Rng& rng, int p, int lo, int hi) {
  std::vector<Eigen::Index> dims;
  for (int k = 0; k < p; ++k) dims.push_back(rng.Int(lo, hi));
  return dims;
}

// ---------------------------------------------------------------------------
// 1 and 2 share one instance suite.

struct KernelSuite {
  double worst_within = 0.0;
  double worst_between = 0.0;
  int negation_failures = 0;
  int instances = 0;
  double seconds = 0.0;
};

KernelSuite RunKernelSuite() {
  KernelSuite s;
  Rng rng(1001);
  const auto start = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const int c = rng.Int(1, 4);
    const int n = rng.Int(std::max(2, c), 12);
    const int p = rng.Int(1, 3);
    const auto ds = RandomCenteredDataset(rng, RandomDims(rng, p, 1, 4), n, c);
    const auto& l = ds.labels().labels();
    for (std::size_t k = 0; k < ds.num_modalities(); ++k) {
      for (std::size_t m = 0; m < ds.num_modalities(); ++m) {
        const Eigen::MatrixXd& xk = ds.modality(k).data();
        const Eigen::MatrixXd& xm = ds.modality(m).data();
        const double scale = xk.norm() * xm.norm();
        const Eigen::MatrixXd w = WithinClassCorrelation(xk, xm, ds.labels());
        const Eigen::MatrixXd b = BetweenClassCorrelation(xk, xm, ds.labels());
        s.worst_within = std::max(s.worst_within,
                                  RelativeError(w, BruteWithinClass(xk, xm, l, c), scale));
        s.worst_between = std::max(s.worst_between,
                                   RelativeError(b, BruteBetweenClass(xk, xm, l, c), scale));
        if (!(b.array() == (-w).array()).all()) ++s.negation_failures;
      }
    }
    ++s.instances;
  }
  s.seconds = Seconds(start);
  return s;
}

Outcome Criterion1(const KernelSuite& s) {
  const bool pass = s.worst_within <= 1e-10 && s.worst_between <= 1e-10 && s.seconds < 5.0;
  return {pass, fmt::format("{} instances, max rel err within {:.2e} between {:.2e}, {:.3f} s",
                            s.instances, s.worst_within, s.worst_between, s.seconds)};
}

Outcome Criterion2(const KernelSuite& s) {
  return {s.negation_failures == 0,
          fmt::format("{} instances, {} inexact negations", s.instances, s.negation_failures)};
}

// ---------------------------------------------------------------------------

Outcome Criterion3() {
  Rng rng(1003);
  const auto start = Clock::now();
  double worst_residual = 0.0;
  double worst_ortho = 0.0;
  int regularized = 0;
  Eigen::Index largest_q = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = rng.Int(2, 4);
    const auto dims = RandomDims(rng, p, 1, 60 / p);
    Eigen::Index q = 0;
    for (auto m : dims) q += m;
    largest_q = std::max(largest_q, q);
    const int c = rng.Int(2, 6);
    // Some instances have fewer samples than features, forcing the ridge.
    const int n = trial % 3 == 0 ? rng.Int(c + 1, static_cast<int>(q) + 1)
                                 : rng.Int(static_cast<int>(q) + 2, 3 * static_cast<int>(q) + 10);
    const auto ds = trial % 2 == 0 ? RandomClassDataset(rng, dims, std::max(n, c), c)
                                   : RandomCenteredDataset(rng, dims, std::max(n, c), c);
    const auto blocks = BuildBlockMatrices(ds);
    if (blocks.regularized()) ++regularized;
    const auto sol = SolveGeneralized(blocks, blocks.total_dim());
    const Eigen::MatrixXd cd = blocks.C - blocks.D;
    const Eigen::MatrixXd s = cd / (p - 1.0);
    const double norm = cd.norm();
    for (Eigen::Index i = 0; i < sol.eigenvalues.size(); ++i) {
      const Eigen::VectorXd w = sol.eigenvectors.col(i);
      const double r = (s * w - sol.eigenvalues(i) * (blocks.D_plus * w)).norm();
      worst_residual = std::max(worst_residual, norm > 0 ? r / norm : r);
    }
    const Eigen::MatrixXd gram = sol.eigenvectors.transpose() * blocks.D_plus * sol.eigenvectors;
    worst_ortho = std::max(
        worst_ortho, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
  }
  const double seconds = Seconds(start);
  const bool pass = worst_residual <= 1e-7 && worst_ortho <= 1e-8 && seconds < 30.0;
  return {pass, fmt::format("100 problems (Q <= {}, {} ridged), max rel residual {:.2e}, "
                            "max orthonormality error {:.2e}, {:.2f} s",
                            largest_q, regularized, worst_residual, worst_ortho, seconds)};
}

// ---------------------------------------------------------------------------
// 4 and 6 share 200 discriminative fits.

struct FitRecord {
  int c;
  int count_positive;
  Eigen::VectorXd eigenvalues;
};

std::vector<FitRecord> RunDiscriminativeFits() {
  Rng rng(1004);
  std::vector<FitRecord> fits;
  for (int trial = 0; trial < 200; ++trial) {
    const int p = rng.Int(2, 4);
    const int c = rng.Int(2, 6);
    const auto dims = RandomDims(rng, p, 1, 8);
    const int n = rng.Int(c + 2, 80);
    const auto ds = trial % 2 == 0 ? RandomClassDataset(rng, dims, n, c, 0.2 + rng.Int(0, 10) * 0.2)
                                   : RandomCenteredDataset(rng, dims, n, c);
    const auto model = Fit(ds, FusionMethod::kDiscriminative);
    fits.push_back({c, model.count_positive, model.eigenvalues});
  }
  return fits;
}

Outcome Criterion4(const std::vector<FitRecord>& fits) {
  int violations = 0;
  int max_margin = -100;
  for (const auto& f : fits) {
    if (f.count_positive > f.c) ++violations;
    max_margin = std::max(max_margin, f.count_positive - f.c);
  }
  return {violations == 0, fmt::format("{} fits, {} violations, max(count_positive - c) = {}",
                                       fits.size(), violations, max_margin)};
}

Outcome Criterion6(const std::vector<FitRecord>& fits) {
  int mismatches = 0;
  int shape_failures = 0;
  const auto check = [&](const Eigen::VectorXd& eta, int count_positive) {
    const JCurve j = JCriterion(eta);
    if (j.optimal_dim != count_positive) ++mismatches;
    const double tau = PositiveThreshold(eta);
    for (std::size_t q = 1; q < j.values.size(); ++q) {
      const double step = j.values[q] - j.values[q - 1];
      const bool ok = static_cast<int>(q) < count_positive ? step > 0.0 : step <= tau;
      if (!ok) ++shape_failures;
    }
  };
  for (const auto& f : fits) check(f.eigenvalues, f.count_positive);
  const auto data = Generate(SynthConfig::Standard());
  const auto model = Fit(Center(data.train), FusionMethod::kDiscriminative);
  check(model.eigenvalues, model.count_positive);
  return {mismatches == 0 && shape_failures == 0,
          fmt::format("{} fits, {} optimal_dim != count_positive, {} monotonicity breaks",
                      fits.size() + 1, mismatches, shape_failures)};
}

// ---------------------------------------------------------------------------

Outcome Criterion5() {
  Rng rng(1005);
  int gapped = 0;
  int attempts = 0;
  double worst_value = 0.0;
  double worst_angle = 0.0;
  while (gapped < 50 && attempts < 5000) {
    ++attempts;
    const int c = rng.Int(2, 4);
    const int p = rng.Int(2, 4);
    const auto ds = RandomClassDataset(rng, RandomDims(rng, p, 1, 3), rng.Int(3 * c, 40), c,
                                       0.5 + rng.Int(0, 4) * 0.5);
    const auto blocks = BuildBlockMatrices(ds);
    if (blocks.total_dim() <= c) continue;
    const auto full = SolveGeneralized(blocks, blocks.total_dim());
    const Eigen::VectorXd& eta = full.eigenvalues;
    if (eta(c - 1) - eta(c) <= 1e-6) continue;
    ++gapped;
    const auto top = SolveGeneralized(blocks, c);
    worst_value = std::max(worst_value, (top.eigenvalues - eta.head(c)).cwiseAbs().maxCoeff());
    // Compare eigenvectors cluster by cluster so repeated eigenvalues are
    // judged by their invariant subspace.
    Eigen::Index begin = 0;
    for (Eigen::Index i = 1; i <= c; ++i) {
      if (i < c && eta(i - 1) - eta(i) <= 1e-6) continue;
      const Eigen::Index len = i - begin;
      worst_angle = std::max(worst_angle,
                             LargestPrincipalAngle(top.eigenvectors.middleCols(begin, len),
                                                   full.eigenvectors.middleCols(begin, len)));
      begin = i;
    }
  }
  const bool pass = gapped == 50 && worst_value <= 1e-8 && worst_angle <= 1e-6;
  return {pass, fmt::format("{} gapped instances ({} drawn), max eigenvalue diff {:.2e}, "
                            "max principal angle {:.2e}",
                            gapped, attempts, worst_value, worst_angle)};
}

// ---------------------------------------------------------------------------

Outcome Criterion7() {
  Rng rng(1007);
  double worst_dcca = 0.0;
  double worst_cca = 0.0;
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int c = rng.Int(2, 4);
    const auto dims = RandomDims(rng, 2, 1, 4);
    const int n = rng.Int(static_cast<int>(dims[0] + dims[1]) + 2, 40);
    const auto ds = trial % 2 == 0 ? RandomClassDataset(rng, dims, n, c)
                                   : RandomCenteredDataset(rng, dims, n, c);
    const auto disc = Fit(ds, FusionMethod::kDiscriminative);
    const auto dcca = Fit(ds, FusionMethod::kDcca);
    const auto mcca = Fit(ds, FusionMethod::kMcca);
    const auto cca = Fit(ds, FusionMethod::kCca);
    worst_dcca = std::max(worst_dcca, (disc.eigenvalues - dcca.eigenvalues).cwiseAbs().maxCoeff());
    worst_cca = std::max(worst_cca, (mcca.eigenvalues - cca.eigenvalues).cwiseAbs().maxCoeff());
    const Eigen::VectorXd rho = CcaCorrelations(ds.modality(0).data(), ds.modality(1).data());
    worst_oracle = std::max(worst_oracle, std::abs(cca.eigenvalues(0) - rho(0)));
  }
  const bool pass = worst_dcca <= 1e-10 && worst_cca <= 1e-10 && worst_oracle <= 1e-8;
  return {pass, fmt::format("50 instances, |disc-dcca| {:.2e}, |mcca-cca| {:.2e}, "
                            "|cca top - oracle| {:.2e}",
                            worst_dcca, worst_cca, worst_oracle)};
}

// ---------------------------------------------------------------------------

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult RunCli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

struct CompareRow {
  double accuracy = -1.0;
  long dim = -1;
};

std::map<std::string, CompareRow> ParseCompare(const std::string& text) {
  std::map<std::string, CompareRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string method;
    std::string acc;
    std::string dim;
    std::getline(fields, method, ',');
    std::getline(fields, acc, ',');
    std::getline(fields, dim, ',');
    if (acc.rfind("error", 0) == 0) continue;
    rows[method] = {std::stod(acc), std::stol(dim)};
  }
  return rows;
}

// Regression goldens for the standard benchmark with its fixed seed.
struct Golden {
  const char* method;
  double accuracy;
  long dim;
};
constexpr Golden kGoldens[] = {
    {"discriminative", 0.4, 4},
    {"mcca", 0.38333333333333336, 8},
    {"serial", 0.375, 75},
};
constexpr double kGoldenTolerance = 0.005;

Outcome Criterion8() {
  TempDir dir;
  const auto start = Clock::now();
  const auto r = RunCli({"compare", "--preset", "standard", "--out-dir", dir.path().string()});
  const double seconds = Seconds(start);
  if (r.code != 0) return {false, fmt::format("compare exited {}: {}", r.code, r.err)};
  auto rows = ParseCompare(ReadText(dir / "compare.csv"));
  for (const char* m : {"discriminative", "mcca", "serial"}) {
    if (!rows.count(m)) return {false, fmt::format("compare.csv has no result for {}", m)};
  }
  const auto& disc = rows["discriminative"];
  const auto& mcca = rows["mcca"];
  const auto& serial = rows["serial"];
  const bool ordering = disc.accuracy >= mcca.accuracy && mcca.accuracy >= serial.accuracy;
  const bool dim_ok = disc.dim <= 6;
  const bool fast = seconds < 60.0;
  std::string golden_notes;
  bool goldens_ok = true;
  for (const auto& g : kGoldens) {
    const auto& row = rows[g.method];
    if (std::abs(row.accuracy - g.accuracy) > kGoldenTolerance || row.dim != g.dim) {
      goldens_ok = false;
      golden_notes += fmt::format(" {} drifted from golden {:.4f} at d={}", g.method, g.accuracy,
                                  g.dim);
    }
  }
  const bool pass = ordering && dim_ok && fast && goldens_ok;
  return {pass,
          fmt::format("(a) disc {:.4f} >= mcca {:.4f} >= serial {:.4f}: {}; (b) disc dim {}: {}; "
                      "(c) compare {:.3f} s: {}; goldens +/-0.5pp: {}{}",
                      disc.accuracy, mcca.accuracy, serial.accuracy, ordering ? "yes" : "no",
                      disc.dim, dim_ok ? "yes" : "no", seconds, fast ? "yes" : "no",
                      goldens_ok ? "match" : "DRIFT", golden_notes)};
}

// ---------------------------------------------------------------------------

Outcome Criterion9() {
  auto config = SynthConfig::Standard();
  config.snr = 1e-6;
  const auto data = Generate(config);
  const auto [lo, hi] = BinomialInterval(static_cast<int>(config.n_eval),
                                         1.0 / config.num_classes, 0.99);
  bool pass = true;
  std::string detail = fmt::format("99% interval [{}, {}] of {}:", lo, hi, config.n_eval);
  for (FusionMethod m : kAllMethods) {
    const bool pair = m == FusionMethod::kCca || m == FusionMethod::kDcca;
    const auto train = pair ? MultimodalDataset({data.train.modality(0), data.train.modality(1)},
                                                data.train.labels())
                            : data.train;
    const auto eval = pair ? MultimodalDataset({data.eval.modality(0), data.eval.modality(1)},
                                               data.eval.labels())
                           : data.eval;
    const auto model = Fit(Center(train), m);
    const auto pred = NnPredict(Project(model, train), Project(model, eval), model.d);
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == eval.labels()[i];
    const bool ok = hits >= lo && hits <= hi;
    pass = pass && ok;
    detail += fmt::format(" {} {}{}", MethodTag(m), hits, ok ? "" : " (outside)");
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> Snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[std::filesystem::relative(e.path(), dir).string()] = ReadText(e.path());
    }
  }
  return files;
}

Outcome Criterion10() {
  TempDir runs[2];
  for (auto& run : runs) {
    const auto base = run.path();
    const auto data = (base / "data").string();
    const std::vector<std::vector<std::string>> commands = {
        {"synth", "--preset", "standard", "--seed", "424242", "--out-dir", data},
        {"fit", "--method", "discriminative", "--modality", data + "/train_m0.csv", "--modality",
         data + "/train_m1.csv", "--modality", data + "/train_m2.csv", "--labels",
         data + "/train_labels.csv", "--out-dir", (base / "fit").string()},
        {"eval", "--method", "discriminative", "--method", "mcca", "--method", "serial",
         "--train-modality", data + "/train_m0.csv", "--train-modality", data + "/train_m1.csv",
         "--train-modality", data + "/train_m2.csv", "--train-labels", data + "/train_labels.csv",
         "--eval-modality", data + "/eval_m0.csv", "--eval-modality", data + "/eval_m1.csv",
         "--eval-modality", data + "/eval_m2.csv", "--eval-labels", data + "/eval_labels.csv",
         "--out-dir", (base / "eval").string()},
        {"compare", "--preset", "standard", "--seed", "424242", "--out-dir",
         (base / "compare").string()},
    };
    for (const auto& args : commands) {
      const auto r = RunCli(args);
      if (r.code != 0) return {false, fmt::format("{} exited {}: {}", args[0], r.code, r.err)};
    }
  }
  const auto a = Snapshot(runs[0].path());
  const auto b = Snapshot(runs[1].path());
  int differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) ++differing;
  }
  const bool pass = a.size() == b.size() && differing == 0 && !a.empty();
  return {pass, fmt::format("synth/fit/eval/compare: {} files per run, {} differ", a.size(),
                            differing)};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  const auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, fmt::format("exception: {}", e.what())};
    }
  };

  const auto kernels = RunKernelSuite();
  report(1, "correlation kernels vs brute-force sums", Criterion1(kernels));
  report(2, "between = -within exactly", Criterion2(kernels));
  report(3, "eigen residuals and D+-orthonormality", guarded(Criterion3));
  const auto fits = RunDiscriminativeFits();
  report(4, "count_positive <= c", Criterion4(fits));
  report(5, "truncated top-c solve matches full solve", guarded(Criterion5));
  report(6, "J criterion consistency", guarded([&] { return Criterion6(fits); }));
  report(7, "baseline degeneracies and CCA oracle", guarded(Criterion7));
  report(8, "standard benchmark comparison", guarded(Criterion8));
  report(9, "chance level at snr 1e-6", guarded(Criterion9));
  report(10, "command determinism", guarded(Criterion10));

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
