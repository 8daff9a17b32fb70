#pragma once

#include <chrono>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tkgx/eval.hpp"
#include "tkgx/synthetic.hpp"
#include "tkgx/training.hpp"

namespace tkgx {

/// Meta-train on `train`, then rank the split.
struct MetaRun {
  TrainResult training;
  RankingReport report;
};
MetaRun run_meta_pipeline(const Tkg& train, const TaskSample& split, const TrainConfig& cfg,
                          const SamplerConfig& sampler, const EvalOptions& eval);

/// Plain embedding training followed by closed-form inference of the unseen parts.
struct AsmpRun {
  PlainTrainResult training;
  RankingReport report;
};
AsmpRun run_asmp_pipeline(const Tkg& train, const TaskSample& split, const TrainConfig& cfg,
                          const EvalOptions& eval);

/// The planted-pattern benchmark: generated graph, held-out split, meta-trained model,
/// closed-form baseline and the random-ranking expectation.
struct BenchmarkConfig {
  SyntheticConfig data;
  HeldOutConfig split;
  TrainConfig train;
  SamplerConfig sampler;
  bool run_baseline = true;

  /// d=32, k=2, RotatE, 500 tasks.
  static BenchmarkConfig defaults();
};

struct BenchmarkResult {
  MetaRun meta;
  std::optional<AsmpRun> baseline;
  double random_mrr = 0.0;
  std::size_t train_facts = 0;
  SplitStats split;
};

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

/// Mean task loss of the first and last epoch of a trace.
std::pair<double, double> first_last_epoch_loss(std::span<const LossRecord> trace);

struct SweepRow {
  double entity_ratio = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits10 = 0.0;
  double random_mrr = 0.0;
};

/// Runs the benchmark (without the baseline) once per unseen-entity ratio.
std::vector<SweepRow> ratio_sweep(const BenchmarkConfig& base, std::span<const double> ratios);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

/// What a run was made of, written next to its outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> dataset_hashes;
  std::map<std::string, double> timings_s;
  std::string version;

  nlohmann::json to_json() const;
};

std::string artifact_version();

/// Wall-clock stopwatch in seconds.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace tkgx
