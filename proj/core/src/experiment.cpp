#include "tkgx/experiment.hpp"

#include <iomanip>
#include <ostream>

namespace tkgx {

MetaRun run_meta_pipeline(const Tkg& train, const TaskSample& split, const TrainConfig& cfg,
                          const SamplerConfig& sampler, const EvalOptions& eval) {
  MetaRun run{meta_train(train, cfg, sampler), {}};
  run.report = evaluate_split(split, run.training.model, train.quads(), eval);
  return run;
}

AsmpRun run_asmp_pipeline(const Tkg& train, const TaskSample& split, const TrainConfig& cfg,
                          const EvalOptions& eval) {
  AsmpRun run{train_plain_embeddings(train, cfg), {}};
  const EmbeddingSet emb = asmp_embed_unseen(split, run.training.tables, cfg.model.score_kind);
  run.report = evaluate_embeddings(split, emb, cfg.model.score_kind, train.quads(), eval);
  return run;
}

BenchmarkConfig BenchmarkConfig::defaults() {
  BenchmarkConfig c;
  c.data.episodes = 800;
  c.train.model.dim = 32;
  c.train.model.hidden = 32;
  c.train.model.layers = 2;
  c.train.model.score_kind = ScoreKind::kRotatE;
  // Bounded (tanh) embeddings at d=32 keep RotatE distances small, so a wide margin
  // leaves every negative inside it.
  c.train.gamma = 2.0;
  c.train.n_neg = 32;
  c.train.lr = 0.01;
  c.train.batch_tasks = 16;
  c.train.epochs = 10;
  c.train.plain_epochs = 100;
  c.train.plain_batch = 64;
  c.sampler.task_count = 500;
  // Longer walks give tasks with a candidate pool closer to the held-out graph's.
  c.sampler.l2 = 20;
  return c;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  const Tkg graph = make_planted_tkg(cfg.data);
  const HeldOutSplit held = make_heldout_split(graph, cfg.split);
  const EvalOptions eval{true, cfg.train.threads};
  BenchmarkResult out{run_meta_pipeline(held.train, held.test, cfg.train, cfg.sampler, eval), std::nullopt,
                      random_split_mrr(held.test, held.train.quads(), eval), held.train.size(),
                      split_stats(held.test, held.dropped)};
  if (cfg.run_baseline) out.baseline = run_asmp_pipeline(held.train, held.test, cfg.train, eval);
  return out;
}

std::pair<double, double> first_last_epoch_loss(std::span<const LossRecord> trace) {
  if (trace.empty()) throw std::invalid_argument("empty loss trace");
  auto mean_of = [&](int epoch) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : trace)
      if (r.epoch == epoch) {
        sum += r.loss;
        ++n;
      }
    return sum / n;
  };
  return {mean_of(trace.front().epoch), mean_of(trace.back().epoch)};
}

std::vector<SweepRow> ratio_sweep(const BenchmarkConfig& base, std::span<const double> ratios) {
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    BenchmarkConfig cfg = base;
    cfg.split.entity_ratio = ratio;
    cfg.run_baseline = false;
    const auto res = run_benchmark(cfg);
    const auto& m = res.meta.report.overall;
    rows.push_back({ratio, m.mrr, m.hits1, m.hits10, res.random_mrr});
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "entity_ratio,mrr,hits1,hits10,random_mrr\n";
  os << std::setprecision(6);
  for (const auto& r : rows)
    os << r.entity_ratio << ',' << r.mrr << ',' << r.hits1 << ',' << r.hits10 << ',' << r.random_mrr << '\n';
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},   {"config", config},         {"seeds", seeds},
          {"dataset_hashes", dataset_hashes}, {"timings_s", timings_s}, {"version", version}};
}

std::string artifact_version() { return "tkgx-0.1.0"; }

}  // namespace tkgx
