#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tkgx/checkpoint.hpp"
#include "tkgx/eval.hpp"
#include "tkgx/experiment.hpp"
#include "tkgx/ingest.hpp"
#include "tkgx/patterns.hpp"
#include "tkgx/synthetic.hpp"
#include "tkgx/training.hpp"

namespace tkgx::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_exists(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw UsageError(what + " not found: " + path);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hash_hex(fnv1a(ss.str()));
}

json read_json_file(const std::string& path) {
  require_exists(path, "config file");
  std::ifstream in(path);
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw UsageError("config file is not valid JSON: " + path);
  return j;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  std::ofstream out(dir / "manifest.json");
  out << m.to_json().dump(2) << '\n';
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

std::pair<double, double> parse_mask(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const double v = std::stod(s);
      return {v, v};
    }
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("--mask expects a:b, got '" + s + "'");
  }
}

ScoreKind score_from_flag(const std::string& s) {
  try {
    return parse_score_kind(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void apply_ablations(const std::vector<std::string>& names, ModelConfig& m) {
  for (const auto& a : names) {
    if (a == "rppg") m.use_rppg = false;
    else if (a == "tspg") m.use_tspg = false;
    else if (a == "both") m.use_rppg = m.use_tspg = false;
    else if (a == "entity") m.use_entity_feature = false;
    else if (a == "gcn") m.use_gcn = false;
  }
}

const TaskSample& pick_split(const DatasetBundle& b, const std::string& name) {
  return name == "valid" ? b.valid : b.test;
}

std::string score_name(ScoreKind k) {
  std::string s = to_string(k);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Values read from --config before flags are bound, so explicit flags override the file.
std::string find_config_arg(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

struct Shared {
  TrainConfig train;
  SamplerConfig sampler;
  std::string config_path;
  std::string score = "rotate";
  std::string mask = "0.3:0.7";
  std::vector<std::string> ablate;
};

void add_model_flags(CLI::App* c, Shared& s) {
  c->add_option("--score", s.score, "score function: distmult, complex, rotate, tdistmult, tcomplex, tero");
  c->add_option("--dim", s.train.model.dim, "embedding size");
  c->add_option("--hidden", s.train.model.hidden, "GCN hidden size");
  c->add_option("--layers", s.train.model.layers, "GCN layers");
  c->add_option("--gamma", s.train.gamma, "margin");
  c->add_option("--n-neg", s.train.n_neg, "negatives per positive");
  c->add_option("--alpha", s.train.alpha, "self-adversarial temperature");
  c->add_option("--lr", s.train.lr, "Adam learning rate");
  c->add_option("--reg", s.train.reg, "time smoothness weight");
  c->add_option("--threads", s.train.threads, "worker threads (1 = reproducible)");
  c->add_option("--seed", s.train.seed, "training seed");
  c->add_option("--config", s.config_path, "JSON config; explicit flags override it");
}

void finish_shared(Shared& s) {
  s.train.model.score_kind = score_from_flag(s.score);
  apply_ablations(s.ablate, s.train.model);
  try {
    s.train.validate();
    s.sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_generate(const std::string& input, const std::string& out_dir, const std::string& format, Shared& s,
                 std::ostream& out) {
  require_exists(input, "input file");
  const auto [lo, hi] = parse_mask(s.mask);
  s.sampler.mask_min = lo;
  s.sampler.mask_max = hi;
  finish_shared(s);
  Stopwatch sw;
  const auto records = parse_quadruple_file(fs::path(input));
  const Tkg source = build_tkg(records, format == "ids" ? RecordFormat::kIds : RecordFormat::kLabels);
  const auto bundle = generate_dataset(source, s.sampler);
  write_dataset(bundle, out_dir);

  RunManifest m;
  m.command = "generate";
  m.config = to_json(s.sampler);
  m.config["input"] = input;
  m.config["format"] = format;
  m.seeds["rng_seed"] = s.sampler.rng_seed;
  m.dataset_hashes["input"] = file_hash(input);
  m.dataset_hashes["vocabulary"] = hash_hex(vocabulary_hash(bundle.train));
  m.timings_s["total"] = sw.seconds();
  m.version = artifact_version();
  write_manifest(out_dir, m);
  out << bundle.stats.to_json().dump(2) << '\n';
  return kOk;
}

int cmd_train(const std::string& data, const std::string& out_dir, int early_stop, Shared& s, std::ostream& out) {
  require_exists(data, "dataset directory");
  const auto [lo, hi] = parse_mask(s.mask);
  s.sampler.mask_min = lo;
  s.sampler.mask_max = hi;
  s.train.early_stop_patience = early_stop;
  finish_shared(s);
  fs::create_directories(out_dir);
  Stopwatch total;
  const auto bundle = load_dataset(data);
  Stopwatch sampling;
  const auto tasks = sample_tasks(bundle.train, s.sampler);
  const double sampling_s = sampling.seconds();

  ValidationFn validation;
  if (early_stop > 0 && !bundle.valid.query.empty()) {
    validation = [&](const Model& m) {
      return evaluate_split(bundle.valid, m, bundle.train.quads(), {true, s.train.threads}).overall.mrr;
    };
  }
  Stopwatch training;
  const auto result = meta_train(bundle.train, tasks, s.train, validation);
  const double training_s = training.seconds();

  const auto vocab = vocabulary_hash(bundle.train);
  save_checkpoint(fs::path(out_dir) / "checkpoint.json", result.model, vocab);
  {
    std::ofstream trace(fs::path(out_dir) / "loss.csv");
    write_loss_trace(trace, result.trace);
  }
  RunManifest m;
  m.command = "train";
  m.config = to_json(s.train);
  m.config.update(to_json(s.sampler));
  m.config["data"] = data;
  m.seeds["seed"] = s.train.seed;
  m.seeds["rng_seed"] = s.sampler.rng_seed;
  m.dataset_hashes["vocabulary"] = hash_hex(vocab);
  m.dataset_hashes["train.txt"] = file_hash(fs::path(data) / "train.txt");
  m.timings_s["sampling"] = sampling_s;
  m.timings_s["training"] = training_s;
  m.timings_s["total"] = total.seconds();
  m.version = artifact_version();
  write_manifest(out_dir, m);
  out << "tasks " << tasks.size() << ", steps " << result.trace.size();
  if (!result.trace.empty()) out << ", final loss " << result.trace.back().loss;
  out << '\n';
  return kOk;
}

void emit_report(const RankingReport& report, const fs::path& out_dir, const std::string& title, std::ostream& out) {
  std::ostringstream table;
  report.write_table(table, title);
  write_text(out_dir / "report.txt", table.str());
  write_text(out_dir / "report.json", report.to_json().dump(2) + "\n");
  out << table.str();
}

int cmd_eval(const std::string& data, const std::string& checkpoint, const std::string& out_dir,
             const std::string& split_name, const std::string& mode, int threads, std::ostream& out) {
  require_exists(data, "dataset directory");
  require_exists(checkpoint, "checkpoint");
  fs::create_directories(out_dir);
  Stopwatch sw;
  const auto bundle = load_dataset(data);
  const auto vocab = vocabulary_hash(bundle.train);
  const Model model = load_checkpoint(checkpoint, vocab);
  const EvalOptions opts{mode == "filtered", threads};
  const auto report = evaluate_split(pick_split(bundle, split_name), model, bundle.train.quads(), opts);
  emit_report(report, out_dir, split_name, out);

  RunManifest m;
  m.command = "eval";
  m.config = {{"data", data}, {"checkpoint", checkpoint}, {"split", split_name}, {"mode", mode},
              {"threads", threads}, {"model", to_json(model.config())}};
  m.dataset_hashes["vocabulary"] = hash_hex(vocab);
  m.dataset_hashes["checkpoint"] = file_hash(checkpoint);
  m.timings_s["total"] = sw.seconds();
  m.version = artifact_version();
  write_manifest(out_dir, m);
  return kOk;
}

int cmd_asmp(const std::string& data, const std::string& out_dir, const std::string& split_name,
             const std::string& mode, Shared& s, std::ostream& out) {
  require_exists(data, "dataset directory");
  finish_shared(s);
  fs::create_directories(out_dir);
  Stopwatch sw;
  const auto bundle = load_dataset(data);
  const EvalOptions opts{mode == "filtered", s.train.threads};
  const auto run = run_asmp_pipeline(bundle.train, pick_split(bundle, split_name), s.train, opts);
  emit_report(run.report, out_dir, split_name + " asmp-" + score_name(s.train.model.score_kind), out);
  {
    std::ofstream trace(fs::path(out_dir) / "loss.csv");
    write_loss_trace(trace, run.training.trace);
  }
  RunManifest m;
  m.command = "asmp";
  m.config = to_json(s.train);
  m.config["data"] = data;
  m.config["split"] = split_name;
  m.config["mode"] = mode;
  m.seeds["seed"] = s.train.seed;
  m.dataset_hashes["vocabulary"] = hash_hex(vocabulary_hash(bundle.train));
  m.timings_s["total"] = sw.seconds();
  m.version = artifact_version();
  write_manifest(out_dir, m);
  return kOk;
}

int cmd_patterns(const std::string& input, const std::string& data, const std::string& split_name,
                 const std::string& out_dir, std::ostream& out) {
  if (input.empty() == data.empty()) throw UsageError("patterns needs exactly one of --input or --data");
  Tkg graph;
  std::vector<Quadruple> facts;
  if (!input.empty()) {
    require_exists(input, "input file");
    graph = build_tkg(parse_quadruple_file(fs::path(input)));
    facts = graph.quads();
  } else {
    require_exists(data, "dataset directory");
    const auto bundle = load_dataset(data);
    graph = bundle.train;
    facts = split_name == "train" ? bundle.train.quads() : pick_split(bundle, split_name).support;
  }
  fs::create_directories(out_dir);
  Stopwatch sw;
  const auto rppg = build_rppg(facts);
  const auto tspg = build_tspg(facts);
  {
    std::ofstream r(fs::path(out_dir) / "rppg.tsv");
    write_pattern_edges(r, rppg, &graph.relations());
    std::ofstream t(fs::path(out_dir) / "tspg.tsv");
    write_pattern_edges(t, tspg, &graph.relations());
  }
  json counts;
  const auto rc = rppg.type_counts();
  const auto tc = tspg.type_counts();
  for (int i = 0; i < 7; ++i) {
    const auto type = static_cast<MetaEdgeType>(i);
    counts[to_string(type)] = is_position_type(type) ? rc[static_cast<std::size_t>(i)] : tc[static_cast<std::size_t>(i)];
  }
  write_text(fs::path(out_dir) / "counts.json", counts.dump(2) + "\n");
  out << counts.dump(2) << '\n';

  RunManifest m;
  m.command = "patterns";
  m.config = {{"input", input}, {"data", data}, {"split", split_name}};
  m.dataset_hashes["vocabulary"] = hash_hex(vocabulary_hash(graph));
  m.timings_s["total"] = sw.seconds();
  m.version = artifact_version();
  write_manifest(out_dir, m);
  return kOk;
}

int cmd_similar(const std::string& data, const std::string& checkpoint, const std::string& split_name,
                const std::vector<std::pair<std::string, std::string>>& pairs, int top, std::ostream& out) {
  require_exists(data, "dataset directory");
  require_exists(checkpoint, "checkpoint");
  const auto bundle = load_dataset(data);
  const Model model = load_checkpoint(checkpoint, vocabulary_hash(bundle.train));
  const auto& split = pick_split(bundle, split_name);
  const auto emb = model.embed(split, false);
  const auto& rel = bundle.train.relations();

  struct Row {
    RelationId a, b;
    double sim;
  };
  std::vector<Row> rows;
  if (!pairs.empty()) {
    for (const auto& [a, b] : pairs) {
      if (!rel.contains(a)) throw UsageError("unknown relation: " + a);
      if (!rel.contains(b)) throw UsageError("unknown relation: " + b);
      rows.push_back({rel.id(a), rel.id(b), relation_similarity(rel.id(a), rel.id(b), emb)});
    }
  } else {
    for (RelationId u : split.unseen_relations)
      for (RelationId v : split.seen_relations)
        if (emb.relation.count(u) && emb.relation.count(v)) rows.push_back({u, v, relation_similarity(u, v, emb)});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.sim > y.sim; });
    if (top > 0 && rows.size() > static_cast<std::size_t>(top)) rows.resize(static_cast<std::size_t>(top));
  }
  for (const auto& r : rows) {
    std::ostringstream v;
    v.setf(std::ios::fixed);
    v.precision(4);
    v << r.sim;
    out << rel.label(r.a) << '\t' << rel.label(r.b) << '\t' << v.str() << '\n';
  }
  return kOk;
}

int cmd_synth(const std::string& out_path, SyntheticConfig cfg) {
  const Tkg g = make_planted_tkg(cfg);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path);
  for (const auto& q : g.quads())
    out << g.entities().label(q.s) << '\t' << g.relations().label(q.r) << '\t' << g.entities().label(q.o) << '\t'
        << g.timestamps().label(q.t) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Shared s;
  try {
    if (const auto cfg = find_config_arg(args); !cfg.empty()) apply_config(read_json_file(cfg), s.train, s.sampler);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: bad config: " << e.what() << '\n';
    return kUsageError;
  }

  CLI::App app{"Meta-learned extrapolation for temporal knowledge graphs", "tkgx"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  std::string input, data, out_dir, checkpoint, format = "labels", split_name = "test", mode = "filtered";
  int early_stop = 0, eval_threads = 1, top = 20;
  std::vector<std::pair<std::string, std::string>> pairs;
  SyntheticConfig synth;

  auto* gen = app.add_subcommand("generate", "Extract a train/valid/test dataset from a quadruple TSV");
  gen->add_option("--input", input, "quadruple TSV (subject, relation, object, timestamp)")->required();
  gen->add_option("--out", out_dir, "output dataset directory")->required();
  gen->add_option("--format", format, "labels or ids")->check(CLI::IsMember({"labels", "ids"}));
  gen->add_option("--l1", s.sampler.l1, "walk length for test/valid extraction");
  gen->add_option("--l2", s.sampler.l2, "walk length for train extraction");
  gen->add_option("--seed-entities", s.sampler.seed_entity_count, "walk starts per split");
  gen->add_option("--mask", s.mask, "unseen ratio range a:b");
  gen->add_option("--support-fraction", s.sampler.support_fraction, "share of facts kept as support");
  gen->add_option("--seed", s.sampler.rng_seed, "sampler seed");
  gen->add_option("--config", s.config_path, "JSON config; explicit flags override it");

  auto* train = app.add_subcommand("train", "Meta-train on a dataset's training graph");
  train->add_option("--data", data, "dataset directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  add_model_flags(train, s);
  train->add_option("--batch-tasks", s.train.batch_tasks, "tasks per step");
  train->add_option("--epochs", s.train.epochs, "passes over the sampled tasks");
  train->add_option("--max-steps", s.train.max_steps, "step cap (-1 = none)");
  train->add_option("--tasks", s.sampler.task_count, "tasks to sample");
  train->add_option("--l2", s.sampler.l2, "task walk length");
  train->add_option("--mask", s.mask, "unseen ratio range a:b");
  train->add_option("--sampler-seed", s.sampler.rng_seed, "task sampler seed");
  train->add_option("--ablate", s.ablate, "disable a module (repeatable)")
      ->check(CLI::IsMember({"rppg", "tspg", "both", "entity", "gcn"}));
  train->add_option("--early-stop", early_stop, "patience in epochs on valid MRR (0 = off)");

  auto* eval = app.add_subcommand("eval", "Rank a split's query facts with a checkpoint");
  eval->add_option("--data", data, "dataset directory")->required();
  eval->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--split", split_name, "test or valid")->check(CLI::IsMember({"test", "valid"}));
  eval->add_option("--mode", mode, "raw or filtered")->check(CLI::IsMember({"raw", "filtered"}));
  eval->add_option("--threads", eval_threads, "worker threads");

  auto* asmp = app.add_subcommand("asmp", "Plain embedding training plus closed-form inference baseline");
  asmp->add_option("--data", data, "dataset directory")->required();
  asmp->add_option("--out", out_dir, "output directory")->required();
  add_model_flags(asmp, s);
  asmp->add_option("--epochs", s.train.plain_epochs, "passes over the training facts");
  asmp->add_option("--batch", s.train.plain_batch, "facts per step");
  asmp->add_option("--split", split_name, "test or valid")->check(CLI::IsMember({"test", "valid"}));
  asmp->add_option("--mode", mode, "raw or filtered")->check(CLI::IsMember({"raw", "filtered"}));

  auto* pat = app.add_subcommand("patterns", "Export relation pattern graphs");
  pat->add_option("--input", input, "quadruple TSV");
  pat->add_option("--data", data, "dataset directory (alternative to --input)");
  pat->add_option("--split", split_name, "train, test or valid (support facts)")
      ->check(CLI::IsMember({"train", "test", "valid"}));
  pat->add_option("--out", out_dir, "output directory")->required();

  auto* sim = app.add_subcommand("similar", "Cosine similarity of final relation embeddings");
  sim->add_option("--data", data, "dataset directory")->required();
  sim->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
  sim->add_option("--split", split_name, "test or valid")->check(CLI::IsMember({"test", "valid"}));
  sim->add_option("--pair", pairs, "two relation labels (repeatable); default: unseen x seen pairs")->expected(1, -1);
  sim->add_option("--top", top, "rows shown without --pair (0 = all)");

  auto* syn = app.add_subcommand("synth", "Write a planted-pattern synthetic graph as TSV");
  syn->add_option("--out", out_dir, "output TSV path")->required();
  syn->add_option("--entities", synth.entities, "entity count");
  syn->add_option("--relations", synth.relations, "relation count (even)");
  syn->add_option("--timestamps", synth.timestamps, "timestamp count");
  syn->add_option("--episodes", synth.episodes, "planted lead/follow pairs");
  syn->add_option("--max-lag", synth.max_lag, "largest follow delay");
  syn->add_option("--seed", synth.seed, "generator seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*gen) return cmd_generate(input, out_dir, format, s, out);
    if (*train) return cmd_train(data, out_dir, early_stop, s, out);
    if (*eval) return cmd_eval(data, checkpoint, out_dir, split_name, mode, eval_threads, out);
    if (*asmp) return cmd_asmp(data, out_dir, split_name, mode, s, out);
    if (*pat) return cmd_patterns(input, data, split_name, out_dir, out);
    if (*sim) return cmd_similar(data, checkpoint, split_name, pairs, top, out);
    if (*syn) return cmd_synth(out_dir, synth);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace tkgx::cli
