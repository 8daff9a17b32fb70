#include "tkgx/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace tkgx {

namespace {

const char* activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

}  // namespace

std::string hash_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"dim", cfg.dim},
          {"hidden", cfg.hidden},
          {"layers", cfg.layers},
          {"activation", activation_name(cfg.activation)},
          {"score_kind", to_string(cfg.score_kind)},
          {"init_std", cfg.init_std},
          {"use_rppg", cfg.use_rppg},
          {"use_tspg", cfg.use_tspg},
          {"use_entity_feature", cfg.use_entity_feature},
          {"use_gcn", cfg.use_gcn}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
  c.dim = j.value("dim", c.dim);
  c.hidden = j.value("hidden", c.hidden);
  c.layers = j.value("layers", c.layers);
  if (j.contains("activation")) c.activation = parse_activation(j.at("activation").get<std::string>());
  if (j.contains("score_kind")) c.score_kind = parse_score_kind(j.at("score_kind").get<std::string>());
  c.init_std = j.value("init_std", c.init_std);
  c.use_rppg = j.value("use_rppg", c.use_rppg);
  c.use_tspg = j.value("use_tspg", c.use_tspg);
  c.use_entity_feature = j.value("use_entity_feature", c.use_entity_feature);
  c.use_gcn = j.value("use_gcn", c.use_gcn);
  return c;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  nlohmann::json j = to_json(cfg.model);
  j.update({{"gamma", cfg.gamma},
            {"n_neg", cfg.n_neg},
            {"alpha", cfg.alpha},
            {"lr", cfg.lr},
            {"reg", cfg.reg},
            {"batch_tasks", cfg.batch_tasks},
            {"epochs", cfg.epochs},
            {"max_steps", cfg.max_steps},
            {"threads", cfg.threads},
            {"seed", cfg.seed},
            {"early_stop_patience", cfg.early_stop_patience},
            {"plain_epochs", cfg.plain_epochs},
            {"plain_batch", cfg.plain_batch}});
  return j;
}

nlohmann::json to_json(const SamplerConfig& cfg) {
  return {{"l1", cfg.l1},
          {"l2", cfg.l2},
          {"seed_entity_count", cfg.seed_entity_count},
          {"mask_min", cfg.mask_min},
          {"mask_max", cfg.mask_max},
          {"task_count", cfg.task_count},
          {"support_fraction", cfg.support_fraction},
          {"rng_seed", cfg.rng_seed},
          {"max_retries", cfg.max_retries}};
}

void apply_config(const nlohmann::json& flat, TrainConfig& t, SamplerConfig& s) {
  if (!flat.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::set<std::string> known;
  for (const auto& doc : {to_json(t), to_json(s)})
    for (const auto& [k, v] : doc.items()) known.insert(k);
  for (const auto& [k, v] : flat.items())
    if (!known.count(k)) throw std::invalid_argument("unknown config key '" + k + "'");

  t.model = model_config_from_json(flat, t.model);
  t.gamma = flat.value("gamma", t.gamma);
  t.n_neg = flat.value("n_neg", t.n_neg);
  t.alpha = flat.value("alpha", t.alpha);
  t.lr = flat.value("lr", t.lr);
  t.reg = flat.value("reg", t.reg);
  t.batch_tasks = flat.value("batch_tasks", t.batch_tasks);
  t.epochs = flat.value("epochs", t.epochs);
  t.max_steps = flat.value("max_steps", t.max_steps);
  t.threads = flat.value("threads", t.threads);
  t.seed = flat.value("seed", t.seed);
  t.early_stop_patience = flat.value("early_stop_patience", t.early_stop_patience);
  t.plain_epochs = flat.value("plain_epochs", t.plain_epochs);
  t.plain_batch = flat.value("plain_batch", t.plain_batch);
  s.l1 = flat.value("l1", s.l1);
  s.l2 = flat.value("l2", s.l2);
  s.seed_entity_count = flat.value("seed_entity_count", s.seed_entity_count);
  s.mask_min = flat.value("mask_min", s.mask_min);
  s.mask_max = flat.value("mask_max", s.mask_max);
  s.task_count = flat.value("task_count", s.task_count);
  s.support_fraction = flat.value("support_fraction", s.support_fraction);
  s.rng_seed = flat.value("rng_seed", s.rng_seed);
  s.max_retries = flat.value("max_retries", s.max_retries);
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, std::uint64_t vocab_hash) {
  nlohmann::json tensors = nlohmann::json::array();
  const auto& params = model.params();
  for (ParamId i = 0; i < params.size(); ++i) {
    const auto& m = params.value(i);
    std::vector<double> data(m.data(), m.data() + m.size());  // column-major
    tensors.push_back({{"name", params.name(i)}, {"shape", {m.rows(), m.cols()}}, {"data", data}});
  }
  const nlohmann::json doc{{"format", "tkgx-checkpoint-1"},
                           {"vocab_hash", hash_hex(vocab_hash)},
                           {"model", to_json(model.config())},
                           {"tensors", tensors}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
}

Model load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_vocab_hash) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const auto doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "tkgx-checkpoint-1") throw DataError("not a checkpoint: " + path.string());
  if (doc.at("vocab_hash").get<std::string>() != hash_hex(expected_vocab_hash))
    throw DataError("checkpoint vocabulary hash " + doc.at("vocab_hash").get<std::string>() +
                    " does not match dataset " + hash_hex(expected_vocab_hash));
  ParamStore params;
  for (const auto& t : doc.at("tensors")) {
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("tensor size mismatch in checkpoint");
    params.add(t.at("name").get<std::string>(), Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols));
  }
  return Model(model_config_from_json(doc.at("model")), std::move(params));
}

}  // namespace tkgx
