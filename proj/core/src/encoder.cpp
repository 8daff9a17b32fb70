#include "tkgx/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tkgx {

void ModelConfig::validate() const {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("embedding dimension must be positive and even");
  if (hidden <= 0) throw std::invalid_argument("hidden dimension must be positive");
  if (layers < 0) throw std::invalid_argument("layer count must be non-negative");
  if (!(init_std > 0.0)) throw std::invalid_argument("init_std must be positive");
}

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

Eigen::MatrixXd xavier_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

// (input, output) size of each GCN layer: d -> hidden -> ... -> hidden -> d.
std::pair<int, int> layer_dims(const ModelConfig& cfg, int layer) {
  const int in = layer == 0 ? cfg.dim : cfg.hidden;
  const int out = layer == cfg.layers - 1 ? cfg.dim : cfg.hidden;
  return {in, out};
}

std::string layer_name(int layer, const char* what) { return "gcn" + std::to_string(layer) + "." + what; }

}  // namespace

EncoderParams EncoderParams::create(ParamStore& store, const ModelConfig& cfg, const VocabSizes& sizes,
                                    std::mt19937_64& rng) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  const auto E = static_cast<Eigen::Index>(sizes.entities);
  const auto R = static_cast<Eigen::Index>(sizes.relations);
  const auto T = static_cast<Eigen::Index>(sizes.timestamps);
  EncoderParams p;
  p.entity_table = store.add("entity_table", normal_matrix(E, d, cfg.init_std, rng));
  p.relation_table = store.add("relation_table", normal_matrix(R, d, cfg.init_std, rng));
  p.time_table = store.add("time_table", normal_matrix(T, d, cfg.init_std, rng));
  p.meta_position = store.add("meta_position", normal_matrix(kNumPositionTypes, cfg.position_dim(), cfg.init_std, rng));
  p.meta_time = store.add("meta_time", normal_matrix(kNumTimeTypes, cfg.time_dim(), cfg.init_std, rng));
  p.ent_w_in = store.add("ent_w_in", xavier_matrix(d, d, rng));
  p.ent_w_out = store.add("ent_w_out", xavier_matrix(d, d, rng));
  for (int l = 0; l < cfg.layers; ++l) {
    const auto [in, out] = layer_dims(cfg, l);
    Layer layer;
    layer.w_out = store.add(layer_name(l, "w_out"), xavier_matrix(out, 3 * in, rng));
    layer.w_in = store.add(layer_name(l, "w_in"), xavier_matrix(out, 3 * in, rng));
    layer.w_self = store.add(layer_name(l, "w_self"), xavier_matrix(out, in, rng));
    layer.w_rel = store.add(layer_name(l, "w_rel"), xavier_matrix(out, in, rng));
    layer.w_time = store.add(layer_name(l, "w_time"), xavier_matrix(out, in, rng));
    p.layers.push_back(layer);
  }
  if (!cfg.use_rppg) p.free_rel_position = store.add("free_rel_position", normal_matrix(R, cfg.position_dim(), cfg.init_std, rng));
  if (!cfg.use_tspg) p.free_rel_time = store.add("free_rel_time", normal_matrix(R, cfg.time_dim(), cfg.init_std, rng));
  if (!cfg.use_entity_feature) p.free_entity = store.add("free_entity", normal_matrix(E, d, cfg.init_std, rng));
  return p;
}

EncoderParams EncoderParams::bind(const ParamStore& store, const ModelConfig& cfg) {
  cfg.validate();
  EncoderParams p;
  p.entity_table = store.at("entity_table");
  p.relation_table = store.at("relation_table");
  p.time_table = store.at("time_table");
  p.meta_position = store.at("meta_position");
  p.meta_time = store.at("meta_time");
  p.ent_w_in = store.at("ent_w_in");
  p.ent_w_out = store.at("ent_w_out");
  for (int l = 0; l < cfg.layers; ++l) {
    p.layers.push_back({store.at(layer_name(l, "w_out")), store.at(layer_name(l, "w_in")),
                        store.at(layer_name(l, "w_self")), store.at(layer_name(l, "w_rel")),
                        store.at(layer_name(l, "w_time"))});
  }
  if (!cfg.use_rppg) p.free_rel_position = store.at("free_rel_position");
  if (!cfg.use_tspg) p.free_rel_time = store.at("free_rel_time");
  if (!cfg.use_entity_feature) p.free_entity = store.at("free_entity");
  return p;
}

EmbeddingSet to_embedding_set(const EncodedVars& vars) {
  EmbeddingSet out;
  for (const auto& [id, v] : vars.entity) out.entity[id] = v.value().col(0);
  for (const auto& [id, v] : vars.relation) out.relation[id] = v.value().col(0);
  for (const auto& [id, v] : vars.timestamp) out.timestamp[id] = v.value().col(0);
  return out;
}

SupportGraphs SupportGraphs::build(std::span<const Quadruple> support, const ModelConfig& cfg) {
  SupportGraphs g;
  if (cfg.use_rppg) g.rppg = build_rppg(support);
  if (cfg.use_tspg) g.tspg = build_tspg(support);
  return g;
}

Var Encoder::activate(Var x) const { return cfg_.activation == Activation::kTanh ? tanh(x) : x; }

std::map<RelationId, Var> Encoder::relation_inputs(Tape& tape, const TaskSample& task, const SupportGraphs& graphs,
                                                   bool strict) const {
  IdSet in_support, all;
  for (const auto& q : task.support) in_support.insert(q.r);
  for (const auto* part : {&task.support, &task.query})
    for (const auto& q : *part) all.insert(q.r);

  // Mean of meta-type rows with the in-edge type mix, or zero without in-edges.
  auto mixed = [&](const PatternGraph& g, RelationId r, ParamId table, int width) {
    const auto w = in_edge_type_weights(g, r);
    std::vector<Var> rows;
    std::vector<double> weights;
    for (std::size_t m = 0; m < w.size(); ++m) {
      if (w[m] == 0.0) continue;
      rows.push_back(tape.param_row(table, static_cast<Eigen::Index>(m)));
      weights.push_back(w[m]);
    }
    if (rows.empty()) return tape.constant(Eigen::MatrixXd::Zero(width, 1));
    return weighted_sum(rows, weights);
  };

  std::map<RelationId, Var> out;
  for (RelationId r : all) {
    if (!task.relation_unseen(r)) {
      out.emplace(r, tape.param_row(ids_.relation_table, r));
      continue;
    }
    if (!in_support.count(r)) {
      if (strict) throw DataError("unseen relation " + std::to_string(r) + " has no support fact");
      continue;
    }
    const Var pos = graphs.rppg ? mixed(*graphs.rppg, r, ids_.meta_position, cfg_.position_dim())
                                : tape.param_row(*ids_.free_rel_position, r);
    const Var time = graphs.tspg ? mixed(*graphs.tspg, r, ids_.meta_time, cfg_.time_dim())
                                 : tape.param_row(*ids_.free_rel_time, r);
    const Var halves[] = {pos, time};
    out.emplace(r, concat(halves));
  }
  return out;
}

std::map<EntityId, Var> Encoder::entity_inputs(Tape& tape, const TaskSample& task,
                                               const std::map<RelationId, Var>& relations, bool strict) const {
  std::map<EntityId, std::vector<Var>> outgoing, incoming;
  for (const auto& q : task.support) {
    auto it = relations.find(q.r);
    if (it == relations.end()) continue;
    if (task.entity_unseen(q.s)) outgoing[q.s].push_back(it->second);
    if (task.entity_unseen(q.o)) incoming[q.o].push_back(it->second);
  }

  std::map<EntityId, Var> out;
  for (EntityId e : task.entities()) {
    if (!task.entity_unseen(e)) {
      out.emplace(e, tape.param_row(ids_.entity_table, e));
      continue;
    }
    const auto& outs = outgoing[e];
    const auto& ins = incoming[e];
    const std::size_t n = outs.size() + ins.size();
    if (n == 0) {
      if (strict) throw DataError("unseen entity " + std::to_string(e) + " has no support fact");
      continue;
    }
    if (ids_.free_entity) {
      out.emplace(e, tape.param_row(*ids_.free_entity, e));
      continue;
    }
    std::vector<Var> terms;
    auto directional = [&](const std::vector<Var>& rels, ParamId w) {
      if (rels.empty()) return;
      const std::vector<double> weights(rels.size(), 1.0 / static_cast<double>(n));
      terms.push_back(matvec(tape.param(w), weighted_sum(rels, weights)));
    };
    directional(outs, ids_.ent_w_out);
    directional(ins, ids_.ent_w_in);
    out.emplace(e, terms.size() == 1 ? terms[0] : terms[0] + terms[1]);
  }
  return out;
}

EncodedVars Encoder::inputs(Tape& tape, const TaskSample& task, const SupportGraphs& graphs, bool strict) const {
  EncodedVars in;
  in.relation = relation_inputs(tape, task, graphs, strict);
  in.entity = entity_inputs(tape, task, in.relation, strict);
  IdSet times;
  for (const auto* part : {&task.support, &task.query})
    for (const auto& q : *part) times.insert(q.t);
  for (TimeId t : times) in.timestamp.emplace(t, tape.param_row(ids_.time_table, t));
  return in;
}

EncodedVars Encoder::gcn(Tape& tape, std::span<const Quadruple> graph, const EncodedVars& in) const {
  for (const auto& q : graph)
    if (!in.covers(q)) throw DataError("GCN input does not cover every component of the graph");

  EncodedVars h = in;
  for (int l = 0; l < cfg_.layers; ++l) {
    const auto& layer = ids_.layers[static_cast<std::size_t>(l)];
    const Var w_out = tape.param(layer.w_out), w_in = tape.param(layer.w_in);
    const Var w_self = tape.param(layer.w_self), w_rel = tape.param(layer.w_rel), w_time = tape.param(layer.w_time);

    std::map<EntityId, std::vector<Var>> messages;
    for (const auto& q : graph) {
      const Var r = h.relation.at(q.r), s = h.entity.at(q.s), o = h.entity.at(q.o), t = h.timestamp.at(q.t);
      const Var out_parts[] = {r, o, t};
      messages[q.s].push_back(matvec(w_out, concat(out_parts)));
      const Var in_parts[] = {r, s, t};
      messages[q.o].push_back(matvec(w_in, concat(in_parts)));
    }

    EncodedVars next;
    for (const auto& [e, he] : h.entity) {
      Var self = matvec(w_self, he);
      auto it = messages.find(e);
      if (it != messages.end()) {
        const std::vector<double> weights(it->second.size(), 1.0 / static_cast<double>(it->second.size()));
        self = weighted_sum(it->second, weights) + self;
      }
      next.entity.emplace(e, activate(self));
    }
    for (const auto& [r, hr] : h.relation) next.relation.emplace(r, activate(matvec(w_rel, hr)));
    for (const auto& [t, ht] : h.timestamp) next.timestamp.emplace(t, activate(matvec(w_time, ht)));
    h = std::move(next);
  }
  return h;
}

EncodedVars Encoder::encode(Tape& tape, const TaskSample& task, bool strict) const {
  const auto graphs = SupportGraphs::build(task.support, cfg_);
  EncodedVars in = inputs(tape, task, graphs, strict);
  if (!cfg_.use_gcn) return in;
  std::vector<Quadruple> graph;
  graph.reserve(task.support.size());
  for (const auto& q : task.support)
    if (in.covers(q)) graph.push_back(q);
  return gcn(tape, graph, in);
}

Model::Model(ModelConfig cfg, const VocabSizes& sizes, std::uint64_t seed) : cfg_(std::move(cfg)) {
  std::mt19937_64 rng(seed);
  ids_ = EncoderParams::create(params_, cfg_, sizes, rng);
}

Model::Model(ModelConfig cfg, ParamStore params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  ids_ = EncoderParams::bind(params_, cfg_);
}

Model::Model(const Model& other) : cfg_(other.cfg_), params_(other.params_), ids_(other.ids_) {}

MetaTypeEmbeddings Model::meta_embeddings() const {
  return {params_.value(ids_.meta_position), params_.value(ids_.meta_time)};
}

std::map<RelationId, Eigen::VectorXd> Model::input_relation_features(const TaskSample& task) const {
  Tape tape(params_);
  const auto graphs = SupportGraphs::build(task.support, cfg_);
  std::map<RelationId, Eigen::VectorXd> out;
  for (const auto& [r, v] : encoder().relation_inputs(tape, task, graphs, true)) out[r] = v.value().col(0);
  return out;
}

std::map<EntityId, Eigen::VectorXd> Model::input_entity_features(const TaskSample& task) const {
  Tape tape(params_);
  const auto graphs = SupportGraphs::build(task.support, cfg_);
  const auto enc = encoder();
  const auto rels = enc.relation_inputs(tape, task, graphs, true);
  std::map<EntityId, Eigen::VectorXd> out;
  for (const auto& [e, v] : enc.entity_inputs(tape, task, rels, true)) out[e] = v.value().col(0);
  return out;
}

EmbeddingSet Model::gcn_forward(std::span<const Quadruple> graph, const EmbeddingSet& inputs) const {
  Tape tape(params_);
  EncodedVars in;
  for (const auto& [id, v] : inputs.entity) in.entity.emplace(id, tape.constant(v));
  for (const auto& [id, v] : inputs.relation) in.relation.emplace(id, tape.constant(v));
  for (const auto& [id, v] : inputs.timestamp) in.timestamp.emplace(id, tape.constant(v));
  return to_embedding_set(encoder().gcn(tape, graph, in));
}

EmbeddingSet Model::embed(const TaskSample& task, bool strict) const {
  Tape tape(params_);
  return to_embedding_set(encoder().encode(tape, task, strict));
}

}  // namespace tkgx
