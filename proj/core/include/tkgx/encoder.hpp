#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>

#include "tkgx/autodiff.hpp"
#include "tkgx/embeddings.hpp"
#include "tkgx/patterns.hpp"

namespace tkgx {

enum class Activation { kTanh, kIdentity };

struct ModelConfig {
  int dim = 128;     // entity / relation / timestamp embedding size; even
  int hidden = 64;   // GCN hidden size between layers
  int layers = 2;    // GCN depth k
  Activation activation = Activation::kTanh;
  ScoreKind score_kind = ScoreKind::kRotatE;
  double init_std = 0.1;
  // Ablation switches.
  bool use_rppg = true;
  bool use_tspg = true;
  bool use_entity_feature = true;
  bool use_gcn = true;

  void validate() const;  // throws std::invalid_argument
  int position_dim() const { return dim / 2; }
  int time_dim() const { return dim - dim / 2; }
};

struct VocabSizes {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t timestamps = 0;
};

/// Parameter handles into a ParamStore.
struct EncoderParams {
  ParamId entity_table, relation_table, time_table;
  ParamId meta_position, meta_time;
  ParamId ent_w_in, ent_w_out;
  struct Layer {
    ParamId w_out, w_in, w_self, w_rel, w_time;
  };
  std::vector<Layer> layers;
  std::optional<ParamId> free_rel_position, free_rel_time, free_entity;

  /// Creates and initializes every tensor in `store`.
  static EncoderParams create(ParamStore& store, const ModelConfig& cfg, const VocabSizes& sizes, std::mt19937_64& rng);
  /// Re-resolves handles by name (checkpoint load).
  static EncoderParams bind(const ParamStore& store, const ModelConfig& cfg);
};

/// Recorded embeddings of one encoded graph.
struct EncodedVars {
  std::map<EntityId, Var> entity;
  std::map<RelationId, Var> relation;
  std::map<TimeId, Var> timestamp;

  bool covers(const Quadruple& q) const {
    return entity.count(q.s) && entity.count(q.o) && relation.count(q.r) && timestamp.count(q.t);
  }
};

EmbeddingSet to_embedding_set(const EncodedVars& vars);

/// Pattern graphs of a support set, built only for the enabled halves.
struct SupportGraphs {
  std::optional<PatternGraph> rppg, tspg;
  static SupportGraphs build(std::span<const Quadruple> support, const ModelConfig& cfg);
};

/// Encoder: seen lookups, pattern-based relation features, direction-aware entity features
/// and the k-layer GCN. Components that cannot be embedded (unseen and absent from the
/// support facts) are left out in lenient mode and raise DataError in strict mode.
class Encoder {
 public:
  Encoder(const ModelConfig& cfg, const EncoderParams& ids) : cfg_(cfg), ids_(ids) {}

  EncodedVars inputs(Tape& tape, const TaskSample& task, const SupportGraphs& graphs, bool strict) const;
  std::map<RelationId, Var> relation_inputs(Tape& tape, const TaskSample& task, const SupportGraphs& graphs,
                                            bool strict) const;
  std::map<EntityId, Var> entity_inputs(Tape& tape, const TaskSample& task, const std::map<RelationId, Var>& relations,
                                        bool strict) const;
  /// Runs the GCN over `graph` facts; every component of `graph` must be in `in`.
  EncodedVars gcn(Tape& tape, std::span<const Quadruple> graph, const EncodedVars& in) const;

  /// inputs + GCN over the support facts (or identity if the GCN is disabled).
  EncodedVars encode(Tape& tape, const TaskSample& task, bool strict) const;

 private:
  Var activate(Var x) const;
  const ModelConfig& cfg_;
  const EncoderParams& ids_;
};

/// A configured model: parameters plus the encoder over them.
class Model {
 public:
  Model(ModelConfig cfg, const VocabSizes& sizes, std::uint64_t seed);
  Model(ModelConfig cfg, ParamStore params);
  Model(const Model& other);
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const EncoderParams& ids() const { return ids_; }
  Encoder encoder() const { return Encoder(cfg_, ids_); }

  MetaTypeEmbeddings meta_embeddings() const;

  /// Layer-0 relation features for every embeddable relation of the task.
  std::map<RelationId, Eigen::VectorXd> input_relation_features(const TaskSample& task) const;
  /// Layer-0 entity features for every embeddable entity of the task.
  std::map<EntityId, Eigen::VectorXd> input_entity_features(const TaskSample& task) const;
  /// The GCN alone over explicit inputs.
  EmbeddingSet gcn_forward(std::span<const Quadruple> graph, const EmbeddingSet& inputs) const;
  /// Final embeddings of every embeddable component (strict: throws on un-embeddable ones).
  EmbeddingSet embed(const TaskSample& task, bool strict = true) const;

 private:
  ModelConfig cfg_;
  ParamStore params_;
  EncoderParams ids_;
};

}  // namespace tkgx
