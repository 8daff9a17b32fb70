#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tkgx/decoders.hpp"
#include "tkgx/embeddings.hpp"

namespace tkgx {

class Model;

enum class Side { kHead, kTail };

using FactSet = std::unordered_set<Quadruple, QuadrupleHash>;

/// Mean-rank of q's true entity on `side` among `candidates`: 1 + #strictly higher +
/// #ties / 2. Filtered mode skips candidates that form another known-true fact.
double rank_query(const Quadruple& q, Side side, const EmbeddingSet& emb, ScoreKind kind,
                  std::span<const EntityId> candidates, const FactSet* known_true);

/// Same rule on precomputed scores: `truth` indexes the true candidate.
double rank_from_scores(std::span<const double> scores, std::size_t truth, std::span<const char> excluded = {});

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;  // number of rankings

  /// Metrics of a list of ranks.
  static Metrics from_ranks(std::span<const double> ranks);
};

struct RankingReport {
  Metrics overall;
  std::map<QueryCategory, Metrics> per_category;
  bool filtered = true;

  nlohmann::json to_json() const;
  /// Aligned table: one row per query category plus the overall row.
  void write_table(std::ostream& os, const std::string& title) const;
};

struct EvalOptions {
  bool filtered = true;
  int threads = 1;
};

/// Ranks both sides of every query fact over all entities of the split.
/// `known_true` holds additional true facts (typically the training graph) for filtering.
RankingReport evaluate_embeddings(const TaskSample& split, const EmbeddingSet& emb, ScoreKind kind,
                                  std::span<const Quadruple> extra_known, const EvalOptions& opts);

/// Encodes the split from its support facts with `model`, then ranks as above.
RankingReport evaluate_split(const TaskSample& split, const Model& model, std::span<const Quadruple> extra_known,
                             const EvalOptions& opts);

/// Cosine of two relation embeddings; throws DataError on a zero-norm vector.
double relation_similarity(RelationId a, RelationId b, const EmbeddingSet& emb);

/// Expected MRR of uniformly random rankings with n candidates: H_n / n.
double random_rank_mrr(std::size_t n);

/// Expected MRR of uniformly random scores on this split under the same candidate set
/// and filter that evaluate_embeddings uses.
double random_split_mrr(const TaskSample& split, std::span<const Quadruple> extra_known, const EvalOptions& opts);

}  // namespace tkgx
