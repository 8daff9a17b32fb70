#pragma once

#include <string>

#include <Eigen/Dense>

#include "tkgx/embeddings.hpp"

namespace tkgx {

/// Score functions. Complex-valued kinds read a length-d vector as d/2 real parts
/// followed by d/2 imaginary parts.
enum class ScoreKind { kDistMult, kComplEx, kRotatE, kTDistMult, kTComplEx, kTeRo };

/// Case-insensitive; throws std::invalid_argument for unknown names.
ScoreKind parse_score_kind(const std::string& name);
const char* to_string(ScoreKind kind);
bool is_temporal(ScoreKind kind);
/// RotatE and TeRo score by negated distance.
bool is_distance_based(ScoreKind kind);

/// Raised when a closed-form inference divides by a (near) zero complex entry.
class DivisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

/// Plausibility of (s, r, o, t); higher is more plausible. Static kinds ignore t.
/// RotatE relations hold rotation phases in half-turns (angle = pi * x) in their first
/// d/2 entries; the remaining entries are unused.
double score(ScoreKind kind, const VecRef& s, const VecRef& r, const VecRef& o, const VecRef& t);

struct ScoreGradient {
  double value = 0.0;
  Eigen::VectorXd ds, dr, dobj, dt;
};

/// Score plus its gradient with respect to every argument. dt is zero for static kinds.
ScoreGradient score_gradient(ScoreKind kind, const VecRef& s, const VecRef& r, const VecRef& o, const VecRef& t);

enum class AsmpTarget { kObject, kSubject, kRelation };

/// Closed-form embedding of one unseen component from the other two (and t for
/// temporal kinds). Argument order: object <- (s, r); subject <- (o, r); relation <- (s, o).
Eigen::VectorXd asmp_infer(ScoreKind kind, AsmpTarget target, const VecRef& first, const VecRef& second,
                           const VecRef& t);

/// Trained plain-embedding tables indexed by global id.
struct AsmpTables {
  Eigen::MatrixXd entity;    // rows: entity ids
  Eigen::MatrixXd relation;  // rows: relation ids
  Eigen::MatrixXd time;      // rows: timestamp ids
  IdSet trained_entities;
  IdSet trained_relations;
  IdSet trained_timestamps;
};

/// Embeds every component of the split: trained components read their rows, unseen
/// entities/relations average per-fact closed-form inferences over support facts whose
/// other components are trained, and the rest fall back to the table mean.
EmbeddingSet asmp_embed_unseen(const TaskSample& split, const AsmpTables& tables, ScoreKind kind);

}  // namespace tkgx
