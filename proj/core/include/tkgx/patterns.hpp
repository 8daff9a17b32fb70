#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tkgx/tkg.hpp"

namespace tkgx {

/// Labels of pattern-graph edges. Position kinds name how a shared entity sits in the two
/// relations; time kinds name the order of the two facts.
enum class MetaEdgeType : std::uint8_t {
  kSS = 0,
  kSO = 1,
  kOS = 2,
  kOO = 3,
  kForward = 4,
  kBackward = 5,
  kMeantime = 6,
};

inline constexpr int kNumPositionTypes = 4;
inline constexpr int kNumTimeTypes = 3;

const char* to_string(MetaEdgeType t);
MetaEdgeType meta_edge_type_from_string(const std::string& s);
bool is_position_type(MetaEdgeType t);

/// Row of the position (0..3) or time (0..2) meta-embedding table.
int meta_type_index(MetaEdgeType t);

enum class Role : std::uint8_t { kSubject, kObject };

/// Edge type for a shared entity that plays `first` in r1 and `second` in r2.
/// (object, subject) is s_o; the other three follow by analogy.
MetaEdgeType position_type(Role first, Role second);

struct PatternEdge {
  RelationId src;
  MetaEdgeType type;
  RelationId dst;
  friend auto operator<=>(const PatternEdge&, const PatternEdge&) = default;
};

struct InPatternEdge {
  RelationId src;
  MetaEdgeType type;
  friend auto operator<=>(const InPatternEdge&, const InPatternEdge&) = default;
};

/// Labeled multigraph over relations. Immutable once built.
class PatternGraph {
 public:
  PatternGraph() = default;
  PatternGraph(std::vector<RelationId> nodes, std::vector<PatternEdge> edges);

  const std::vector<RelationId>& nodes() const { return nodes_; }
  bool has_node(RelationId r) const;
  /// Sorted and deduplicated on (src, type, dst).
  const std::vector<PatternEdge>& edges() const { return edges_; }
  std::span<const InPatternEdge> in_edges(RelationId r) const;

  /// Number of edges of each type, indexed by MetaEdgeType value.
  std::array<std::size_t, 7> type_counts() const;

 private:
  std::vector<RelationId> nodes_;
  std::vector<PatternEdge> edges_;
  std::map<RelationId, std::vector<InPatternEdge>> in_edges_;
};

/// Relative-position graph: one edge per ordered pair of distinct facts that share an
/// entity, typed by the entity's roles. Timestamps are ignored.
PatternGraph build_rppg(std::span<const Quadruple> quads);
PatternGraph build_rppg(const Tkg& tkg);

/// Temporal-sequence graph over pairs of distinct facts sharing an entity: earlier -> later
/// is forward (with the reverse backward edge), equal timestamps give meantime both ways.
PatternGraph build_tspg(std::span<const Quadruple> quads);
PatternGraph build_tspg(const Tkg& tkg);

/// Tab-separated "src\ttype\tdst" lines; relation ids, or labels when `relations` is given.
void write_pattern_edges(std::ostream& os, const PatternGraph& g, const Vocabulary* relations = nullptr);

/// Learned embeddings of the meta edge types. Rows follow meta_type_index.
struct MetaTypeEmbeddings {
  Eigen::MatrixXd position;  // 4 x d_pos
  Eigen::MatrixXd time;      // 3 x d_time
};

/// Per-type mixing weights of r's deduplicated in-edges: w[m] = |{in-edges of type m}| / |N(r)|.
/// All zero when r has no in-edges. Position graphs give 4 weights, time graphs 3.
std::vector<double> in_edge_type_weights(const PatternGraph& g, RelationId r);

/// Mean of the type embeddings over r's in-edges in a position graph; zero vector if none.
Eigen::VectorXd relation_position_feature(const PatternGraph& g, RelationId r, const MetaTypeEmbeddings& emb);

/// Mean of the type embeddings over r's in-edges in a time graph; zero vector if none.
Eigen::VectorXd relation_time_feature(const PatternGraph& g, RelationId r, const MetaTypeEmbeddings& emb);

/// [g_r; q_r]
Eigen::VectorXd relation_feature(const Eigen::VectorXd& position_part, const Eigen::VectorXd& time_part);

}  // namespace tkgx
