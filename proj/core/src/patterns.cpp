#include "tkgx/patterns.hpp"

#include <algorithm>
#include <ostream>

namespace tkgx {

const char* to_string(MetaEdgeType t) {
  switch (t) {
    case MetaEdgeType::kSS: return "s_s";
    case MetaEdgeType::kSO: return "s_o";
    case MetaEdgeType::kOS: return "o_s";
    case MetaEdgeType::kOO: return "o_o";
    case MetaEdgeType::kForward: return "forward";
    case MetaEdgeType::kBackward: return "backward";
    case MetaEdgeType::kMeantime: return "meantime";
  }
  return "?";
}

MetaEdgeType meta_edge_type_from_string(const std::string& s) {
  for (int i = 0; i < 7; ++i) {
    const auto t = static_cast<MetaEdgeType>(i);
    if (s == to_string(t)) return t;
  }
  throw DataError("unknown meta edge type '" + s + "'");
}

bool is_position_type(MetaEdgeType t) { return static_cast<int>(t) < kNumPositionTypes; }

int meta_type_index(MetaEdgeType t) {
  const int v = static_cast<int>(t);
  return v < kNumPositionTypes ? v : v - kNumPositionTypes;
}

MetaEdgeType position_type(Role first, Role second) {
  if (first == Role::kObject && second == Role::kSubject) return MetaEdgeType::kSO;
  if (first == Role::kSubject && second == Role::kObject) return MetaEdgeType::kOS;
  if (first == Role::kSubject) return MetaEdgeType::kSS;
  return MetaEdgeType::kOO;
}

PatternGraph::PatternGraph(std::vector<RelationId> nodes, std::vector<PatternEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (RelationId r : nodes_) in_edges_[r];
  for (const auto& e : edges_) in_edges_[e.dst].push_back({e.src, e.type});
  for (auto& [r, list] : in_edges_) std::sort(list.begin(), list.end());
}

bool PatternGraph::has_node(RelationId r) const { return std::binary_search(nodes_.begin(), nodes_.end(), r); }

std::span<const InPatternEdge> PatternGraph::in_edges(RelationId r) const {
  auto it = in_edges_.find(r);
  if (it == in_edges_.end()) return {};
  return it->second;
}

std::array<std::size_t, 7> PatternGraph::type_counts() const {
  std::array<std::size_t, 7> counts{};
  for (const auto& e : edges_) ++counts[static_cast<int>(e.type)];
  return counts;
}

namespace {

// Distinct facts incident to each entity.
std::map<EntityId, std::vector<const Quadruple*>> incident_facts(std::span<const Quadruple> quads) {
  std::map<EntityId, std::vector<const Quadruple*>> out;
  for (const auto& q : quads) {
    out[q.s].push_back(&q);
    if (q.o != q.s) out[q.o].push_back(&q);
  }
  return out;
}

std::vector<RelationId> relation_nodes(std::span<const Quadruple> quads) {
  std::vector<RelationId> nodes;
  for (const auto& q : quads) nodes.push_back(q.r);
  return nodes;
}

std::vector<Quadruple> dedup(std::span<const Quadruple> quads) {
  std::vector<Quadruple> v(quads.begin(), quads.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

PatternGraph build_rppg(std::span<const Quadruple> input) {
  const auto quads = dedup(input);
  std::vector<PatternEdge> edges;
  for (const auto& [e, facts] : incident_facts(quads)) {
    // (relation, role) -> number of facts; relation -> facts with e in both roles.
    std::map<std::pair<RelationId, Role>, std::size_t> count;
    std::map<RelationId, std::size_t> self_loops;
    for (const Quadruple* q : facts) {
      if (q->s == e) ++count[{q->r, Role::kSubject}];
      if (q->o == e) ++count[{q->r, Role::kObject}];
      if (q->s == e && q->o == e) ++self_loops[q->r];
    }
    for (const auto& [k1, c1] : count) {
      for (const auto& [k2, c2] : count) {
        bool exists;
        if (k1 == k2) {
          exists = c1 >= 2;
        } else if (k1.first == k2.first) {
          auto it = self_loops.find(k1.first);
          const std::size_t same_fact_pairs = it == self_loops.end() ? 0 : it->second;
          exists = c1 * c2 > same_fact_pairs;
        } else {
          exists = true;
        }
        if (exists) edges.push_back({k1.first, position_type(k1.second, k2.second), k2.first});
      }
    }
  }
  return PatternGraph(relation_nodes(quads), std::move(edges));
}

PatternGraph build_rppg(const Tkg& tkg) { return build_rppg(std::span<const Quadruple>(tkg.quads())); }

PatternGraph build_tspg(std::span<const Quadruple> input) {
  const auto quads = dedup(input);
  std::vector<PatternEdge> edges;
  for (const auto& [e, facts] : incident_facts(quads)) {
    std::map<RelationId, std::pair<TimeId, TimeId>> span;  // min, max timestamp
    std::map<std::pair<TimeId, RelationId>, std::size_t> at_time;
    for (const Quadruple* q : facts) {
      auto [it, inserted] = span.emplace(q->r, std::make_pair(q->t, q->t));
      if (!inserted) {
        it->second.first = std::min(it->second.first, q->t);
        it->second.second = std::max(it->second.second, q->t);
      }
      ++at_time[{q->t, q->r}];
    }
    for (const auto& [r1, s1] : span) {
      for (const auto& [r2, s2] : span) {
        if (s1.first < s2.second) {
          edges.push_back({r1, MetaEdgeType::kForward, r2});
          edges.push_back({r2, MetaEdgeType::kBackward, r1});
        }
      }
    }
    for (auto it = at_time.begin(); it != at_time.end();) {
      auto end = it;
      while (end != at_time.end() && end->first.first == it->first.first) ++end;
      for (auto a = it; a != end; ++a) {
        for (auto b = it; b != end; ++b) {
          if (a == b ? a->second >= 2 : true)
            edges.push_back({a->first.second, MetaEdgeType::kMeantime, b->first.second});
        }
      }
      it = end;
    }
  }
  return PatternGraph(relation_nodes(quads), std::move(edges));
}

PatternGraph build_tspg(const Tkg& tkg) { return build_tspg(std::span<const Quadruple>(tkg.quads())); }

void write_pattern_edges(std::ostream& os, const PatternGraph& g, const Vocabulary* relations) {
  auto name = [&](RelationId r) { return relations ? relations->label(r) : std::to_string(r); };
  for (const auto& e : g.edges()) os << name(e.src) << '\t' << to_string(e.type) << '\t' << name(e.dst) << '\n';
}

std::vector<double> in_edge_type_weights(const PatternGraph& g, RelationId r) {
  const auto in = g.in_edges(r);
  bool position = true;
  if (!in.empty()) position = is_position_type(in.front().type);
  std::vector<double> w(position ? kNumPositionTypes : kNumTimeTypes, 0.0);
  if (in.empty()) return w;
  for (const auto& e : in) w[meta_type_index(e.type)] += 1.0;
  for (double& x : w) x /= static_cast<double>(in.size());
  return w;
}

namespace {

Eigen::VectorXd mix_rows(const std::vector<double>& weights, const Eigen::MatrixXd& table) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(table.cols());
  for (std::size_t m = 0; m < weights.size() && m < static_cast<std::size_t>(table.rows()); ++m)
    if (weights[m] != 0.0) out += weights[m] * table.row(static_cast<Eigen::Index>(m)).transpose();
  return out;
}

}  // namespace

Eigen::VectorXd relation_position_feature(const PatternGraph& g, RelationId r, const MetaTypeEmbeddings& emb) {
  return mix_rows(in_edge_type_weights(g, r), emb.position);
}

Eigen::VectorXd relation_time_feature(const PatternGraph& g, RelationId r, const MetaTypeEmbeddings& emb) {
  return mix_rows(in_edge_type_weights(g, r), emb.time);
}

Eigen::VectorXd relation_feature(const Eigen::VectorXd& position_part, const Eigen::VectorXd& time_part) {
  Eigen::VectorXd out(position_part.size() + time_part.size());
  out << position_part, time_part;
  return out;
}

}  // namespace tkgx
