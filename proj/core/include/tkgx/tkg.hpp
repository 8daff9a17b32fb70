#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace tkgx {

using EntityId = std::int32_t;
using RelationId = std::int32_t;
using TimeId = std::int32_t;

/// One timestamped fact (s, r, o, t) in integer-id space.
struct Quadruple {
  EntityId s = 0;
  RelationId r = 0;
  EntityId o = 0;
  TimeId t = 0;

  friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

struct QuadrupleHash {
  std::size_t operator()(const Quadruple& q) const noexcept;
};

/// Raised for malformed input records, inconsistent ids and violated task invariants.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bidirectional label <-> dense id map.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> labels);

  /// Returns the id of `label`, inserting it with the next dense id if absent.
  std::int32_t intern(const std::string& label);
  std::int32_t id(const std::string& label) const;  // throws DataError
  bool contains(const std::string& label) const { return index_.count(label) != 0; }
  const std::string& label(std::int32_t id) const { return labels_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// A line of a quadruple file before id assignment.
struct RawQuadruple {
  std::string s, r, o, t;
  std::size_t line = 0;  // 1-based source line, 0 when synthesized
};

enum class RecordFormat { kLabels, kIds };

struct OutEdge {
  RelationId r;
  EntityId o;
  TimeId t;
  friend auto operator<=>(const OutEdge&, const OutEdge&) = default;
};

struct InEdge {
  EntityId s;
  RelationId r;
  TimeId t;
  friend auto operator<=>(const InEdge&, const InEdge&) = default;
};

/// Indexed, immutable quadruple store. Timestamp ids are in chronological order.
class Tkg {
 public:
  Tkg() = default;

  /// Builds from id-space quadruples against existing vocabularies. Duplicates collapse.
  Tkg(Vocabulary entities, Vocabulary relations, Vocabulary timestamps, std::vector<Quadruple> quads);

  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }
  const Vocabulary& timestamps() const { return timestamps_; }

  /// Sorted, duplicate-free.
  const std::vector<Quadruple>& quads() const { return quads_; }
  std::size_t size() const { return quads_.size(); }
  bool empty() const { return quads_.empty(); }
  bool contains(const Quadruple& q) const;

  std::span<const OutEdge> out_edges(EntityId e) const;
  std::span<const InEdge> in_edges(EntityId e) const;

  /// Entities / relations / timestamps that occur in at least one quadruple.
  std::vector<EntityId> active_entities() const;
  std::vector<RelationId> active_relations() const;
  std::vector<TimeId> active_timestamps() const;

 private:
  Vocabulary entities_, relations_, timestamps_;
  std::vector<Quadruple> quads_;
  std::vector<std::vector<OutEdge>> out_index_;
  std::vector<std::vector<InEdge>> in_index_;
};

/// Builds a Tkg from raw records. Label mode assigns dense ids in first-seen order of
/// the sorted records, timestamp ids in chronological order. Id mode takes the integer
/// fields as ids directly.
Tkg build_tkg(std::span<const RawQuadruple> records, RecordFormat format = RecordFormat::kLabels);

/// Chronological sort key for a timestamp label: ISO dates map to day numbers,
/// integer labels to their value. Returns nullopt-like failure via DataError.
std::int64_t timestamp_key(const std::string& label);
bool is_iso_date(const std::string& label);

using IdSet = std::set<std::int32_t>;

/// One meta-learning episode: seen/unseen partitions plus support and query facts.
struct TaskSample {
  IdSet seen_entities, unseen_entities;
  IdSet seen_relations, unseen_relations;
  IdSet seen_timestamps, unseen_timestamps;
  std::vector<Quadruple> support;
  std::vector<Quadruple> query;

  bool entity_unseen(EntityId e) const { return unseen_entities.count(e) != 0; }
  bool relation_unseen(RelationId r) const { return unseen_relations.count(r) != 0; }

  /// All entities of support and query.
  IdSet entities() const;
};

/// Throws DataError naming the first violated TaskSample invariant.
void validate_task(const TaskSample& task);

enum class QueryCategory { kUnseenEntity, kUnseenRelation, kUnseenBoth };

const char* to_string(QueryCategory c);

/// u_ent / u_rel / u_both by which components of q are unseen in the task.
QueryCategory categorize_query(const Quadruple& q, const TaskSample& task);

}  // namespace tkgx
