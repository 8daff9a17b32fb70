#include "tkgx/tkg.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <map>

namespace tkgx {

std::size_t QuadrupleHash::operator()(const Quadruple& q) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::int32_t v : {q.s, q.r, q.o, q.t}) {
    h ^= static_cast<std::uint32_t>(v);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

Vocabulary::Vocabulary(std::vector<std::string> labels) {
  for (auto& l : labels) {
    if (index_.count(l)) throw DataError("duplicate vocabulary label '" + l + "'");
    index_.emplace(l, static_cast<std::int32_t>(labels_.size()));
    labels_.push_back(std::move(l));
  }
}

std::int32_t Vocabulary::intern(const std::string& label) {
  auto [it, inserted] = index_.emplace(label, static_cast<std::int32_t>(labels_.size()));
  if (inserted) labels_.push_back(label);
  return it->second;
}

std::int32_t Vocabulary::id(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw DataError("unknown label '" + label + "'");
  return it->second;
}

namespace {

bool parse_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void check_id(std::int32_t id, std::size_t n, const char* what) {
  if (id < 0 || static_cast<std::size_t>(id) >= n)
    throw DataError(std::string(what) + " id " + std::to_string(id) + " outside vocabulary of size " +
                    std::to_string(n));
}

}  // namespace

bool is_iso_date(const std::string& label) {
  if (label.size() != 10 || label[4] != '-' || label[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (label[i] < '0' || label[i] > '9') return false;
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(label.substr(0, 4))}, month{static_cast<unsigned>(std::stoi(label.substr(5, 2)))},
                           day{static_cast<unsigned>(std::stoi(label.substr(8, 2)))}};
  return ymd.ok();
}

std::int64_t timestamp_key(const std::string& label) {
  std::int64_t v = 0;
  if (parse_int(label, v)) return v;
  if (is_iso_date(label)) {
    using namespace std::chrono;
    const year_month_day ymd{year{std::stoi(label.substr(0, 4))},
                             month{static_cast<unsigned>(std::stoi(label.substr(5, 2)))},
                             day{static_cast<unsigned>(std::stoi(label.substr(8, 2)))}};
    return sys_days{ymd}.time_since_epoch().count();
  }
  throw DataError("unparsable timestamp '" + label + "'");
}

Tkg::Tkg(Vocabulary entities, Vocabulary relations, Vocabulary timestamps, std::vector<Quadruple> quads)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      timestamps_(std::move(timestamps)),
      quads_(std::move(quads)) {
  for (const auto& q : quads_) {
    check_id(q.s, entities_.size(), "entity");
    check_id(q.o, entities_.size(), "entity");
    check_id(q.r, relations_.size(), "relation");
    check_id(q.t, timestamps_.size(), "timestamp");
  }
  std::sort(quads_.begin(), quads_.end());
  quads_.erase(std::unique(quads_.begin(), quads_.end()), quads_.end());
  out_index_.assign(entities_.size(), {});
  in_index_.assign(entities_.size(), {});
  for (const auto& q : quads_) {
    out_index_[q.s].push_back({q.r, q.o, q.t});
    in_index_[q.o].push_back({q.s, q.r, q.t});
  }
}

bool Tkg::contains(const Quadruple& q) const { return std::binary_search(quads_.begin(), quads_.end(), q); }

std::span<const OutEdge> Tkg::out_edges(EntityId e) const {
  if (e < 0 || static_cast<std::size_t>(e) >= out_index_.size()) return {};
  return out_index_[e];
}

std::span<const InEdge> Tkg::in_edges(EntityId e) const {
  if (e < 0 || static_cast<std::size_t>(e) >= in_index_.size()) return {};
  return in_index_[e];
}

std::vector<EntityId> Tkg::active_entities() const {
  IdSet ids;
  for (const auto& q : quads_) ids.insert({q.s, q.o});
  return {ids.begin(), ids.end()};
}

std::vector<RelationId> Tkg::active_relations() const {
  IdSet ids;
  for (const auto& q : quads_) ids.insert(q.r);
  return {ids.begin(), ids.end()};
}

std::vector<TimeId> Tkg::active_timestamps() const {
  IdSet ids;
  for (const auto& q : quads_) ids.insert(q.t);
  return {ids.begin(), ids.end()};
}

namespace {

std::string describe(const RawQuadruple& rec) {
  std::string where = rec.line ? "line " + std::to_string(rec.line) : std::string("record");
  return where + " (" + rec.s + ", " + rec.r + ", " + rec.o + ", " + rec.t + ")";
}

Tkg build_from_ids(std::span<const RawQuadruple> records) {
  std::vector<Quadruple> quads;
  quads.reserve(records.size());
  std::int64_t max_e = -1, max_r = -1, max_t = -1;
  for (const auto& rec : records) {
    std::int64_t f[4];
    const std::string* fields[4] = {&rec.s, &rec.r, &rec.o, &rec.t};
    for (int i = 0; i < 4; ++i) {
      if (!parse_int(*fields[i], f[i]) || f[i] < 0 || f[i] > INT32_MAX)
        throw DataError("non-id field '" + *fields[i] + "' in id-format " + describe(rec));
    }
    max_e = std::max({max_e, f[0], f[2]});
    max_r = std::max(max_r, f[1]);
    max_t = std::max(max_t, f[3]);
    quads.push_back({static_cast<EntityId>(f[0]), static_cast<RelationId>(f[1]), static_cast<EntityId>(f[2]),
                     static_cast<TimeId>(f[3])});
  }
  auto numbered = [](std::int64_t n) {
    std::vector<std::string> labels;
    for (std::int64_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return Vocabulary(std::move(labels));
  };
  return Tkg(numbered(max_e + 1), numbered(max_r + 1), numbered(max_t + 1), std::move(quads));
}

}  // namespace

Tkg build_tkg(std::span<const RawQuadruple> records, RecordFormat format) {
  if (format == RecordFormat::kIds) return build_from_ids(records);

  std::vector<const RawQuadruple*> sorted;
  sorted.reserve(records.size());
  for (const auto& rec : records) sorted.push_back(&rec);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RawQuadruple* a, const RawQuadruple* b) {
    return std::tie(a->s, a->r, a->o, a->t) < std::tie(b->s, b->r, b->o, b->t);
  });

  // Timestamps must be uniformly ISO dates or uniformly integers.
  int date_kind = 0;  // 0 unknown, 1 iso, 2 integer
  std::map<std::int64_t, std::string> chrono;
  for (const auto& rec : records) {
    std::int64_t v = 0;
    int kind = 0;
    if (parse_int(rec.t, v)) {
      kind = 2;
    } else if (is_iso_date(rec.t)) {
      kind = 1;
      v = timestamp_key(rec.t);
    } else {
      throw DataError("unparsable timestamp in " + describe(rec));
    }
    if (date_kind != 0 && kind != date_kind)
      throw DataError("mixed ISO-date and integer timestamps at " + describe(rec));
    date_kind = kind;
    auto [it, inserted] = chrono.emplace(v, rec.t);
    if (!inserted && it->second != rec.t)
      throw DataError("timestamp label '" + rec.t + "' collides with '" + it->second + "' at " + describe(rec));
  }

  Vocabulary entities, relations, timestamps;
  for (const auto& [key, label] : chrono) timestamps.intern(label);
  std::vector<Quadruple> quads;
  quads.reserve(records.size());
  for (const RawQuadruple* rec : sorted) {
    const EntityId s = entities.intern(rec->s);
    const RelationId r = relations.intern(rec->r);
    const EntityId o = entities.intern(rec->o);
    quads.push_back({s, r, o, timestamps.id(rec->t)});
  }
  return Tkg(std::move(entities), std::move(relations), std::move(timestamps), std::move(quads));
}

IdSet TaskSample::entities() const {
  IdSet out;
  for (const auto* part : {&support, &query})
    for (const auto& q : *part) out.insert({q.s, q.o});
  return out;
}

void validate_task(const TaskSample& task) {
  auto disjoint = [](const IdSet& a, const IdSet& b, const char* what) {
    for (auto id : a)
      if (b.count(id)) throw DataError(std::string(what) + " id " + std::to_string(id) + " is both seen and unseen");
  };
  disjoint(task.seen_entities, task.unseen_entities, "entity");
  disjoint(task.seen_relations, task.unseen_relations, "relation");
  disjoint(task.seen_timestamps, task.unseen_timestamps, "timestamp");

  auto known = [](const IdSet& a, const IdSet& b, std::int32_t id) { return a.count(id) || b.count(id); };
  auto check = [&](const Quadruple& q) {
    if (!known(task.seen_entities, task.unseen_entities, q.s) || !known(task.seen_entities, task.unseen_entities, q.o))
      throw DataError("quadruple references an entity outside the task partition");
    if (!known(task.seen_relations, task.unseen_relations, q.r))
      throw DataError("quadruple references a relation outside the task partition");
    if (!known(task.seen_timestamps, task.unseen_timestamps, q.t))
      throw DataError("quadruple references a timestamp outside the task partition");
  };
  for (const auto& q : task.support) check(q);
  for (const auto& q : task.query) {
    check(q);
    if (!task.entity_unseen(q.s) && !task.entity_unseen(q.o) && !task.relation_unseen(q.r))
      throw DataError("query quadruple without any unseen entity or relation");
  }
}

const char* to_string(QueryCategory c) {
  switch (c) {
    case QueryCategory::kUnseenEntity: return "u_ent";
    case QueryCategory::kUnseenRelation: return "u_rel";
    case QueryCategory::kUnseenBoth: return "u_both";
  }
  return "?";
}

QueryCategory categorize_query(const Quadruple& q, const TaskSample& task) {
  const bool ent = task.entity_unseen(q.s) || task.entity_unseen(q.o);
  const bool rel = task.relation_unseen(q.r);
  if (ent && rel) return QueryCategory::kUnseenBoth;
  if (ent) return QueryCategory::kUnseenEntity;
  if (rel) return QueryCategory::kUnseenRelation;
  throw DataError("query quadruple has no unseen component");
}

}  // namespace tkgx
