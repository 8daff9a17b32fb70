#include "tkgx/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tkgx {

std::vector<RawQuadruple> parse_quadruple_file(std::istream& in) {
  std::vector<RawQuadruple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4)
      throw DataError("line " + std::to_string(lineno) + ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    try {
      (void)timestamp_key(fields[3]);
    } catch (const DataError&) {
      throw DataError("line " + std::to_string(lineno) + ": unparsable timestamp '" + fields[3] + "'");
    }
    out.push_back({fields[0], fields[1], fields[2], fields[3], lineno});
  }
  return out;
}

std::vector<RawQuadruple> parse_quadruple_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_quadruple_file(in);
}

void SamplerConfig::validate() const {
  if (l1 <= 0 || l2 <= 0) throw std::invalid_argument("walk lengths must be positive");
  if (seed_entity_count <= 0) throw std::invalid_argument("seed_entity_count must be positive");
  if (!(0.0 <= mask_min && mask_min <= mask_max && mask_max <= 1.0))
    throw std::invalid_argument("mask ratio range must lie within [0, 1]");
  if (task_count <= 0) throw std::invalid_argument("task_count must be positive");
  if (!(support_fraction > 0.0 && support_fraction < 1.0))
    throw std::invalid_argument("support_fraction must lie in (0, 1)");
}

nlohmann::json DatasetStats::to_json() const {
  auto split = [](const SplitStats& s) {
    return nlohmann::json{{"entities", s.entities},       {"unseen_entities", s.unseen_entities},
                          {"relations", s.relations},     {"unseen_relations", s.unseen_relations},
                          {"timestamps", s.timestamps},   {"unseen_timestamps", s.unseen_timestamps},
                          {"support", s.support},         {"query", s.query},
                          {"dropped", s.dropped}};
  };
  return {{"train",
           {{"entities", train_entities},
            {"relations", train_relations},
            {"timestamps", train_timestamps},
            {"quads", train_quads}}},
          {"test", split(test)},
          {"valid", split(valid)}};
}

TaskSample make_split(const Tkg& train, std::vector<Quadruple> support, std::vector<Quadruple> query) {
  IdSet te, tr, tt;
  for (const auto& q : train.quads()) {
    te.insert({q.s, q.o});
    tr.insert(q.r);
    tt.insert(q.t);
  }
  TaskSample split;
  split.support = std::move(support);
  split.query = std::move(query);
  for (const auto* part : {&split.support, &split.query}) {
    for (const auto& q : *part) {
      for (EntityId e : {q.s, q.o}) (te.count(e) ? split.seen_entities : split.unseen_entities).insert(e);
      (tr.count(q.r) ? split.seen_relations : split.unseen_relations).insert(q.r);
      (tt.count(q.t) ? split.seen_timestamps : split.unseen_timestamps).insert(q.t);
    }
  }
  return split;
}

SplitStats split_stats(const TaskSample& split, std::size_t dropped) {
  SplitStats s;
  s.entities = split.seen_entities.size() + split.unseen_entities.size();
  s.unseen_entities = split.unseen_entities.size();
  s.relations = split.seen_relations.size() + split.unseen_relations.size();
  s.unseen_relations = split.unseen_relations.size();
  s.timestamps = split.seen_timestamps.size() + split.unseen_timestamps.size();
  s.unseen_timestamps = split.unseen_timestamps.size();
  s.support = split.support.size();
  s.query = split.query.size();
  s.dropped = dropped;
  return s;
}

std::pair<std::vector<Quadruple>, std::vector<Quadruple>> split_support_query(
    std::vector<Quadruple> facts, const IdSet& unseen_entities, const IdSet& unseen_relations,
    double support_fraction, std::mt19937_64& rng) {
  std::sort(facts.begin(), facts.end());
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());

  auto has_unseen = [&](const Quadruple& q) {
    return unseen_entities.count(q.s) || unseen_entities.count(q.o) || unseen_relations.count(q.r);
  };
  std::vector<Quadruple> candidates;
  std::vector<Quadruple> support;
  for (const auto& q : facts) (has_unseen(q) ? candidates : support).push_back(q);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  // Support facts incident to each unseen entity / carrying each unseen relation.
  std::map<EntityId, std::size_t> ent_count;
  std::map<RelationId, std::size_t> rel_count;
  for (const auto& q : candidates) {
    for (EntityId e : {q.s, q.o})
      if (unseen_entities.count(e) && (e == q.s || q.s != q.o)) ++ent_count[e];
    if (unseen_relations.count(q.r)) ++rel_count[q.r];
  }

  const auto target = static_cast<std::size_t>(
      std::max(1.0, std::round((1.0 - support_fraction) * static_cast<double>(facts.size()))));
  std::vector<char> in_query(candidates.size(), 0);
  std::size_t n_query = 0;
  for (std::size_t i = 0; i < candidates.size() && n_query < target; ++i) {
    const auto& q = candidates[i];
    bool keeps_anchor = true;
    if (unseen_entities.count(q.s) && ent_count[q.s] < 2) keeps_anchor = false;
    if (q.o != q.s && unseen_entities.count(q.o) && ent_count[q.o] < 2) keeps_anchor = false;
    if (unseen_relations.count(q.r) && rel_count[q.r] < 2) keeps_anchor = false;
    if (!keeps_anchor) continue;
    in_query[i] = 1;
    ++n_query;
    if (unseen_entities.count(q.s)) --ent_count[q.s];
    if (q.o != q.s && unseen_entities.count(q.o)) --ent_count[q.o];
    if (unseen_relations.count(q.r)) --rel_count[q.r];
  }
  if (n_query == 0 && !candidates.empty()) in_query[0] = 1;

  std::vector<Quadruple> query;
  for (std::size_t i = 0; i < candidates.size(); ++i) (in_query[i] ? query : support).push_back(candidates[i]);
  std::sort(support.begin(), support.end());
  std::sort(query.begin(), query.end());
  return {std::move(support), std::move(query)};
}

namespace {

// One uniform step along an incident fact, ignoring direction.
EntityId walk_step(const Tkg& g, EntityId e, std::mt19937_64& rng) {
  const auto out = g.out_edges(e);
  const auto in = g.in_edges(e);
  const std::size_t deg = out.size() + in.size();
  if (deg == 0) return e;
  std::uniform_int_distribution<std::size_t> pick(0, deg - 1);
  const std::size_t k = pick(rng);
  return k < out.size() ? out[k].o : in[k - out.size()].s;
}

IdSet walk_expand(const Tkg& g, std::span<const EntityId> seeds, int length, std::mt19937_64& rng) {
  IdSet visited;
  for (EntityId seed : seeds) {
    EntityId cur = seed;
    visited.insert(cur);
    for (int i = 0; i < length; ++i) {
      cur = walk_step(g, cur, rng);
      visited.insert(cur);
    }
  }
  return visited;
}

std::vector<Quadruple> facts_among(const Tkg& g, const IdSet& entities) {
  std::vector<Quadruple> out;
  for (EntityId e : entities)
    for (const auto& edge : g.out_edges(e))
      if (entities.count(edge.o)) out.push_back({e, edge.r, edge.o, edge.t});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EntityId> choose(std::vector<std::int32_t> pool, std::size_t k, std::mt19937_64& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

double draw_ratio(const SamplerConfig& cfg, std::mt19937_64& rng) {
  if (cfg.mask_min == cfg.mask_max) return cfg.mask_min;
  return std::uniform_real_distribution<double>(cfg.mask_min, cfg.mask_max)(rng);
}

// Rounded count, nudged into the range when rounding alone would leave it.
std::size_t ratio_count(double ratio, std::size_t n, const SamplerConfig& cfg) {
  const double dn = static_cast<double>(n);
  auto k = static_cast<double>(std::llround(ratio * dn));
  const double lo = std::ceil(cfg.mask_min * dn - 1e-9), hi = std::floor(cfg.mask_max * dn + 1e-9);
  if (lo <= hi) k = std::clamp(k, lo, hi);
  return static_cast<std::size_t>(k);
}

bool fraction_in_range(std::size_t part, std::size_t whole, const SamplerConfig& cfg) {
  if (whole == 0) return true;
  const double f = static_cast<double>(part) / static_cast<double>(whole);
  return f >= cfg.mask_min - 1e-12 && f <= cfg.mask_max + 1e-12;
}

Tkg with_quads(const Tkg& like, std::vector<Quadruple> quads) {
  return Tkg(like.entities(), like.relations(), like.timestamps(), std::move(quads));
}

struct ExtractedSplit {
  std::vector<Quadruple> facts;
  Tkg remainder;
  IdSet masked_entities, masked_relations;
};

// Walk-extracts a split from `g`, removes it, then removes a random share of the
// split's entities and relations from what is left so the split has unseen parts.
ExtractedSplit extract_split(const Tkg& g, const SamplerConfig& cfg, std::mt19937_64& rng) {
  auto active = g.active_entities();
  if (active.empty())
    throw DataError("no facts left to extract a split from; use a smaller l1 or fewer seed entities");
  const auto seeds = choose(active, static_cast<std::size_t>(cfg.seed_entity_count), rng);
  const IdSet expanded = walk_expand(g, seeds, cfg.l1, rng);
  ExtractedSplit out;
  out.facts = facts_among(g, expanded);

  IdSet split_entities, split_relations;
  for (const auto& q : out.facts) {
    split_entities.insert({q.s, q.o});
    split_relations.insert(q.r);
  }
  const auto masked_e = choose({split_entities.begin(), split_entities.end()},
                               ratio_count(draw_ratio(cfg, rng), split_entities.size(), cfg), rng);
  const auto masked_r = choose({split_relations.begin(), split_relations.end()},
                               ratio_count(draw_ratio(cfg, rng), split_relations.size(), cfg), rng);
  const IdSet me(masked_e.begin(), masked_e.end()), mr(masked_r.begin(), masked_r.end());

  std::vector<Quadruple> rest;
  for (const auto& q : g.quads()) {
    if (std::binary_search(out.facts.begin(), out.facts.end(), q)) continue;
    if (me.count(q.s) || me.count(q.o) || mr.count(q.r)) continue;
    rest.push_back(q);
  }
  out.remainder = with_quads(g, std::move(rest));
  out.masked_entities = me;
  out.masked_relations = mr;
  return out;
}

// Endpoints of one remaining fact per unmasked split entity and relation. Walking from
// them guarantees the training graph holds every split component that was not masked.
std::vector<EntityId> coverage_seeds(const Tkg& rest, const ExtractedSplit& split) {
  IdSet want_e, want_r;
  for (const auto& q : split.facts) {
    for (EntityId e : {q.s, q.o})
      if (!split.masked_entities.count(e)) want_e.insert(e);
    if (!split.masked_relations.count(q.r)) want_r.insert(q.r);
  }
  IdSet seeds;
  for (const auto& q : rest.quads()) {
    const bool hit = want_e.erase(q.s) + want_e.erase(q.o) + want_r.erase(q.r) > 0;
    if (hit) seeds.insert({q.s, q.o});
  }
  return {seeds.begin(), seeds.end()};
}

}  // namespace

std::pair<std::vector<Quadruple>, std::size_t> drop_unanchored_pieces(std::vector<Quadruple> facts, const IdSet& trained) {
  std::map<EntityId, EntityId> parent;
  std::function<EntityId(EntityId)> find = [&](EntityId x) {
    auto it = parent.find(x);
    if (it == parent.end()) return parent[x] = x;
    if (it->second == x) return x;
    return it->second = find(it->second);
  };
  for (const auto& q : facts) parent[find(q.s)] = find(q.o);
  std::set<EntityId> anchored_roots;
  for (const auto& [e, p] : parent)
    if (trained.count(e)) anchored_roots.insert(find(e));
  std::vector<Quadruple> kept;
  std::size_t dropped = 0;
  for (const auto& q : facts) {
    if (anchored_roots.count(find(q.s))) kept.push_back(q);
    else ++dropped;
  }
  return {std::move(kept), dropped};
}

namespace {

std::optional<DatasetBundle> attempt_dataset(const Tkg& source, const SamplerConfig& cfg, std::mt19937_64& rng) {
  auto test = extract_split(source, cfg, rng);
  auto valid = extract_split(test.remainder, cfg, rng);
  const Tkg& rest = valid.remainder;

  const auto active = rest.active_entities();
  if (active.empty())
    throw DataError("remainder too small to sample a training graph; use a smaller l1 or fewer seed entities");
  auto seeds = choose(active, static_cast<std::size_t>(cfg.seed_entity_count), rng);
  for (const auto* split : {&test, &valid}) {
    const auto extra = coverage_seeds(rest, *split);
    seeds.insert(seeds.end(), extra.begin(), extra.end());
  }
  const auto train_facts = facts_among(rest, walk_expand(rest, seeds, cfg.l2, rng));
  if (train_facts.empty())
    throw DataError("remainder too small to sample a training graph; use a smaller l1 or fewer seed entities");

  // Global vocabularies: trained components first, then new entities in random order.
  IdSet train_e, train_r, used_t;
  for (const auto& q : train_facts) {
    train_e.insert({q.s, q.o});
    train_r.insert(q.r);
  }
  IdSet other_e, other_r;
  for (const std::vector<Quadruple>* facts :
       std::initializer_list<const std::vector<Quadruple>*>{&train_facts, &test.facts, &valid.facts}) {
    for (const auto& q : *facts) {
      for (EntityId e : {q.s, q.o})
        if (!train_e.count(e)) other_e.insert(e);
      if (!train_r.count(q.r)) other_r.insert(q.r);
      used_t.insert(q.t);
    }
  }
  std::vector<EntityId> new_entities(other_e.begin(), other_e.end());
  std::shuffle(new_entities.begin(), new_entities.end(), rng);

  std::map<EntityId, EntityId> emap;
  std::map<RelationId, RelationId> rmap;
  std::map<TimeId, TimeId> tmap;
  Vocabulary ents, rels, times;
  for (EntityId e : train_e) emap[e] = ents.intern(source.entities().label(e));
  for (EntityId e : new_entities) emap[e] = ents.intern(source.entities().label(e));
  for (RelationId r : train_r) rmap[r] = rels.intern(source.relations().label(r));
  for (RelationId r : other_r) rmap[r] = rels.intern(source.relations().label(r));
  for (TimeId t : used_t) tmap[t] = times.intern(source.timestamps().label(t));

  auto remap = [&](const std::vector<Quadruple>& facts) {
    std::vector<Quadruple> out;
    out.reserve(facts.size());
    for (const auto& q : facts) out.push_back({emap.at(q.s), rmap.at(q.r), emap.at(q.o), tmap.at(q.t)});
    std::sort(out.begin(), out.end());
    return out;
  };

  DatasetBundle bundle;
  bundle.train = Tkg(ents, rels, times, remap(train_facts));
  IdSet trained_entities;
  for (EntityId e : train_e) trained_entities.insert(emap.at(e));

  auto finish = [&](const std::vector<Quadruple>& facts, TaskSample& split, SplitStats& stats) {
    auto [kept, dropped] = drop_unanchored_pieces(remap(facts), trained_entities);
    TaskSample part = make_split(bundle.train, kept, {});
    auto [sup, que] = split_support_query(std::move(kept), part.unseen_entities, part.unseen_relations,
                                          cfg.support_fraction, rng);
    split = make_split(bundle.train, std::move(sup), std::move(que));
    stats = split_stats(split, dropped);
    return !split.query.empty() && fraction_in_range(stats.unseen_entities, stats.entities, cfg) &&
           fraction_in_range(stats.unseen_relations, stats.relations, cfg);
  };
  const bool test_ok = finish(test.facts, bundle.test, bundle.stats.test);
  const bool valid_ok = finish(valid.facts, bundle.valid, bundle.stats.valid);
  if (!test_ok || !valid_ok) return std::nullopt;

  bundle.stats.train_entities = bundle.train.active_entities().size();
  bundle.stats.train_relations = bundle.train.active_relations().size();
  bundle.stats.train_timestamps = bundle.train.active_timestamps().size();
  bundle.stats.train_quads = bundle.train.size();
  return bundle;
}

}  // namespace

DatasetBundle generate_dataset(const Tkg& source, const SamplerConfig& cfg) {
  cfg.validate();
  if (source.active_entities().size() < static_cast<std::size_t>(cfg.seed_entity_count))
    throw DataError("source graph has fewer entities than seed_entity_count");
  std::mt19937_64 rng(cfg.rng_seed);
  // Dropping unanchored pieces or masking by the other split can push the realized unseen
  // share out of range; such draws are discarded.
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt)
    if (auto bundle = attempt_dataset(source, cfg, rng)) return std::move(*bundle);
  throw DataError("no split with unseen shares inside the mask range after " + std::to_string(cfg.max_retries) +
                  " retries");
}

TaskSample sample_task(const Tkg& train, const SamplerConfig& cfg, std::mt19937_64& rng) {
  const auto active = train.active_entities();
  if (active.empty()) throw DataError("cannot sample a task from an empty graph");
  std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    const EntityId seed = active[pick(rng)];
    const auto facts = facts_among(train, walk_expand(train, std::span<const EntityId>(&seed, 1), cfg.l2, rng));
    if (facts.empty()) continue;

    IdSet ents, rels, times;
    for (const auto& q : facts) {
      ents.insert({q.s, q.o});
      rels.insert(q.r);
      times.insert(q.t);
    }
    const auto ue = choose({ents.begin(), ents.end()}, ratio_count(draw_ratio(cfg, rng), ents.size(), cfg), rng);
    const auto ur = choose({rels.begin(), rels.end()}, ratio_count(draw_ratio(cfg, rng), rels.size(), cfg), rng);
    TaskSample task;
    task.unseen_entities = IdSet(ue.begin(), ue.end());
    task.unseen_relations = IdSet(ur.begin(), ur.end());
    for (EntityId e : ents)
      if (!task.unseen_entities.count(e)) task.seen_entities.insert(e);
    for (RelationId r : rels)
      if (!task.unseen_relations.count(r)) task.seen_relations.insert(r);
    task.seen_timestamps = times;

    auto [sup, que] = split_support_query(facts, task.unseen_entities, task.unseen_relations, cfg.support_fraction, rng);
    if (que.empty()) continue;
    task.support = std::move(sup);
    task.query = std::move(que);
    return task;
  }
  throw DataError("no task with an unseen component after " + std::to_string(cfg.max_retries) + " retries");
}

std::vector<TaskSample> sample_tasks(const Tkg& train, const SamplerConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<TaskSample> tasks;
  tasks.reserve(static_cast<std::size_t>(cfg.task_count));
  for (int i = 0; i < cfg.task_count; ++i) tasks.push_back(sample_task(train, cfg, rng));
  return tasks;
}

namespace {

void write_facts(const std::filesystem::path& path, const std::vector<Quadruple>& facts) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& q : facts) out << q.s << '\t' << q.r << '\t' << q.o << '\t' << q.t << '\n';
}

void write_vocab(const std::filesystem::path& path, const Vocabulary& v) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < v.size(); ++i) out << v.label(static_cast<std::int32_t>(i)) << '\t' << i << '\n';
}

Vocabulary read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::pair<long, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw DataError(path.string() + " line " + std::to_string(lineno) + ": missing id");
    rows.emplace_back(std::stol(line.substr(tab + 1)), line.substr(0, tab));
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<long>(i)) throw DataError(path.string() + ": ids are not dense from 0");
    labels.push_back(rows[i].second);
  }
  return Vocabulary(std::move(labels));
}

std::vector<Quadruple> read_facts(const std::filesystem::path& path) {
  const auto records = parse_quadruple_file(path);
  std::vector<Quadruple> out;
  for (const auto& rec : records) {
    try {
      out.push_back({std::stoi(rec.s), std::stoi(rec.r), std::stoi(rec.o), std::stoi(rec.t)});
    } catch (const std::exception&) {
      throw DataError(path.string() + " line " + std::to_string(rec.line) + ": non-integer id");
    }
  }
  return out;
}

}  // namespace

void write_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_facts(dir / "train.txt", bundle.train.quads());
  write_facts(dir / "valid_sup.txt", bundle.valid.support);
  write_facts(dir / "valid_que.txt", bundle.valid.query);
  write_facts(dir / "test_sup.txt", bundle.test.support);
  write_facts(dir / "test_que.txt", bundle.test.query);
  write_vocab(dir / "entity2id.txt", bundle.train.entities());
  write_vocab(dir / "relation2id.txt", bundle.train.relations());
  write_vocab(dir / "time2id.txt", bundle.train.timestamps());
  std::ofstream stats(dir / "stats.json");
  stats << bundle.stats.to_json().dump(2) << '\n';
}

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("dataset directory " + dir.string() + " does not exist");
  DatasetBundle b;
  b.train = Tkg(read_vocab(dir / "entity2id.txt"), read_vocab(dir / "relation2id.txt"),
                read_vocab(dir / "time2id.txt"), read_facts(dir / "train.txt"));
  b.valid = make_split(b.train, read_facts(dir / "valid_sup.txt"), read_facts(dir / "valid_que.txt"));
  b.test = make_split(b.train, read_facts(dir / "test_sup.txt"), read_facts(dir / "test_que.txt"));
  std::size_t dropped_test = 0, dropped_valid = 0;
  if (std::ifstream in(dir / "stats.json"); in) {
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded()) {
      dropped_test = j.value("/test/dropped"_json_pointer, std::size_t{0});
      dropped_valid = j.value("/valid/dropped"_json_pointer, std::size_t{0});
    }
  }
  b.stats.test = split_stats(b.test, dropped_test);
  b.stats.valid = split_stats(b.valid, dropped_valid);
  b.stats.train_entities = b.train.active_entities().size();
  b.stats.train_relations = b.train.active_relations().size();
  b.stats.train_timestamps = b.train.active_timestamps().size();
  b.stats.train_quads = b.train.size();
  return b;
}

std::uint64_t vocabulary_hash(const Tkg& tkg) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const auto* v : {&tkg.entities(), &tkg.relations(), &tkg.timestamps()}) {
    mix("#" + std::to_string(v->size()));
    for (const auto& l : v->labels()) mix(l);
  }
  return h;
}

}  // namespace tkgx
