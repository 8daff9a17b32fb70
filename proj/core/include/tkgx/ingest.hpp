#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tkgx/tkg.hpp"

namespace tkgx {

/// Reads tab-separated "subject\trelation\tobject\ttimestamp" lines. Blank lines are
/// skipped; the timestamp must be an ISO date (YYYY-MM-DD) or a non-negative integer.
std::vector<RawQuadruple> parse_quadruple_file(std::istream& in);
std::vector<RawQuadruple> parse_quadruple_file(const std::filesystem::path& path);

struct SamplerConfig {
  int l1 = 6;                    // walk length for test/valid extraction
  int l2 = 6;                    // walk length for train / task extraction
  int seed_entity_count = 10;    // walk starts for dataset splits
  double mask_min = 0.3;         // unseen-ratio range
  double mask_max = 0.7;
  int task_count = 10000;
  double support_fraction = 0.75;
  std::uint64_t rng_seed = 0;
  int max_retries = 100;

  void validate() const;  // throws std::invalid_argument
};

/// Component and fact counts of one split.
struct SplitStats {
  std::size_t entities = 0, unseen_entities = 0;
  std::size_t relations = 0, unseen_relations = 0;
  std::size_t timestamps = 0, unseen_timestamps = 0;
  std::size_t support = 0, query = 0;
  std::size_t dropped = 0;  // facts removed because their unseen parts had no support anchor
};

struct DatasetStats {
  std::size_t train_entities = 0, train_relations = 0, train_timestamps = 0, train_quads = 0;
  SplitStats test, valid;
  nlohmann::json to_json() const;
};

/// Training graph plus test/valid splits. All three share the global vocabularies held
/// by `train`; seen/unseen partitions are relative to the training graph.
struct DatasetBundle {
  Tkg train;
  TaskSample valid;
  TaskSample test;
  DatasetStats stats;
};

/// Seen/unseen partition of a split relative to `train`, with support and query given.
TaskSample make_split(const Tkg& train, std::vector<Quadruple> support, std::vector<Quadruple> query);
SplitStats split_stats(const TaskSample& split, std::size_t dropped);

/// Drops facts in connected pieces (over entities) that contain no trained entity; the
/// second member counts them.
std::pair<std::vector<Quadruple>, std::size_t> drop_unanchored_pieces(std::vector<Quadruple> facts,
                                                                      const IdSet& trained);

/// Extraction pipeline: seed walks for test and valid, masking, train walks, re-labeling
/// of new entities and the support/query split.
DatasetBundle generate_dataset(const Tkg& source, const SamplerConfig& cfg);

/// One meta-training task: a walk-extracted sub-graph with a random share of entities and
/// relations marked unseen, and its facts split into support and query.
TaskSample sample_task(const Tkg& train, const SamplerConfig& cfg, std::mt19937_64& rng);
std::vector<TaskSample> sample_tasks(const Tkg& train, const SamplerConfig& cfg);

/// Splits `facts` into support and query. Facts without unseen parts go to support; a
/// fact goes to query only while every unseen part of it keeps a support fact; the query
/// aims at (1 - support_fraction) of all facts and is never empty when any fact has an
/// unseen part.
std::pair<std::vector<Quadruple>, std::vector<Quadruple>> split_support_query(
    std::vector<Quadruple> facts, const IdSet& unseen_entities, const IdSet& unseen_relations,
    double support_fraction, std::mt19937_64& rng);

/// Writes train.txt, valid_sup.txt, valid_que.txt, test_sup.txt, test_que.txt,
/// entity2id.txt, relation2id.txt, time2id.txt and stats.json.
void write_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_dataset(const std::filesystem::path& dir);

/// FNV-1a over the three vocabularies, stable across runs.
std::uint64_t vocabulary_hash(const Tkg& tkg);

}  // namespace tkgx
