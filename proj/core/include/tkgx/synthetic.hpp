#pragma once

#include <cstdint>

#include "tkgx/ingest.hpp"
#include "tkgx/tkg.hpp"

namespace tkgx {

/// Planted-pattern TKG: relations come in (lead, follow) pairs and every lead fact
/// (a, r_2i, b, t) is followed by (a, r_2i+1, b, t + d) with d in 1..max_lag.
/// Entities are grouped into communities and pairs are mostly drawn inside one.
struct SyntheticConfig {
  int entities = 50;
  int relations = 8;  // even
  int timestamps = 30;
  int episodes = 800;       // lead/follow pairs to plant
  int max_lag = 3;
  int communities = 5;
  double cross_community = 0.1;  // share of pairs drawn across communities
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

Tkg make_planted_tkg(const SyntheticConfig& cfg);

/// Held-out split of a whole graph: a share of entities and relations is hidden from
/// training; facts touching them form the emerging graph, split into support and query.
struct HeldOutConfig {
  double entity_ratio = 0.3;
  double relation_ratio = 0.25;
  double support_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct HeldOutSplit {
  Tkg train;
  TaskSample test;
  std::size_t dropped = 0;  // emerging facts in pieces with no trained entity
};

HeldOutSplit make_heldout_split(const Tkg& source, const HeldOutConfig& cfg);

}  // namespace tkgx
