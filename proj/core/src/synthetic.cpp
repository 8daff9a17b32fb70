#include "tkgx/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tkgx {

void SyntheticConfig::validate() const {
  if (entities < 2) throw std::invalid_argument("synthetic graph needs at least 2 entities");
  if (relations < 2 || relations % 2 != 0) throw std::invalid_argument("relation count must be even and >= 2");
  if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
  if (timestamps <= max_lag) throw std::invalid_argument("timestamps must exceed max_lag");
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (communities < 1 || communities > entities) throw std::invalid_argument("bad community count");
  if (cross_community < 0.0 || cross_community > 1.0) throw std::invalid_argument("cross_community must be in [0,1]");
}

Tkg make_planted_tkg(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> ent, rel, tim;
  for (int i = 0; i < cfg.entities; ++i) ent.push_back("e" + std::to_string(i));
  for (int i = 0; i < cfg.relations; ++i) rel.push_back("r" + std::to_string(i));
  for (int i = 0; i < cfg.timestamps; ++i) tim.push_back(std::to_string(i));

  std::vector<std::vector<EntityId>> groups(static_cast<std::size_t>(cfg.communities));
  for (EntityId e = 0; e < cfg.entities; ++e) groups[static_cast<std::size_t>(e % cfg.communities)].push_back(e);

  std::uniform_int_distribution<EntityId> any_entity(0, cfg.entities - 1);
  std::uniform_int_distribution<int> pair_of(0, cfg.relations / 2 - 1);
  std::uniform_int_distribution<int> lag(1, cfg.max_lag);
  std::uniform_int_distribution<TimeId> start(0, cfg.timestamps - 1 - cfg.max_lag);
  std::bernoulli_distribution cross(cfg.cross_community);

  std::vector<Quadruple> quads;
  for (int k = 0; k < cfg.episodes; ++k) {
    const EntityId a = any_entity(rng);
    EntityId b = a;
    const auto& group = groups[static_cast<std::size_t>(a % cfg.communities)];
    while (b == a) {
      if (cross(rng) || group.size() < 2) b = any_entity(rng);
      else b = group[std::uniform_int_distribution<std::size_t>(0, group.size() - 1)(rng)];
    }
    const int p = pair_of(rng);
    const TimeId t = start(rng);
    quads.push_back({a, 2 * p, b, t});
    quads.push_back({a, 2 * p + 1, b, t + lag(rng)});
  }
  return Tkg(Vocabulary(ent), Vocabulary(rel), Vocabulary(tim), std::move(quads));
}

HeldOutSplit make_heldout_split(const Tkg& source, const HeldOutConfig& cfg) {
  if (cfg.entity_ratio < 0.0 || cfg.entity_ratio >= 1.0 || cfg.relation_ratio < 0.0 || cfg.relation_ratio >= 1.0)
    throw std::invalid_argument("held-out ratios must be in [0, 1)");
  std::mt19937_64 rng(cfg.seed);
  auto pick = [&](std::vector<std::int32_t> pool, double ratio) {
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<std::size_t>(std::lround(ratio * static_cast<double>(pool.size()))));
    return IdSet(pool.begin(), pool.end());
  };
  const IdSet unseen_e = pick(source.active_entities(), cfg.entity_ratio);
  const IdSet unseen_r = pick(source.active_relations(), cfg.relation_ratio);

  std::vector<Quadruple> train, emerging;
  for (const auto& q : source.quads()) {
    const bool hidden = unseen_e.count(q.s) || unseen_e.count(q.o) || unseen_r.count(q.r);
    (hidden ? emerging : train).push_back(q);
  }
  if (train.empty()) throw DataError("held-out split left no training facts");

  HeldOutSplit out;
  out.train = Tkg(source.entities(), source.relations(), source.timestamps(), std::move(train));
  const auto trained = out.train.active_entities();
  const IdSet trained_set(trained.begin(), trained.end());

  auto [kept, dropped] = drop_unanchored_pieces(std::move(emerging), trained_set);
  out.dropped = dropped;
  IdSet ue, ur;
  for (const auto& q : kept) {
    for (EntityId e : {q.s, q.o})
      if (!trained_set.count(e)) ue.insert(e);
    if (unseen_r.count(q.r)) ur.insert(q.r);
  }
  auto [sup, que] = split_support_query(std::move(kept), ue, ur, cfg.support_fraction, rng);
  if (que.empty()) throw DataError("held-out split has no query facts");
  out.test = make_split(out.train, std::move(sup), std::move(que));
  return out;
}

}  // namespace tkgx
