#include "tkgx/eval.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "tkgx/encoder.hpp"

namespace tkgx {

double rank_from_scores(std::span<const double> scores, std::size_t truth, std::span<const char> excluded) {
  if (truth >= scores.size()) throw DataError("true entity is not among the candidates");
  const double target = scores[truth];
  std::size_t higher = 0, ties = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == truth || (!excluded.empty() && excluded[i])) continue;
    if (scores[i] > target) ++higher;
    else if (scores[i] == target) ++ties;
  }
  return 1.0 + static_cast<double>(higher) + 0.5 * static_cast<double>(ties);
}

double rank_query(const Quadruple& q, Side side, const EmbeddingSet& emb, ScoreKind kind,
                  std::span<const EntityId> candidates, const FactSet* known_true) {
  const EntityId truth = side == Side::kHead ? q.s : q.o;
  const Eigen::VectorXd& r = emb.relation.at(q.r);
  const Eigen::VectorXd& t = emb.timestamp.at(q.t);
  std::vector<double> scores(candidates.size());
  std::vector<char> excluded(candidates.size(), 0);
  std::size_t truth_index = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const EntityId c = candidates[i];
    Quadruple alt = q;
    (side == Side::kHead ? alt.s : alt.o) = c;
    if (c == truth) truth_index = i;
    else if (known_true && known_true->count(alt)) excluded[i] = 1;
    const auto& s = emb.entity.at(alt.s);
    const auto& o = emb.entity.at(alt.o);
    scores[i] = score(kind, s, r, o, t);
  }
  if (truth_index == candidates.size()) throw DataError("true entity is not among the candidates");
  return rank_from_scores(scores, truth_index, excluded);
}

Metrics Metrics::from_ranks(std::span<const double> ranks) {
  Metrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mrr += 1.0 / r;
    if (r <= 1.0) m.hits1 += 1.0;
    if (r <= 10.0) m.hits10 += 1.0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits10 /= n;
  return m;
}

nlohmann::json RankingReport::to_json() const {
  auto metrics = [](const Metrics& m) {
    return nlohmann::json{{"mrr", m.mrr}, {"hits1", m.hits1}, {"hits10", m.hits10}, {"count", m.count}};
  };
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [c, m] : per_category) cats[to_string(c)] = metrics(m);
  return {{"mode", filtered ? "filtered" : "raw"}, {"overall", metrics(overall)}, {"per_category", cats}};
}

void RankingReport::write_table(std::ostream& os, const std::string& title) const {
  const std::vector<QueryCategory> order = {QueryCategory::kUnseenEntity, QueryCategory::kUnseenRelation,
                                            QueryCategory::kUnseenBoth};
  os << title << " (" << (filtered ? "filtered" : "raw") << ")\n";
  os << std::left << std::setw(10) << "split" << std::right << std::setw(10) << "MRR" << std::setw(10) << "Hits@1"
     << std::setw(10) << "Hits@10" << std::setw(10) << "count" << '\n';
  auto row = [&](const std::string& name, const Metrics& m) {
    os << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(4) << std::setw(10)
       << m.mrr << std::setprecision(2) << std::setw(10) << 100.0 * m.hits1 << std::setw(10) << 100.0 * m.hits10
       << std::setw(10) << m.count << '\n';
  };
  for (auto c : order)
    if (auto it = per_category.find(c); it != per_category.end()) row(to_string(c), it->second);
  row("overall", overall);
  os.unsetf(std::ios::fixed);
}

RankingReport evaluate_embeddings(const TaskSample& split, const EmbeddingSet& emb, ScoreKind kind,
                                  std::span<const Quadruple> extra_known, const EvalOptions& opts) {
  if (split.query.empty()) throw DataError("cannot evaluate an empty query set");
  const IdSet entity_set = split.entities();
  const std::vector<EntityId> candidates(entity_set.begin(), entity_set.end());
  for (EntityId e : candidates)
    if (!emb.entity.count(e)) throw DataError("entity " + std::to_string(e) + " has no embedding");

  FactSet known;
  if (opts.filtered) {
    known.insert(split.support.begin(), split.support.end());
    known.insert(split.query.begin(), split.query.end());
    known.insert(extra_known.begin(), extra_known.end());
  }
  const FactSet* filter = opts.filtered ? &known : nullptr;

  std::vector<double> head(split.query.size()), tail(split.query.size());
  auto work = [&](std::size_t i) {
    const auto& q = split.query[i];
    if (!emb.covers(q)) throw DataError("query fact component has no embedding");
    head[i] = rank_query(q, Side::kHead, emb, kind, candidates, filter);
    tail[i] = rank_query(q, Side::kTail, emb, kind, candidates, filter);
  };
  const auto threads = static_cast<std::size_t>(std::max(1, opts.threads));
  if (threads == 1) {
    for (std::size_t i = 0; i < split.query.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < split.query.size(); i += threads) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  RankingReport report;
  report.filtered = opts.filtered;
  std::vector<double> all;
  std::map<QueryCategory, std::vector<double>> by_cat;
  for (std::size_t i = 0; i < split.query.size(); ++i) {
    const auto c = categorize_query(split.query[i], split);
    for (double r : {head[i], tail[i]}) {
      all.push_back(r);
      by_cat[c].push_back(r);
    }
  }
  report.overall = Metrics::from_ranks(all);
  for (const auto& [c, ranks] : by_cat) report.per_category[c] = Metrics::from_ranks(ranks);
  return report;
}

RankingReport evaluate_split(const TaskSample& split, const Model& model, std::span<const Quadruple> extra_known,
                             const EvalOptions& opts) {
  const EmbeddingSet emb = model.embed(split, true);
  return evaluate_embeddings(split, emb, model.config().score_kind, extra_known, opts);
}

double relation_similarity(RelationId a, RelationId b, const EmbeddingSet& emb) {
  auto ia = emb.relation.find(a), ib = emb.relation.find(b);
  if (ia == emb.relation.end() || ib == emb.relation.end()) throw DataError("relation has no embedding");
  const double na = ia->second.norm(), nb = ib->second.norm();
  if (na == 0.0 || nb == 0.0) throw DataError("zero-norm relation embedding");
  return ia->second.dot(ib->second) / (na * nb);
}

double random_rank_mrr(std::size_t n) {
  if (n == 0) return 0.0;
  double h = 0.0;
  for (std::size_t k = 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
  return h / static_cast<double>(n);
}

double random_split_mrr(const TaskSample& split, std::span<const Quadruple> extra_known, const EvalOptions& opts) {
  if (split.query.empty()) throw DataError("cannot evaluate an empty query set");
  const IdSet entities = split.entities();
  FactSet known;
  if (opts.filtered) {
    known.insert(split.support.begin(), split.support.end());
    known.insert(split.query.begin(), split.query.end());
    known.insert(extra_known.begin(), extra_known.end());
  }
  double total = 0.0;
  for (const auto& q : split.query) {
    for (Side side : {Side::kHead, Side::kTail}) {
      std::size_t n = 0;
      for (EntityId c : entities) {
        Quadruple alt = q;
        (side == Side::kHead ? alt.s : alt.o) = c;
        if (alt == q || !known.count(alt)) ++n;
      }
      total += random_rank_mrr(n);
    }
  }
  return total / (2.0 * static_cast<double>(split.query.size()));
}

}  // namespace tkgx
