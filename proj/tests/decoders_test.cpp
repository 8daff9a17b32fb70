#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tkgx/decoders.hpp"

namespace tkgx {
namespace {

using testing::random_vector;
using Vec = Eigen::VectorXd;

constexpr ScoreKind kAllKinds[] = {ScoreKind::kDistMult,  ScoreKind::kComplEx,  ScoreKind::kRotatE,
                                   ScoreKind::kTDistMult, ScoreKind::kTComplEx, ScoreKind::kTeRo};

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Complex vector with the given per-entry phases (radians) and unit modulus.
Vec unit_phases(const std::vector<double>& phases) {
  const auto h = static_cast<Eigen::Index>(phases.size());
  Vec v(2 * h);
  for (Eigen::Index i = 0; i < h; ++i) {
    v[i] = std::cos(phases[static_cast<std::size_t>(i)]);
    v[i + h] = std::sin(phases[static_cast<std::size_t>(i)]);
  }
  return v;
}

Vec complex_one(Eigen::Index d) {
  Vec t = Vec::Zero(d);
  t.head(d / 2).setOnes();
  return t;
}

TEST(ScoreKind, ParsesCaseInsensitively) {
  EXPECT_EQ(parse_score_kind("RotatE"), ScoreKind::kRotatE);
  EXPECT_EQ(parse_score_kind("tero"), ScoreKind::kTeRo);
  EXPECT_EQ(parse_score_kind("TCOMPLEX"), ScoreKind::kTComplEx);
  EXPECT_THROW(parse_score_kind("transe"), std::invalid_argument);
  for (auto k : kAllKinds) EXPECT_EQ(parse_score_kind(to_string(k)), k);
  EXPECT_TRUE(is_temporal(ScoreKind::kTeRo));
  EXPECT_FALSE(is_temporal(ScoreKind::kComplEx));
  EXPECT_TRUE(is_distance_based(ScoreKind::kRotatE));
  EXPECT_FALSE(is_distance_based(ScoreKind::kTDistMult));
}

TEST(Score, DistMultSumOfProducts) {
  EXPECT_DOUBLE_EQ(score(ScoreKind::kDistMult, v2(1, 2), v2(1, 1), v2(1, 1), v2(0, 0)), 3.0);
}

TEST(Score, RotatEIdentityRotationIsMaximal) {
  std::mt19937_64 rng(1);
  const Vec s = random_vector(8, rng);
  EXPECT_EQ(score(ScoreKind::kRotatE, s, Vec::Zero(8), s, Vec::Zero(8)), 0.0);
}

TEST(Score, DimensionMismatch) {
  EXPECT_THROW(score(ScoreKind::kDistMult, Vec::Zero(2), Vec::Zero(3), Vec::Zero(2), Vec::Zero(2)),
               std::invalid_argument);
  EXPECT_THROW(score(ScoreKind::kTeRo, Vec::Zero(4), Vec::Zero(4), Vec::Zero(4), Vec::Zero(2)), std::invalid_argument);
  EXPECT_THROW(score(ScoreKind::kComplEx, Vec::Zero(3), Vec::Zero(3), Vec::Zero(3), Vec::Zero(3)),
               std::invalid_argument);
}

TEST(Score, MatchesComplexLoopOracle) {
  std::mt19937_64 rng(2);
  for (auto kind : kAllKinds) {
    for (int i = 0; i < 100; ++i) {
      const Vec s = random_vector(8, rng), r = random_vector(8, rng), o = random_vector(8, rng),
                t = random_vector(8, rng);
      EXPECT_NEAR(score(kind, s, r, o, t), oracle::score(kind, s, r, o, t), 1e-12) << to_string(kind);
    }
  }
}

TEST(Score, TemporalKindsAtUnitTimeReduceToStatic) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec s = random_vector(8, rng), r = random_vector(8, rng), o = random_vector(8, rng),
              t = random_vector(8, rng);
    EXPECT_NEAR(score(ScoreKind::kTComplEx, s, r, o, complex_one(8)), score(ScoreKind::kComplEx, s, r, o, t), 1e-9);
    EXPECT_NEAR(score(ScoreKind::kTDistMult, s, r, o, Vec::Ones(8)), score(ScoreKind::kDistMult, s, r, o, t), 1e-9);
    for (auto kind : {ScoreKind::kDistMult, ScoreKind::kComplEx, ScoreKind::kRotatE})
      EXPECT_EQ(score(kind, s, r, o, t), score(kind, s, r, o, random_vector(8, rng)));
  }
}

TEST(ScoreGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  for (auto kind : kAllKinds) {
    for (int trial = 0; trial < 10; ++trial) {
      Vec x[4] = {random_vector(8, rng), random_vector(8, rng), random_vector(8, rng), random_vector(8, rng)};
      const auto g = score_gradient(kind, x[0], x[1], x[2], x[3]);
      EXPECT_NEAR(g.value, score(kind, x[0], x[1], x[2], x[3]), 1e-12);
      const Vec* grads[4] = {&g.ds, &g.dr, &g.dobj, &g.dt};
      for (int a = 0; a < 4; ++a) {
        for (Eigen::Index i = 0; i < 8; ++i) {
          Vec up[4] = {x[0], x[1], x[2], x[3]}, dn[4] = {x[0], x[1], x[2], x[3]};
          up[a][i] += h;
          dn[a][i] -= h;
          const double fd =
              (score(kind, up[0], up[1], up[2], up[3]) - score(kind, dn[0], dn[1], dn[2], dn[3])) / (2 * h);
          EXPECT_NEAR((*grads[a])[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << to_string(kind) << " arg " << a;
        }
      }
    }
  }
}

TEST(AsmpInfer, RotationComposes) {
  const Vec s = unit_phases({0.3, 0.3});
  Vec r = Vec::Zero(4);
  r.head(2).setConstant(0.2 / std::numbers::pi);
  const Vec o = asmp_infer(ScoreKind::kRotatE, AsmpTarget::kObject, s, r, Vec());
  EXPECT_LT((o - unit_phases({0.5, 0.5})).norm(), 1e-12);
  EXPECT_NEAR(score(ScoreKind::kRotatE, s, r, o, Vec()), 0.0, 1e-12);
}

TEST(AsmpInfer, DistMultRelationIsElementwiseProduct) {
  EXPECT_EQ(asmp_infer(ScoreKind::kDistMult, AsmpTarget::kRelation, v2(2, 3), v2(1, 2), Vec()), v2(2, 6));
}

TEST(AsmpInfer, ZeroModulusDivisorRaises) {
  const Vec t = Vec::Zero(4);
  std::mt19937_64 rng(5);
  EXPECT_THROW(asmp_infer(ScoreKind::kTeRo, AsmpTarget::kObject, random_vector(4, rng), random_vector(4, rng), t),
               DivisionError);
  EXPECT_THROW(asmp_infer(ScoreKind::kRotatE, AsmpTarget::kRelation, Vec::Zero(4), random_vector(4, rng), t),
               DivisionError);
}

// Completes (s, r, o, t) with the inferred component in its slot.
double completed_score(ScoreKind kind, AsmpTarget target, const Vec& s, const Vec& r, const Vec& o, const Vec& t,
                       const Vec& x) {
  switch (target) {
    case AsmpTarget::kObject: return score(kind, s, r, x, t);
    case AsmpTarget::kSubject: return score(kind, x, r, o, t);
    case AsmpTarget::kRelation: return score(kind, s, x, o, t);
  }
  return 0.0;
}

Vec infer(ScoreKind kind, AsmpTarget target, const Vec& s, const Vec& r, const Vec& o, const Vec& t) {
  switch (target) {
    case AsmpTarget::kObject: return asmp_infer(kind, target, s, r, t);
    case AsmpTarget::kSubject: return asmp_infer(kind, target, o, r, t);
    case AsmpTarget::kRelation: return asmp_infer(kind, target, s, o, t);
  }
  return {};
}

TEST(AsmpInfer, DistanceKindsReachZeroDistance) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec s = random_vector(8, rng), r = random_vector(8, rng), o = random_vector(8, rng),
              t = random_vector(8, rng);
    for (auto target : {AsmpTarget::kObject, AsmpTarget::kSubject, AsmpTarget::kRelation})
      EXPECT_LE(-completed_score(ScoreKind::kTeRo, target, s, r, o, t, infer(ScoreKind::kTeRo, target, s, r, o, t)),
                1e-9);
    for (auto target : {AsmpTarget::kObject, AsmpTarget::kSubject})
      EXPECT_LE(-completed_score(ScoreKind::kRotatE, target, s, r, o, t, infer(ScoreKind::kRotatE, target, s, r, o, t)),
                1e-9);
    // A relation exists only when the moduli agree, so build o by rotating s.
    const Vec rotated = asmp_infer(ScoreKind::kRotatE, AsmpTarget::kObject, s, r, t);
    const Vec rel = asmp_infer(ScoreKind::kRotatE, AsmpTarget::kRelation, s, rotated, t);
    EXPECT_LE(-score(ScoreKind::kRotatE, s, rel, rotated, t), 1e-9);
  }
}

TEST(AsmpInfer, ProductKindsFollowTheirDefiningIdentities) {
  std::mt19937_64 rng(7);
  using oracle::cd;
  for (int i = 0; i < 100; ++i) {
    const Vec s = random_vector(8, rng), r = random_vector(8, rng), o = random_vector(8, rng),
              t = random_vector(8, rng);
    EXPECT_LE((asmp_infer(ScoreKind::kTDistMult, AsmpTarget::kObject, s, r, t) - s.cwiseProduct(r).cwiseProduct(t))
                  .cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((asmp_infer(ScoreKind::kDistMult, AsmpTarget::kSubject, o, r, t) - o.cwiseProduct(r)).cwiseAbs().maxCoeff(),
              1e-9);
    const auto cs = oracle::complexify(s), cr = oracle::complexify(r), co = oracle::complexify(o),
               ct = oracle::complexify(t);
    const auto xo = oracle::complexify(asmp_infer(ScoreKind::kTComplEx, AsmpTarget::kObject, s, r, t));
    const auto xs = oracle::complexify(asmp_infer(ScoreKind::kTComplEx, AsmpTarget::kSubject, o, r, t));
    const auto xr = oracle::complexify(asmp_infer(ScoreKind::kTComplEx, AsmpTarget::kRelation, s, o, t));
    const auto yo = oracle::complexify(asmp_infer(ScoreKind::kComplEx, AsmpTarget::kObject, s, r, t));
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_LE(std::abs(xo[k] - cs[k] * cr[k] * ct[k]), 1e-9);
      EXPECT_LE(std::abs(xs[k] - std::conj(std::conj(co[k]) * cr[k] * ct[k])), 1e-9);
      EXPECT_LE(std::abs(xr[k] - std::conj(cs[k] * std::conj(co[k]) * ct[k])), 1e-9);
      EXPECT_LE(std::abs(yo[k] - cs[k] * cr[k]), 1e-9);
    }
  }
}

TEST(AsmpInfer, InferredComponentBeatsPerturbations) {
  std::mt19937_64 rng(8);
  for (auto kind : kAllKinds) {
    for (auto target : {AsmpTarget::kObject, AsmpTarget::kSubject, AsmpTarget::kRelation}) {
      const Vec s = random_vector(8, rng), r = random_vector(8, rng), t = random_vector(8, rng);
      Vec o = random_vector(8, rng);
      if (kind == ScoreKind::kRotatE && target == AsmpTarget::kRelation)
        o = asmp_infer(kind, AsmpTarget::kObject, s, r, t);
      const Vec x = infer(kind, target, s, r, o, t);
      const double best = completed_score(kind, target, s, r, o, t, x);
      for (int p = 0; p < 100; ++p) {
        Vec y = x + random_vector(8, rng, 0.1);
        // Product scores grow with scale, so compare at equal norm.
        if (!is_distance_based(kind)) y *= x.norm() / y.norm();
        EXPECT_GE(best + 1e-12, completed_score(kind, target, s, r, o, t, y))
            << to_string(kind) << " target " << static_cast<int>(target);
      }
    }
  }
}

AsmpTables small_tables(std::mt19937_64& rng) {
  AsmpTables t;
  t.entity = testing::random_matrix(5, 4, rng);
  t.relation = testing::random_matrix(3, 4, rng);
  t.time = testing::random_matrix(2, 4, rng);
  t.trained_entities = {0, 1, 2};
  t.trained_relations = {0, 1};
  t.trained_timestamps = {0, 1};
  return t;
}

Vec row(const Eigen::MatrixXd& m, int i) { return m.row(i).transpose(); }

TEST(AsmpEmbed, OneSupportGivesThatInference) {
  std::mt19937_64 rng(9);
  const auto tab = small_tables(rng);
  TaskSample split;
  split.support = {{0, 0, 3, 1}};
  split.query = {{3, 1, 2, 0}};
  split.seen_entities = {0, 2};
  split.unseen_entities = {3};
  split.seen_relations = {0, 1};
  split.seen_timestamps = {0, 1};
  for (auto kind : {ScoreKind::kRotatE, ScoreKind::kTeRo}) {
    const auto emb = asmp_embed_unseen(split, tab, kind);
    const Vec expect = asmp_infer(kind, AsmpTarget::kObject, row(tab.entity, 0), row(tab.relation, 0), row(tab.time, 1));
    EXPECT_LT((emb.entity.at(3) - expect).norm(), 1e-12);
    EXPECT_EQ(emb.entity.at(2), row(tab.entity, 2));
    EXPECT_EQ(emb.relation.at(1), row(tab.relation, 1));
  }
}

TEST(AsmpEmbed, NoSupportFallsBackToTableMean) {
  std::mt19937_64 rng(10);
  const auto tab = small_tables(rng);
  TaskSample split;
  split.support = {{4, 2, 3, 0}};  // nothing trained next to 3, 4 or relation 2
  split.query = {{3, 0, 1, 0}};
  split.seen_entities = {1};
  split.unseen_entities = {3, 4};
  split.seen_relations = {0};
  split.unseen_relations = {2};
  split.seen_timestamps = {0};
  const auto emb = asmp_embed_unseen(split, tab, ScoreKind::kComplEx);
  const Vec ent_mean = (row(tab.entity, 0) + row(tab.entity, 1) + row(tab.entity, 2)) / 3.0;
  const Vec rel_mean = (row(tab.relation, 0) + row(tab.relation, 1)) / 2.0;
  EXPECT_LT((emb.entity.at(3) - ent_mean).norm(), 1e-12);
  EXPECT_LT((emb.entity.at(4) - ent_mean).norm(), 1e-12);
  EXPECT_LT((emb.relation.at(2) - rel_mean).norm(), 1e-12);
}

TEST(AsmpEmbed, SeveralSupportsAverage) {
  std::mt19937_64 rng(11);
  const auto tab = small_tables(rng);
  TaskSample split;
  split.support = {{0, 0, 3, 0}, {3, 1, 1, 0}, {2, 0, 3, 1}, {0, 2, 1, 1}, {2, 2, 0, 0}};
  split.query = {{3, 2, 2, 1}};
  split.seen_entities = {0, 1, 2};
  split.unseen_entities = {3};
  split.seen_relations = {0, 1};
  split.unseen_relations = {2};
  split.seen_timestamps = {0, 1};
  for (auto kind : kAllKinds) {
    const auto emb = asmp_embed_unseen(split, tab, kind);
    Vec e = asmp_infer(kind, AsmpTarget::kObject, row(tab.entity, 0), row(tab.relation, 0), row(tab.time, 0));
    e += asmp_infer(kind, AsmpTarget::kSubject, row(tab.entity, 1), row(tab.relation, 1), row(tab.time, 0));
    e += asmp_infer(kind, AsmpTarget::kObject, row(tab.entity, 2), row(tab.relation, 0), row(tab.time, 1));
    EXPECT_LT((emb.entity.at(3) - e / 3.0).cwiseAbs().maxCoeff(), 1e-6) << to_string(kind);
    Vec r = asmp_infer(kind, AsmpTarget::kRelation, row(tab.entity, 0), row(tab.entity, 1), row(tab.time, 1));
    r += asmp_infer(kind, AsmpTarget::kRelation, row(tab.entity, 2), row(tab.entity, 0), row(tab.time, 0));
    EXPECT_LT((emb.relation.at(2) - r / 2.0).cwiseAbs().maxCoeff(), 1e-6) << to_string(kind);
  }
}

}  // namespace
}  // namespace tkgx
