#include "tkgx/decoders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace tkgx {

namespace {

using cd = std::complex<double>;
constexpr double kMinModulus = 1e-12;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Eigen::Index half(const VecRef& v) {
  if (v.size() % 2 != 0) throw std::invalid_argument("complex-valued score needs an even dimension");
  return v.size() / 2;
}

cd at(const VecRef& v, Eigen::Index i, Eigen::Index h) { return {v[i], v[i + h]}; }

cd rotation(const VecRef& r, Eigen::Index i) {
  const double angle = std::numbers::pi * r[i];
  return {std::cos(angle), std::sin(angle)};
}

void put(Eigen::VectorXd& v, Eigen::Index i, Eigen::Index h, cd z) {
  v[i] = z.real();
  v[i + h] = z.imag();
}

// Gradient of Re(x * v) with respect to (Re x, Im x).
void put_re_product_grad(Eigen::VectorXd& g, Eigen::Index i, Eigen::Index h, cd v) {
  g[i] = v.real();
  g[i + h] = -v.imag();
}

void check_dims(ScoreKind kind, const VecRef& s, const VecRef& r, const VecRef& o, const VecRef& t) {
  if (s.size() != o.size() || s.size() != r.size())
    throw std::invalid_argument(std::string("dimension mismatch in ") + to_string(kind) + " score");
  if (is_temporal(kind) && t.size() != s.size())
    throw std::invalid_argument(std::string("timestamp dimension mismatch in ") + to_string(kind) + " score");
}

cd safe_div(cd num, cd den, const char* component) {
  if (std::abs(den) < kMinModulus)
    throw DivisionError(std::string("division by zero-modulus entry of ") + component);
  return num * std::conj(den) / std::norm(den);
}

}  // namespace

ScoreKind parse_score_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "distmult") return ScoreKind::kDistMult;
  if (n == "complex") return ScoreKind::kComplEx;
  if (n == "rotate") return ScoreKind::kRotatE;
  if (n == "tdistmult") return ScoreKind::kTDistMult;
  if (n == "tcomplex") return ScoreKind::kTComplEx;
  if (n == "tero") return ScoreKind::kTeRo;
  throw std::invalid_argument("unknown score function '" + name + "'");
}

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kDistMult: return "DistMult";
    case ScoreKind::kComplEx: return "ComplEx";
    case ScoreKind::kRotatE: return "RotatE";
    case ScoreKind::kTDistMult: return "TDistMult";
    case ScoreKind::kTComplEx: return "TComplEx";
    case ScoreKind::kTeRo: return "TeRo";
  }
  return "?";
}

bool is_temporal(ScoreKind kind) {
  return kind == ScoreKind::kTDistMult || kind == ScoreKind::kTComplEx || kind == ScoreKind::kTeRo;
}

bool is_distance_based(ScoreKind kind) { return kind == ScoreKind::kRotatE || kind == ScoreKind::kTeRo; }

double score(ScoreKind kind, const VecRef& s, const VecRef& r, const VecRef& o, const VecRef& t) {
  check_dims(kind, s, r, o, t);
  switch (kind) {
    case ScoreKind::kDistMult: return (s.array() * r.array() * o.array()).sum();
    case ScoreKind::kTDistMult: return (s.array() * r.array() * o.array() * t.array()).sum();
    case ScoreKind::kComplEx:
    case ScoreKind::kTComplEx: {
      const auto h = half(s);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < h; ++i) {
        cd rel = at(r, i, h);
        if (kind == ScoreKind::kTComplEx) rel *= at(t, i, h);
        acc += (at(s, i, h) * rel * std::conj(at(o, i, h))).real();
      }
      return acc;
    }
    case ScoreKind::kRotatE: {
      const auto h = half(s);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < h; ++i) acc += std::norm(at(s, i, h) * rotation(r, i) - at(o, i, h));
      return -std::sqrt(acc);
    }
    case ScoreKind::kTeRo: {
      const auto h = half(s);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < h; ++i) {
        const cd tt = at(t, i, h);
        acc += std::norm(at(s, i, h) * tt + at(r, i, h) - std::conj(at(o, i, h) * tt));
      }
      return -std::sqrt(acc);
    }
  }
  throw std::logic_error("unhandled score kind");
}

ScoreGradient score_gradient(ScoreKind kind, const VecRef& s, const VecRef& r, const VecRef& o, const VecRef& t) {
  check_dims(kind, s, r, o, t);
  ScoreGradient g;
  const auto d = s.size();
  g.ds = Eigen::VectorXd::Zero(d);
  g.dr = Eigen::VectorXd::Zero(r.size());
  g.dobj = Eigen::VectorXd::Zero(d);
  g.dt = Eigen::VectorXd::Zero(t.size());
  switch (kind) {
    case ScoreKind::kDistMult:
      g.ds = r.cwiseProduct(o);
      g.dr = s.cwiseProduct(o);
      g.dobj = s.cwiseProduct(r);
      g.value = (g.dobj.array() * o.array()).sum();
      return g;
    case ScoreKind::kTDistMult:
      g.ds = r.cwiseProduct(o).cwiseProduct(t);
      g.dr = s.cwiseProduct(o).cwiseProduct(t);
      g.dobj = s.cwiseProduct(r).cwiseProduct(t);
      g.dt = s.cwiseProduct(r).cwiseProduct(o);
      g.value = (g.dt.array() * t.array()).sum();
      return g;
    case ScoreKind::kComplEx:
    case ScoreKind::kTComplEx: {
      const auto h = half(s);
      const bool temporal = kind == ScoreKind::kTComplEx;
      for (Eigen::Index i = 0; i < h; ++i) {
        const cd si = at(s, i, h), ri = at(r, i, h), oc = std::conj(at(o, i, h));
        const cd ti = temporal ? at(t, i, h) : cd(1.0, 0.0);
        const cd w = si * ri * ti;  // Re(w * conj(o))
        g.value += (w * oc).real();
        put_re_product_grad(g.ds, i, h, ri * ti * oc);
        put_re_product_grad(g.dr, i, h, si * ti * oc);
        if (temporal) put_re_product_grad(g.dt, i, h, si * ri * oc);
        g.dobj[i] = w.real();
        g.dobj[i + h] = w.imag();
      }
      return g;
    }
    case ScoreKind::kRotatE: {
      const auto h = half(s);
      double dist2 = 0.0;
      std::vector<cd> z(static_cast<std::size_t>(h)), u(static_cast<std::size_t>(h));
      for (Eigen::Index i = 0; i < h; ++i) {
        u[i] = rotation(r, i);
        z[i] = at(s, i, h) * u[i] - at(o, i, h);
        dist2 += std::norm(z[i]);
      }
      const double dist = std::sqrt(dist2);
      g.value = -dist;
      if (dist == 0.0) return g;
      // d(-|z|)/dx = -Re(conj(z) dz/dx) / |z|
      const double k = -1.0 / dist;
      for (Eigen::Index i = 0; i < h; ++i) {
        const cd zc = std::conj(z[i]);
        g.ds[i] = k * (zc * u[i]).real();
        g.ds[i + h] = k * (zc * cd(0, 1) * u[i]).real();
        g.dobj[i] = k * (zc * cd(-1, 0)).real();
        g.dobj[i + h] = k * (zc * cd(0, -1)).real();
        g.dr[i] = k * (zc * at(s, i, h) * cd(0, 1) * u[i]).real() * std::numbers::pi;
      }
      return g;
    }
    case ScoreKind::kTeRo: {
      const auto h = half(s);
      double dist2 = 0.0;
      std::vector<cd> z(static_cast<std::size_t>(h));
      for (Eigen::Index i = 0; i < h; ++i) {
        const cd tt = at(t, i, h);
        z[i] = at(s, i, h) * tt + at(r, i, h) - std::conj(at(o, i, h) * tt);
        dist2 += std::norm(z[i]);
      }
      const double dist = std::sqrt(dist2);
      g.value = -dist;
      if (dist == 0.0) return g;
      const double k = -1.0 / dist;
      const cd I(0, 1);
      for (Eigen::Index i = 0; i < h; ++i) {
        const cd zc = std::conj(z[i]);
        const cd si = at(s, i, h), oi = at(o, i, h), ti = at(t, i, h);
        g.ds[i] = k * (zc * ti).real();
        g.ds[i + h] = k * (zc * I * ti).real();
        g.dr[i] = k * zc.real();
        g.dr[i + h] = k * (zc * I).real();
        g.dobj[i] = k * (zc * -std::conj(ti)).real();
        g.dobj[i + h] = k * (zc * I * std::conj(ti)).real();
        g.dt[i] = k * (zc * (si - std::conj(oi))).real();
        g.dt[i + h] = k * (zc * (I * si + I * std::conj(oi))).real();
      }
      return g;
    }
  }
  throw std::logic_error("unhandled score kind");
}

Eigen::VectorXd asmp_infer(ScoreKind kind, AsmpTarget target, const VecRef& a, const VecRef& b, const VecRef& t) {
  if (a.size() != b.size() && !(kind == ScoreKind::kRotatE && target != AsmpTarget::kRelation))
    throw std::invalid_argument("dimension mismatch in closed-form inference");
  if (is_temporal(kind) && t.size() != a.size())
    throw std::invalid_argument("timestamp dimension mismatch in closed-form inference");

  switch (kind) {
    case ScoreKind::kDistMult: return a.cwiseProduct(b);
    case ScoreKind::kTDistMult: return a.cwiseProduct(b).cwiseProduct(t);
    default: break;
  }

  const auto h = half(a);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());
  for (Eigen::Index i = 0; i < h; ++i) {
    const cd x = at(a, i, h);
    cd y = 0.0;
    switch (kind) {
      case ScoreKind::kComplEx:
      case ScoreKind::kTComplEx: {
        const cd tt = kind == ScoreKind::kTComplEx ? at(t, i, h) : cd(1.0, 0.0);
        const cd w = at(b, i, h);
        if (target == AsmpTarget::kObject) y = x * w * tt;                           // s r t
        else if (target == AsmpTarget::kSubject) y = std::conj(std::conj(x) * w * tt);  // conj(conj(o) r t)
        else y = std::conj(x * std::conj(w) * tt);                                   // conj(s conj(o) t)
        put(out, i, h, y);
        break;
      }
      case ScoreKind::kRotatE: {
        if (target == AsmpTarget::kObject) {
          put(out, i, h, x * rotation(b, i));
        } else if (target == AsmpTarget::kSubject) {
          put(out, i, h, safe_div(x, rotation(b, i), "relation"));
        } else {
          const cd q = safe_div(at(b, i, h), x, "subject");
          out[i] = std::arg(q) / std::numbers::pi;
        }
        break;
      }
      case ScoreKind::kTeRo: {
        const cd tt = at(t, i, h);
        const cd w = at(b, i, h);
        if (target == AsmpTarget::kObject) y = safe_div(std::conj(x * tt + w), tt, "timestamp");
        else if (target == AsmpTarget::kSubject) y = safe_div(std::conj(x * tt) - w, tt, "timestamp");
        else y = std::conj(w * tt) - x * tt;
        put(out, i, h, y);
        break;
      }
      default: break;
    }
  }
  return out;
}

EmbeddingSet asmp_embed_unseen(const TaskSample& split, const AsmpTables& tables, ScoreKind kind) {
  const bool temporal = is_temporal(kind);
  auto ent_ok = [&](EntityId e) { return tables.trained_entities.count(e) != 0; };
  auto rel_ok = [&](RelationId r) { return tables.trained_relations.count(r) != 0; };
  auto time_ok = [&](TimeId t) { return !temporal || tables.trained_timestamps.count(t) != 0; };
  auto row = [](const Eigen::MatrixXd& m, std::int32_t id) -> Eigen::VectorXd {
    if (id < 0 || id >= m.rows()) throw DataError("embedding table has no row " + std::to_string(id));
    return m.row(id).transpose();
  };
  auto mean_of = [&](const Eigen::MatrixXd& m, const IdSet& ids) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.cols());
    for (auto id : ids) acc += row(m, id);
    if (!ids.empty()) acc /= static_cast<double>(ids.size());
    return acc;
  };

  EmbeddingSet out;
  IdSet entities = split.entities(), relations, timestamps;
  for (const auto* part : {&split.support, &split.query})
    for (const auto& q : *part) {
      relations.insert(q.r);
      timestamps.insert(q.t);
    }
  for (auto t : timestamps) out.timestamp[t] = row(tables.time, t);

  const Eigen::VectorXd entity_mean = mean_of(tables.entity, tables.trained_entities);
  const Eigen::VectorXd relation_mean = mean_of(tables.relation, tables.trained_relations);

  std::map<EntityId, std::pair<Eigen::VectorXd, int>> ent_acc;
  std::map<RelationId, std::pair<Eigen::VectorXd, int>> rel_acc;
  auto add = [](auto& acc, std::int32_t id, const Eigen::VectorXd& v) {
    auto [it, inserted] = acc.try_emplace(id, Eigen::VectorXd::Zero(v.size()), 0);
    it->second.first += v;
    ++it->second.second;
  };

  for (const auto& q : split.support) {
    if (!time_ok(q.t)) continue;
    const Eigen::VectorXd t = row(tables.time, q.t);
    if (rel_ok(q.r)) {
      const Eigen::VectorXd r = row(tables.relation, q.r);
      if (!ent_ok(q.s) && q.s != q.o && ent_ok(q.o))
        add(ent_acc, q.s, asmp_infer(kind, AsmpTarget::kSubject, row(tables.entity, q.o), r, t));
      if (!ent_ok(q.o) && q.s != q.o && ent_ok(q.s))
        add(ent_acc, q.o, asmp_infer(kind, AsmpTarget::kObject, row(tables.entity, q.s), r, t));
    } else if (ent_ok(q.s) && ent_ok(q.o)) {
      add(rel_acc, q.r, asmp_infer(kind, AsmpTarget::kRelation, row(tables.entity, q.s), row(tables.entity, q.o), t));
    }
  }

  for (auto e : entities) {
    if (ent_ok(e)) {
      out.entity[e] = row(tables.entity, e);
    } else if (auto it = ent_acc.find(e); it != ent_acc.end()) {
      out.entity[e] = it->second.first / it->second.second;
    } else {
      out.entity[e] = entity_mean;
    }
  }
  for (auto r : relations) {
    if (rel_ok(r)) {
      out.relation[r] = row(tables.relation, r);
    } else if (auto it = rel_acc.find(r); it != rel_acc.end()) {
      out.relation[r] = it->second.first / it->second.second;
    } else {
      out.relation[r] = relation_mean;
    }
  }
  return out;
}

}  // namespace tkgx
