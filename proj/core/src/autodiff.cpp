#include "tkgx/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace tkgx {

ParamId ParamStore::add(std::string name, Eigen::MatrixXd value) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  const ParamId id = values_.size();
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return id;
}

std::optional<ParamId> ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ParamId ParamStore::at(const std::string& name) const {
  auto id = find(name);
  if (!id) throw std::out_of_range("no parameter named '" + name + "'");
  return *id;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

Gradients::Gradients(const ParamStore& params)
    : grads_(params.size()), touched_(params.size(), false) {
  shapes_.reserve(params.size());
  for (ParamId i = 0; i < params.size(); ++i) shapes_.emplace_back(params.value(i).rows(), params.value(i).cols());
}

Eigen::MatrixXd& Gradients::at(ParamId id) {
  if (!touched_[id]) {
    grads_[id] = Eigen::MatrixXd::Zero(shapes_[id].first, shapes_[id].second);
    touched_[id] = true;
  }
  return grads_[id];
}

void Gradients::add(const Gradients& other) {
  for (ParamId i = 0; i < other.grads_.size(); ++i)
    if (other.touched_[i]) at(i) += other.grads_[i];
}

void Gradients::clear() {
  for (ParamId i = 0; i < grads_.size(); ++i)
    if (touched_[i]) grads_[i].setZero();
}

const Eigen::MatrixXd& Var::value() const { return tape->value(id); }

Tape::Tape(const ParamStore& params) : params_(&params), grads_(params) {}

Var Tape::record(Eigen::MatrixXd value, BackwardFn backward) {
  nodes_.push_back({std::move(value), {}, std::move(backward)});
  return {this, nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Eigen::MatrixXd& g) {
  auto& node = nodes_[id];
  if (node.grad.size() == 0) node.grad = g;
  else node.grad += g;
}

Var Tape::constant(Eigen::MatrixXd value) { return record(std::move(value), nullptr); }

Var Tape::param(ParamId id) {
  if (auto it = param_nodes_.find(id); it != param_nodes_.end()) return {this, it->second};
  Var v = record(params_->value(id), [id](Tape& tape, const Eigen::MatrixXd& g) { tape.grads_.at(id) += g; });
  param_nodes_.emplace(id, v.id);
  return v;
}

Var Tape::param_row(ParamId id, Eigen::Index row) {
  const auto key = std::make_pair(id, row);
  if (auto it = row_nodes_.find(key); it != row_nodes_.end()) return {this, it->second};
  const auto& m = params_->value(id);
  if (row < 0 || row >= m.rows())
    throw std::out_of_range("row " + std::to_string(row) + " of parameter '" + params_->name(id) + "'");
  Var v = record(m.row(row).transpose(), [id, row](Tape& tape, const Eigen::MatrixXd& g) {
    tape.grads_.at(id).row(row) += g.col(0).transpose();
  });
  row_nodes_.emplace(key, v.id);
  return v;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("loss recorded on another tape");
  if (value(loss.id).size() != 1) throw std::invalid_argument("backward needs a scalar loss");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[loss.id].grad = Eigen::MatrixXd::Ones(1, 1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.grad.size() == 0 || !node.backward) continue;
    const Eigen::MatrixXd g = std::move(node.grad);
    node.backward(*this, g);
  }
}

namespace {

Tape& tape_of(Var a) {
  if (!a.tape) throw std::invalid_argument("variable without a tape");
  return *a.tape;
}

void same_shape(const Var& a, const Var& b, const char* op) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw std::invalid_argument(std::string("shape mismatch in ") + op);
}

}  // namespace

Var operator+(Var a, Var b) {
  same_shape(a, b, "add");
  return tape_of(a).record(a.value() + b.value(), [a = a.id, b = b.id](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var operator-(Var a, Var b) {
  same_shape(a, b, "sub");
  return tape_of(a).record(a.value() - b.value(), [a = a.id, b = b.id](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var operator*(double c, Var a) {
  return tape_of(a).record(c * a.value(), [a = a.id, c](Tape& t, const Eigen::MatrixXd& g) { t.accumulate(a, c * g); });
}

Var cmul(Var a, Var b) {
  same_shape(a, b, "cmul");
  return tape_of(a).record(a.value().cwiseProduct(b.value()), [a = a.id, b = b.id](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(a, g.cwiseProduct(t.value(b)));
    t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

Var matvec(Var w, Var x) {
  if (w.value().cols() != x.value().rows())
    throw std::invalid_argument("matvec: " + std::to_string(w.value().cols()) + " columns vs " +
                                std::to_string(x.value().rows()) + " rows");
  return tape_of(w).record(w.value() * x.value(), [w = w.id, x = x.id](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(w, g * t.value(x).transpose());
    t.accumulate(x, t.value(w).transpose() * g);
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.value().rows();
  Eigen::MatrixXd out(rows, 1);
  std::vector<std::pair<std::size_t, Eigen::Index>> pieces;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.value().rows()) = p.value();
    pieces.emplace_back(p.id, p.value().rows());
    at += p.value().rows();
  }
  return tape_of(parts[0]).record(std::move(out), [pieces = std::move(pieces)](Tape& t, const Eigen::MatrixXd& g) {
    Eigen::Index offset = 0;
    for (const auto& [id, n] : pieces) {
      t.accumulate(id, g.middleRows(offset, n));
      offset += n;
    }
  });
}

Var slice(Var x, Eigen::Index start, Eigen::Index length) {
  const Eigen::Index n = x.value().rows();
  if (start < 0 || length < 0 || start + length > n) throw std::out_of_range("slice outside vector");
  return tape_of(x).record(x.value().middleRows(start, length),
                           [x = x.id, start, length, n](Tape& t, const Eigen::MatrixXd& g) {
                             Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, g.cols());
                             full.middleRows(start, length) = g;
                             t.accumulate(x, full);
                           });
}

Var tanh(Var x) {
  Eigen::MatrixXd y = x.value().array().tanh().matrix();
  return tape_of(x).record(y, [x = x.id, y](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(x, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var weighted_sum(std::span<const Var> parts, std::span<const double> weights) {
  if (parts.empty() || parts.size() != weights.size()) throw std::invalid_argument("weighted_sum arity");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(parts[0].value().rows(), parts[0].value().cols());
  std::vector<std::pair<std::size_t, double>> terms;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    same_shape(parts[0], parts[i], "weighted_sum");
    out += weights[i] * parts[i].value();
    terms.emplace_back(parts[i].id, weights[i]);
  }
  return tape_of(parts[0]).record(std::move(out), [terms = std::move(terms)](Tape& t, const Eigen::MatrixXd& g) {
    for (const auto& [id, w] : terms) t.accumulate(id, w * g);
  });
}

Var sum(std::span<const Var> parts) {
  std::vector<double> ones(parts.size(), 1.0);
  return weighted_sum(parts, ones);
}

Var softplus(Var x) {
  auto sp = [](double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); };
  auto sigmoid = [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  return tape_of(x).record(x.value().unaryExpr(sp), [x = x.id, sigmoid](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(x, g.cwiseProduct(t.value(x).unaryExpr(sigmoid)));
  });
}

Var score(ScoreKind kind, Var s, Var r, Var o, Var tm) {
  auto sg = score_gradient(kind, s.value().col(0), r.value().col(0), o.value().col(0), tm.value().col(0));
  Eigen::MatrixXd value(1, 1);
  value(0, 0) = sg.value;
  return tape_of(s).record(std::move(value), [s = s.id, r = r.id, o = o.id, tm = tm.id, sg = std::move(sg),
                                              temporal = is_temporal(kind)](Tape& t, const Eigen::MatrixXd& g) {
    const double k = g(0, 0);
    t.accumulate(s, k * sg.ds);
    t.accumulate(r, k * sg.dr);
    t.accumulate(o, k * sg.dobj);
    if (temporal) t.accumulate(tm, k * sg.dt);
  });
}

}  // namespace tkgx
