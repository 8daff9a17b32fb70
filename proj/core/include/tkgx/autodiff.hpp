#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tkgx/decoders.hpp"

namespace tkgx {

using ParamId = std::size_t;

/// Named dense tensors (vectors are n x 1 matrices).
class ParamStore {
 public:
  ParamId add(std::string name, Eigen::MatrixXd value);
  std::optional<ParamId> find(const std::string& name) const;
  ParamId at(const std::string& name) const;  // throws std::out_of_range

  Eigen::MatrixXd& value(ParamId id) { return values_[id]; }
  const Eigen::MatrixXd& value(ParamId id) const { return values_[id]; }
  const std::string& name(ParamId id) const { return names_[id]; }
  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> values_;
  std::map<std::string, ParamId> index_;
};

/// Per-parameter gradient buffers, allocated on first touch.
class Gradients {
 public:
  explicit Gradients(const ParamStore& params);

  Eigen::MatrixXd& at(ParamId id);
  bool touched(ParamId id) const { return touched_[id]; }
  const Eigen::MatrixXd& get(ParamId id) const { return grads_[id]; }
  std::size_t size() const { return grads_.size(); }
  void add(const Gradients& other);
  void clear();

 private:
  std::vector<Eigen::MatrixXd> grads_;
  std::vector<bool> touched_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes_;
};

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Eigen::MatrixXd& value() const;
  double scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
};

/// Reverse-mode recording of a computation over ParamStore values. One tape per
/// forward pass; not thread-safe, but independent tapes over one const ParamStore are.
class Tape {
 public:
  explicit Tape(const ParamStore& params);

  Var constant(Eigen::MatrixXd value);
  /// The whole parameter; repeated calls return the same node.
  Var param(ParamId id);
  /// One row of a parameter as a column vector; repeated calls return the same node.
  Var param_row(ParamId id, Eigen::Index row);

  /// Accumulates d(loss)/d(param) into gradients(). `loss` must be 1 x 1.
  void backward(Var loss);
  const Gradients& gradients() const { return grads_; }
  Gradients& gradients() { return grads_; }

  const Eigen::MatrixXd& value(std::size_t id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  using BackwardFn = std::function<void(Tape&, const Eigen::MatrixXd& grad)>;
  Var record(Eigen::MatrixXd value, BackwardFn backward);
  /// Adds `g` into the gradient of node `id` (valid only during backward).
  void accumulate(std::size_t id, const Eigen::MatrixXd& g);

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    BackwardFn backward;
  };
  const ParamStore* params_;
  Gradients grads_;
  std::vector<Node> nodes_;
  std::map<ParamId, std::size_t> param_nodes_;
  std::map<std::pair<ParamId, Eigen::Index>, std::size_t> row_nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(double c, Var a);
Var cmul(Var a, Var b);
Var matvec(Var w, Var x);
Var concat(std::span<const Var> parts);
Var slice(Var x, Eigen::Index start, Eigen::Index length);
Var tanh(Var x);
/// Sum_i weights[i] * parts[i]; all parts share one shape.
Var weighted_sum(std::span<const Var> parts, std::span<const double> weights);
Var sum(std::span<const Var> parts);
/// Elementwise log(1 + exp(x)), overflow-safe.
Var softplus(Var x);
/// 1 x 1 score of (s, r, o, t) with the analytic decoder gradient.
Var score(ScoreKind kind, Var s, Var r, Var o, Var t);

}  // namespace tkgx
