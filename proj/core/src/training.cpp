#include "tkgx/training.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

namespace tkgx {

void TrainConfig::validate() const {
  model.validate();
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (n_neg <= 0) throw std::invalid_argument("n_neg must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(reg >= 0.0)) throw std::invalid_argument("reg must be >= 0");
  if (batch_tasks <= 0) throw std::invalid_argument("batch_tasks must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (threads <= 0) throw std::invalid_argument("threads must be positive");
  if (plain_epochs < 0 || plain_batch <= 0) throw std::invalid_argument("invalid plain training budget");
}

std::vector<Quadruple> negative_sample(const Quadruple& q, std::span<const EntityId> candidates, int n,
                                       std::mt19937_64& rng) {
  if (n <= 0) return {};
  if (candidates.empty()) throw std::invalid_argument("negative sampling needs candidate entities");
  const bool alt_s = std::any_of(candidates.begin(), candidates.end(), [&](EntityId e) { return e != q.s; });
  const bool alt_o = std::any_of(candidates.begin(), candidates.end(), [&](EntityId e) { return e != q.o; });
  if (!alt_s && !alt_o) throw std::invalid_argument("no valid negative: the only candidate is the true entity");

  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<Quadruple> out;
  out.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(out.size()) < n) {
    bool corrupt_subject = coin(rng);
    if (corrupt_subject && !alt_s) corrupt_subject = false;
    if (!corrupt_subject && !alt_o) corrupt_subject = true;
    Quadruple neg = q;
    (corrupt_subject ? neg.s : neg.o) = candidates[pick(rng)];
    if (neg == q) continue;
    out.push_back(neg);
  }
  return out;
}

std::vector<double> self_adv_weights(std::span<const double> scores, double alpha) {
  if (scores.empty()) return {};
  double mx = -std::numeric_limits<double>::infinity();
  for (double s : scores) mx = std::max(mx, alpha * s);
  std::vector<double> w(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) z += (w[i] = std::exp(alpha * scores[i] - mx));
  for (double& x : w) x /= z;
  return w;
}

Var task_loss(Tape& tape, const TaskSample& task, const EncodedVars& emb, const TrainConfig& cfg,
              std::mt19937_64& rng) {
  if (task.query.empty()) throw DataError("task has an empty query set");
  std::vector<const Quadruple*> usable;
  for (const auto& q : task.query)
    if (emb.covers(q)) usable.push_back(&q);
  if (usable.empty()) throw DataError("no query fact of the task can be embedded");

  std::vector<EntityId> candidates;
  for (const auto& [e, v] : emb.entity) candidates.push_back(e);

  const ScoreKind kind = cfg.model.score_kind;
  const double per_query = 1.0 / static_cast<double>(usable.size());
  std::vector<Var> terms;
  std::vector<double> weights;
  const Var gamma = tape.constant(Eigen::MatrixXd::Constant(1, 1, cfg.gamma));
  for (const Quadruple* q : usable) {
    const Var r = emb.relation.at(q->r), t = emb.timestamp.at(q->t);
    const Var pos = score(kind, emb.entity.at(q->s), r, emb.entity.at(q->o), t);
    // -log sigmoid(gamma + phi) = softplus(-(gamma + phi))
    terms.push_back(softplus(-1.0 * (gamma + pos)));
    weights.push_back(per_query);

    const auto negs = negative_sample(*q, candidates, cfg.n_neg, rng);
    std::vector<Var> neg_scores;
    std::vector<double> values;
    for (const auto& n : negs) {
      neg_scores.push_back(score(kind, emb.entity.at(n.s), r, emb.entity.at(n.o), t));
      values.push_back(neg_scores.back().scalar());
    }
    const auto p = self_adv_weights(values, cfg.alpha);
    for (std::size_t j = 0; j < neg_scores.size(); ++j) {
      // -log sigmoid(-gamma - phi') = softplus(gamma + phi')
      terms.push_back(softplus(gamma + neg_scores[j]));
      weights.push_back(per_query * p[j]);
    }
  }
  return weighted_sum(terms, weights);
}

double task_loss(const TaskSample& task, const EmbeddingSet& emb, const TrainConfig& cfg, std::mt19937_64& rng) {
  ParamStore none;
  Tape tape(none);
  EncodedVars vars;
  for (const auto& [id, v] : emb.entity) vars.entity.emplace(id, tape.constant(v));
  for (const auto& [id, v] : emb.relation) vars.relation.emplace(id, tape.constant(v));
  for (const auto& [id, v] : emb.timestamp) vars.timestamp.emplace(id, tape.constant(v));
  return task_loss(tape, task, vars, cfg, rng).scalar();
}

double time_regularizer(const Eigen::MatrixXd& table, std::span<const TimeId> chronological, double reg) {
  if (reg == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < chronological.size(); ++i)
    acc += (table.row(chronological[i]) - table.row(chronological[i - 1])).squaredNorm();
  return reg * acc;
}

void add_time_regularizer_gradient(const Eigen::MatrixXd& table, std::span<const TimeId> chronological, double reg,
                                   Eigen::MatrixXd& grad) {
  if (reg == 0.0) return;
  for (std::size_t i = 1; i < chronological.size(); ++i) {
    const Eigen::RowVectorXd diff = 2.0 * reg * (table.row(chronological[i]) - table.row(chronological[i - 1]));
    grad.row(chronological[i]) += diff;
    grad.row(chronological[i - 1]) -= diff;
  }
}

Adam::Adam(const ParamStore& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (ParamId i = 0; i < params.size(); ++i) {
    m_.push_back(Eigen::MatrixXd::Zero(params.value(i).rows(), params.value(i).cols()));
    v_.push_back(m_.back());
  }
}

void Adam::step(ParamStore& params, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (ParamId i = 0; i < params.size(); ++i) {
    if (grads.touched(i)) {
      const auto& g = grads.get(i);
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    } else {
      m_[i] *= beta1_;
      v_[i] *= beta2_;
    }
    params.value(i).array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

void write_loss_trace(std::ostream& os, std::span<const LossRecord> trace) {
  os << "step,loss,reg_penalty\n";
  os.precision(17);
  for (const auto& r : trace) os << r.step << ',' << r.loss << ',' << r.reg_penalty << '\n';
}

namespace {

std::mt19937_64 task_rng(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

BatchResult batch_loss_and_gradient(const Model& model, std::span<const TaskSample* const> tasks,
                                    const TrainConfig& cfg, std::uint64_t rng_base) {
  struct Slot {
    double loss = 0.0;
    std::optional<Gradients> grads;
  };
  std::vector<Slot> slots(tasks.size());
  const auto& params = model.params();
  const Encoder enc = model.encoder();
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    const TaskSample& task = *tasks[i];
    Tape tape(params);
    auto rng = task_rng(rng_base, i);
    const EncodedVars emb = enc.encode(tape, task, false);
    bool any = false;
    for (const auto& q : task.query) any = any || emb.covers(q);
    if (!any) return;
    const Var loss = task_loss(tape, task, emb, cfg, rng);
    tape.backward(loss);
    slots[i].loss = loss.scalar();
    slots[i].grads = std::move(tape.gradients());
  });

  BatchResult out{0.0, Gradients(params), 0};
  for (const auto& s : slots) {
    if (!s.grads) continue;
    out.loss += s.loss;
    out.grads.add(*s.grads);
    ++out.tasks_used;
  }
  return out;
}

TrainResult meta_train(const Tkg& train, std::span<const TaskSample> tasks, const TrainConfig& cfg,
                       const ValidationFn& validation) {
  cfg.validate();
  if (train.empty()) throw DataError("training graph is empty");
  const VocabSizes sizes{train.entities().size(), train.relations().size(), train.timestamps().size()};
  TrainResult result{Model(cfg.model, sizes, cfg.seed), {}, {}};
  Model& model = result.model;
  Adam adam(model.params(), cfg.lr);
  const auto chronological = train.active_timestamps();
  const ParamId time_table = model.ids().time_table;

  std::mt19937_64 order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(tasks.size());
  std::optional<Model> best;
  double best_metric = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs && !tasks.empty(); ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_tasks)) {
      if (cfg.max_steps >= 0 && step >= cfg.max_steps) break;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_tasks));
      std::vector<const TaskSample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&tasks[order[i]]);

      BatchResult br = batch_loss_and_gradient(model, batch, cfg,
                                               cfg.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(step));
      if (!std::isfinite(br.loss)) {
        // Locate the offending task for the diagnostic.
        for (std::size_t i = 0; i < batch.size(); ++i) {
          const TaskSample* one[] = {batch[i]};
          if (!std::isfinite(batch_loss_and_gradient(model, one, cfg, 0).loss))
            throw TrainingError("non-finite loss at step " + std::to_string(step) + " (task " +
                                std::to_string(order[start + i]) + ")");
        }
        throw TrainingError("non-finite loss at step " + std::to_string(step));
      }
      const double penalty = time_regularizer(model.params().value(time_table), chronological, cfg.reg);
      if (cfg.reg > 0.0)
        add_time_regularizer_gradient(model.params().value(time_table), chronological, cfg.reg,
                                      br.grads.at(time_table));
      adam.step(model.params(), br.grads);
      result.trace.push_back({step, epoch, br.loss + penalty, penalty});
      ++step;
    }
    if (cfg.max_steps >= 0 && step >= cfg.max_steps) break;
    if (validation && cfg.early_stop_patience > 0) {
      const double metric = validation(model);
      result.validation.push_back(metric);
      if (metric > best_metric) {
        best_metric = metric;
        best.emplace(model);
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }
  if (best) {
    for (ParamId i = 0; i < model.params().size(); ++i) model.params().value(i) = best->params().value(i);
  }
  return result;
}

TrainResult meta_train(const Tkg& train, const TrainConfig& cfg, const SamplerConfig& sampler,
                       const ValidationFn& validation) {
  if (train.empty()) throw DataError("training graph is empty");
  const auto tasks = sample_tasks(train, sampler);
  return meta_train(train, tasks, cfg, validation);
}

PlainTrainResult train_plain_embeddings(const Tkg& train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw DataError("training graph is empty");
  std::mt19937_64 rng(cfg.seed);
  const auto d = static_cast<Eigen::Index>(cfg.model.dim);
  std::normal_distribution<double> init(0.0, cfg.model.init_std);
  auto table = [&](std::size_t rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), d);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = init(rng);
    return m;
  };
  ParamStore params;
  const ParamId ent = params.add("entity_table", table(train.entities().size()));
  const ParamId rel = params.add("relation_table", table(train.relations().size()));
  const ParamId tim = params.add("time_table", table(train.timestamps().size()));
  Adam adam(params, cfg.lr);

  const auto entities = train.active_entities();
  const auto chronological = train.active_timestamps();
  std::vector<Quadruple> facts = train.quads();
  PlainTrainResult out;
  long step = 0;
  for (int epoch = 0; epoch < cfg.plain_epochs; ++epoch) {
    std::shuffle(facts.begin(), facts.end(), rng);
    for (std::size_t start = 0; start < facts.size(); start += static_cast<std::size_t>(cfg.plain_batch)) {
      const std::size_t end = std::min(facts.size(), start + static_cast<std::size_t>(cfg.plain_batch));
      Tape tape(params);
      TaskSample batch;
      batch.query.assign(facts.begin() + static_cast<std::ptrdiff_t>(start),
                         facts.begin() + static_cast<std::ptrdiff_t>(end));
      EncodedVars emb;
      for (EntityId e : entities) emb.entity.emplace(e, tape.param_row(ent, e));
      for (const auto& q : batch.query) {
        emb.relation.emplace(q.r, tape.param_row(rel, q.r));
        emb.timestamp.emplace(q.t, tape.param_row(tim, q.t));
      }
      const Var loss = task_loss(tape, batch, emb, cfg, rng);
      tape.backward(loss);
      Gradients grads = std::move(tape.gradients());
      const double penalty = time_regularizer(params.value(tim), chronological, cfg.reg);
      if (cfg.reg > 0.0) add_time_regularizer_gradient(params.value(tim), chronological, cfg.reg, grads.at(tim));
      if (!std::isfinite(loss.scalar())) throw TrainingError("non-finite loss at step " + std::to_string(step));
      adam.step(params, grads);
      out.trace.push_back({step++, epoch, loss.scalar() + penalty, penalty});
    }
  }
  out.tables.entity = params.value(ent);
  out.tables.relation = params.value(rel);
  out.tables.time = params.value(tim);
  for (const auto& q : train.quads()) {
    out.tables.trained_entities.insert({q.s, q.o});
    out.tables.trained_relations.insert(q.r);
    out.tables.trained_timestamps.insert(q.t);
  }
  return out;
}

}  // namespace tkgx
