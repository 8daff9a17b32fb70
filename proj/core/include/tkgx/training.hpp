#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "tkgx/encoder.hpp"
#include "tkgx/ingest.hpp"

namespace tkgx {

struct TrainConfig {
  ModelConfig model;
  double gamma = 6.0;     // margin
  int n_neg = 64;         // negatives per positive
  double alpha = 1.0;     // self-adversarial temperature
  double lr = 0.001;
  double reg = 0.0;       // time smoothness weight
  int batch_tasks = 64;
  int epochs = 1;
  long max_steps = -1;    // < 0: no cap beyond epochs
  int threads = 1;
  std::uint64_t seed = 0;
  // Early stopping on a validation metric (higher is better); 0 disables.
  int early_stop_patience = 0;
  // Plain-embedding (baseline) training.
  int plain_epochs = 50;
  int plain_batch = 128;

  void validate() const;  // throws std::invalid_argument
};

/// Non-finite loss during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n corruptions of q: per sample a coin picks the subject or object side, which is
/// replaced by a uniform draw from `candidates`; q itself is rejected and redrawn.
std::vector<Quadruple> negative_sample(const Quadruple& q, std::span<const EntityId> candidates, int n,
                                       std::mt19937_64& rng);

/// softmax(alpha * scores), max-subtracted.
std::vector<double> self_adv_weights(std::span<const double> scores, double alpha);

/// Self-adversarial negative-sampling loss averaged over the task's embeddable queries.
/// Negatives are drawn from the embedded entities; the weights carry no gradient.
Var task_loss(Tape& tape, const TaskSample& task, const EncodedVars& emb, const TrainConfig& cfg,
              std::mt19937_64& rng);
double task_loss(const TaskSample& task, const EmbeddingSet& emb, const TrainConfig& cfg, std::mt19937_64& rng);

/// reg * sum_i ||rows[i+1] - rows[i]||^2 over the listed rows (chronological order).
double time_regularizer(const Eigen::MatrixXd& table, std::span<const TimeId> chronological, double reg);
/// Adds the regularizer's gradient into `grad` (same shape as table).
void add_time_regularizer_gradient(const Eigen::MatrixXd& table, std::span<const TimeId> chronological, double reg,
                                   Eigen::MatrixXd& grad);

/// Adam with constant learning rate.
class Adam {
 public:
  Adam(const ParamStore& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(ParamStore& params, const Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

struct LossRecord {
  long step = 0;
  int epoch = 0;
  double loss = 0.0;         // sum of task losses + reg_penalty
  double reg_penalty = 0.0;
};

void write_loss_trace(std::ostream& os, std::span<const LossRecord> trace);

/// Loss and gradient of the summed loss over a batch of tasks.
struct BatchResult {
  double loss = 0.0;
  Gradients grads;
  std::size_t tasks_used = 0;
};

/// Evaluates tasks (in parallel when threads > 1) and reduces in task order, so the
/// result does not depend on the thread count. `first_task_id` seeds each task's rng.
BatchResult batch_loss_and_gradient(const Model& model, std::span<const TaskSample* const> tasks,
                                    const TrainConfig& cfg, std::uint64_t rng_base);

struct TrainResult {
  Model model;
  std::vector<LossRecord> trace;
  std::vector<double> validation;  // metric per epoch when early stopping is on
};

using ValidationFn = std::function<double(const Model&)>;

/// Meta-training over pre-sampled tasks in shuffled epochs of batch_tasks-sized steps.
TrainResult meta_train(const Tkg& train, std::span<const TaskSample> tasks, const TrainConfig& cfg,
                       const ValidationFn& validation = {});
/// Samples sampler.task_count tasks from `train` first.
TrainResult meta_train(const Tkg& train, const TrainConfig& cfg, const SamplerConfig& sampler,
                       const ValidationFn& validation = {});

/// Conventional embedding training (free tables, no encoder) used by the closed-form
/// inference baseline.
struct PlainTrainResult {
  AsmpTables tables;
  std::vector<LossRecord> trace;
};
PlainTrainResult train_plain_embeddings(const Tkg& train, const TrainConfig& cfg);

}  // namespace tkgx
