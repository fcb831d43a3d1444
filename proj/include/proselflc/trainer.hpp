#pragma once

// Deterministic minibatch SGD with momentum and step learning-rate decay,
// plus the per-subset dynamics recorder.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "proselflc/dataset.hpp"
#include "proselflc/loss.hpp"
#include "proselflc/model.hpp"
#include "proselflc/prob.hpp"
#include "proselflc/target.hpp"

namespace proselflc {

struct OptimConfig {
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::size_t batch_size = 64;
  std::int64_t total_iters = 4000;
  std::vector<std::int64_t> lr_decay_iters;
  double lr_decay_factor = 10.0;

  void validate() const;
  friend bool operator==(const OptimConfig&, const OptimConfig&) = default;
};

/// The loss family used for training. `trust.iteration` and
/// `trust.total_iterations` are driven by the trainer.
struct MethodConfig {
  Modification mod;
  TrustParams trust;
  bool annealed = false;
  bool local_trust_on_scaled = true;

  friend bool operator==(const MethodConfig& a, const MethodConfig& b) {
    return a.mod.kind == b.mod.kind && a.mod.epsilon == b.mod.epsilon &&
           a.trust.inflection == b.trust.inflection && a.trust.growth == b.trust.growth &&
           a.trust.local_scheme == b.trust.local_scheme &&
           a.trust.temperature == b.trust.temperature && a.annealed == b.annealed &&
           a.local_trust_on_scaled == b.local_trust_on_scaled;
  }
};

/// Iteration counter and momentum buffer.
struct TrainState {
  std::int64_t iteration = 0;
  LayerSet velocity;
};

TrainState init_train_state(const Model& model);

/// lr0 / factor^k, k = number of decay points <= iteration.
double learning_rate(const OptimConfig& optim, std::int64_t iteration);

LossRequest make_loss_request(const MethodConfig& method, std::int64_t iteration,
                              std::int64_t total_iters);

struct BatchGradient {
  double mean_loss = 0.0;
  double mean_trust = 0.0;
  LayerSet grads;
};

/// Mean loss and parameter gradient over `rows` (given labels), targets
/// detached at the current weights.
BatchGradient batch_gradient(const Model& model, const LabeledDataset& data,
                             std::span<const std::size_t> rows, const MethodConfig& method,
                             std::int64_t iteration, std::int64_t total_iters);

struct StepResult {
  double mean_loss = 0.0;
  double mean_trust = 0.0;
};

/// v <- mu v + g + lambda w; w <- w - lr v; advances state.iteration.
StepResult train_step(Model& model, TrainState& state, const LabeledDataset& data,
                      std::span<const std::size_t> rows, const MethodConfig& method,
                      const OptimConfig& optim);

struct SubsetMetrics {
  std::size_t count = 0;
  double accuracy = 0.0;        // prediction == clean label
  double given_accuracy = 0.0;  // prediction == given label
  double conf_top = 0.0;
  double conf_all = 0.0;
  double mean_entropy = 0.0;  // nats
  double mean_entropy_normalized = 0.0;
  double mean_loss = 0.0;  // H(one-hot given, p)
  double gsce_top = 0.0;
  double gsce_all = 0.0;
};

/// Softmax outputs for every row.
std::vector<ProbDist> predict_all(const Model& model, const LabeledDataset& data);

/// Metrics over `rows`; nullopt for an empty subset.
std::optional<SubsetMetrics> evaluate(std::span<const ProbDist> probs,
                                      const LabeledDataset& data,
                                      std::span<const std::size_t> rows);
std::optional<SubsetMetrics> evaluate(const Model& model, const LabeledDataset& data,
                                      std::span<const std::size_t> rows);

struct DynamicsRecord {
  std::int64_t iter = 0;
  double lr = 0.0;
  double mean_trust = 0.0;
  double mean_batch_loss = 0.0;
  std::optional<SubsetMetrics> test;
  std::optional<SubsetMetrics> train;
  std::optional<SubsetMetrics> clean_train;
  std::optional<SubsetMetrics> noisy_train;
  std::optional<double> correct_fitting;
  std::optional<double> wrong_fitting;
  std::optional<double> semantic_correction;
};

DynamicsRecord snapshot(const Model& model, const LabeledDataset& train,
                        const LabeledDataset& test, std::int64_t iter);

struct RunSettings {
  MethodConfig method;
  OptimConfig optim;
  std::uint64_t shuffle_seed = 0;
  std::int64_t snapshot_every = 50;
};

struct TrainResult {
  Model model;
  std::vector<DynamicsRecord> dynamics;
};

/// Trains for optim.total_iters steps over per-epoch seeded shuffles and
/// records a snapshot every `snapshot_every` steps and at termination.
TrainResult train(Model model, const LabeledDataset& train_set, const LabeledDataset& test_set,
                  const RunSettings& settings);

void write_dynamics_csv(std::ostream& os, std::span<const DynamicsRecord> records);

}  // namespace proselflc
