#include "proselflc/trainer.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "proselflc/errors.hpp"
#include "proselflc/format.hpp"
#include "proselflc/rng.hpp"

namespace proselflc {

void OptimConfig::validate() const {
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw InvalidParameter("optim.lr0 must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidParameter("optim.momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw InvalidParameter("optim.weight_decay must be >= 0");
  if (batch_size == 0) throw InvalidParameter("optim.batch_size must be >= 1");
  if (total_iters < 0) throw InvalidParameter("optim.total_iters must be >= 0");
  if (!(lr_decay_factor > 0.0)) throw InvalidParameter("optim.lr_decay_factor must be > 0");
  for (std::size_t i = 0; i < lr_decay_iters.size(); ++i) {
    if (lr_decay_iters[i] < 0 || lr_decay_iters[i] >= std::max<std::int64_t>(total_iters, 1) ||
        (i > 0 && lr_decay_iters[i] <= lr_decay_iters[i - 1])) {
      throw InvalidParameter(
          "optim.lr_decay_iters must be strictly increasing and below total_iters");
    }
  }
}

TrainState init_train_state(const Model& model) { return {0, zeros_like(model.layers)}; }

double learning_rate(const OptimConfig& optim, std::int64_t iteration) {
  double lr = optim.lr0;
  for (std::int64_t at : optim.lr_decay_iters) {
    if (iteration >= at) lr /= optim.lr_decay_factor;
  }
  return lr;
}

LossRequest make_loss_request(const MethodConfig& method, std::int64_t iteration,
                              std::int64_t total_iters) {
  LossRequest req;
  req.mod = method.mod;
  req.annealed = method.annealed;
  req.local_trust_on_scaled = method.local_trust_on_scaled;
  TrustParams trust = method.trust;
  trust.total_iterations = std::max<std::int64_t>(total_iters, 1);
  trust.iteration = std::min(iteration, trust.total_iterations);
  req.trust = trust;
  return req;
}

BatchGradient batch_gradient(const Model& model, const LabeledDataset& data,
                             std::span<const std::size_t> rows, const MethodConfig& method,
                             std::int64_t iteration, std::int64_t total_iters) {
  if (rows.empty()) throw InvalidInput("batch is empty");
  const LossRequest req = make_loss_request(method, iteration, total_iters);
  BatchGradient out;
  out.grads = zeros_like(model.layers);
  const double scale = 1.0 / static_cast<double>(rows.size());
  ForwardCache cache;
  for (std::size_t i : rows) {
    const auto x = data.row(i);
    forward(model, x, cache);
    const LossEvaluation eval =
        evaluate_loss(req, OneHotLabel{data.given[i], data.classes}, cache.logits);
    out.mean_loss += eval.breakdown.total * scale;
    out.mean_trust += eval.breakdown.trust_used * scale;
    backward(model, x, cache, eval.gradient, scale, out.grads);
  }
  return out;
}

StepResult train_step(Model& model, TrainState& state, const LabeledDataset& data,
                      std::span<const std::size_t> rows, const MethodConfig& method,
                      const OptimConfig& optim) {
  if (state.velocity.size() != model.layers.size()) state.velocity = zeros_like(model.layers);
  BatchGradient g =
      batch_gradient(model, data, rows, method, state.iteration, optim.total_iters);
  const double lr = learning_rate(optim, state.iteration);
  const double mu = optim.momentum;
  const double wd = optim.weight_decay;
  auto update = [&](std::vector<double>& w, std::vector<double>& v,
                    const std::vector<double>& grad) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      v[k] = mu * v[k] + grad[k] + wd * w[k];
      w[k] -= lr * v[k];
    }
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weights, state.velocity[l].weights, g.grads[l].weights);
    update(model.layers[l].bias, state.velocity[l].bias, g.grads[l].bias);
  }
  state.iteration += 1;
  return {g.mean_loss, g.mean_trust};
}

std::vector<ProbDist> predict_all(const Model& model, const LabeledDataset& data) {
  std::vector<ProbDist> out;
  out.reserve(data.size());
  ForwardCache cache;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(model, data.row(i), cache);
    out.push_back(softmax(cache.logits, 1.0));
  }
  return out;
}

std::optional<SubsetMetrics> evaluate(std::span<const ProbDist> probs,
                                      const LabeledDataset& data,
                                      std::span<const std::size_t> rows) {
  if (rows.empty()) return std::nullopt;
  SubsetMetrics m;
  m.count = rows.size();
  const double log_c = std::log(static_cast<double>(data.classes));
  std::size_t hit_clean = 0, hit_given = 0;
  for (std::size_t i : rows) {
    const ProbDist& p = probs[i];
    const std::size_t pred = argmax_index(p);
    hit_clean += pred == data.clean[i];
    hit_given += pred == data.given[i];
    m.conf_top += confidence(p, ConfidenceMode::top);
    m.conf_all += confidence(p, ConfidenceMode::all);
    m.mean_entropy += entropy(p);
    m.mean_loss -= std::log(std::max(p[data.given[i]], kLogClamp));
  }
  const double n = static_cast<double>(rows.size());
  m.accuracy = static_cast<double>(hit_clean) / n;
  m.given_accuracy = static_cast<double>(hit_given) / n;
  m.conf_top /= n;
  m.conf_all /= n;
  m.mean_entropy /= n;
  m.mean_entropy_normalized = m.mean_entropy / log_c;
  m.mean_loss /= n;
  m.gsce_top = m.conf_top - m.accuracy;
  m.gsce_all = m.conf_all - m.accuracy;
  return m;
}

std::optional<SubsetMetrics> evaluate(const Model& model, const LabeledDataset& data,
                                      std::span<const std::size_t> rows) {
  const auto probs = predict_all(model, data);
  return evaluate(probs, data, rows);
}

DynamicsRecord snapshot(const Model& model, const LabeledDataset& train,
                        const LabeledDataset& test, std::int64_t iter) {
  DynamicsRecord rec;
  rec.iter = iter;
  const auto train_probs = predict_all(model, train);
  std::vector<std::size_t> all(train.size()), clean_rows, noisy_rows;
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i : all) (train.flipped(i) ? noisy_rows : clean_rows).push_back(i);
  rec.train = evaluate(train_probs, train, all);
  rec.clean_train = evaluate(train_probs, train, clean_rows);
  rec.noisy_train = evaluate(train_probs, train, noisy_rows);
  if (test.size() > 0) {
    const auto test_probs = predict_all(model, test);
    std::vector<std::size_t> test_rows(test.size());
    std::iota(test_rows.begin(), test_rows.end(), std::size_t{0});
    rec.test = evaluate(test_probs, test, test_rows);
  }
  if (rec.clean_train) rec.correct_fitting = rec.clean_train->accuracy;
  if (rec.noisy_train) {
    rec.wrong_fitting = rec.noisy_train->given_accuracy;
    rec.semantic_correction = rec.noisy_train->accuracy;
  }
  return rec;
}

TrainResult train(Model model, const LabeledDataset& train_set, const LabeledDataset& test_set,
                  const RunSettings& settings) {
  settings.optim.validate();
  if (train_set.size() == 0) throw InvalidInput("training set is empty");
  if (train_set.dim != model.config.input_dim || train_set.classes != model.config.classes) {
    throw ShapeError("dataset shape does not match the model");
  }
  const std::int64_t total = settings.optim.total_iters;
  TrainResult result;
  TrainState state = init_train_state(model);
  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::size_t cursor = n;
  std::uint64_t epoch = 0;
  double trust_sum = 0.0, loss_sum = 0.0;
  std::int64_t steps = 0;
  for (std::int64_t t = 0; t < total; ++t) {
    if (cursor >= n) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      SplitMix64 rng(derive_seed(settings.shuffle_seed, epoch++));
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
      }
      cursor = 0;
    }
    const std::size_t len = std::min(settings.optim.batch_size, n - cursor);
    const std::span<const std::size_t> batch(order.data() + cursor, len);
    cursor += len;
    const double lr = learning_rate(settings.optim, state.iteration);
    const StepResult step =
        train_step(model, state, train_set, batch, settings.method, settings.optim);
    trust_sum += step.mean_trust;
    loss_sum += step.mean_loss;
    ++steps;
    const std::int64_t done = t + 1;
    const bool due = settings.snapshot_every > 0 && done % settings.snapshot_every == 0;
    if (due || done == total) {
      DynamicsRecord rec = snapshot(model, train_set, test_set, done);
      rec.lr = lr;
      rec.mean_trust = trust_sum / static_cast<double>(steps);
      rec.mean_batch_loss = loss_sum / static_cast<double>(steps);
      result.dynamics.push_back(std::move(rec));
      trust_sum = loss_sum = 0.0;
      steps = 0;
    }
  }
  result.model = std::move(model);
  return result;
}

namespace {

constexpr const char* kSubsetColumns[] = {"count",     "acc",          "given_acc",
                                          "conf_top",  "conf_all",     "entropy_nats",
                                          "entropy_norm", "loss"};

void write_subset(std::ostream& os, const std::optional<SubsetMetrics>& m) {
  if (!m) {
    for (std::size_t k = 0; k < std::size(kSubsetColumns); ++k) os << ",NA";
    return;
  }
  os << ',' << m->count << ',' << format_double(m->accuracy) << ','
     << format_double(m->given_accuracy) << ',' << format_double(m->conf_top) << ','
     << format_double(m->conf_all) << ',' << format_double(m->mean_entropy) << ','
     << format_double(m->mean_entropy_normalized) << ',' << format_double(m->mean_loss);
}

void write_optional(std::ostream& os, const std::optional<double>& v) {
  os << ',' << (v ? format_double(*v) : std::string("NA"));
}

}  // namespace

void write_dynamics_csv(std::ostream& os, std::span<const DynamicsRecord> records) {
  os << "iter,lr,mean_trust,mean_batch_loss";
  for (const char* subset : {"test", "train", "clean_train", "noisy_train"}) {
    for (const char* col : kSubsetColumns) os << ',' << subset << '_' << col;
  }
  os << ",correct_fitting,wrong_fitting,semantic_correction\n";
  for (const auto& r : records) {
    os << r.iter << ',' << format_double(r.lr) << ',' << format_double(r.mean_trust) << ','
       << format_double(r.mean_batch_loss);
    write_subset(os, r.test);
    write_subset(os, r.train);
    write_subset(os, r.clean_train);
    write_subset(os, r.noisy_train);
    write_optional(os, r.correct_fitting);
    write_optional(os, r.wrong_fitting);
    write_optional(os, r.semantic_correction);
    os << '\n';
  }
}

}  // namespace proselflc
