#include "proselflc/prob.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "proselflc/errors.hpp"

namespace proselflc {

namespace {

void require_same_size(const ProbDist& a, const ProbDist& b) {
  if (a.size() != b.size()) {
    throw ShapeError("distribution sizes differ: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
}

double clamped_log(double v) { return std::log(std::max(v, kLogClamp)); }

}  // namespace

ProbDist::ProbDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw InvalidInput("distribution needs >= 2 classes");
  double sum = 0.0;
  for (double v : probs_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("distribution entry is negative or non-finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidInput("distribution does not sum to 1 (sum=" +
                       std::to_string(sum) + ")");
  }
}

ProbDist ProbDist::uniform(std::size_t classes) {
  if (classes < 2) throw InvalidInput("distribution needs >= 2 classes");
  return ProbDist(Unchecked{},
                  std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

ProbDist ProbDist::one_hot(std::size_t index, std::size_t classes) {
  if (classes < 2) throw InvalidInput("distribution needs >= 2 classes");
  if (index >= classes) {
    throw InvalidInput("class index " + std::to_string(index) +
                       " out of range for c=" + std::to_string(classes));
  }
  std::vector<double> v(classes, 0.0);
  v[index] = 1.0;
  return ProbDist(Unchecked{}, std::move(v));
}

void check_logits(std::span<const double> logits) {
  if (logits.size() < 2) throw InvalidInput("logit vector needs >= 2 entries");
  for (double z : logits) {
    if (!std::isfinite(z)) throw InvalidInput("logit vector has a non-finite entry");
  }
}

ProbDist softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidParameter("temperature must be positive and finite");
  }
  check_logits(logits);
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp((logits[j] - zmax) / temperature);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return ProbDist(ProbDist::Unchecked{}, std::move(out));
}

double entropy(const ProbDist& p) {
  double h = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(h, 0.0);
}

double cross_entropy(const ProbDist& target, const ProbDist& p) {
  require_same_size(target, p);
  double h = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (target[j] != 0.0) h -= target[j] * clamped_log(p[j]);
  }
  return h;
}

double kl_divergence(const ProbDist& a, const ProbDist& b) {
  return std::max(cross_entropy(a, b) - entropy(a), 0.0);
}

double confidence(const ProbDist& p, ConfidenceMode mode) {
  if (mode == ConfidenceMode::top) {
    return *std::max_element(p.values().begin(), p.values().end());
  }
  const double c = static_cast<double>(p.size());
  return std::clamp(1.0 - entropy(p) / std::log(c), 0.0, 1.0);
}

std::size_t argmax_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

ProbDist mix(const ProbDist& a, const ProbDist& b, double weight) {
  require_same_size(a, b);
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw InvalidParameter("mixture weight must lie in [0, 1]");
  }
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    out[j] = (1.0 - weight) * a[j] + weight * b[j];
  }
  return ProbDist(ProbDist::Unchecked{}, std::move(out));
}

}  // namespace proselflc
