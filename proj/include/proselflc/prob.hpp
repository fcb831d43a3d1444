#pragma once

// Probability-vector primitives shared by every loss and metric.
//
// All math is double precision and natural-log based, so H(u) = ln c.
// Logarithms of probabilities are clamped at kLogClamp to keep exact zeros
// (one-hot targets, clipped targets) finite.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace proselflc {

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kSumTolerance = 1e-9;

/// Normalised, non-negative vector over c >= 2 classes.
class ProbDist {
 public:
  /// Validates sum and sign; throws InvalidInput when violated.
  explicit ProbDist(std::vector<double> probs);
  ProbDist(std::initializer_list<double> probs)
      : ProbDist(std::vector<double>(probs)) {}

  static ProbDist uniform(std::size_t classes);
  static ProbDist one_hot(std::size_t index, std::size_t classes);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const noexcept { return probs_[j]; }
  std::span<const double> values() const noexcept { return probs_; }
  const std::vector<double>& vector() const noexcept { return probs_; }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  struct Unchecked {};
  ProbDist(Unchecked, std::vector<double> probs) : probs_(std::move(probs)) {}
  friend ProbDist softmax(std::span<const double> logits, double temperature);
  friend ProbDist mix(const ProbDist&, const ProbDist&, double);

  std::vector<double> probs_;
};

/// Ground-truth label as a class index.
struct OneHotLabel {
  std::size_t index = 0;
  std::size_t classes = 2;

  ProbDist dist() const { return ProbDist::one_hot(index, classes); }
};

enum class ConfidenceMode { top, all };

/// Throws InvalidInput unless the logits hold >= 2 finite values.
void check_logits(std::span<const double> logits);

/// exp(z_j/T) / sum_v exp(z_v/T), computed with a max shift.
ProbDist softmax(std::span<const double> logits, double temperature = 1.0);

/// -sum p ln p with 0 ln 0 = 0.
double entropy(const ProbDist& p);

/// -sum target_j ln max(p_j, kLogClamp).
double cross_entropy(const ProbDist& target, const ProbDist& p);

/// cross_entropy(a, b) - entropy(a), floored at zero.
double kl_divergence(const ProbDist& a, const ProbDist& b);

/// conf_top = max_j p_j; conf_all = 1 - H(p) / ln c.
double confidence(const ProbDist& p, ConfidenceMode mode);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax_index(std::span<const double> values);
inline std::size_t argmax_index(const ProbDist& p) {
  return argmax_index(p.values());
}

/// (1 - w) a + w b over the same class count; w in [0, 1].
ProbDist mix(const ProbDist& a, const ProbDist& b, double weight);

}  // namespace proselflc
