#pragma once

// Dataset-level calibration metrics: accuracy, mean confidence, the signed
// single-bin GSCE and the equal-width binned ECE.

#include <cstddef>
#include <span>
#include <vector>

#include "proselflc/prob.hpp"

namespace proselflc {

struct PredictionRow {
  ProbDist probs;
  std::size_t label = 0;
};

/// Non-empty set of predictions sharing one class count.
class PredictionSet {
 public:
  explicit PredictionSet(std::vector<PredictionRow> rows);

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t classes() const noexcept { return classes_; }
  std::span<const PredictionRow> rows() const noexcept { return rows_; }

 private:
  std::vector<PredictionRow> rows_;
  std::size_t classes_ = 0;
};

struct EceBin {
  std::size_t count = 0;
  double conf_mean = 0.0;
  double accuracy = 0.0;
  double signed_gap = 0.0;  // conf_mean - accuracy
};

struct EceReport {
  double ece = 0.0;
  std::vector<EceBin> bins;
  std::size_t m = 0;
};

double accuracy(const PredictionSet& ps);
double mean_confidence(const PredictionSet& ps, ConfidenceMode mode);
/// mean confidence - accuracy; positive means over-confident.
double gsce(const PredictionSet& ps, ConfidenceMode mode);

/// Bin i covers (i/m, (i+1)/m]; a confidence of exactly 0 lands in bin 0.
std::size_t ece_bin_index(double conf, std::size_t m);

/// Rows are keyed and averaged by `mode` confidence (conf_top by default).
EceReport ece(const PredictionSet& ps, std::size_t m,
              ConfidenceMode mode = ConfidenceMode::top);

struct LogitRow {
  std::vector<double> logits;
  std::size_t label = 0;
};

struct TemperatureEce {
  double temperature = 1.0;
  double ece = 0.0;
  double gsce = 0.0;
};

/// Re-softmaxes every row at each temperature and reports ECE and GSCE.
std::vector<TemperatureEce> temperature_sweep_ece(std::span<const LogitRow> rows,
                                                  std::span<const double> temps,
                                                  ConfidenceMode mode, std::size_t m);

}  // namespace proselflc
