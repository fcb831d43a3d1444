#include "proselflc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "proselflc/errors.hpp"

namespace proselflc {

PredictionSet::PredictionSet(std::vector<PredictionRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw InvalidInput("prediction set is empty");
  classes_ = rows_.front().probs.size();
  for (const auto& r : rows_) {
    if (r.probs.size() != classes_) throw ShapeError("prediction rows differ in class count");
    if (r.label >= classes_) {
      throw InvalidInput("label " + std::to_string(r.label) + " out of range");
    }
  }
}

double accuracy(const PredictionSet& ps) {
  std::size_t hits = 0;
  for (const auto& r : ps.rows()) hits += argmax_index(r.probs) == r.label;
  return static_cast<double>(hits) / static_cast<double>(ps.size());
}

double mean_confidence(const PredictionSet& ps, ConfidenceMode mode) {
  double sum = 0.0;
  for (const auto& r : ps.rows()) sum += confidence(r.probs, mode);
  return sum / static_cast<double>(ps.size());
}

double gsce(const PredictionSet& ps, ConfidenceMode mode) {
  return mean_confidence(ps, mode) - accuracy(ps);
}

std::size_t ece_bin_index(double conf, std::size_t m) {
  if (conf <= 0.0) return 0;
  // (i/m, (i+1)/m] -> i = ceil(conf * m) - 1
  const double scaled = std::ceil(conf * static_cast<double>(m));
  const auto idx = static_cast<std::size_t>(std::max(scaled, 1.0)) - 1;
  return std::min(idx, m - 1);
}

EceReport ece(const PredictionSet& ps, std::size_t m, ConfidenceMode mode) {
  if (m == 0) throw InvalidParameter("ece: bin count must be >= 1");
  EceReport report;
  report.m = m;
  report.bins.assign(m, EceBin{});
  std::vector<double> conf_sum(m, 0.0);
  std::vector<std::size_t> hits(m, 0);
  for (const auto& r : ps.rows()) {
    const double conf = confidence(r.probs, mode);
    const std::size_t i = ece_bin_index(conf, m);
    report.bins[i].count += 1;
    conf_sum[i] += conf;
    hits[i] += argmax_index(r.probs) == r.label;
  }
  const double n = static_cast<double>(ps.size());
  for (std::size_t i = 0; i < m; ++i) {
    EceBin& bin = report.bins[i];
    if (bin.count == 0) continue;
    const double cnt = static_cast<double>(bin.count);
    bin.conf_mean = conf_sum[i] / cnt;
    bin.accuracy = static_cast<double>(hits[i]) / cnt;
    bin.signed_gap = bin.conf_mean - bin.accuracy;
    report.ece += std::abs(bin.signed_gap) * (cnt / n);
  }
  return report;
}

std::vector<TemperatureEce> temperature_sweep_ece(std::span<const LogitRow> rows,
                                                  std::span<const double> temps,
                                                  ConfidenceMode mode, std::size_t m) {
  for (double t : temps) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw InvalidParameter("temperatures must be positive");
    }
  }
  std::vector<TemperatureEce> out;
  out.reserve(temps.size());
  for (double t : temps) {
    std::vector<PredictionRow> pred;
    pred.reserve(rows.size());
    for (const auto& r : rows) pred.push_back({softmax(r.logits, t), r.label});
    const PredictionSet ps(std::move(pred));
    out.push_back({t, ece(ps, m, mode).ece, gsce(ps, mode)});
  }
  return out;
}

}  // namespace proselflc
