#pragma once

// Experiment harness: dataset generation, single runs, (B, T) sweeps,
// self-trust scheme comparison and the standalone calibration audit.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proselflc/calibration.hpp"
#include "proselflc/config.hpp"
#include "proselflc/trainer.hpp"

namespace proselflc {

/// Writes data.csv (training rows) and test.csv into `dir`.
void gen_dataset(const BlobSpec& spec, const std::filesystem::path& dir);

struct DatasetPair {
  LabeledDataset train;
  LabeledDataset test;
};

/// Builds or reads the clean train/test data described by the config.
DatasetPair load_datasets(const DatasetConfig& cfg);

struct FinalMetrics {
  double test_accuracy = 0.0;
  double test_conf_top = 0.0;
  double test_conf_all = 0.0;
  double test_gsce_top = 0.0;
  double test_gsce_all = 0.0;
  double test_ece_top = 0.0;  // m = 10
  double test_ece_all = 0.0;  // m = 10, conf_all keyed
  double train_accuracy = 0.0;
  double train_conf_all = 0.0;
  std::optional<double> correct_fitting;
  std::optional<double> wrong_fitting;
  std::optional<double> semantic_correction;
  std::uint64_t dataset_hash = 0;
};

nlohmann::json to_json(const FinalMetrics& m);

struct RunOutcome {
  ExperimentConfig config;  // resolved
  std::vector<CorruptionRecord> corruption;
  TrainResult result;
  FinalMetrics final_metrics;
};

/// Runs one experiment in memory.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes corruption.csv, dynamics.csv, final_metrics.json and
/// resolved_config.json into `dir`.
void write_run_artifacts(const RunOutcome& outcome, const std::filesystem::path& dir);

/// Base config with (B, T) set; training seeds derived from seed xor hash(B, T).
ExperimentConfig sweep_cell_config(const ExperimentConfig& base, double growth,
                                   double temperature);

struct SweepRow {
  double growth = 0.0;
  double temperature = 0.0;
  std::optional<FinalMetrics> metrics;  // nullopt when the cell failed
  std::string error;
};

/// One run per cell on up to `jobs` threads; rows in grid order (B-major).
/// When `out_dir` is set, per-cell artifacts go to out_dir/cells/ and the
/// table to out_dir/sweep.csv.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<double>& growths,
                            const std::vector<double>& temps, unsigned jobs,
                            const std::optional<std::filesystem::path>& out_dir);

/// Header `B,T,final_test_acc,final_conf_all,gsce_all`; failed cells print ERROR.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct SchemeRow {
  std::string scheme;
  FinalMetrics metrics;
};

/// constant (boot_soft, eps = constant_trust), g(t), g(t)*conf_top and
/// g(t)*conf_all, all with annealing and the base config's seeds.
std::vector<ExperimentConfig> scheme_configs(const ExperimentConfig& base);
std::vector<SchemeRow> compare_trust_schemes(const ExperimentConfig& base, unsigned jobs,
                                             const std::optional<std::filesystem::path>& out_dir);
void write_schemes_csv(std::ostream& os, const std::vector<SchemeRow>& rows);

struct AuditRow {
  double temperature = 1.0;
  ConfidenceMode mode = ConfidenceMode::top;
  double accuracy = 0.0;
  double confidence = 0.0;
  double gsce = 0.0;
  EceReport ece;
};

/// Header `z_0,...,z_{c-1},label`; errors name the offending line.
std::vector<LogitRow> read_logits_csv(std::istream& is);

std::vector<AuditRow> audit(const std::vector<LogitRow>& rows, const std::vector<double>& temps,
                            std::size_t m);

/// Writes audit.csv plus one `bin,count,conf,accu,gap` file per row.
void write_audit(const std::vector<AuditRow>& rows, const std::filesystem::path& dir);
void print_audit_summary(std::ostream& os, const std::vector<AuditRow>& rows);

}  // namespace proselflc
