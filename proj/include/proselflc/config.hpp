#pragma once

// Experiment configuration and its JSON schema. Every field has a default;
// seeds that are not given explicitly are derived from the top-level seed,
// and lr_decay_iters defaults to {total/2, 3*total/4}.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "proselflc/dataset.hpp"
#include "proselflc/model.hpp"
#include "proselflc/noise.hpp"
#include "proselflc/trainer.hpp"

namespace proselflc {

/// Parse failure naming the offending field, e.g. `optim.lr0`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class DatasetKind { blobs, csv };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::blobs;
  BlobSpec blobs;
  std::string csv_path;
  std::string test_csv_path;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  NoisePlan noise;
  MethodConfig method{Modification{ModKind::proselflc, 0.0},
                      TrustParams{0, 1, 0.5, 16.0, LocalTrustScheme::conf_all, 0.5},
                      /*annealed=*/true, /*local_trust_on_scaled=*/true};
  /// input_dim and classes are taken from the dataset at run time.
  ModelConfig model;
  std::uint64_t model_seed = 0;
  OptimConfig optim;
  std::uint64_t shuffle_seed = 0;
  std::int64_t snapshot_every = 50;
  std::string output_dir = "out";
  /// Fixed trust of the "constant" scheme in compare-schemes.
  double constant_trust = 0.5;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-domain values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Every field materialised, including derived seeds.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Semantic checks shared by the parser and programmatic callers.
void validate(const ExperimentConfig& cfg);

}  // namespace proselflc
