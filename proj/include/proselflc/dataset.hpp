#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "proselflc/noise.hpp"

namespace proselflc {

/// Row-major feature matrix with clean and given (possibly corrupted) labels.
struct LabeledDataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> features;
  std::vector<std::size_t> clean;
  std::vector<std::size_t> given;

  std::size_t size() const noexcept { return clean.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {features.data() + i * dim, dim};
  }
  bool flipped(std::size_t i) const noexcept { return clean[i] != given[i]; }

  /// Replaces `given` with the corrupted labels from `records`.
  void apply(std::span<const CorruptionRecord> records);
};

/// Gaussian clusters around the vertices of a scaled, seeded-rotated simplex.
struct BlobSpec {
  std::size_t n = 2000;
  std::size_t n_test = 1000;
  std::size_t dim = 10;
  std::size_t classes = 5;
  double cluster_spread = 1.0;
  double mean_scale = 3.0;
  std::uint64_t seed = 0;

  friend bool operator==(const BlobSpec&, const BlobSpec&) = default;
};

/// Cluster centres, classes x dim, row-major.
std::vector<double> blob_means(const BlobSpec& spec);

/// `rows` class-balanced samples (row i has class i mod c); `stream` selects
/// an independent sample draw over the same cluster centres.
LabeledDataset make_blobs(const BlobSpec& spec, std::size_t rows, std::uint64_t stream);

/// Header `f_0,...,f_{d-1},clean`.
void write_dataset_csv(std::ostream& os, const LabeledDataset& ds);
/// Reads the same layout; the class count is max(label) + 1 unless given.
LabeledDataset read_dataset_csv(std::istream& is, std::size_t classes = 0);

/// FNV-1a over dims, features and given labels.
std::uint64_t dataset_hash(const LabeledDataset& ds);

}  // namespace proselflc
