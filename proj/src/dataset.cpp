#include "proselflc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "proselflc/errors.hpp"
#include "proselflc/format.hpp"
#include "proselflc/rng.hpp"

namespace proselflc {

void LabeledDataset::apply(std::span<const CorruptionRecord> records) {
  if (records.size() != size()) throw ShapeError("corruption records do not match dataset size");
  for (const auto& r : records) {
    if (r.index >= size() || r.clean != clean[r.index]) {
      throw InvalidInput("corruption record does not match dataset row");
    }
    given[r.index] = r.given;
  }
}

std::vector<double> blob_means(const BlobSpec& spec) {
  const std::size_t c = spec.classes;
  const std::size_t d = spec.dim;
  SplitMix64 rng(derive_seed(spec.seed, "blob-means"));
  // Seeded orthonormal basis via Gram-Schmidt on a Gaussian matrix.
  std::vector<std::vector<double>> basis;
  basis.reserve(d);
  while (basis.size() < d) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += v[k] * b[k];
      for (std::size_t k = 0; k < d; ++k) v[k] -= dot * b[k];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  std::vector<double> means(c * d, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    if (k < d) {
      // Simplex vertex e_k rotated into the seeded basis.
      for (std::size_t j = 0; j < d; ++j) means[k * d + j] = spec.mean_scale * basis[k][j];
    } else {
      std::vector<double> v(d);
      double norm = 0.0;
      for (double& x : v) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < d; ++j) means[k * d + j] = spec.mean_scale * v[j] / norm;
    }
  }
  return means;
}

LabeledDataset make_blobs(const BlobSpec& spec, std::size_t rows, std::uint64_t stream) {
  if (spec.dim < 1) throw InvalidParameter("dataset.d must be >= 1");
  if (spec.classes < 2) throw InvalidParameter("dataset.c must be >= 2");
  if (!(spec.cluster_spread >= 0.0)) throw InvalidParameter("dataset.cluster_spread must be >= 0");
  const std::vector<double> means = blob_means(spec);
  LabeledDataset ds;
  ds.dim = spec.dim;
  ds.classes = spec.classes;
  ds.features.resize(rows * spec.dim);
  ds.clean.resize(rows);
  SplitMix64 rng(derive_seed(derive_seed(spec.seed, "blob-samples"), stream));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t k = i % spec.classes;
    ds.clean[i] = k;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      ds.features[i * spec.dim + j] =
          means[k * spec.dim + j] + spec.cluster_spread * rng.normal();
    }
  }
  ds.given = ds.clean;
  return ds;
}

void write_dataset_csv(std::ostream& os, const LabeledDataset& ds) {
  for (std::size_t j = 0; j < ds.dim; ++j) os << "f_" << j << ',';
  os << "clean\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) os << format_double(v) << ',';
    os << ds.clean[i] << '\n';
  }
}

LabeledDataset read_dataset_csv(std::istream& is, std::size_t classes) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("dataset csv: missing header");
  LabeledDataset ds;
  {
    std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 2 || line.substr(line.rfind(',') + 1) != "clean") {
      throw InvalidInput("dataset csv: header must be f_0,...,f_{d-1},clean");
    }
    ds.dim = cols - 1;
  }
  std::size_t lineno = 1;
  std::size_t max_label = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      if (col < ds.dim) {
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
          throw InvalidInput("dataset csv: bad number at line " + std::to_string(lineno));
        }
        ds.features.push_back(v);
      } else if (col == ds.dim) {
        const long long y = std::strtoll(cell.c_str(), &end, 10);
        if (end == cell.c_str() || *end != '\0' || y < 0) {
          throw InvalidInput("dataset csv: bad label at line " + std::to_string(lineno));
        }
        ds.clean.push_back(static_cast<std::size_t>(y));
        max_label = std::max(max_label, static_cast<std::size_t>(y));
      }
      ++col;
    }
    if (col != ds.dim + 1) {
      throw InvalidInput("dataset csv: wrong column count at line " + std::to_string(lineno));
    }
  }
  ds.classes = classes > 0 ? classes : max_label + 1;
  if (ds.classes < 2) throw InvalidInput("dataset csv: fewer than 2 classes");
  if (max_label >= ds.classes && !ds.clean.empty()) {
    throw InvalidInput("dataset csv: label exceeds class count");
  }
  ds.given = ds.clean;
  return ds;
}

std::uint64_t dataset_hash(const LabeledDataset& ds) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ULL;
    }
  };
  const std::uint64_t dims[2] = {ds.dim, ds.classes};
  feed(dims, sizeof(dims));
  feed(ds.features.data(), ds.features.size() * sizeof(double));
  for (std::size_t y : ds.given) {
    const std::uint64_t v = y;
    feed(&v, sizeof(v));
  }
  return h;
}

}  // namespace proselflc
