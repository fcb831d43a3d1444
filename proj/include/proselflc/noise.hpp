#pragma once

// Seeded label corruption. Symmetric noise flips each row independently with
// probability r to a uniformly drawn different class; asymmetric noise flips
// exactly floor(r * n_A) rows of class A to B and floor(r * n_B) of B to A.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace proselflc {

enum class NoiseKind { symmetric, asymmetric };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

struct NoisePlan {
  NoiseKind kind = NoiseKind::symmetric;
  double rate = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::uint64_t seed = 0;
  /// Symmetric only: flip exactly floor(r * n) rows instead of Bernoulli(r).
  bool exact_count = false;

  friend bool operator==(const NoisePlan&, const NoisePlan&) = default;
};

struct CorruptionRecord {
  std::size_t index = 0;
  std::size_t clean = 0;
  std::size_t given = 0;
  bool flipped = false;

  friend bool operator==(const CorruptionRecord&, const CorruptionRecord&) = default;
};

struct NoiseStats {
  double overall_rate = 0.0;
  std::vector<double> per_class_rates;  // indexed by clean class
};

/// floor(r * n), tolerant of representation error in r (0.29 * 100 -> 29).
std::size_t flip_count(double rate, std::size_t n);

std::vector<CorruptionRecord> inject_symmetric(std::span<const std::size_t> labels,
                                               std::size_t classes, double rate,
                                               std::uint64_t seed,
                                               bool exact_count = false);

std::vector<CorruptionRecord> inject_asymmetric(
    std::span<const std::size_t> labels, std::size_t classes, double rate,
    std::span<const std::pair<std::size_t, std::size_t>> pairs, std::uint64_t seed);

std::vector<CorruptionRecord> inject(std::span<const std::size_t> labels,
                                     std::size_t classes, const NoisePlan& plan);

NoiseStats noise_stats(std::span<const CorruptionRecord> records, std::size_t classes);

/// `# kind=..., r=..., seed=...` comment, header `index,clean,given,flipped`.
void write_corruption_csv(std::ostream& os, const NoisePlan& plan,
                          std::span<const CorruptionRecord> records);
std::vector<CorruptionRecord> read_corruption_csv(std::istream& is);

}  // namespace proselflc
