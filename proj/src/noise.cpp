#include "proselflc/noise.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "proselflc/errors.hpp"
#include "proselflc/format.hpp"
#include "proselflc/rng.hpp"

namespace proselflc {

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::symmetric ? "symmetric" : "asymmetric";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "symmetric") return NoiseKind::symmetric;
  if (name == "asymmetric") return NoiseKind::asymmetric;
  throw InvalidParameter("unknown noise kind '" + std::string(name) + "'");
}

std::size_t flip_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

namespace {

void check_common(std::span<const std::size_t> labels, std::size_t classes, double rate) {
  if (classes < 2) throw InvalidParameter("noise: class count must be >= 2");
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidParameter("noise: rate must lie in [0, 1]");
  for (std::size_t y : labels) {
    if (y >= classes) throw InvalidParameter("noise: label out of range");
  }
}

std::vector<CorruptionRecord> identity_records(std::span<const std::size_t> labels) {
  std::vector<CorruptionRecord> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = {i, labels[i], labels[i], false};
  return out;
}

std::size_t other_class(SplitMix64& rng, std::size_t clean, std::size_t classes) {
  const auto draw = static_cast<std::size_t>(rng.below(classes - 1));
  return draw >= clean ? draw + 1 : draw;
}

// First k entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k,
                                SplitMix64& rng) {
  for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, pool.size()));
  return pool;
}

}  // namespace

std::vector<CorruptionRecord> inject_symmetric(std::span<const std::size_t> labels,
                                               std::size_t classes, double rate,
                                               std::uint64_t seed, bool exact_count) {
  check_common(labels, classes, rate);
  auto records = identity_records(labels);
  SplitMix64 rng(derive_seed(seed, "symmetric"));
  if (exact_count) {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i : choose(std::move(all), flip_count(rate, labels.size()), rng)) {
      records[i].given = other_class(rng, records[i].clean, classes);
      records[i].flipped = true;
    }
    return records;
  }
  for (auto& r : records) {
    // Both draws are always consumed so row i's outcome depends only on i.
    const bool flip = rng.unit() < rate;
    const std::size_t other = other_class(rng, r.clean, classes);
    if (flip) {
      r.given = other;
      r.flipped = true;
    }
  }
  return records;
}

std::vector<CorruptionRecord> inject_asymmetric(
    std::span<const std::size_t> labels, std::size_t classes, double rate,
    std::span<const std::pair<std::size_t, std::size_t>> pairs, std::uint64_t seed) {
  check_common(labels, classes, rate);
  std::vector<bool> used(classes, false);
  for (const auto& [a, b] : pairs) {
    if (a >= classes || b >= classes) throw InvalidParameter("noise: pair class out of range");
    if (a == b || used[a] || used[b]) {
      throw InvalidParameter("noise: asymmetric pairs must be disjoint");
    }
    used[a] = used[b] = true;
  }
  auto records = identity_records(labels);
  SplitMix64 rng(derive_seed(seed, "asymmetric"));
  auto flip_class = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == from) rows.push_back(i);
    }
    const std::size_t k = flip_count(rate, rows.size());
    for (std::size_t i : choose(std::move(rows), k, rng)) {
      records[i].given = to;
      records[i].flipped = true;
    }
  };
  for (const auto& [a, b] : pairs) {
    flip_class(a, b);
    flip_class(b, a);
  }
  return records;
}

std::vector<CorruptionRecord> inject(std::span<const std::size_t> labels,
                                     std::size_t classes, const NoisePlan& plan) {
  if (plan.kind == NoiseKind::symmetric) {
    return inject_symmetric(labels, classes, plan.rate, plan.seed, plan.exact_count);
  }
  return inject_asymmetric(labels, classes, plan.rate, plan.pairs, plan.seed);
}

NoiseStats noise_stats(std::span<const CorruptionRecord> records, std::size_t classes) {
  if (records.empty()) throw InvalidInput("noise_stats: no records");
  std::vector<std::size_t> total(classes, 0), flipped(classes, 0);
  std::size_t all_flipped = 0;
  for (const auto& r : records) {
    if (r.clean >= classes) throw InvalidInput("noise_stats: class out of range");
    total[r.clean] += 1;
    flipped[r.clean] += r.flipped;
    all_flipped += r.flipped;
  }
  NoiseStats stats;
  stats.overall_rate = static_cast<double>(all_flipped) / static_cast<double>(records.size());
  stats.per_class_rates.resize(classes, 0.0);
  for (std::size_t k = 0; k < classes; ++k) {
    if (total[k] > 0) {
      stats.per_class_rates[k] =
          static_cast<double>(flipped[k]) / static_cast<double>(total[k]);
    }
  }
  return stats;
}

void write_corruption_csv(std::ostream& os, const NoisePlan& plan,
                          std::span<const CorruptionRecord> records) {
  os << "# kind=" << to_string(plan.kind) << ", r=" << format_double(plan.rate)
     << ", seed=" << plan.seed << "\n";
  os << "index,clean,given,flipped\n";
  for (const auto& r : records) {
    os << r.index << ',' << r.clean << ',' << r.given << ',' << (r.flipped ? 1 : 0) << '\n';
  }
}

std::vector<CorruptionRecord> read_corruption_csv(std::istream& is) {
  std::vector<CorruptionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "index,clean,given,flipped") {
        throw InvalidInput("corruption csv: bad header at line " + std::to_string(lineno));
      }
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    CorruptionRecord r;
    char c1 = 0, c2 = 0, c3 = 0;
    int flipped = 0;
    if (!(ss >> r.index >> c1 >> r.clean >> c2 >> r.given >> c3 >> flipped) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw InvalidInput("corruption csv: malformed line " + std::to_string(lineno));
    }
    r.flipped = flipped != 0;
    out.push_back(r);
  }
  return out;
}

}  // namespace proselflc
