#pragma once

// Test-only reference implementations. Everything here is computed in long
// double by direct summation and shares no code with the library's math.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<long double>;

inline Vec softmax(const std::vector<double>& z, long double t = 1.0L) {
  Vec e(z.size());
  long double s = 0.0L;
  for (std::size_t j = 0; j < z.size(); ++j) {
    e[j] = std::exp(static_cast<long double>(z[j]) / t);
    s += e[j];
  }
  for (auto& v : e) v /= s;
  return e;
}

inline long double safe_log(long double v) { return std::log(std::max(v, 1e-12L)); }

inline long double cross_entropy(const Vec& a, const Vec& b) {
  long double h = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] != 0.0L) h -= a[j] * safe_log(b[j]);
  }
  return h;
}

inline long double entropy(const Vec& p) {
  long double h = 0.0L;
  for (long double v : p) {
    if (v > 0.0L) h -= v * std::log(v);
  }
  return h;
}

inline long double kl(const Vec& a, const Vec& b) {
  long double d = 0.0L;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > 0.0L) d += a[j] * std::log(a[j] / b[j]);
  }
  return d;
}

inline long double sigmoid(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

inline Vec to_ld(const std::vector<double>& v) { return Vec(v.begin(), v.end()); }

/// Central differences of f at x with step h.
inline std::vector<double> central_diff(const std::function<long double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const long double fp = f(x);
    x[i] = orig - h;
    const long double fm = f(x);
    x[i] = orig;
    g[i] = static_cast<double>((fp - fm) / (2.0L * h));
  }
  return g;
}

/// max_j |a_j - b_j| / max(max_j |a_j|, max_j |b_j|, floor).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                             double floor = 1e-3) {
  double diff = 0.0, scale = floor;
  for (std::size_t j = 0; j < a.size(); ++j) {
    diff = std::max(diff, std::abs(a[j] - b[j]));
    scale = std::max({scale, std::abs(a[j]), std::abs(b[j])});
  }
  return diff / scale;
}

inline std::vector<double> random_logits(std::mt19937_64& rng, std::size_t c, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  std::vector<double> z(c);
  for (auto& v : z) v = n(rng);
  return z;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t c) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(c);
  double s = 0.0;
  for (auto& v : p) {
    v = e(rng) + 1e-6;
    s += v;
  }
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace oracle
