#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "oracle.hpp"
#include "proselflc/errors.hpp"
#include "proselflc/loss.hpp"

using namespace proselflc;
using oracle::Vec;

namespace {

const ModKind kAllKinds[] = {ModKind::cce, ModKind::ls, ModKind::cp, ModKind::boot_soft,
                             ModKind::non_self_lc, ModKind::proselflc};

struct Draw {
  std::vector<double> z;
  OneHotLabel label;
  LossRequest request;
};

Draw random_draw(std::mt19937_64& rng, ModKind kind, int trial) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Draw d;
  const std::size_t c = 2 + static_cast<std::size_t>(trial) % 9;
  d.z = oracle::random_logits(rng, c, 3.0);
  if (trial % 5 == 0) {
    // Near one-hot: the smallest entries sit a few decades above the log clamp.
    std::fill(d.z.begin(), d.z.end(), 0.0);
    d.z[rng() % c] = 22.0;
  }
  d.label = OneHotLabel{static_cast<std::size_t>(rng() % c), c};
  d.request.mod = {kind, 0.95 * unit(rng)};
  d.request.annealed = trial % 2 == 0;
  TrustParams tp;
  tp.total_iterations = 1000;
  tp.iteration = static_cast<std::int64_t>(rng() % 1001);
  tp.growth = 4.0 + 16.0 * unit(rng);
  tp.local_scheme = static_cast<LocalTrustScheme>(rng() % 3);
  tp.temperature = 0.3 + 0.7 * unit(rng);
  d.request.trust = tp;
  d.request.local_trust_on_scaled = trial % 3 != 0;
  if (kind == ModKind::non_self_lc) d.request.external_knowledge = ProbDist(oracle::random_simplex(rng, c));
  return d;
}

}  // namespace

TEST_CASE("loss values") {
  const std::vector<double> perfect{60.0, 0.0, 0.0};
  const LossBreakdown b = loss_value({{ModKind::cce, 0.0}}, {0, 3}, perfect);
  CHECK(b.total == doctest::Approx(0.0).epsilon(1e-20));
  for (double g : loss_gradient({{ModKind::cce, 0.0}}, {0, 3}, perfect)) CHECK(std::abs(g) < 1e-20);

  const std::vector<double> flat{0.5, 0.5, 0.5};
  const LossBreakdown cp = loss_value({{ModKind::cp, 0.3}}, {1, 3}, flat);
  CHECK(cp.reg_term == doctest::Approx(-0.3 * std::log(3.0)).epsilon(1e-14));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto z = oracle::random_logits(rng, 5, 2.0);
    const OneHotLabel q{static_cast<std::size_t>(trial % 5), 5};
    const auto base = evaluate_loss({{ModKind::cce, 0.0}}, q, z);
    for (ModKind degenerate : {ModKind::ls, ModKind::boot_soft}) {
      const auto e = evaluate_loss({{degenerate, 0.0}}, q, z);
      CHECK(e.breakdown.total == base.breakdown.total);
      CHECK(e.gradient == base.gradient);
    }
  }
}

TEST_CASE("loss errors") {
  const std::vector<double> z{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(loss_value({{ModKind::proselflc, 0.0}}, {0, 3}, z), InvalidParameter);
  CHECK_THROWS_AS(loss_value({{ModKind::non_self_lc, 0.2}}, {0, 3}, z), InvalidParameter);
  LossRequest annealed{{ModKind::boot_soft, 0.2}};
  annealed.annealed = true;
  CHECK_THROWS_AS(loss_value(annealed, {0, 3}, z), InvalidParameter);
  CHECK_THROWS_AS(loss_value({{ModKind::ls, 1.0}}, {0, 3}, z), InvalidParameter);
  CHECK_THROWS_AS(loss_value({{ModKind::cce, 0.0}}, {0, 4}, z), ShapeError);
  const std::vector<double> bad{0.0, INFINITY, 1.0};
  CHECK_THROWS_AS(loss_value({{ModKind::cce, 0.0}}, {0, 3}, bad), InvalidInput);
}

TEST_CASE("analytic gradients match central differences") {
  std::uint64_t seed = 31;
  for (ModKind kind : kAllKinds) {
    const gradcheck::Report r = gradcheck::logit_check(kind, 100, seed++);
    INFO("kind = " << to_string(kind));
    CHECK(r.worst_relative < 1e-5);
    CHECK(r.worst_value < 1e-9);
  }
}

TEST_CASE("confidence penalty gradient sign") {
  // At a uniform prediction the entropy term is stationary; away from it,
  // the penalty pushes the top logit down (towards higher entropy).
  const std::vector<double> z{2.0, 0.0, 0.0};
  const LossRequest pure{{ModKind::cp, 0.999999}};
  const auto g = loss_gradient(pure, {1, 3}, z);
  CHECK(g[0] > 0.0);
  const ProbDist p = softmax(z, 1.0);
  const double h = entropy(p);
  // (1-eps)(p - q) + eps p_j (ln p_j + H)
  for (std::size_t j = 0; j < 3; ++j) {
    const double want = (1.0 - 0.999999) * (p[j] - (j == 1 ? 1.0 : 0.0)) +
                        0.999999 * p[j] * (std::log(p[j]) + h);
    CHECK(g[j] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("decompositions hold over random draws") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (ModKind kind : {ModKind::cce, ModKind::ls, ModKind::cp, ModKind::boot_soft}) {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t c = 2 + trial % 9;
      const ProbDist p(oracle::random_simplex(rng, c));
      const OneHotLabel q{static_cast<std::size_t>(rng() % c), c};
      worst = std::max(worst, decomposition_check(kind, q, p, unit(rng)));
    }
    INFO("kind = " << to_string(kind));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("breakdown invariants") {
  std::mt19937_64 rng(43);
  for (ModKind kind : kAllKinds) {
    for (int trial = 0; trial < 100; ++trial) {
      const Draw d = random_draw(rng, kind, trial + 1);
      const auto e = evaluate_loss(d.request, d.label, d.z);
      const LossBreakdown& b = e.breakdown;
      CHECK(std::abs(b.total - (b.fit_term + b.reg_term)) < 1e-10);
      // total - kl_form_total is the constant the KL rewrite drops.
      const std::size_t c = d.z.size();
      const long double eps = b.trust_used;
      long double constant = 0.0L;
      switch (kind) {
        case ModKind::cce: break;
        case ModKind::ls: constant = eps * std::log(static_cast<long double>(c)); break;
        case ModKind::cp: constant = -eps * std::log(static_cast<long double>(c)); break;
        default: {
          const TrustParams& tp = *d.request.trust;
          const Vec k = kind == ModKind::non_self_lc
                            ? oracle::to_ld(d.request.external_knowledge->vector())
                            : oracle::softmax(d.z, d.request.annealed ? tp.temperature : 1.0L);
          constant = eps * oracle::entropy(k);
        }
      }
      CHECK(std::abs(b.total - b.kl_form_total - static_cast<double>(constant)) < 1e-9);
    }
  }
}

TEST_CASE("knowledge distillation is non-self label correction") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 2 + trial % 9;
    const auto z = oracle::random_logits(rng, c, 3.0);
    const OneHotLabel q{static_cast<std::size_t>(rng() % c), c};
    const ProbDist teacher(oracle::random_simplex(rng, c));
    LossRequest r{{ModKind::non_self_lc, 0.99 * unit(rng)}};
    r.external_knowledge = teacher;
    const double eps = r.mod.epsilon;
    const Vec p = oracle::softmax(z);
    const Vec t = oracle::to_ld(teacher.vector());
    Vec qv(c, 0.0L);
    qv[q.index] = 1.0L;
    const long double want = (1.0L - eps) * oracle::cross_entropy(qv, p) +
                             eps * oracle::kl(t, p) + eps * oracle::entropy(t);
    CHECK(std::abs(loss_value(r, q, z).total - static_cast<double>(want)) < 1e-10);
  }
}

TEST_CASE("sharpening rewards entropy for LS and CP, penalises it for LC") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t c = 2 + trial % 9;
    const auto z = oracle::random_logits(rng, c, 2.0);
    const double t_sharp = 0.2 + 0.7 * unit(rng);
    std::vector<double> sharp(z);
    for (double& v : sharp) v /= t_sharp;
    const OneHotLabel q{0, c};
    const double eps = 0.05 + 0.9 * unit(rng);
    auto reg = [&](ModKind kind, const std::vector<double>& logits) {
      return loss_value({{kind, eps}}, q, logits).reg_term;
    };
    CHECK(reg(ModKind::ls, sharp) > reg(ModKind::ls, z));
    CHECK(reg(ModKind::cp, sharp) > reg(ModKind::cp, z));
    CHECK(reg(ModKind::boot_soft, sharp) < reg(ModKind::boot_soft, z));
  }
}
