#include "proselflc/loss.hpp"

#include <cmath>

#include "proselflc/errors.hpp"

namespace proselflc {

namespace {

double clamped_log(double v) { return std::log(std::max(v, kLogClamp)); }

// sum a_j ln(a_j / b_j) over the support of a.
double direct_kl(const ProbDist& a, const ProbDist& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > 0.0) d += a[j] * (std::log(a[j]) - clamped_log(b[j]));
  }
  return d;
}

ProbDist knowledge_for(const LossRequest& request, std::span<const double> logits) {
  if (request.mod.kind == ModKind::non_self_lc) {
    if (!request.external_knowledge) {
      throw InvalidParameter("non_self_lc requires external knowledge");
    }
    if (request.external_knowledge->size() != logits.size()) {
      throw ShapeError("external knowledge has the wrong class count");
    }
    return *request.external_knowledge;
  }
  if (!request.annealed) return softmax(logits, 1.0);
  if (!request.trust) {
    throw InvalidParameter("annealed self knowledge requires a temperature (trust params)");
  }
  return self_knowledge(logits, *request.trust, true);
}

}  // namespace

LossEvaluation evaluate_loss(const LossRequest& request, const OneHotLabel& label,
                             std::span<const double> logits) {
  check_logits(logits);
  if (label.classes != logits.size()) {
    throw ShapeError("label class count does not match logits");
  }
  const ProbDist p = softmax(logits, 1.0);
  const ProbDist q = label.dist();
  const std::size_t c = p.size();
  const double eps = request.mod.epsilon;
  const double fit_ce = cross_entropy(q, p);
  const double fit_kl = direct_kl(q, p);

  LossEvaluation out;
  LossBreakdown& b = out.breakdown;
  out.gradient.assign(c, 0.0);

  switch (request.mod.kind) {
    case ModKind::cce: {
      b.fit_term = fit_ce;
      b.kl_form_total = fit_kl;
      for (std::size_t j = 0; j < c; ++j) out.gradient[j] = p[j] - q[j];
      break;
    }
    case ModKind::ls: {
      if (!(eps >= 0.0 && eps < 1.0)) throw InvalidParameter("epsilon must lie in [0, 1)");
      const ProbDist u = ProbDist::uniform(c);
      b.fit_term = (1.0 - eps) * fit_ce;
      b.reg_term = eps * cross_entropy(u, p);
      b.kl_form_total = (1.0 - eps) * fit_kl + eps * direct_kl(u, p);
      b.trust_used = eps;
      for (std::size_t j = 0; j < c; ++j) {
        out.gradient[j] = p[j] - ((1.0 - eps) * q[j] + eps * u[j]);
      }
      break;
    }
    case ModKind::cp: {
      if (!(eps >= 0.0 && eps < 1.0)) throw InvalidParameter("epsilon must lie in [0, 1)");
      const double self_h = cross_entropy(p, p);
      b.fit_term = (1.0 - eps) * fit_ce;
      b.reg_term = -eps * self_h;
      b.kl_form_total = (1.0 - eps) * fit_kl + eps * direct_kl(p, ProbDist::uniform(c));
      b.trust_used = eps;
      // d(-H(p,p))/dz_j = p_j (ln p_j + H(p,p))
      for (std::size_t j = 0; j < c; ++j) {
        out.gradient[j] = (1.0 - eps) * (p[j] - q[j]) +
                          eps * p[j] * (clamped_log(p[j]) + self_h);
      }
      break;
    }
    case ModKind::boot_soft:
    case ModKind::non_self_lc:
    case ModKind::proselflc: {
      const ProbDist k = knowledge_for(request, logits);
      double weight = eps;
      if (request.mod.kind == ModKind::proselflc) {
        if (!request.trust) throw InvalidParameter("proselflc requires trust parameters");
        request.trust->validate();
        const ProbDist& local_src = request.local_trust_on_scaled ? k : p;
        weight = combine_trust(global_trust(*request.trust),
                               local_trust(local_src, request.trust->local_scheme));
      } else if (!(eps >= 0.0 && eps < 1.0)) {
        throw InvalidParameter("epsilon must lie in [0, 1)");
      }
      const ProbDist target = mix(q, k, weight);
      b.fit_term = (1.0 - weight) * fit_ce;
      b.reg_term = weight * cross_entropy(k, p);
      b.kl_form_total = (1.0 - weight) * fit_kl + weight * direct_kl(k, p);
      b.trust_used = weight;
      for (std::size_t j = 0; j < c; ++j) out.gradient[j] = p[j] - target[j];
      break;
    }
  }
  b.total = b.fit_term + b.reg_term;
  return out;
}

double decomposition_check(ModKind kind, const OneHotLabel& label, const ProbDist& p,
                           double epsilon) {
  if (label.classes != p.size()) throw ShapeError("label class count does not match p");
  const ProbDist q = label.dist();
  const std::size_t c = p.size();
  const ProbDist u = ProbDist::uniform(c);
  const double h_u = std::log(static_cast<double>(c));
  const double eps = epsilon;

  double ce_form = 0.0;
  double kl_form = 0.0;
  double constant = 0.0;
  switch (kind) {
    case ModKind::cce:
      ce_form = cross_entropy(q, p);
      kl_form = direct_kl(q, p);
      break;
    case ModKind::ls:
      ce_form = cross_entropy(mix(q, u, eps), p);
      kl_form = (1.0 - eps) * direct_kl(q, p) + eps * direct_kl(u, p);
      constant = eps * h_u;
      break;
    case ModKind::cp:
      ce_form = (1.0 - eps) * cross_entropy(q, p) - eps * cross_entropy(p, p);
      kl_form = (1.0 - eps) * direct_kl(q, p) + eps * direct_kl(p, u);
      constant = -eps * h_u;
      break;
    case ModKind::boot_soft:
    case ModKind::non_self_lc:
    case ModKind::proselflc:
      ce_form = cross_entropy(mix(q, p, eps), p);
      kl_form = (1.0 - eps) * direct_kl(q, p) - eps * direct_kl(p, u);
      constant = eps * h_u;
      break;
  }
  return std::abs(ce_form - (kl_form + constant));
}

}  // namespace proselflc
