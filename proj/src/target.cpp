#include "proselflc/target.hpp"

#include <cmath>
#include <string>

#include "proselflc/errors.hpp"

namespace proselflc {

void TrustParams::validate() const {
  if (total_iterations <= 0) {
    throw InvalidParameter("trust: total_iterations must be > 0");
  }
  if (iteration < 0 || iteration > total_iterations) {
    throw InvalidParameter("trust: iteration must lie in [0, total_iterations]");
  }
  if (!(inflection >= 0.0 && inflection <= 1.0)) {
    throw InvalidParameter("trust: inflection must lie in [0, 1]");
  }
  if (!(growth > 0.0) || !std::isfinite(growth)) {
    throw InvalidParameter("trust: growth must be positive");
  }
  if (!(temperature > 0.0 && temperature <= 1.0)) {
    throw InvalidParameter("trust: temperature must lie in (0, 1]");
  }
}

std::string_view to_string(ModKind kind) {
  switch (kind) {
    case ModKind::cce: return "cce";
    case ModKind::ls: return "ls";
    case ModKind::cp: return "cp";
    case ModKind::boot_soft: return "boot_soft";
    case ModKind::non_self_lc: return "non_self_lc";
    case ModKind::proselflc: return "proselflc";
  }
  return "?";
}

std::string_view to_string(LocalTrustScheme scheme) {
  switch (scheme) {
    case LocalTrustScheme::constant_one: return "constant_one";
    case LocalTrustScheme::conf_top: return "conf_top";
    case LocalTrustScheme::conf_all: return "conf_all";
  }
  return "?";
}

ModKind parse_mod_kind(std::string_view name) {
  for (ModKind k : {ModKind::cce, ModKind::ls, ModKind::cp, ModKind::boot_soft,
                    ModKind::non_self_lc, ModKind::proselflc}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidParameter("unknown modification kind '" + std::string(name) + "'");
}

LocalTrustScheme parse_local_scheme(std::string_view name) {
  for (LocalTrustScheme s : {LocalTrustScheme::constant_one,
                             LocalTrustScheme::conf_top,
                             LocalTrustScheme::conf_all}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidParameter("unknown local trust scheme '" + std::string(name) + "'");
}

bool needs_knowledge(ModKind kind) {
  return kind == ModKind::cp || kind == ModKind::boot_soft ||
         kind == ModKind::non_self_lc || kind == ModKind::proselflc;
}

double global_trust(const TrustParams& params) {
  if (params.total_iterations == 0) {
    throw InvalidParameter("trust: total_iterations must be > 0");
  }
  const double eta = static_cast<double>(params.iteration) /
                         static_cast<double>(params.total_iterations) -
                     params.inflection;
  return 1.0 / (1.0 + std::exp(-eta * params.growth));
}

double local_trust(const ProbDist& p, LocalTrustScheme scheme) {
  switch (scheme) {
    case LocalTrustScheme::constant_one: return 1.0;
    case LocalTrustScheme::conf_top: return confidence(p, ConfidenceMode::top);
    case LocalTrustScheme::conf_all: return confidence(p, ConfidenceMode::all);
  }
  return 1.0;
}

double proselflc_trust(const TrustParams& params, const ProbDist& p) {
  return combine_trust(global_trust(params), local_trust(p, params.local_scheme));
}

namespace {

void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw InvalidParameter("epsilon must lie in [0, 1)");
  }
}

const ProbDist& require_knowledge(const std::optional<ProbDist>& knowledge,
                                  ModKind kind, std::size_t classes) {
  if (!knowledge) {
    throw InvalidParameter(std::string(to_string(kind)) + " requires a knowledge distribution");
  }
  if (knowledge->size() != classes) throw ShapeError("knowledge has the wrong class count");
  return *knowledge;
}

TargetDist finish(ProbDist dist, double trust) {
  const std::size_t semantic = argmax_index(dist);
  return TargetDist{std::move(dist), trust, semantic};
}

}  // namespace

TargetDist build_target(const Modification& mod, const OneHotLabel& label,
                        const std::optional<ProbDist>& knowledge,
                        const std::optional<TrustParams>& trust) {
  const ProbDist q = label.dist();
  const std::size_t c = label.classes;
  switch (mod.kind) {
    case ModKind::cce:
      return finish(q, 0.0);
    case ModKind::ls:
      check_epsilon(mod.epsilon);
      return finish(mix(q, ProbDist::uniform(c), mod.epsilon), mod.epsilon);
    case ModKind::cp: {
      check_epsilon(mod.epsilon);
      const ProbDist& k = require_knowledge(knowledge, mod.kind, c);
      // (1-eps) q - eps k has negative entries off the label; clip and renormalise.
      std::vector<double> raw(c);
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        raw[j] = std::max((1.0 - mod.epsilon) * q[j] - mod.epsilon * k[j], 0.0);
        sum += raw[j];
      }
      if (sum <= 0.0) return finish(q, mod.epsilon);
      for (double& v : raw) v /= sum;
      return finish(ProbDist(std::move(raw)), mod.epsilon);
    }
    case ModKind::boot_soft:
    case ModKind::non_self_lc: {
      check_epsilon(mod.epsilon);
      const ProbDist& k = require_knowledge(knowledge, mod.kind, c);
      return finish(mix(q, k, mod.epsilon), mod.epsilon);
    }
    case ModKind::proselflc: {
      const ProbDist& k = require_knowledge(knowledge, mod.kind, c);
      if (!trust) throw InvalidParameter("proselflc requires trust parameters");
      trust->validate();
      const double eps = proselflc_trust(*trust, k);
      return finish(mix(q, k, eps), eps);
    }
  }
  throw InvalidParameter("unknown modification kind");
}

ProbDist self_knowledge(std::span<const double> logits, const TrustParams& trust,
                        bool annealed) {
  if (!annealed) return softmax(logits, 1.0);
  if (!(trust.temperature > 0.0 && trust.temperature <= 1.0)) {
    throw InvalidParameter("annealing temperature must lie in (0, 1]");
  }
  return softmax(logits, trust.temperature);
}

}  // namespace proselflc
