#pragma once

// Modified learning targets: label smoothing, confidence penalty, label
// correction (self and non-self) and the progressive self-trust schedule.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "proselflc/prob.hpp"

namespace proselflc {

enum class LocalTrustScheme { constant_one, conf_top, conf_all };

/// Schedule state for progressive self label correction.
///
/// `iteration` is owned by the caller and advances once per optimiser step.
/// `temperature` is the annealing temperature applied to the logits that
/// produce self knowledge; it only takes effect when annealing is enabled.
struct TrustParams {
  std::int64_t iteration = 0;
  std::int64_t total_iterations = 1;
  double inflection = 0.5;
  double growth = 16.0;
  LocalTrustScheme local_scheme = LocalTrustScheme::conf_all;
  double temperature = 1.0;

  /// Throws InvalidParameter when any field is outside its domain.
  void validate() const;
};

enum class ModKind { cce, ls, cp, boot_soft, non_self_lc, proselflc };

struct Modification {
  ModKind kind = ModKind::cce;
  double epsilon = 0.0;  // ignored by cce and proselflc
};

struct TargetDist {
  ProbDist dist;
  double trust_used = 0.0;
  std::size_t semantic_class = 0;
};

std::string_view to_string(ModKind kind);
std::string_view to_string(LocalTrustScheme scheme);
/// Throws InvalidParameter on an unknown name.
ModKind parse_mod_kind(std::string_view name);
LocalTrustScheme parse_local_scheme(std::string_view name);

/// True for kinds whose target mixes in a knowledge distribution.
bool needs_knowledge(ModKind kind);

/// g(t) = 1 / (1 + exp(-(t/total - inflection) * growth)).
double global_trust(const TrustParams& params);

double local_trust(const ProbDist& p, LocalTrustScheme scheme);

/// Self trust from its global and local factors: global * local.
inline double combine_trust(double global, double local) { return global * local; }

/// g(t) * l(p).
double proselflc_trust(const TrustParams& params, const ProbDist& p);

/// Builds the target for `kind`.
///
/// `knowledge` is the (detached) distribution mixed into cp, boot_soft,
/// non_self_lc and proselflc targets; `trust` is required for proselflc.
/// The cp target is clipped at zero and renormalised; it is for inspection
/// only, since the cp loss is evaluated directly from its entropy form.
TargetDist build_target(const Modification& mod, const OneHotLabel& label,
                        const std::optional<ProbDist>& knowledge,
                        const std::optional<TrustParams>& trust);

/// Self prediction used as knowledge: softmax(z, T) when annealing is on,
/// softmax(z, 1) otherwise. T must lie in (0, 1] when annealing.
ProbDist self_knowledge(std::span<const double> logits, const TrustParams& trust,
                        bool annealed);

}  // namespace proselflc
