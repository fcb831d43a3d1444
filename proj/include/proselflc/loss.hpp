#pragma once

// Per-example losses and their exact gradients with respect to the logits.
//
// Fixed-target kinds (cce, ls, boot_soft, non_self_lc, proselflc) evaluate
// H(q~, p) against a detached target q~, so dL/dz = p - q~. The confidence
// penalty is a regulariser on the learner's own entropy and is
// differentiated through p.

#include <optional>
#include <span>
#include <vector>

#include "proselflc/prob.hpp"
#include "proselflc/target.hpp"

namespace proselflc {

struct LossRequest {
  Modification mod;
  /// Needed by proselflc; also supplies the temperature for annealed boot_soft.
  std::optional<TrustParams> trust;
  bool annealed = false;
  /// Local trust evaluated on p_T (true) or on p at T = 1 (false).
  bool local_trust_on_scaled = true;
  /// Fixed teacher distribution for non_self_lc.
  std::optional<ProbDist> external_knowledge;
};

struct LossBreakdown {
  double total = 0.0;
  double fit_term = 0.0;       // (1 - eps) H(q, p)
  double reg_term = 0.0;       // the eps-weighted second term, signed
  double kl_form_total = 0.0;  // the same loss written with KL divergences
  double trust_used = 0.0;
};

struct LossEvaluation {
  LossBreakdown breakdown;
  std::vector<double> gradient;  // dL/dz, length c
};

LossEvaluation evaluate_loss(const LossRequest& request, const OneHotLabel& label,
                             std::span<const double> logits);

inline LossBreakdown loss_value(const LossRequest& request, const OneHotLabel& label,
                                std::span<const double> logits) {
  return evaluate_loss(request, label, logits).breakdown;
}

inline std::vector<double> loss_gradient(const LossRequest& request,
                                         const OneHotLabel& label,
                                         std::span<const double> logits) {
  return evaluate_loss(request, label, logits).gradient;
}

/// |cross-entropy form - (KL form + analytic constant)| for one kind.
///
/// Constants: 0 (cce), eps ln c (ls), -eps ln c (cp), +eps ln c for the
/// label-correction family, whose knowledge is taken to be p itself. KL terms
/// are summed directly, independent of cross_entropy().
double decomposition_check(ModKind kind, const OneHotLabel& label, const ProbDist& p,
                           double epsilon);

}  // namespace proselflc
