#pragma once

#include <complex>
#include <string>
#include <vector>

#include "product_ensemble/contours.hpp"
#include "product_ensemble/spectral_model.hpp"

namespace pe {

/// F(z; a) for the model; n overrides spec.n.
struct PhaseContext {
  ModelSpec spec;
  double a = 1.0;
  int n = 1;
};

/// Sum of the log-gamma terms of F(z; a), i.e. F(z; a) + z log a.
Complex phase_gamma_sum(const ModelSpec& spec, int n, Complex z);

/// F(z; a) as a sum of log-gamma terms minus z log a. PoleError near gamma poles.
Complex big_F(const PhaseContext& ctx, Complex z);

/// Leading-order phase F^(z; a); logs of negative reals are continued from above.
Complex f_hat(const ModelSpec& spec, Complex z, double a);

/// d^order/dz^order F^(z; a) for order 1, 2, 3.
Complex f_hat_derivs(const ModelSpec& spec, Complex z, double a, int order);

/// G^ and H^: F^ with the logarithms continued to the left of 0 (G^) or of 1 (H^).
Complex g_hat(const ModelSpec& spec, Complex z, double a);
Complex h_hat(const ModelSpec& spec, Complex z, double a);

/// Re F through the reflection formula; SingularityError within 1e-6 of an integer.
double re_F_left(const PhaseContext& ctx, Complex z);

/// Re F choosing re_F_left within 0.05 n of [0, n] on the real axis, Re big_F elsewhere.
double re_F(const PhaseContext& ctx, Complex z);

enum class Lemma { Bulk21, Edge22, Sigma31, C32 };

const char* lemma_name(Lemma which);

struct LemmaViolation {
  Complex node;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct LemmaReport {
  std::string contourName;
  int pointsChecked = 0;
  std::vector<LemmaViolation> violations;
  double delta = 0.0;  // largest margin constant the checked nodes admit

  bool pass() const { return violations.empty(); }
};

/// Pointwise check of a lemma's inequalities on a grid from the contours module.
/// Bulk21 and Edge22 take ctx.a = n^p x0 and grids of the n-scaled contours;
/// Sigma31 and C32 take ctx.a = x0 (n = 1 scale) and grids in zeta units.
/// The global inequalities are checked on the leading-order phase n F^(z/n),
/// with the reflection corrections n G^ - M log|2 sin pi z| on the small arc of
/// Sigma and n H^ + log|2 sin pi z| on the part of C near the real axis.
LemmaReport verify_lemma(const PhaseContext& ctx, Lemma which, const QuadratureGrid& grid);

}  // namespace pe
