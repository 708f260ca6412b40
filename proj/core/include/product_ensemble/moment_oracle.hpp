#pragma once

#include <Eigen/Dense>

#include "product_ensemble/spectral_model.hpp"

namespace pe {

struct MomentMatrix {
  int n = 0;
  Eigen::MatrixXd entries;  // (j, k) = integral of x^j w_k
  /// 1-norm condition number after symmetric diagonal scaling.
  double conditionEstimate = 0.0;
  /// True when n exceeds the supported cap of 8.
  bool beyondCap = false;
};

/// GinibreProduct only. IllConditionedError when conditionEstimate > 1e12.
MomentMatrix moment_matrix(const ModelSpec& spec, int n);

/// sum_{j,k} x^j (M^{-1})_{k,j} w_k(y), with the inverse taken in 50-digit arithmetic.
double kernel_direct(const ModelSpec& spec, int n, double x, double y);

struct NormalizationCheck {
  double lhs = 0.0;  // log det M_n
  double rhs = 0.0;  // sum_{i=1}^n sum_{j=0}^M log Gamma(i + nu_j)
  bool pass = false;
};

/// Compares both sides to 1e-9 absolute.
NormalizationCheck normalization_check(const ModelSpec& spec, int n);

/// max over a 4x4 grid in [0.5, 3]^2 of |int K(x,t) K(t,y) dt - K(x,y)| / max(1, |K(x,y)|),
/// with Gauss-Legendre panels of the given order in log t.
double reproducing_check(const ModelSpec& spec, int n, int quadratureOrder);

}  // namespace pe
