#pragma once

#include <complex>
#include <vector>

namespace pe {

using Complex = std::complex<double>;

/// Principal branch of log Gamma(z). Throws PoleError at z = 0, -1, -2, ...
Complex log_gamma(Complex z);

/// log Gamma(x) for real x > 0.
double log_gamma(double x);

struct AiryValue {
  double ai;
  double ai_prime;
};

/// Ai(x) and Ai'(x) for x in [-30, 30]; RangeError outside.
AiryValue airy_ai(double x);

/// Parameters of the weight w_k(x) = G^{M,0}_{0,M}(-; nu_M, ..., nu_2, nu_1 + k | x).
struct WeightSpec {
  int M = 1;
  std::vector<int> nu;  // nu_1 .. nu_M
  int k = 0;
};

/// w_k(x) by Mellin-Barnes quadrature along a vertical line.
double weight_w(const WeightSpec& spec, double x);

/// log w_k(x); usable where w_k underflows.
double log_weight_w(const WeightSpec& spec, double x);

/// Gamma(j+1+nu_1+k) prod_{l>=2} Gamma(j+1+nu_l). OverflowError past double range.
double mellin_moment(int j, const WeightSpec& spec);

/// Logarithm of mellin_moment; never overflows.
double log_mellin_moment(int j, const WeightSpec& spec);

}  // namespace pe
