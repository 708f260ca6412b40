#include "product_ensemble/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/quadrature.hpp"

namespace pe {

namespace {

using std::numbers::pi;

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * pi);
constexpr double kEulerGamma = 0.57721566490153286061;

// (-1)^k zeta(k) / k for k = 2..kSeriesTerms+1.
constexpr int kSeriesTerms = 40;
const std::array<double, kSeriesTerms>& zeta_coefficients() {
  static const std::array<double, kSeriesTerms> c = [] {
    std::array<double, kSeriesTerms> out{};
    for (int i = 0; i < kSeriesTerms; ++i) {
      const int k = i + 2;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      out[i] = sign * boost::math::zeta(static_cast<double>(k)) / k;
    }
    return out;
  }();
  return c;
}

Complex complex_log1p(Complex e) {
  const double a = e.real();
  const double b = e.imag();
  return {0.5 * std::log1p(2.0 * a + a * a + b * b), std::atan2(b, 1.0 + a)};
}

// log Gamma(1 + e) for |e| <= 0.25.
Complex log_gamma_near_one(Complex e) {
  const auto& c = zeta_coefficients();
  Complex sum = 0.0;
  Complex p = e * e;
  for (int i = 0; i < kSeriesTerms; ++i) {
    sum += c[i] * p;
    p *= e;
  }
  return -kEulerGamma * e + sum;
}

Complex lanczos_log_gamma(Complex z) {
  const Complex zm = z - 1.0;
  Complex a = kLanczos[0];
  for (int k = 1; k < 9; ++k) a += kLanczos[k] / (zm + static_cast<double>(k));
  const Complex t = zm + (kLanczosG + 0.5);
  return kHalfLog2Pi + (zm + 0.5) * std::log(t) - t + std::log(a);
}

Complex log_gamma_right(Complex z) {
  if (std::abs(z - 1.0) <= 0.25) return log_gamma_near_one(z - 1.0);
  if (std::abs(z - 2.0) <= 0.25) {
    const Complex e = z - 2.0;
    return complex_log1p(e) + log_gamma_near_one(e);
  }
  return lanczos_log_gamma(z);
}

// Reflection for Re z < 1/2, Im z >= 0. log sin(pi z) is written as
// -i pi z + log(1 - e^{2 pi i z}) - log 2 + i pi/2, which is analytic in the
// upper half-plane and real on (0, 1).
Complex log_gamma_reflected_upper(Complex z) {
  const double xr = z.real() - std::round(z.real());
  const double a = -2.0 * pi * z.imag();
  const double b = 2.0 * pi * xr;
  const double s = std::sin(0.5 * b);
  const Complex expm1_val(std::expm1(a) * std::cos(b) - 2.0 * s * s,
                          std::exp(a) * std::sin(b));
  const Complex one_minus = -expm1_val;
  const Complex log_sin = Complex(0.0, -pi) * z + std::log(one_minus) -
                          std::log(2.0) + Complex(0.0, 0.5 * pi);
  return std::log(pi) - log_sin - log_gamma_right(1.0 - z);
}

void check_finite(Complex v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw OverflowError(std::string(what) + ": non-finite result");
}

// Maclaurin series in extended precision.
AiryValue airy_series(double xd) {
  using ld = long double;
  const ld x = xd;
  const ld x3 = x * x * x;
  const ld c1 = 0.355028053887817239260063186004183176L;
  const ld c2 = 0.258819403792806798405183560189203963L;
  ld f = 1.0L, t = 1.0L;
  ld g = x, u = x;
  ld fp = 0.0L, d = x * x / 2.0L;
  ld gp = 1.0L, e = 1.0L;
  for (int k = 0; k < 400; ++k) {
    const ld kk = k;
    t *= x3 / ((3 * kk + 2) * (3 * kk + 3));
    u *= x3 / ((3 * kk + 3) * (3 * kk + 4));
    f += t;
    g += u;
    if (k == 0) {
      fp += d;
    } else {
      d *= x3 / ((3 * kk) * (3 * kk + 2));
      fp += d;
    }
    e *= x3 / ((3 * kk + 1) * (3 * kk + 3));
    gp += e;
    const ld scale = 1.0L + std::fabs(f) + std::fabs(g) + std::fabs(fp) + std::fabs(gp);
    if (k > 3 && std::fabs(t) + std::fabs(u) + std::fabs(d) + std::fabs(e) < 1e-24L * scale) break;
  }
  return {static_cast<double>(c1 * f - c2 * g), static_cast<double>(c1 * fp - c2 * gp)};
}

// Coefficients u_k, v_k of the large-argument expansions.
struct AiryCoefficients {
  std::array<double, 64> u{};
  std::array<double, 64> v{};
};

const AiryCoefficients& airy_coefficients() {
  static const AiryCoefficients c = [] {
    AiryCoefficients out;
    out.u[0] = 1.0;
    out.v[0] = 1.0;
    for (int k = 1; k < 64; ++k) {
      const double kk = k;
      out.u[k] = out.u[k - 1] * (6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1) /
                 ((2 * kk - 1) * 216.0 * kk);
      out.v[k] = -(6 * kk + 1) / (6 * kk - 1) * out.u[k];
    }
    return out;
  }();
  return c;
}

// Alternating sum of c_k zeta^{-k} over k = start, start+stride, ..., stopped at the smallest term.
double asymptotic_sum(const std::array<double, 64>& c, double zeta, int start, int stride) {
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  double sign = 1.0;
  for (int k = start; k < 64; k += stride) {
    const double term = c[k] * std::pow(zeta, -k);
    if (std::fabs(term) > prev) break;
    sum += sign * term;
    prev = std::fabs(term);
    sign = -sign;
    if (prev < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

// Ai(x) = e^{-zeta}/pi int_0^inf exp(-sqrt(x) u^2) cos(u^3/3) du, the Airy integral with
// its contour shifted through the saddle at i sqrt(x); no cancellation for x > 0.
AiryValue airy_positive_integral(double x) {
  const double a = std::sqrt(x);
  const double zeta = 2.0 / 3.0 * x * a;
  const double top = std::sqrt(42.0 / a);  // exp(-a u^2) < 1e-18 beyond
  const int panels = static_cast<int>(std::ceil(top / 0.5));
  const double h = top / panels;
  const GaussRule& g = gauss_legendre(32);
  double i0 = 0.0, i2 = 0.0;
  for (int p = 0; p < panels; ++p)
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const double u = (p + 0.5) * h + 0.5 * h * g.x[k];
      const double f = 0.5 * h * g.w[k] * std::exp(-a * u * u) * std::cos(u * u * u / 3.0);
      i0 += f;
      i2 += u * u * f;
    }
  const double pref = std::exp(-zeta) / pi;
  return {pref * i0, pref * (-a * i0 - i2 / (2.0 * a))};
}

AiryValue airy_negative_asymptotic(double x) {
  const auto& c = airy_coefficients();
  const double X = -x;
  const double zeta = 2.0 / 3.0 * X * std::sqrt(X);
  const double x14 = std::sqrt(std::sqrt(X));
  const double ph = zeta - 0.25 * pi;
  const double cs = std::cos(ph);
  const double sn = std::sin(ph);
  const double ue = asymptotic_sum(c.u, zeta, 0, 2);
  const double uo = asymptotic_sum(c.u, zeta, 1, 2);
  const double ve = asymptotic_sum(c.v, zeta, 0, 2);
  const double vo = asymptotic_sum(c.v, zeta, 1, 2);
  const double rp = 1.0 / std::sqrt(pi);
  return {rp / x14 * (cs * ue + sn * uo), rp * x14 * (sn * ve - cs * vo)};
}

constexpr double kAiryPositiveSwitch = 1.5;
constexpr double kAiryNegativeSwitch = -8.0;

void validate(const WeightSpec& spec) {
  if (spec.M < 1) throw DomainError("WeightSpec: M must be positive");
  if (static_cast<int>(spec.nu.size()) != spec.M)
    throw DomainError("WeightSpec: nu must have M entries");
  for (int v : spec.nu)
    if (v < 0) throw DomainError("WeightSpec: nu_j must be nonnegative");
  if (spec.k < 0) throw DomainError("WeightSpec: k must be nonnegative");
}

std::vector<double> shifts(const WeightSpec& spec) {
  std::vector<double> a(spec.nu.begin(), spec.nu.end());
  a[0] += spec.k;
  return a;
}

}  // namespace

Complex log_gamma(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("log_gamma: non-finite argument");
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
    throw PoleError("log_gamma: pole at nonpositive integer");
  Complex r;
  if (z.real() >= 0.5) {
    r = log_gamma_right(z);
  } else if (z.imag() >= 0.0) {
    r = log_gamma_reflected_upper(z);
  } else {
    r = std::conj(log_gamma_reflected_upper(std::conj(z)));
  }
  check_finite(r, "log_gamma");
  return r;
}

double log_gamma(double x) {
  if (!(x > 0.0)) {
    if (x == std::floor(x)) throw PoleError("log_gamma: pole at nonpositive integer");
    throw DomainError("log_gamma(real): argument must be positive");
  }
  return std::lgamma(x);
}

AiryValue airy_ai(double x) {
  if (!(x >= -30.0 && x <= 30.0)) throw RangeError("airy_ai: x outside [-30, 30]");
  if (x > kAiryPositiveSwitch) return airy_positive_integral(x);
  if (x < kAiryNegativeSwitch) return airy_negative_asymptotic(x);
  return airy_series(x);
}

constexpr double kParabolaBeta = 0.5;

double log_weight_w(const WeightSpec& spec, double x) {
  validate(spec);
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("weight_w: x must be positive");
  const std::vector<double> a = shifts(spec);
  const double logx = std::log(x);
  double amin = a[0];
  for (double v : a) amin = std::min(amin, v);

  auto slope = [&](double c) {
    double s = -logx;
    for (double v : a) s += boost::math::digamma(c + v);
    return s;
  };
  // Line through the real saddle of the integrand, kept clear of the poles.
  const double floor_c = -amin + 0.5;
  double c = floor_c;
  if (slope(floor_c) < 0.0) {
    double lo = floor_c;
    double hi = floor_c + 1.0;
    while (slope(hi) < 0.0) {
      lo = hi;
      hi = floor_c + 2.0 * (hi - floor_c);
      if (hi > 1e12) throw ConvergenceError("weight_w: saddle search diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    c = 0.5 * (lo + hi);
  }

  // Left of the poles' clearance the line integral oscillates like x^{-i tau}; bending
  // the path into the parabola s = c + i tau - beta tau^2 makes x^{-s} decay instead.
  const bool clamped = c == floor_c;
  // x^{-s} is smallest next to the leading pole, so hug it when x is small.
  if (clamped) c = -amin + std::clamp(2.0 / std::fabs(logx), 0.02, 0.5);
  const double beta = clamped ? std::max(kParabolaBeta, std::fabs(logx) / 8.0) : 0.0;
  double curv = 0.0;
  for (double v : a) curv += boost::math::trigamma(c + v);
  const double sigma = 1.0 / std::sqrt(curv + (clamped ? 2.0 * beta * std::fabs(logx) : 0.0));
  const double h = std::min(sigma / 3.0, (c + amin) / 8.0);

  auto log_integrand = [&](double tau) {
    Complex s(c - beta * tau * tau, tau);
    Complex l = -s * logx;
    for (double v : a) l += log_gamma(s + v);
    return l;
  };
  const Complex l0 = log_integrand(0.0);
  double sum = 0.5;
  double abs_sum = 0.5;
  constexpr long kMaxSteps = 4000000;
  long k = 1;
  for (; k < kMaxSteps; ++k) {
    const double tau = k * h;
    const Complex d = log_integrand(tau) - l0;
    if (d.real() < std::log(1e-18)) break;
    const Complex term = std::exp(d) * Complex(1.0, 2.0 * beta * tau);
    sum += term.real();
    abs_sum += std::abs(term);
  }
  if (k >= kMaxSteps) throw ConvergenceError("weight_w: truncation bound not met");
  if (!(sum > 1e-6 * abs_sum)) throw ConvergenceError("weight_w: cancellation in Mellin-Barnes sum");
  return l0.real() + std::log(h / pi * sum);
}

double weight_w(const WeightSpec& spec, double x) {
  const double lw = log_weight_w(spec, x);
  if (lw > std::log(std::numeric_limits<double>::max()))
    throw OverflowError("weight_w: result exceeds double range, log value " + std::to_string(lw));
  return std::exp(lw);
}

double log_mellin_moment(int j, const WeightSpec& spec) {
  validate(spec);
  if (j < 0) throw DomainError("mellin_moment: j must be nonnegative");
  const std::vector<double> a = shifts(spec);
  double s = 0.0;
  for (double v : a) s += std::lgamma(j + 1.0 + v);
  return s;
}

double mellin_moment(int j, const WeightSpec& spec) {
  const double l = log_mellin_moment(j, spec);
  if (l > std::log(std::numeric_limits<double>::max()))
    throw OverflowError("mellin_moment: result exceeds double range, log value " + std::to_string(l));
  return std::exp(l);
}

}  // namespace pe
