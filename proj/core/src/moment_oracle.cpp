#include "product_ensemble/moment_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/quadrature.hpp"
#include "product_ensemble/special_functions.hpp"

namespace pe {

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;
using BigMatrix = std::vector<std::vector<Big>>;

constexpr int kCap = 8;
constexpr double kMaxCondition = 1e12;

void require_ginibre(const ModelSpec& spec, int n) {
  spec.validate();
  if (spec.variant != Variant::GinibreProduct)
    throw DomainError("moment oracle supports GinibreProduct only");
  if (n < 1) throw DomainError("moment oracle needs n >= 1");
}

Big factorial(int m) {
  Big f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

// Gamma(j+1+nu_1+k) prod_{l>=2} Gamma(j+1+nu_l), exact in integer arithmetic.
BigMatrix exact_moments(const ModelSpec& spec, int n) {
  BigMatrix m(n, std::vector<Big>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Big v = factorial(j + spec.nu[0] + k);
      for (int l = 1; l < spec.M; ++l) v *= factorial(j + spec.nu[static_cast<std::size_t>(l)]);
      m[j][k] = v;
    }
  return m;
}

// Gauss-Jordan with partial pivoting; returns the inverse and accumulates log|det|.
BigMatrix invert(BigMatrix a, Big* log_det = nullptr) {
  const std::size_t n = a.size();
  BigMatrix inv(n, std::vector<Big>(n, Big(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  Big ld = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) throw IllConditionedError("moment matrix is singular");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    ld += log(abs(a[c][c]));
    const Big d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Big f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  if (log_det) *log_det = ld;
  return inv;
}

Big norm1(const BigMatrix& a) {
  Big best = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    Big col = 0;
    for (std::size_t j = 0; j < a.size(); ++j) col += abs(a[j][k]);
    best = std::max(best, col);
  }
  return best;
}

double scaled_condition(const BigMatrix& m) {
  const std::size_t n = m.size();
  BigMatrix s = m;
  std::vector<Big> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = 1 / sqrt(m[i][i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) s[i][k] *= d[i] * d[k];
  return static_cast<double>(norm1(s) * norm1(invert(s)));
}

struct Oracle {
  int n;
  BigMatrix inv;
};

Oracle make_oracle(const ModelSpec& spec, int n) {
  require_ginibre(spec, n);
  const BigMatrix m = exact_moments(spec, n);
  if (scaled_condition(m) > kMaxCondition)
    throw IllConditionedError("moment matrix condition estimate exceeds 1e12");
  return {n, invert(m)};
}

// c_k(x) = sum_j x^j (M^{-1})_{k,j}, summed in 50 digits.
std::vector<double> coefficients(const Oracle& o, double x) {
  std::vector<double> c(static_cast<std::size_t>(o.n));
  for (int k = 0; k < o.n; ++k) {
    Big acc = 0, xp = 1;
    for (int j = 0; j < o.n; ++j) {
      acc += xp * o.inv[k][j];
      xp *= x;
    }
    c[static_cast<std::size_t>(k)] = static_cast<double>(acc);
  }
  return c;
}

std::vector<double> weights_at(const ModelSpec& spec, int n, double y) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = weight_w({spec.M, spec.nu, k}, y);
  return w;
}

double combine(const std::vector<double>& c, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * w[k];
  return s;
}

}  // namespace

MomentMatrix moment_matrix(const ModelSpec& spec, int n) {
  require_ginibre(spec, n);
  const BigMatrix m = exact_moments(spec, n);
  MomentMatrix out;
  out.n = n;
  out.beyondCap = n > kCap;
  out.entries.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.entries(j, k) = static_cast<double>(m[j][k]);
  out.conditionEstimate = scaled_condition(m);
  if (out.conditionEstimate > kMaxCondition)
    throw IllConditionedError("moment matrix condition estimate exceeds 1e12");
  return out;
}

double kernel_direct(const ModelSpec& spec, int n, double x, double y) {
  if (!(x > 0.0 && y > 0.0)) throw DomainError("kernel_direct needs x, y > 0");
  const Oracle o = make_oracle(spec, n);
  return combine(coefficients(o, x), weights_at(spec, n, y));
}

NormalizationCheck normalization_check(const ModelSpec& spec, int n) {
  require_ginibre(spec, n);
  const BigMatrix m = exact_moments(spec, n);
  if (scaled_condition(m) > kMaxCondition)
    throw IllConditionedError("moment matrix condition estimate exceeds 1e12");
  Big ld = 0;
  invert(m, &ld);
  NormalizationCheck out;
  out.lhs = static_cast<double>(ld);
  double rhs = 0.0;
  for (int i = 1; i <= n; ++i) {
    rhs += log_gamma(static_cast<double>(i));
    for (int j = 1; j <= spec.M; ++j) rhs += log_gamma(static_cast<double>(i + spec.nu[static_cast<std::size_t>(j - 1)]));
  }
  out.rhs = rhs;
  out.pass = std::fabs(out.lhs - out.rhs) <= 1e-9;
  return out;
}

double reproducing_check(const ModelSpec& spec, int n, int quadratureOrder) {
  if (n > 6) throw DomainError("reproducing_check needs n <= 6");
  const Oracle o = make_oracle(spec, n);
  const GaussRule& g = gauss_legendre(quadratureOrder);
  // t = e^u over u in [-40, log 2e4], unit panels; the weights decay like
  // exp(-(M+1) t^{1/(M+1)}) so the upper end leaves a negligible tail for n <= 6.
  const double u_lo = -40.0, u_hi = std::log(2.0e4);
  const int panels = static_cast<int>(std::ceil((u_hi - u_lo) / 0.5));
  const double h = (u_hi - u_lo) / panels;
  std::vector<double> t, wt;
  for (int p = 0; p < panels; ++p)
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double u = u_lo + (p + 0.5) * h + 0.5 * h * g.x[i];
      t.push_back(std::exp(u));
      wt.push_back(g.w[i] * 0.5 * h * std::exp(u));
    }
  std::vector<std::vector<double>> wk(t.size()), ck(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    wk[i] = weights_at(spec, n, t[i]);
    ck[i] = coefficients(o, t[i]);
  }
  const double pts[4] = {0.5, 1.0, 2.0, 3.0};
  double worst = 0.0;
  for (double x : pts) {
    const std::vector<double> cx = coefficients(o, x);
    for (double y : pts) {
      const std::vector<double> wy = weights_at(spec, n, y);
      double integral = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i)
        integral += wt[i] * combine(cx, wk[i]) * combine(ck[i], wy);
      const double direct = combine(cx, wy);
      worst = std::max(worst, std::fabs(integral - direct) / std::max(1.0, std::fabs(direct)));
    }
  }
  return worst;
}

}  // namespace pe
