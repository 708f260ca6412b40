#include "product_ensemble/spectral_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include <boost/multiprecision/cpp_int.hpp>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/quadrature.hpp"

namespace pe {

namespace {

using std::numbers::pi;

constexpr double kPhiGuard = 1e-9;

std::vector<int> zeros_if_empty(std::vector<int> v, int size) {
  if (v.empty()) v.assign(static_cast<std::size_t>(std::max(size, 0)), 0);
  return v;
}

bool is_plain_ginibre(const ModelSpec& s) {
  return s.variant == Variant::GinibreProduct ||
         (s.variant == Variant::WithInverses && s.K == 0);
}

void check_phi(const ModelSpec& spec, double phi) {
  spec.validate();
  if (spec.variant == Variant::TruncatedUnitary && spec.M < 2)
    throw DomainError("TruncatedUnitary parametrization needs M >= 2");
  const double hi = phi_max(spec);
  if (!(phi >= kPhiGuard && phi <= hi - kPhiGuard))
    throw DomainError("phi outside the open angle interval");
}

struct Radial {
  double R;
  double dR;
  double alpha;
};

// R(phi), R'(phi) with zeta = R e^{i alpha phi}.
Radial radial(const ModelSpec& spec, double phi) {
  const double M = spec.M;
  if (is_plain_ginibre(spec)) {
    if (phi == 0.0) return {(M + 1) / M, 0.0, 1.0};
    const double sa = std::sin((M + 1) * phi), ca = std::cos((M + 1) * phi);
    const double sb = std::sin(M * phi), cb = std::cos(M * phi);
    return {sa / sb, ((M + 1) * ca * sb - M * sa * cb) / (sb * sb), 1.0};
  }
  if (spec.variant == Variant::WithInverses) {
    const double K = spec.K;
    const double off = K * pi / (K + 1);
    const double pa = (M + 1) / (K + 1), pb = (M - K) / (K + 1);
    const double sa = std::sin(pa * phi + off), ca = std::cos(pa * phi + off);
    const double sb = std::sin(pb * phi + off), cb = std::cos(pb * phi + off);
    return {sa / sb, (pa * ca * sb - pb * sa * cb) / (sb * sb), 1.0};
  }
  const double a = (M + 1) / 2, b = (M - 1) / 2;
  if (phi == 0.0) return {std::sqrt(a / b), 0.0, 0.5};
  const double sa = std::sin(a * phi), ca = std::cos(a * phi);
  const double sb = std::sin(b * phi), cb = std::cos(b * phi);
  const double q = sa / sb;
  const double dq = (a * ca * sb - b * sa * cb) / (sb * sb);
  const double R = std::sqrt(std::max(q, 0.0));
  return {R, R > 0 ? dq / (2 * R) : 0.0, 0.5};
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::GinibreProduct: return "ginibre";
    case Variant::WithInverses: return "inverse";
    case Variant::TruncatedUnitary: return "unitary";
  }
  return "?";
}

ModelSpec ModelSpec::ginibre(int n, int M, std::vector<int> nu) {
  ModelSpec s;
  s.variant = Variant::GinibreProduct;
  s.n = n;
  s.M = M;
  s.nu = zeros_if_empty(std::move(nu), M);
  s.validate();
  return s;
}

ModelSpec ModelSpec::with_inverses(int n, int M, int K, std::vector<int> nu,
                                   std::vector<int> nuTilde) {
  ModelSpec s;
  s.variant = Variant::WithInverses;
  s.n = n;
  s.M = M;
  s.K = K;
  s.nu = zeros_if_empty(std::move(nu), M);
  s.nuTilde = zeros_if_empty(std::move(nuTilde), K);
  s.validate();
  return s;
}

ModelSpec ModelSpec::truncated_unitary(int n, int M, int kappa, std::vector<int> nu) {
  ModelSpec s;
  s.variant = Variant::TruncatedUnitary;
  s.n = n;
  s.M = M;
  s.kappa = kappa;
  s.nu = zeros_if_empty(std::move(nu), M);
  s.validate();
  return s;
}

void ModelSpec::validate() const {
  if (n < 1) throw DomainError("ModelSpec: n must be positive");
  if (M < 1) throw DomainError("ModelSpec: M must be positive");
  if (static_cast<int>(nu.size()) != M) throw DomainError("ModelSpec: nu must have M entries");
  for (int v : nu)
    if (v < 0) throw DomainError("ModelSpec: nu_j must be nonnegative");
  switch (variant) {
    case Variant::GinibreProduct:
      if (K != 0 || !nuTilde.empty()) throw DomainError("ModelSpec: K must be 0 for GinibreProduct");
      break;
    case Variant::WithInverses:
      if (K < 0) throw DomainError("ModelSpec: K must be nonnegative");
      if (static_cast<int>(nuTilde.size()) != K)
        throw DomainError("ModelSpec: nuTilde must have K entries");
      for (int v : nuTilde)
        if (v < 0) throw DomainError("ModelSpec: nuTilde_k must be nonnegative");
      if (K > 0 && nuTilde.back() != 0) throw DomainError("ModelSpec: nuTilde_K must be 0");
      break;
    case Variant::TruncatedUnitary:
      if (kappa <= nu[0]) throw DomainError("ModelSpec: kappa must exceed nu_1");
      break;
  }
}

ModelSpec ModelSpec::with_n(int new_n) const {
  ModelSpec s = *this;
  s.n = new_n;
  s.validate();
  return s;
}

double phi_max(const ModelSpec& spec) {
  return spec.variant == Variant::TruncatedUnitary ? 2.0 * pi / (spec.M + 1) : pi / (spec.M + 1);
}

double scaling_power(const ModelSpec& spec) {
  switch (spec.variant) {
    case Variant::GinibreProduct: return spec.M;
    case Variant::WithInverses: return spec.M - spec.K;
    case Variant::TruncatedUnitary: return spec.M - 1;
  }
  return spec.M;
}

double support_right_end(const ModelSpec& spec) {
  if (spec.variant == Variant::WithInverses && spec.K > 0)
    return std::numeric_limits<double>::infinity();
  return edge_constants(spec).xStar;
}

double param_x(const ModelSpec& spec, double phi) {
  check_phi(spec, phi);
  const double M = spec.M;
  double lx = 0.0;
  if (is_plain_ginibre(spec)) {
    lx = (M + 1) * std::log(std::sin((M + 1) * phi)) - std::log(std::sin(phi)) -
         M * std::log(std::sin(M * phi));
  } else if (spec.variant == Variant::WithInverses) {
    const double K = spec.K;
    const double off = K * pi / (K + 1);
    const double A = (M + 1) / (K + 1) * phi + off;
    const double B = (M - K) / (K + 1) * phi + off;
    lx = (M + 1) * std::log(std::sin(A)) - (K + 1) * std::log(std::sin(phi)) -
         (M - K) * std::log(std::sin(B));
  } else {
    const double a = (M + 1) / 2, b = (M - 1) / 2;
    lx = a * std::log(std::sin(a * phi)) - std::log(std::sin(phi)) - b * std::log(std::sin(b * phi));
  }
  return std::exp(lx);
}

double density_rho(const ModelSpec& spec, double phi) {
  const double x0 = param_x(spec, phi);
  const Radial r = radial(spec, phi);
  return r.R * std::sin(r.alpha * phi) / (pi * x0);
}

double inverse_param(const ModelSpec& spec, double x0) {
  spec.validate();
  if (spec.variant == Variant::TruncatedUnitary && spec.M < 2)
    throw DomainError("TruncatedUnitary parametrization needs M >= 2");
  const double top = support_right_end(spec);
  if (!(x0 > 0.0 && x0 < top)) throw DomainError("inverse_param: x0 outside the open support");
  // param_x decreases from the right support end to 0 across the interval.
  double lo = kPhiGuard;
  double hi = phi_max(spec) - kPhiGuard;
  if (param_x(spec, lo) < x0 || param_x(spec, hi) > x0)
    throw DomainError("inverse_param: x0 not resolvable inside the guarded interval");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (param_x(spec, mid) > x0 ? lo : hi) = mid;
  }
  const double elo = std::fabs(param_x(spec, lo) - x0);
  const double ehi = std::fabs(param_x(spec, hi) - x0);
  return elo <= ehi ? lo : hi;
}

Complex saddle_curve(const ModelSpec& spec, double phi) {
  const Radial r = radial(spec, phi);
  return std::polar(r.R, r.alpha * phi);
}

Complex saddle_curve_derivative(const ModelSpec& spec, double phi) {
  const Radial r = radial(spec, phi);
  return Complex(r.dR, r.alpha * r.R) * std::polar(1.0, r.alpha * phi);
}

std::pair<Complex, Complex> saddle_points(const ModelSpec& spec, double phi) {
  check_phi(spec, phi);
  const Complex w = saddle_curve(spec, phi);
  return {w, std::conj(w)};
}

BulkPoint bulk_point(const ModelSpec& spec, double phi) {
  BulkPoint b;
  b.phi = phi;
  b.x0 = param_x(spec, phi);
  b.rho = density_rho(spec, phi);
  std::tie(b.wPlus, b.wMinus) = saddle_points(spec, phi);
  return b;
}

EdgeData edge_constants(const ModelSpec& spec) {
  spec.validate();
  const double M = spec.M;
  EdgeData e;
  if (is_plain_ginibre(spec)) {
    e.xStar = std::pow(M + 1, M + 1) / std::pow(M, M);
    e.c2 = std::pow(M + 1, M + 2.0 / 3.0) / (std::cbrt(2.0) * std::pow(M, M - 1));
    e.c1 = e.xStar / e.c2;
    e.z0 = 1.0 + 1.0 / M;
    return e;
  }
  if (spec.variant == Variant::WithInverses) throw NoSoftEdgeError("WithInverses has no soft edge");
  if (spec.M < 2) throw DomainError("TruncatedUnitary soft edge needs M >= 2");
  e.xStar = std::pow(M + 1, (M + 1) / 2) / (2.0 * std::pow(M - 1, (M - 1) / 2));
  e.c2 = std::pow(M + 1, (M + 1) / 2) / (std::pow(2.0, 4.0 / 3.0) * std::pow(M - 1, M / 2 - 7.0 / 6.0));
  e.c1 = e.xStar / e.c2;
  e.z0 = std::sqrt((M + 1) / (M - 1));
  return e;
}

namespace {

boost::multiprecision::cpp_int fuss_catalan_exact(int M, int k) {
  if (M < 1) throw DomainError("fuss_catalan_moment: M must be positive");
  if (k < 0) throw DomainError("fuss_catalan_moment: k must be nonnegative");
  using boost::multiprecision::cpp_int;
  cpp_int binom = 1;
  const int top = (M + 1) * k;
  for (int i = 1; i <= k; ++i) {
    binom *= top - k + i;
    binom /= i;
  }
  return binom / (M * k + 1);
}

}  // namespace

std::string fuss_catalan_string(int M, int k) { return fuss_catalan_exact(M, k).str(); }

std::uint64_t fuss_catalan_moment(int M, int k) {
  const auto v = fuss_catalan_exact(M, k);
  if (v > std::numeric_limits<std::uint64_t>::max())
    throw OverflowError("fuss_catalan_moment exceeds 64 bits: " + v.str());
  return static_cast<std::uint64_t>(v);
}

double density_moment(const ModelSpec& spec, int k) {
  spec.validate();
  if (spec.variant != Variant::GinibreProduct)
    throw DomainError("density_moment is defined for GinibreProduct only");
  if (k < 0) throw DomainError("density_moment: k must be nonnegative");
  const double M = spec.M;
  const double hi = phi_max(spec);
  const GaussRule& g = gauss_legendre(32);
  // rho dx = (1/pi) Im zeta(phi) |d log x / d phi| dphi.
  auto integrand = [&](double phi) {
    const double lx = (M + 1) * std::log(std::sin((M + 1) * phi)) - std::log(std::sin(phi)) -
                      M * std::log(std::sin(M * phi));
    const double dlx = (M + 1) * (M + 1) / std::tan((M + 1) * phi) - 1.0 / std::tan(phi) -
                       M * M / std::tan(M * phi);
    const Radial r = radial(spec, phi);
    return std::exp(k * lx) * r.R * std::sin(phi) / pi * std::fabs(dlx);
  };
  auto integrate = [&](int panels) {
    double total = 0.0;
    const double h = hi / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * h;
      for (std::size_t i = 0; i < g.x.size(); ++i) total += 0.5 * h * g.w[i] * integrand(mid + 0.5 * h * g.x[i]);
    }
    return total;
  };
  const double coarse = integrate(32);
  const double fine = integrate(64);
  if (std::fabs(fine - coarse) > 1e-10 * std::fabs(fine))
    throw ConvergenceError("density_moment: quadrature did not converge");
  return fine;
}

}  // namespace pe
