#include "product_ensemble/kernel_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include "product_ensemble/contours.hpp"
#include "product_ensemble/errors.hpp"
#include "product_ensemble/parallel.hpp"
#include "product_ensemble/phase_functions.hpp"
#include "product_ensemble/quadrature.hpp"
#include "product_ensemble/special_functions.hpp"

namespace pe {

namespace {

using std::numbers::pi;

constexpr double kPrune = 1e-20;
constexpr int kDirectMaxN = 24;
constexpr double kNearPanels = 2.0;

// A complex number m e^{l}; keeps huge and tiny kernels representable.
struct Scaled {
  Complex m;
  double l = 0.0;
};

Scaled add(const Scaled& a, const Scaled& b) {
  if (a.m == 0.0) return b;
  if (b.m == 0.0) return a;
  const double top = std::max(a.l, b.l);
  return {a.m * std::exp(a.l - top) + b.m * std::exp(b.l - top), top};
}

Complex expm1c(Complex w) {
  if (std::abs(w) < 1e-5) return w * (1.0 + w * (0.5 + w / 6.0));
  return std::exp(w) - 1.0;
}

// Contours for one evaluation regime. Sigma is closed; when C crosses it, Sigma is
// split at the two crossings so no panel straddles C.
struct Geometry {
  Contour C;
  Contour Sigma;
  bool crossing = false;
  Complex Pplus;
  Complex Pminus;
  double ppuC = 1.0;
  double ppuS = 1.0;
};

// Quadrature data for one Gauss order.
struct Plan {
  std::vector<Complex> s, ws, Gs;
  std::vector<Complex> t, wt, Gt, corr;
};

Contour split_at_crossings(const Contour& closed, double x) {
  const auto cross = vertical_crossings(closed, x);
  Contour out = closed;
  out.segments.clear();
  for (std::size_t si = 0; si < closed.segments.size(); ++si) {
    std::vector<double> cuts{0.0};
    for (const auto& [seg, u] : cross)
      if (seg == static_cast<int>(si) && u > 1e-12 && u < 1.0 - 1e-12) cuts.push_back(u);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      out.segments.push_back(closed.segments[si].sub(cuts[k], cuts[k + 1]));
  }
  return out;
}

double line_peak(const ModelSpec& spec, double y, double c) {
  const double T = truncation_height(spec, y, c, 1.0, 1e-20);
  const PhaseContext ctx{spec, y, spec.n};
  double peak = -std::numeric_limits<double>::infinity();
  for (double tau = 0.0; tau <= T; tau += 0.25) peak = std::max(peak, big_F(ctx, Complex(c, tau)).real());
  return peak;
}

// Rightmost local minimum of the real function F(s; y) right of the ellipse, or n - 1/4.
double right_abscissa(const ModelSpec& spec, double y) {
  const double n = spec.n;
  const double lo = n - 0.25;
  if (spec.variant == Variant::WithInverses && spec.K > 0) return lo;
  const PhaseContext ctx{spec, y, spec.n};
  auto F = [&](double s) { return big_F(ctx, Complex(s, 0.0)).real(); };
  const double hi = lo + 4.0 + 4.0 * std::max(n, std::pow(y, 1.0 / std::max(1, spec.M - (spec.variant == Variant::TruncatedUnitary ? 1 : 0))));
  constexpr int kSteps = 4000;
  const double h = (hi - lo) / kSteps;
  int best = -1;
  double prev2 = F(lo), prev1 = F(lo + h);
  for (int k = 2; k <= kSteps; ++k) {
    const double cur = F(lo + k * h);
    if (prev1 <= prev2 && prev1 <= cur) best = k - 1;
    prev2 = prev1;
    prev1 = cur;
  }
  if (best < 0) return prev1 < F(lo) ? hi : lo;
  // Golden-section refinement inside the bracketing cell pair.
  double a = lo + (best - 1) * h, b = lo + (best + 1) * h;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    (F(c) < F(d) ? b : a) = (F(c) < F(d) ? d : c);
  }
  return std::max(lo, 0.5 * (a + b));
}

Geometry direct_geometry(const ModelSpec& spec, double y, ContourChoice choice) {
  double c = -0.5;
  if (choice == ContourChoice::DirectRight) {
    c = right_abscissa(spec, y);
  } else if (choice != ContourChoice::DirectLeft) {
    const double cr = right_abscissa(spec, y);
    if (line_peak(spec, y, cr) < line_peak(spec, y, -0.5)) c = cr;
  }
  const DirectContours dc = build_direct_contours(spec, y, c);
  Geometry g;
  g.C = dc.C;
  g.Sigma = dc.Sigma;
  g.ppuC = 1.0;
  g.ppuS = 2.0;
  return g;
}

Geometry bulk_geometry(const ModelSpec& spec, double phi) {
  const int n = spec.n;
  const BulkPoint bp = bulk_point(spec, phi);
  double X = n * bp.wPlus.real();
  if (std::fabs(X - std::round(X)) < 1e-6) X += 0.5;
  const double r = (std::floor(0.1 * n) + 0.5) / n;
  const double a = std::pow(static_cast<double>(n), scaling_power(spec)) * bp.x0;
  const double T = truncation_height(spec, a, X, n * bp.wPlus.imag(), 1e-22);
  Geometry g;
  g.C.name = "bulk_C";
  g.C.role = ContourRole::C;
  g.C.segments.push_back(ContourSegment::vertical(X, -T, T, "line"));
  const Contour sigma = build_sigma_tilde(spec, r, n);
  const auto cross = vertical_crossings(sigma, X);
  if (cross.size() != 2) throw GeometryError("bulk C must cross Sigma exactly twice");
  Complex p0 = sigma.segments[cross[0].first].point(cross[0].second);
  Complex p1 = sigma.segments[cross[1].first].point(cross[1].second);
  if (p0.imag() < p1.imag()) std::swap(p0, p1);
  g.Pplus = Complex(X, p0.imag());
  g.Pminus = Complex(X, p1.imag());
  g.Sigma = split_at_crossings(sigma, X);
  g.Sigma.name = "bulk_Sigma";
  g.crossing = true;
  // The integrands vary on the scale n^{1/2} or larger; the order 16 vs 32 check guards this.
  g.ppuC = 0.125;
  g.ppuS = 0.125;
  return g;
}

Geometry edge_geometry(const ModelSpec& spec) {
  const EdgeContours ec = build_edge_contours(spec);
  Geometry g;
  g.C = ec.C;
  g.Sigma = ec.Sigma;
  g.ppuC = 0.125;
  g.ppuS = 0.125;
  return g;
}

// Exact integral of ds/(s - t) over the polygonal C.
Complex exact_cauchy(const Contour& C, Complex t) {
  Complex total = 0.0;
  for (const auto& seg : C.segments) total += std::log((seg.end() - t) / (seg.start() - t));
  return total;
}

void check_clearance(const ModelSpec& spec, const Plan& p) {
  const int n = spec.n;
  for (const Complex& t : p.t) {
    const double k = std::round(t.real());
    if (k >= 0 && k <= n - 1 && std::abs(t - k) < 1e-3)
      throw PoleClearanceError("Sigma node within 1e-3 of a pole at an integer in [0, n-1]");
  }
  const bool inverse_poles = spec.variant == Variant::WithInverses && spec.K > 0;
  for (const Complex& s : p.s) {
    const double k = std::round(s.real());
    const bool pole = k <= -1 || (inverse_poles && k >= n);
    if (pole && std::abs(s - k) < 1e-3)
      throw PoleClearanceError("C node within 1e-3 of a pole of the s-integrand");
  }
}

Plan make_plan(const ModelSpec& spec, const Geometry& g, double scale, int order) {
  Plan p;
  const QuadratureGrid gc = discretize(g.C, g.ppuC * scale, order);
  const QuadratureGrid gs = discretize(g.Sigma, g.ppuS * scale, order);
  p.s = gc.nodes;
  p.ws = gc.weights;
  p.t = gs.nodes;
  p.wt = gs.weights;
  check_clearance(spec, p);
  p.Gs.resize(p.s.size());
  p.Gt.resize(p.t.size());
  for (std::size_t i = 0; i < p.s.size(); ++i) p.Gs[i] = phase_gamma_sum(spec, spec.n, p.s[i]);
  for (std::size_t j = 0; j < p.t.size(); ++j) p.Gt[j] = phase_gamma_sum(spec, spec.n, p.t[j]);
  // Panel length around each C node.
  std::vector<double> panel_len(p.s.size(), 0.0);
  for (std::size_t start = 0; start < p.s.size(); start += static_cast<std::size_t>(order)) {
    double len = 0.0;
    for (int k = 0; k < order; ++k) len += std::abs(p.ws[start + static_cast<std::size_t>(k)]);
    for (int k = 0; k < order; ++k) panel_len[start + static_cast<std::size_t>(k)] = len;
  }
  // The correction only matters near C; far away it is pure roundoff, which the
  // factor (x/y)^t can amplify enormously, so it is dropped there.
  p.corr.assign(p.t.size(), 0.0);
  for (std::size_t j = 0; j < p.t.size(); ++j) {
    bool near = false;
    for (std::size_t i = 0; i < p.s.size() && !near; ++i)
      near = std::abs(p.s[i] - p.t[j]) < kNearPanels * panel_len[i];
    if (!near) continue;
    Complex discrete = 0.0;
    for (std::size_t i = 0; i < p.s.size(); ++i) discrete += p.ws[i] / (p.s[i] - p.t[j]);
    p.corr[j] = exact_cauchy(g.C, p.t[j]) - discrete;
  }
  return p;
}

// v_i = sum_j g_j / (s_i - t_j) with g normalized by e^{Lx}; returns Lx.
double sigma_pass(const Plan& p, double log_x, std::vector<Complex>& v) {
  const std::size_t nt = p.t.size(), ns = p.s.size();
  double Lx = std::numeric_limits<double>::infinity();
  std::vector<double> expo(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    expo[j] = (p.Gt[j] - p.t[j] * log_x).real();
    Lx = std::min(Lx, expo[j]);
  }
  std::vector<double> tr, ti, gr, gi;
  tr.reserve(nt);
  ti.reserve(nt);
  gr.reserve(nt);
  gi.reserve(nt);
  double gmax = 0.0;
  std::vector<Complex> gv(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    gv[j] = p.wt[j] * std::exp(-(p.Gt[j] - p.t[j] * log_x) + Lx);
    gmax = std::max(gmax, std::abs(gv[j]));
  }
  for (std::size_t j = 0; j < nt; ++j) {
    if (std::abs(gv[j]) < kPrune * gmax) continue;
    tr.push_back(p.t[j].real());
    ti.push_back(p.t[j].imag());
    gr.push_back(gv[j].real());
    gi.push_back(gv[j].imag());
  }
  const std::size_t m = tr.size();
  v.assign(ns, 0.0);
  for (std::size_t i = 0; i < ns; ++i) {
    const double sr = p.s[i].real(), si = p.s[i].imag();
    double accr = 0.0, acci = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double dr = sr - tr[j], di = si - ti[j];
      const double inv = 1.0 / (dr * dr + di * di);
      // g / d = g conj(d) / |d|^2
      accr += (gr[j] * dr + gi[j] * di) * inv;
      acci += (gi[j] * dr - gr[j] * di) * inv;
    }
    v[i] = Complex(accr, acci);
  }
  return Lx;
}

// K(x, y) as a scaled complex number given the sigma pass for x.
Scaled c_pass(const Plan& p, const Geometry& g, const std::vector<Complex>& v, double Lx,
              double log_y, double log_ratio) {
  const std::size_t ns = p.s.size();
  double Ly = -std::numeric_limits<double>::infinity();
  std::vector<double> expo(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    expo[i] = (p.Gs[i] - p.s[i] * log_y).real();
    Ly = std::max(Ly, expo[i]);
  }
  Complex D = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    if (expo[i] - Ly < -50.0) continue;
    D += p.ws[i] * std::exp(p.Gs[i] - p.s[i] * log_y - Ly) * v[i];
  }
  const double shift = Ly - Lx;
  Complex corr = 0.0;
  for (std::size_t j = 0; j < p.t.size(); ++j)
    if (p.corr[j] != 0.0) corr += p.wt[j] * std::exp(p.t[j] * log_ratio - shift) * p.corr[j];
  const Complex two_pi_i(0.0, 2.0 * pi);
  Scaled out{(D + corr) / (two_pi_i * two_pi_i), shift - log_y};
  if (g.crossing) {
    Complex E;
    if (log_ratio == 0.0) {
      E = (g.Pplus - g.Pminus) / two_pi_i;
      out = add(out, Scaled{E, -log_y});
    } else {
      // e^{P- L} expm1((P+ - P-) L) / (2 pi i L), magnitude kept in the exponent.
      const Complex head = g.Pminus * log_ratio;
      E = expm1c((g.Pplus - g.Pminus) * log_ratio) / (two_pi_i * log_ratio) *
          std::exp(Complex(0.0, head.imag()));
      out = add(out, Scaled{E, head.real() - log_y});
    }
  }
  return out;
}

struct Evaluator {
  ModelSpec spec;
  Geometry geometry;
  Plan p16;
  Plan p32;

  Evaluator(const ModelSpec& s, Geometry g, double scale) : spec(s), geometry(std::move(g)) {
    p16 = make_plan(spec, geometry, scale, 16);
    p32 = make_plan(spec, geometry, scale, 32);
  }
};

struct RawResult {
  Scaled hi;
  Scaled lo;
};

// Evaluates all (x_a, y_b) pairs; log_ratio(a, b) = log(x_a / y_b) computed stably by the caller.
std::vector<RawResult> evaluate_grid(const Evaluator& ev, const std::vector<double>& log_x,
                                     const std::vector<double>& log_y,
                                     const std::function<double(std::size_t, std::size_t)>& log_ratio) {
  std::vector<RawResult> out(log_x.size() * log_y.size());
  parallel_for_index(log_x.size(), [&](std::size_t a) {
    std::vector<Complex> v16, v32;
    const double L16 = sigma_pass(ev.p16, log_x[a], v16);
    const double L32 = sigma_pass(ev.p32, log_x[a], v32);
    for (std::size_t b = 0; b < log_y.size(); ++b) {
      const double lr = log_ratio(a, b);
      RawResult& r = out[a * log_y.size() + b];
      r.lo = c_pass(ev.p16, ev.geometry, v16, L16, log_y[b], lr);
      r.hi = c_pass(ev.p32, ev.geometry, v32, L32, log_y[b], lr);
    }
  });
  return out;
}

struct Finished {
  double value;
  double imag;
  double error;
};

// Applies an extra log factor and compares the two orders.
Finished finish(const RawResult& r, double extra_log) {
  const Complex hi = r.hi.m * std::exp(r.hi.l + extra_log);
  const Complex lo = r.lo.m * std::exp(r.lo.l + extra_log);
  if (!std::isfinite(hi.real()) || !std::isfinite(hi.imag()))
    throw OverflowError("kernel value outside double range");
  return {hi.real(), std::fabs(hi.imag()), std::abs(hi - lo)};
}

bool accepted(const Finished& f, double tol) {
  const double scale = std::max(1.0, std::fabs(f.value));
  return f.error <= tol * scale && f.imag <= 1e-6 * scale;
}

Geometry choose_geometry(const ModelSpec& spec, double x, double y, ContourChoice choice) {
  switch (choice) {
    case ContourChoice::DirectLeft:
    case ContourChoice::DirectRight:
    case ContourChoice::DirectBest: return direct_geometry(spec, y, choice);
    case ContourChoice::Edge: return edge_geometry(spec);
    case ContourChoice::Bulk:
    case ContourChoice::Auto: break;
  }
  const double x0 = 0.5 * (x + y) / std::pow(static_cast<double>(spec.n), scaling_power(spec));
  const double top = support_right_end(spec);
  if (choice == ContourChoice::Auto && spec.n <= kDirectMaxN)
    return direct_geometry(spec, y, ContourChoice::DirectBest);
  try {
    if (choice == ContourChoice::Auto && std::isfinite(top) && x0 > 0.85 * top)
      return edge_geometry(spec);
    if (x0 < top) return bulk_geometry(spec, inverse_param(spec, x0));
    if (choice == ContourChoice::Bulk) throw DomainError("bulk contours need x0 inside the support");
    return edge_geometry(spec);
  } catch (const GeometryError&) {
    if (choice == ContourChoice::Bulk || spec.n > 512) throw;
  } catch (const DomainError&) {
    if (choice == ContourChoice::Bulk || spec.n > 512) throw;
  }
  return direct_geometry(spec, y, ContourChoice::DirectBest);
}

double default_scale(const KernelOptions& o) {
  return o.panelsPerUnitLength > 0 ? o.panelsPerUnitLength : 1.0;
}

// Runs a grid evaluation with refinement until every entry is accepted.
template <class MakeGeometry, class Extra>
std::vector<Finished> refine_grid(const ModelSpec& spec, MakeGeometry make_geometry,
                                  const std::vector<double>& log_x, const std::vector<double>& log_y,
                                  const std::function<double(std::size_t, std::size_t)>& log_ratio,
                                  Extra extra_log, const KernelOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("KernelOptions: tol must be positive");
  if (options.maxRefinements < 0) throw DomainError("KernelOptions: maxRefinements must be >= 0");
  if (!(options.panelsPerUnitLength >= 0.0))
    throw DomainError("KernelOptions: panelsPerUnitLength must be >= 0");
  double scale = default_scale(options);
  std::vector<Finished> results;
  for (int attempt = 0; attempt <= options.maxRefinements; ++attempt, scale *= 2.0) {
    const Evaluator ev(spec, make_geometry(), scale);
    const auto raw = evaluate_grid(ev, log_x, log_y, log_ratio);
    results.clear();
    bool ok = true;
    for (std::size_t a = 0; a < log_x.size(); ++a)
      for (std::size_t b = 0; b < log_y.size(); ++b) {
        results.push_back(finish(raw[a * log_y.size() + b], extra_log(a, b)));
        ok = ok && accepted(results.back(), options.tol);
      }
    if (ok) return results;
  }
  double worst = 0.0;
  for (const auto& r : results) worst = std::max(worst, r.error / std::max(1.0, std::fabs(r.value)));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", worst);
  throw ConvergenceError(std::string("kernel quadrature did not converge; relative error estimate ") + buf);
}

void check_bulk_frame(const ScalingFrame& frame) {
  if (frame.mode != ScalingMode::Bulk || !frame.bulk)
    throw DomainError("rescaled_bulk_kernel needs a Bulk frame");
}

void check_edge_frame(const ScalingFrame& frame) {
  if (frame.mode != ScalingMode::Edge || !frame.edge)
    throw DomainError("rescaled_edge_kernel needs an Edge frame");
}

// Grid of rescaled values; diagonal entries average the offsets eta = xi +- 1e-7.
std::vector<double> rescaled_grid_impl(const ModelSpec& spec_in, const ScalingFrame& frame,
                                       const std::vector<double>& xis,
                                       const std::vector<double>& etas,
                                       const KernelOptions& options) {
  const ModelSpec spec = spec_in.with_n(frame.n);
  const double n = frame.n;
  const double p = scaling_power(spec);
  constexpr double kDiag = 1e-7;

  // Column set: requested etas plus diagonal offsets.
  std::vector<double> cols = etas;
  for (double xi : xis)
    if (std::find(etas.begin(), etas.end(), xi) != etas.end()) {
      cols.push_back(xi - kDiag);
      cols.push_back(xi + kDiag);
    }

  std::vector<double> lx(xis.size()), ly(cols.size());
  std::function<double(std::size_t, std::size_t)> ratio;
  std::function<double(std::size_t, std::size_t)> extra;
  std::function<Geometry()> geom;
  if (frame.mode == ScalingMode::Bulk) {
    check_bulk_frame(frame);
    const BulkPoint bp = *frame.bulk;
    const double base = n * bp.rho * bp.x0;
    for (std::size_t a = 0; a < xis.size(); ++a) lx[a] = p * std::log(n) + std::log(bp.x0 + xis[a] / (n * bp.rho));
    for (std::size_t b = 0; b < cols.size(); ++b) ly[b] = p * std::log(n) + std::log(bp.x0 + cols[b] / (n * bp.rho));
    ratio = [&, base](std::size_t a, std::size_t b) { return std::log1p((xis[a] - cols[b]) / (base + cols[b])); };
    const double cot = bp.wPlus.real() / bp.wPlus.imag();
    extra = [&, cot, bp](std::size_t a, std::size_t b) {
      return -pi * (xis[a] - cols[b]) * cot + (p - 1.0) * std::log(n) - std::log(bp.rho);
    };
    geom = [&spec, bp] { return bulk_geometry(spec, bp.phi); };
  } else {
    check_edge_frame(frame);
    const EdgeData e = *frame.edge;
    const double n23 = std::pow(n, 2.0 / 3.0);
    for (std::size_t a = 0; a < xis.size(); ++a) lx[a] = p * std::log(n) + std::log(e.xStar + e.c2 * xis[a] / n23);
    for (std::size_t b = 0; b < cols.size(); ++b) ly[b] = p * std::log(n) + std::log(e.xStar + e.c2 * cols[b] / n23);
    ratio = [&, n23, e](std::size_t a, std::size_t b) {
      return std::log1p(e.c2 * (xis[a] - cols[b]) / (e.xStar * n23 + e.c2 * cols[b]));
    };
    const double k = e.z0 / e.c1 * std::cbrt(n);
    extra = [&, k, e](std::size_t a, std::size_t b) {
      return -k * (xis[a] - cols[b]) + (p - 2.0 / 3.0) * std::log(n) + std::log(e.c2);
    };
    geom = [&spec] { return edge_geometry(spec); };
  }
  const auto res = refine_grid(spec, geom, lx, ly, ratio, extra, options);

  std::vector<double> out(xis.size() * etas.size());
  for (std::size_t a = 0; a < xis.size(); ++a)
    for (std::size_t b = 0; b < etas.size(); ++b) {
      if (xis[a] == etas[b]) {
        const auto lo = std::find(cols.begin() + static_cast<long>(etas.size()), cols.end(), xis[a] - kDiag);
        const std::size_t c = static_cast<std::size_t>(lo - cols.begin());
        out[a * etas.size() + b] = 0.5 * (res[a * cols.size() + c].value + res[a * cols.size() + c + 1].value);
      } else {
        out[a * etas.size() + b] = res[a * cols.size() + b].value;
      }
    }
  return out;
}

double airy_formula(double x, double y) {
  const AiryValue ax = airy_ai(x);
  const double h = y - x;
  if (std::fabs(h) < 1e-4) {
    const double A = ax.ai, Ap = ax.ai_prime;
    return (Ap * Ap - x * A * A) - h * A * A / 2.0 -
           h * h * (A * Ap + x * x * A * A - x * Ap * Ap) / 6.0;
  }
  const AiryValue ay = airy_ai(y);
  return (ax.ai * ay.ai_prime - ax.ai_prime * ay.ai) / (x - y);
}

// Nodes and weights along two rays from apex at angles -theta (inward) and +theta (outward).
void wedge_nodes(double apex, double theta, double R, double panel, int order,
                 std::vector<Complex>& z, std::vector<Complex>& w) {
  const GaussRule& g = gauss_legendre(order);
  const int panels = std::max(1, static_cast<int>(std::ceil(R / panel)));
  const double h = R / panels;
  for (int side = 0; side < 2; ++side) {
    const Complex dir = std::polar(1.0, side == 0 ? -theta : theta);
    // Lower ray runs toward the apex, upper ray away from it.
    const double sign = side == 0 ? -1.0 : 1.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * h;
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double r = mid + 0.5 * h * g.x[i];
        z.push_back(apex + r * dir);
        w.push_back(sign * g.w[i] * 0.5 * h * dir);
      }
    }
  }
}

// Radius beyond which Re(phase) stays 1e-18 below its peak along both rays.
double wedge_radius(const std::function<double(Complex)>& re_phase, double apex, double theta) {
  double peak = re_phase(apex);
  double r = 0.0;
  for (int it = 0; it < 100000; ++it) {
    r += 0.125;
    const double v = std::max(re_phase(apex + r * std::polar(1.0, theta)),
                              re_phase(apex + r * std::polar(1.0, -theta)));
    peak = std::max(peak, v);
    if (v < peak - 41.5 && r > 1.0) return r;
  }
  throw ConvergenceError("airy contour integrand does not decay");
}

Complex airy_double_integral(double x, double y, int order) {
  const double aR = std::max(1.0, std::sqrt(std::max(x, 0.0)));
  const double aL = -std::max(1.0, std::sqrt(std::max(y, 0.0)));
  auto phase_mu = [x](Complex m) { return m * m * m / 3.0 - x * m; };
  auto phase_lam = [y](Complex l) { return -(l * l * l) / 3.0 + y * l; };
  const double RR = wedge_radius([&](Complex m) { return phase_mu(m).real(); }, aR, pi / 3);
  const double RL = wedge_radius([&](Complex l) { return phase_lam(l).real(); }, aL, 2 * pi / 3);
  std::vector<Complex> mu, wm, lam, wl;
  wedge_nodes(aR, pi / 3, RR, 0.25, order, mu, wm);
  wedge_nodes(aL, 2 * pi / 3, RL, 0.25, order, lam, wl);
  double pm = -std::numeric_limits<double>::infinity(), pl = pm;
  for (const auto& m : mu) pm = std::max(pm, phase_mu(m).real());
  for (const auto& l : lam) pl = std::max(pl, phase_lam(l).real());
  std::vector<Complex> fm(mu.size()), fl(lam.size());
  for (std::size_t i = 0; i < mu.size(); ++i) fm[i] = wm[i] * std::exp(phase_mu(mu[i]) - pm);
  for (std::size_t j = 0; j < lam.size(); ++j) fl[j] = wl[j] * std::exp(phase_lam(lam[j]) - pl);
  Complex sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < lam.size(); ++j) acc += fl[j] / (mu[i] - lam[j]);
    sum += fm[i] * acc;
  }
  const Complex two_pi_i(0.0, 2.0 * pi);
  return sum / (two_pi_i * two_pi_i) * std::exp(pm + pl);
}

}  // namespace

KernelValue kernel_finite_n(const ModelSpec& spec, double x, double y, const KernelOptions& options) {
  spec.validate();
  if (!(x > 0.0 && y > 0.0)) throw DomainError("kernel_finite_n needs x, y > 0");
  const std::vector<double> lx{std::log(x)}, ly{std::log(y)};
  const double lr = std::log(x / y);
  const auto res = refine_grid(
      spec, [&] { return choose_geometry(spec, x, y, options.contours); }, lx, ly,
      [lr](std::size_t, std::size_t) { return lr; }, [](std::size_t, std::size_t) { return 0.0; },
      options);
  return {res[0].value, res[0].imag, res[0].error};
}

ScalingFrame bulk_frame(const ModelSpec& spec, double phi) {
  ScalingFrame f;
  f.mode = ScalingMode::Bulk;
  f.bulk = bulk_point(spec, phi);
  f.n = spec.n;
  return f;
}

ScalingFrame edge_frame(const ModelSpec& spec) {
  ScalingFrame f;
  f.mode = ScalingMode::Edge;
  f.edge = edge_constants(spec);
  f.n = spec.n;
  return f;
}

double rescaled_bulk_kernel(const ModelSpec& spec, const ScalingFrame& frame, double xi,
                            double eta, const KernelOptions& options) {
  check_bulk_frame(frame);
  return rescaled_grid_impl(spec, frame, {xi}, {eta}, options)[0];
}

double rescaled_edge_kernel(const ModelSpec& spec, const ScalingFrame& frame, double xi,
                            double eta, const KernelOptions& options) {
  check_edge_frame(frame);
  return rescaled_grid_impl(spec, frame, {xi}, {eta}, options)[0];
}

std::vector<double> rescaled_kernel_grid(const ModelSpec& spec, const ScalingFrame& frame,
                                         const std::vector<double>& xis,
                                         const std::vector<double>& etas,
                                         const KernelOptions& options) {
  return rescaled_grid_impl(spec, frame, xis, etas, options);
}

double sine_kernel(double xi, double eta) {
  const double d = pi * (xi - eta);
  if (std::fabs(d) < 1e-8) return 1.0 - d * d / 6.0;
  return std::sin(d) / d;
}

double airy_kernel(double xi, double eta, AiryMethod method) {
  if (!(xi >= -30.0 && xi <= 10.0 && eta >= -30.0 && eta <= 10.0))
    throw RangeError("airy_kernel: arguments outside [-30, 10]");
  if (method == AiryMethod::AiryFormula) return airy_formula(xi, eta);
  const Complex hi = airy_double_integral(xi, eta, 32);
  const Complex lo = airy_double_integral(xi, eta, 16);
  const double scale = std::max(1.0, std::fabs(hi.real()));
  if (std::abs(hi - lo) > 1e-9 * scale || std::fabs(hi.imag()) > 1e-9 * scale)
    throw ConvergenceError("airy_kernel contour integral did not converge");
  return hi.real();
}

ConvergenceReport convergence_report(const ModelSpec& spec, ScalingMode mode, double location,
                                     const std::vector<int>& nList,
                                     const std::vector<std::pair<double, double>>& grid,
                                     const KernelOptions& options) {
  for (std::size_t i = 1; i < nList.size(); ++i)
    if (nList[i] <= nList[i - 1]) throw DomainError("convergence_report: nList must increase");
  std::vector<double> xs, ys;
  for (const auto& [xi, eta] : grid) {
    if (std::find(xs.begin(), xs.end(), xi) == xs.end()) xs.push_back(xi);
    if (std::find(ys.begin(), ys.end(), eta) == ys.end()) ys.push_back(eta);
  }
  ConvergenceReport rep;
  for (int n : nList) {
    const ModelSpec s = spec.with_n(n);
    const ScalingFrame frame = mode == ScalingMode::Bulk ? bulk_frame(s, location) : edge_frame(s);
    const auto vals = rescaled_kernel_grid(s, frame, xs, ys, options);
    double sup = 0.0;
    for (const auto& [xi, eta] : grid) {
      const std::size_t a = static_cast<std::size_t>(std::find(xs.begin(), xs.end(), xi) - xs.begin());
      const std::size_t b = static_cast<std::size_t>(std::find(ys.begin(), ys.end(), eta) - ys.begin());
      const double limit = mode == ScalingMode::Bulk ? sine_kernel(xi, eta) : airy_kernel(xi, eta);
      sup = std::max(sup, std::fabs(vals[a * ys.size() + b] - limit));
    }
    rep.rows.push_back({n, sup});
  }
  rep.strictlyDecreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    rep.strictlyDecreasing = rep.strictlyDecreasing && rep.rows[i].supError < rep.rows[i - 1].supError;
  return rep;
}

}  // namespace pe
