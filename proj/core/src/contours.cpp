#include "product_ensemble/contours.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <numbers>
#include <ostream>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/phase_functions.hpp"
#include "product_ensemble/quadrature.hpp"

namespace pe {

namespace {

using std::numbers::pi;

// phi in (0, phi_max) with |zeta(phi)| = eps; |zeta| decreases from |zeta(0)| to 0.
double phi_at_radius(const ModelSpec& spec, double eps) {
  double lo = 0.0, hi = phi_max(spec);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (std::abs(saddle_curve(spec, mid)) > eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double distance_to_integer(double x) { return std::fabs(x - std::round(x)); }

Complex winding_of_contours(const std::vector<const Contour*>& parts, Complex p) {
  Complex total = 0.0;
  for (const Contour* c : parts) total += winding_number(discretize(*c, 2.0, 16), p);
  return total;
}

// The t-integrand has poles at 0..n-1 and, for TruncatedUnitary, at -n-kappa and below.
// Other integers are removable, so the contour may enclose them.
void check_sigma_poles(const ModelSpec& spec, const std::function<Complex(Complex)>& winding,
                       const std::string& what) {
  const int n = spec.n;
  std::vector<std::pair<int, double>> probes;
  for (int k = 0; k < n; ++k) probes.emplace_back(k, 1.0);
  if (spec.variant == Variant::TruncatedUnitary) probes.emplace_back(-n - spec.kappa, 0.0);
  for (const auto& [k, want] : probes)
    if (std::abs(winding(Complex(k, 0.0)) - want) > 1e-6)
      throw GeometryError(what + " Sigma does not enclose exactly the poles {0, ..., n-1}");
}

}  // namespace

ContourSegment ContourSegment::vertical(double x, double y0, double y1, std::string label) {
  ContourSegment s;
  s.kind = SegmentKind::VerticalLine;
  s.a = Complex(x, y0);
  s.b = Complex(x, y1);
  s.label = std::move(label);
  return s;
}

ContourSegment ContourSegment::horizontal(double y, double x0, double x1, std::string label) {
  ContourSegment s;
  s.kind = SegmentKind::HorizontalSegment;
  s.a = Complex(x0, y);
  s.b = Complex(x1, y);
  s.label = std::move(label);
  return s;
}

ContourSegment ContourSegment::line(Complex from, Complex to, std::string label) {
  ContourSegment s;
  s.kind = SegmentKind::LineSegment;
  s.a = from;
  s.b = to;
  s.label = std::move(label);
  return s;
}

ContourSegment ContourSegment::arc(Complex center, double radius, double theta0, double theta1,
                                   std::string label) {
  ContourSegment s;
  s.kind = SegmentKind::CircularArc;
  s.center = center;
  s.rx = s.ry = radius;
  s.t0 = theta0;
  s.t1 = theta1;
  s.label = std::move(label);
  return s;
}

ContourSegment ContourSegment::ellipse(Complex center, double rx, double ry, double theta0,
                                       double theta1, std::string label) {
  ContourSegment s;
  s.kind = SegmentKind::EllipticArc;
  s.center = center;
  s.rx = rx;
  s.ry = ry;
  s.t0 = theta0;
  s.t1 = theta1;
  s.label = std::move(label);
  return s;
}

ContourSegment ContourSegment::zeta(const ModelSpec& model, double scale, double phi0,
                                    double phi1, bool lower, Orientation orientation,
                                    std::string label) {
  ContourSegment s;
  s.kind = SegmentKind::ZetaCurve;
  s.model = model;
  s.scale = scale;
  s.lowerBranch = lower;
  s.orientation = orientation;
  s.t0 = phi0;
  s.t1 = phi1;
  s.label = std::move(label);
  return s;
}

bool ContourSegment::is_straight() const {
  return kind == SegmentKind::VerticalLine || kind == SegmentKind::HorizontalSegment ||
         kind == SegmentKind::LineSegment;
}

Complex ContourSegment::native_point(double t) const {
  switch (kind) {
    case SegmentKind::VerticalLine:
    case SegmentKind::HorizontalSegment:
    case SegmentKind::LineSegment:
      return a + t * (b - a);
    case SegmentKind::CircularArc:
    case SegmentKind::EllipticArc:
      return center + Complex(rx * std::cos(t), ry * std::sin(t));
    case SegmentKind::ZetaCurve: {
      const Complex z = scale * saddle_curve(model, t);
      return lowerBranch ? std::conj(z) : z;
    }
  }
  return {};
}

Complex ContourSegment::native_derivative(double t) const {
  switch (kind) {
    case SegmentKind::VerticalLine:
    case SegmentKind::HorizontalSegment:
    case SegmentKind::LineSegment:
      return b - a;
    case SegmentKind::CircularArc:
    case SegmentKind::EllipticArc:
      return Complex(-rx * std::sin(t), ry * std::cos(t));
    case SegmentKind::ZetaCurve: {
      const Complex d = scale * saddle_curve_derivative(model, t);
      return lowerBranch ? std::conj(d) : d;
    }
  }
  return {};
}

double ContourSegment::native_param(double u) const {
  return orientation == Orientation::Forward ? t0 + u * (t1 - t0) : t1 - u * (t1 - t0);
}

Complex ContourSegment::point(double u) const { return native_point(native_param(u)); }

Complex ContourSegment::derivative(double u) const {
  const double sign = orientation == Orientation::Forward ? 1.0 : -1.0;
  return sign * (t1 - t0) * native_derivative(native_param(u));
}

double ContourSegment::length() const {
  if (is_straight()) return std::abs(b - a) * std::fabs(t1 - t0);
  const GaussRule& g = gauss_legendre(32);
  constexpr int kPanels = 16;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = (p + 0.5) / kPanels, half = 0.5 / kPanels;
    for (std::size_t i = 0; i < g.x.size(); ++i)
      total += g.w[i] * half * std::abs(derivative(mid + half * g.x[i]));
  }
  return total;
}

ContourSegment ContourSegment::sub(double u0, double u1) const {
  ContourSegment s = *this;
  const double p0 = native_param(u0), p1 = native_param(u1);
  s.t0 = std::min(p0, p1);
  s.t1 = std::max(p0, p1);
  return s;
}

double Contour::length() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.length();
  return total;
}

void Contour::check_continuity(double rel_tol) const {
  if (segments.empty()) throw GeometryError("contour '" + name + "' has no segments");
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    const Complex e = segments[i].end(), s = segments[i + 1].start();
    if (std::abs(e - s) > rel_tol * std::max(1.0, std::abs(e)))
      throw GeometryError("contour '" + name + "' has a gap after segment " + std::to_string(i));
  }
  if (closed && std::abs(end() - start()) > rel_tol * std::max(1.0, std::abs(start())))
    throw GeometryError("closed contour '" + name + "' does not return to its start");
}

void Contour::append(const Contour& other) {
  segments.insert(segments.end(), other.segments.begin(), other.segments.end());
  refine.insert(refine.end(), other.refine.begin(), other.refine.end());
}

QuadratureGrid discretize(const Contour& c, double panelsPerUnitLength, int order) {
  if (!(panelsPerUnitLength > 0.0)) throw DomainError("discretize: panel density must be positive");
  const GaussRule& g = gauss_legendre(order);
  QuadratureGrid grid;
  grid.order = order;
  grid.sourceContour = std::make_shared<const Contour>(c);
  double max_factor = 1.0;
  for (const auto& z : c.refine) max_factor = std::max(max_factor, z.factor);

  for (std::size_t si = 0; si < c.segments.size(); ++si) {
    const ContourSegment& seg = c.segments[si];
    const double L = seg.length();
    const int samples = static_cast<int>(
        std::clamp(std::ceil(16.0 * L * panelsPerUnitLength * max_factor) + 64.0, 64.0, 4.0e5));
    // Cumulative panel count along the segment.
    std::vector<double> cum(samples + 1, 0.0);
    for (int k = 0; k < samples; ++k) {
      const double u = (k + 0.5) / samples;
      const Complex z = seg.point(u);
      double factor = 1.0;
      for (const auto& zone : c.refine)
        if (std::abs(z - zone.center) < zone.radius) factor = std::max(factor, zone.factor);
      cum[k + 1] = cum[k] + panelsPerUnitLength * factor * std::abs(seg.derivative(u)) / samples;
    }
    const int min_panels = seg.is_straight() ? 1 : 4;
    const int panels = std::max(min_panels, static_cast<int>(std::ceil(cum.back() - 1e-9)));
    std::vector<double> breaks(panels + 1, 0.0);
    breaks.back() = 1.0;
    int k = 0;
    for (int p = 1; p < panels; ++p) {
      const double target = cum.back() * p / panels;
      while (k < samples && cum[k + 1] < target) ++k;
      const double span = cum[k + 1] - cum[k];
      const double frac = span > 0 ? (target - cum[k]) / span : 0.0;
      breaks[p] = (k + frac) / samples;
    }
    for (int p = 0; p < panels; ++p) {
      const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
      const double half = 0.5 * (breaks[p + 1] - breaks[p]);
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double u = mid + half * g.x[i];
        grid.nodes.push_back(seg.point(u));
        grid.weights.push_back(g.w[i] * half * seg.derivative(u));
        grid.segment.push_back(static_cast<int>(si));
        grid.param.push_back(u);
      }
    }
  }
  return grid;
}

Complex winding_number(const QuadratureGrid& grid, Complex p) {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) sum += grid.weights[i] / (grid.nodes[i] - p);
  return sum / Complex(0.0, 2.0 * pi);
}

Contour build_sigma_tilde(int M, double epsilon) {
  return build_sigma_tilde(ModelSpec::ginibre(1, M), epsilon);
}

Contour build_sigma_tilde(const ModelSpec& spec, double epsilon, double scale) {
  spec.validate();
  if (spec.variant == Variant::TruncatedUnitary && spec.M < 2)
    throw DomainError("TruncatedUnitary saddle curve needs M >= 2");
  const double right = std::abs(saddle_curve(spec, 0.0));
  if (!(epsilon > 0.0 && epsilon < 0.5 * std::min(1.0, right)))
    throw DomainError("build_sigma_tilde: epsilon outside (0, min(1, zeta(0))/2)");
  const double phi_eps = phi_at_radius(spec, epsilon);
  const double theta = std::arg(saddle_curve(spec, phi_eps));
  Contour c;
  c.name = "Sigma_tilde";
  c.role = ContourRole::Sigma;
  c.closed = true;
  c.segments.push_back(
      ContourSegment::zeta(spec, scale, 0.0, phi_eps, false, Orientation::Forward, "curve"));
  c.segments.push_back(ContourSegment::arc(0.0, scale * epsilon, theta, 2 * pi - theta, "arc"));
  c.segments.push_back(
      ContourSegment::zeta(spec, scale, 0.0, phi_eps, true, Orientation::Reverse, "curve"));
  c.check_continuity();
  return c;
}

Contour build_c_tilde(const ModelSpec& spec, double phi, double halfHeight) {
  const Complex w = saddle_points(spec, phi).first;
  Contour c;
  c.name = "C_tilde";
  c.role = ContourRole::C;
  c.segments.push_back(ContourSegment::vertical(w.real(), -halfHeight, halfHeight, "line"));
  return c;
}

Contour build_c_tilde_edge(const ModelSpec& spec, double offset, double halfHeight) {
  const EdgeData e = edge_constants(spec);
  Contour c;
  c.name = "C_tilde_edge";
  c.role = ContourRole::C;
  c.segments.push_back(ContourSegment::vertical(e.z0 + offset, -halfHeight, halfHeight, "line"));
  return c;
}

double truncation_height(const ModelSpec& spec, double a, double x, double tauStart,
                         double relTol) {
  const PhaseContext ctx{spec, a, spec.n};
  const double drop = -std::log(relTol);
  const double step = std::max(0.25, 0.01 * spec.n);
  double peak = big_F(ctx, Complex(x, 0.0)).real();
  double tau = 0.0;
  for (; tau < tauStart; tau += step) peak = std::max(peak, big_F(ctx, Complex(x, tau)).real());
  for (int it = 0; it < 1000000; ++it, tau += step) {
    const double v = big_F(ctx, Complex(x, tau)).real();
    peak = std::max(peak, v);
    if (v < peak - drop) return tau;
  }
  throw ConvergenceError("truncation_height: integrand does not decay");
}

std::vector<std::pair<int, double>> vertical_crossings(const Contour& c, double x) {
  std::vector<std::pair<int, double>> out;
  constexpr int kSamples = 2048;
  for (std::size_t si = 0; si < c.segments.size(); ++si) {
    const ContourSegment& s = c.segments[si];
    double prev = s.point(0.0).real() - x;
    for (int k = 1; k <= kSamples; ++k) {
      const double u = static_cast<double>(k) / kSamples;
      const double cur = s.point(u).real() - x;
      if ((prev < 0.0 && cur >= 0.0) || (prev > 0.0 && cur <= 0.0)) {
        double lo = u - 1.0 / kSamples, hi = u;
        const bool rising = prev < 0.0;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const bool below = s.point(mid).real() - x < 0.0;
          ((below == rising) ? lo : hi) = mid;
        }
        out.emplace_back(static_cast<int>(si), 0.5 * (lo + hi));
      }
      prev = cur;
    }
  }
  return out;
}

std::pair<Contour, Contour> cut_at_vertical(const Contour& closed, double x) {
  const auto cross = vertical_crossings(closed, x);
  if (cross.size() != 2)
    throw GeometryError("cut_at_vertical: expected two crossings, found " +
                        std::to_string(cross.size()));
  const int ns = static_cast<int>(closed.segments.size());
  // Walks forward from one crossing to the next, wrapping past the last segment.
  auto piece = [&](std::pair<int, double> from, std::pair<int, double> to) {
    Contour c;
    c.role = closed.role;
    c.refine = closed.refine;
    int si = from.first;
    double u = from.second;
    for (int guard = 0; guard <= ns + 1; ++guard) {
      if (si == to.first && to.second >= u) {
        if (to.second > u) c.segments.push_back(closed.segments[si].sub(u, to.second));
        break;
      }
      if (u < 1.0) c.segments.push_back(closed.segments[si].sub(u, 1.0));
      si = (si + 1) % ns;
      u = 0.0;
    }
    return c;
  };
  Contour first = piece(cross[0], cross[1]);
  Contour second = piece(cross[1], cross[0]);
  const double mid_first = first.segments[first.segments.size() / 2].point(0.5).real();
  if (mid_first < x) return {first, second};
  return {second, first};
}

BulkContours build_bulk_contours(const ModelSpec& spec, double phi,
                                 const BulkContourParams& params) {
  spec.validate();
  const int n = spec.n;
  if (n < 10) throw DomainError("build_bulk_contours needs n >= 10");
  const double eps = params.epsilon > 0 ? params.epsilon : 0.2 / n;
  BulkContours out;
  out.point = bulk_point(spec, phi);
  out.r = (std::floor(params.epsilonPrime * n) + 0.5) / n;
  double X = n * out.point.wPlus.real();
  if (distance_to_integer(X) < 1e-6) X += 0.5;
  out.X = X;
  if (distance_to_integer(X - eps) < 1e-9 || distance_to_integer(X + eps) < 1e-9 ||
      std::floor(X - eps) != std::floor(X + eps))
    throw GeometryError("vertical bars do not fit between consecutive integers");

  const double a = std::pow(static_cast<double>(n), scaling_power(spec)) * out.point.x0;
  const double T = truncation_height(spec, a, X, n * out.point.wPlus.imag(), 1e-20);
  out.C.name = "bulk_C";
  out.C.role = ContourRole::C;
  out.C.segments.push_back(ContourSegment::vertical(X, -T, T, "line"));

  const Contour sigma = build_sigma_tilde(spec, out.r, n);
  auto [left, left_rest] = cut_at_vertical(sigma, X - eps);
  auto [right_rest, right] = cut_at_vertical(sigma, X + eps);
  (void)left_rest;
  (void)right_rest;
  out.SigmaCurved.name = "bulk_Sigma_curved";
  out.SigmaCurved.role = ContourRole::Sigma;
  out.SigmaCurved.append(left);
  out.SigmaCurved.append(right);
  out.SigmaVertical.name = "bulk_Sigma_vertical";
  out.SigmaVertical.role = ContourRole::Sigma;
  // Sigma_3 runs upward at X - eps, Sigma_4 downward at X + eps.
  out.SigmaVertical.segments.push_back(
      ContourSegment::vertical(X - eps, left.end().imag(), left.start().imag(), "bar"));
  out.SigmaVertical.segments.push_back(
      ContourSegment::vertical(X + eps, right.end().imag(), right.start().imag(), "bar"));

  Contour comp1 = left, comp2 = right;
  comp1.segments.push_back(out.SigmaVertical.segments[0]);
  comp2.segments.push_back(out.SigmaVertical.segments[1]);
  comp1.closed = comp2.closed = true;
  comp1.check_continuity(1e-8);
  comp2.check_continuity(1e-8);
  const std::vector<const Contour*> parts{&comp1, &comp2};
  check_sigma_poles(spec, [&](Complex p) { return winding_of_contours(parts, p); }, "bulk");
  return out;
}

EdgeContours build_edge_contours(const ModelSpec& spec, double epsilonPrime) {
  spec.validate();
  const int n = spec.n;
  if (n < 10) throw DomainError("build_edge_contours needs n >= 10");
  EdgeContours out;
  out.edge = edge_constants(spec);
  out.r = (std::floor(epsilonPrime * n) + 0.5) / n;
  const double nd = n;
  const double apex = nd * out.edge.z0;
  const double s23 = out.edge.c1 * std::pow(nd, 2.0 / 3.0);
  const double s710 = out.edge.c1 * std::pow(nd, 0.7);
  const double h = std::sqrt(3.0) / 2.0;
  const RefineZone zone{Complex(apex, 0.0), 3.0 * s23, 2.0};

  // C: lower tail, lower ray inward, bar, upper ray outward, upper tail; all upward.
  const double xc = apex + 0.5 * s710;
  const double a = std::pow(nd, scaling_power(spec)) * out.edge.xStar;
  const double T = std::max(truncation_height(spec, a, xc, h * s710, 1e-20), h * s710 + 1.0);
  const Complex r_in = s23 * std::polar(1.0, pi / 3), r_out = s710 * std::polar(1.0, pi / 3);
  Contour& C = out.C;
  C.name = "edge_C";
  C.role = ContourRole::C;
  C.refine.push_back(zone);
  C.segments.push_back(ContourSegment::vertical(xc, -T, -h * s710, "tail"));
  C.segments.push_back(ContourSegment::line(apex + std::conj(r_out), apex + std::conj(r_in), "local_ray"));
  C.segments.push_back(ContourSegment::vertical(apex + 0.5 * s23, -h * s23, h * s23, "local_bar"));
  C.segments.push_back(ContourSegment::line(apex + r_in, apex + r_out, "local_ray"));
  C.segments.push_back(ContourSegment::vertical(xc, h * s710, T, "tail"));
  C.check_continuity();

  // Sigma: bar, upper ray out, connector up, curved part, connector down, lower ray in.
  const double xs = apex - 0.5 * s710;
  const Contour sigma = build_sigma_tilde(spec, out.r, nd);
  auto [curved, rest] = cut_at_vertical(sigma, xs);
  (void)rest;
  const double y_up = curved.start().imag(), y_down = curved.end().imag();
  if (!(y_up > h * s710 && y_down < -h * s710))
    throw GeometryError("edge Sigma connectors would run downward");
  const Complex q_in = s23 * std::polar(1.0, 2 * pi / 3), q_out = s710 * std::polar(1.0, 2 * pi / 3);
  Contour& S = out.Sigma;
  S.name = "edge_Sigma";
  S.role = ContourRole::Sigma;
  S.closed = true;
  S.refine.push_back(zone);
  S.segments.push_back(ContourSegment::vertical(apex - 0.5 * s23, -h * s23, h * s23, "local_bar"));
  S.segments.push_back(ContourSegment::line(apex + q_in, apex + q_out, "local_ray"));
  S.segments.push_back(ContourSegment::vertical(xs, h * s710, y_up, "connector"));
  for (const auto& seg : curved.segments) S.segments.push_back(seg);
  S.segments.push_back(ContourSegment::vertical(xs, y_down, -h * s710, "connector"));
  S.segments.push_back(ContourSegment::line(apex + std::conj(q_out), apex + std::conj(q_in), "local_ray"));
  S.check_continuity(1e-8);

  const QuadratureGrid g = discretize(S, 1.0, 16);
  check_sigma_poles(spec, [&](Complex p) { return winding_number(g, p); }, "edge");
  return out;
}

namespace {

Contour direct_sigma(const ModelSpec& spec) {
  const double n = spec.n;
  const double rx = n / 2.0 - 0.25, ry = std::max(2.0, n / 8.0);
  const Complex center((n - 1) / 2.0, 0.0);
  Contour s;
  s.name = "direct_Sigma";
  s.role = ContourRole::Sigma;
  s.closed = true;
  s.segments.push_back(ContourSegment::ellipse(center, rx, ry, 0.0, 2 * pi, "ellipse"));
  s.refine.push_back({center - rx, 1.0, 4.0});
  s.refine.push_back({center + rx, 1.0, 4.0});
  return s;
}

Contour direct_c(const ModelSpec& spec, double y, double abscissa) {
  const double T = truncation_height(spec, y, abscissa, 1.0, 1e-20);
  Contour c;
  c.name = "direct_C";
  c.role = ContourRole::C;
  c.segments.push_back(ContourSegment::vertical(abscissa, -T, T, "line"));
  return c;
}

}  // namespace

DirectContours build_direct_contours(const ModelSpec& spec, double y) {
  return build_direct_contours(spec, y, -0.5);
}

DirectContours build_direct_contours(const ModelSpec& spec, double y, double abscissa) {
  spec.validate();
  if (spec.n > 512) throw DomainError("build_direct_contours needs n <= 512");
  if (!(y > 0.0)) throw DomainError("build_direct_contours needs y > 0");
  const double right_of_sigma = spec.n - 0.75;
  const bool left = abscissa == -0.5;
  if (!left && !(abscissa > right_of_sigma + 0.1))
    throw GeometryError("direct C must be at Re s = -1/2 or right of Sigma");
  if (!left && spec.variant == Variant::WithInverses && spec.K > 0 && !(abscissa < spec.n))
    throw GeometryError("direct C must stay left of the poles at s >= n");
  return {direct_c(spec, y, abscissa), direct_sigma(spec)};
}

void write_contour_csv(std::ostream& out, const Contour& c, int samplesPerSegment) {
  out << "segment_index,param,re,im\n";
  const auto old_precision = out.precision(17);
  for (std::size_t si = 0; si < c.segments.size(); ++si) {
    const ContourSegment& s = c.segments[si];
    for (int k = 0; k <= samplesPerSegment; ++k) {
      const double u = static_cast<double>(k) / samplesPerSegment;
      const Complex z = s.point(u);
      out << si << ',' << s.native_param(u) << ',' << z.real() << ',' << z.imag() << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace pe
