#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "product_ensemble/spectral_model.hpp"

namespace pe {

enum class SegmentKind {
  VerticalLine,
  HorizontalSegment,
  CircularArc,
  ZetaCurve,
  LineSegment,
  EllipticArc
};

enum class Orientation { Forward, Reverse };

/// Which integration variable a contour carries: s (C) or t (Sigma).
enum class ContourRole { C, Sigma };

/// One smooth piece. Each kind has a native parameter t in [t0, t1]:
/// straight kinds z = a + t (b - a); arcs z = center + rx cos t + i ry sin t;
/// ZetaCurve z = scale * zeta(t), conjugated on the lower branch.
/// Orientation Reverse traverses the native range from t1 to t0.
struct ContourSegment {
  SegmentKind kind = SegmentKind::LineSegment;
  Orientation orientation = Orientation::Forward;
  Complex a;
  Complex b;
  Complex center;
  double rx = 0.0;
  double ry = 0.0;
  ModelSpec model;
  double scale = 1.0;
  bool lowerBranch = false;
  double t0 = 0.0;
  double t1 = 1.0;
  std::string label;

  static ContourSegment vertical(double x, double y0, double y1, std::string label = {});
  static ContourSegment horizontal(double y, double x0, double x1, std::string label = {});
  static ContourSegment line(Complex from, Complex to, std::string label = {});
  static ContourSegment arc(Complex center, double radius, double theta0, double theta1,
                            std::string label = {});
  static ContourSegment ellipse(Complex center, double rx, double ry, double theta0,
                                double theta1, std::string label = {});
  static ContourSegment zeta(const ModelSpec& model, double scale, double phi0, double phi1,
                             bool lower, Orientation orientation, std::string label = {});

  Complex native_point(double t) const;
  Complex native_derivative(double t) const;
  /// Native parameter at orientation coordinate u in [0, 1].
  double native_param(double u) const;
  Complex point(double u) const;
  /// dz/du along the orientation.
  Complex derivative(double u) const;
  Complex start() const { return point(0.0); }
  Complex end() const { return point(1.0); }
  double length() const;
  /// Piece between orientation coordinates u0 < u1, same orientation.
  ContourSegment sub(double u0, double u1) const;
  bool is_straight() const;
};

/// Panel refinement zone: panel density is multiplied by factor inside the disc.
struct RefineZone {
  Complex center;
  double radius = 0.0;
  double factor = 2.0;
};

struct Contour {
  std::vector<ContourSegment> segments;
  bool closed = false;
  std::string name;
  ContourRole role = ContourRole::C;
  std::vector<RefineZone> refine;

  Complex start() const { return segments.front().start(); }
  Complex end() const { return segments.back().end(); }
  double length() const;
  /// GeometryError when consecutive segments do not join or a closed contour does not close.
  void check_continuity(double rel_tol = 1e-9) const;
  /// Appends all segments (and refine zones) of another contour.
  void append(const Contour& other);
};

struct QuadratureGrid {
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
  std::vector<int> segment;
  std::vector<double> param;  // orientation coordinate u within the segment
  int order = 0;
  std::shared_ptr<const Contour> sourceContour;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre panels, arclength-uniform per segment, densified in refine zones.
/// Every curved segment gets at least 4 panels. order must be 8, 16 or 32.
QuadratureGrid discretize(const Contour& c, double panelsPerUnitLength, int order);

/// Discretized (1/2 pi i) sum w/(z - p).
Complex winding_number(const QuadratureGrid& grid, Complex p);

/// Sigma~^eps of the GinibreProduct saddle curve.
Contour build_sigma_tilde(int M, double epsilon);
/// Sigma~^eps for any model with a saddle curve; scale multiplies every point.
Contour build_sigma_tilde(const ModelSpec& spec, double epsilon, double scale = 1.0);

/// Vertical upward line Re z = Re w_+ for |Im z| <= halfHeight (bulk, in zeta units).
Contour build_c_tilde(const ModelSpec& spec, double phi, double halfHeight);
/// Vertical upward line Re z = z0 + offset (edge, in zeta units).
Contour build_c_tilde_edge(const ModelSpec& spec, double offset, double halfHeight);

struct BulkContourParams {
  double epsilon = -1.0;  // bar half-gap; negative selects 0.2/n
  double epsilonPrime = 0.1;
};

struct BulkContours {
  Contour C;
  Contour SigmaCurved;
  Contour SigmaVertical;
  BulkPoint point;
  double X = 0.0;  // abscissa of C
  double r = 0.0;  // Sigma~ truncation radius (zeta units)
};

BulkContours build_bulk_contours(const ModelSpec& spec, double phi,
                                 const BulkContourParams& params = {});

struct EdgeContours {
  Contour C;
  Contour Sigma;
  EdgeData edge;
  double r = 0.0;
};

EdgeContours build_edge_contours(const ModelSpec& spec, double epsilonPrime = 0.1);

struct DirectContours {
  Contour C;
  Contour Sigma;
};

/// C: Re s = -1/2 truncated where exp(Re F(s; y)) drops below 1e-18 of its peak.
/// Sigma: ellipse around 0..n-1 strictly right of C.
DirectContours build_direct_contours(const ModelSpec& spec, double y = 1.0);
/// Same Sigma with C at Re s = abscissa; abscissa must be right of Sigma
/// (and below n for WithInverses) or equal to -1/2.
DirectContours build_direct_contours(const ModelSpec& spec, double y, double abscissa);

/// Largest tau such that the line x + i tau needs to be kept: scans outward from
/// tauStart until Re F(x + i tau; a) is below its running peak by -log(relTol).
double truncation_height(const ModelSpec& spec, double a, double x, double tauStart,
                         double relTol = 1e-18);

/// Crossings of the contour with Re z = x as (segment, u) pairs in traversal order.
std::vector<std::pair<int, double>> vertical_crossings(const Contour& c, double x);

/// Splits a closed contour with exactly two crossings of Re z = x into the piece
/// left of the line and the piece right of it, both keeping the orientation.
std::pair<Contour, Contour> cut_at_vertical(const Contour& closed, double x);

/// CSV with header segment_index,param,re,im; native parameters.
void write_contour_csv(std::ostream& out, const Contour& c, int samplesPerSegment = 200);

}  // namespace pe
