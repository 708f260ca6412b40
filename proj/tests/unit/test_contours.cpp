#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "product_ensemble/contours.hpp"
#include "product_ensemble/errors.hpp"
#include "product_ensemble/phase_functions.hpp"

using pe::Complex;
using pe::ModelSpec;
using std::numbers::pi;

namespace {

Complex sum_weights(const pe::QuadratureGrid& g, auto f) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * f(g.nodes[i]);
  return s;
}

// Every node has a partner at its conjugate.
bool conjugation_closed(const pe::QuadratureGrid& g, double tol) {
  for (const Complex& z : g.nodes) {
    bool found = false;
    for (const Complex& w : g.nodes)
      if (std::abs(w - std::conj(z)) <= tol * std::max(1.0, std::abs(z))) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("contours") {
  TEST_CASE("straight segment weights sum to the endpoint difference") {
    pe::Contour c;
    c.segments = {pe::ContourSegment::line({0.0, 0.0}, {3.0, 4.0}),
                  pe::ContourSegment::vertical(3.0, 4.0, 10.0),
                  pe::ContourSegment::horizontal(10.0, 3.0, -2.0)};
    c.check_continuity();
    for (int order : {8, 16, 32}) {
      const pe::QuadratureGrid g = pe::discretize(c, 1.3, order);
      Complex per[3] = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < g.size(); ++i) per[g.segment[i]] += g.weights[i];
      for (int s = 0; s < 3; ++s)
        CHECK(std::abs(per[s] - (c.segments[s].end() - c.segments[s].start())) < 1e-12);
    }
    CHECK_THROWS_AS(pe::discretize(c, 1.0, 12), pe::DomainError);
  }

  TEST_CASE("broken contours are rejected") {
    pe::Contour c;
    c.segments = {pe::ContourSegment::line({0.0, 0.0}, {1.0, 0.0}),
                  pe::ContourSegment::line({1.0, 0.5}, {2.0, 0.0})};
    CHECK_THROWS_AS(c.check_continuity(), pe::GeometryError);
  }

  TEST_CASE("Sigma tilde encloses [0, 1] and stops at 1 + 1/M") {
    for (int M = 1; M <= 4; ++M) {
      const pe::Contour s = pe::build_sigma_tilde(M, 0.05);
      const pe::QuadratureGrid g = pe::discretize(s, 8.0, 16);
      CHECK(std::abs(pe::winding_number(g, Complex(0.5, 0.0)) - 1.0) < 1e-10);
      CHECK(std::abs(sum_weights(g, [](Complex z) { return 1.0 / (z - 0.5); }) - Complex(0.0, 2.0 * pi)) < 1e-10);
      CHECK(std::abs(sum_weights(g, [](Complex) { return Complex(1.0); })) < 1e-12);
      CHECK(conjugation_closed(g, 1e-12));
    }
    const pe::QuadratureGrid g3 = pe::discretize(pe::build_sigma_tilde(3, 0.05), 8.0, 16);
    CHECK(std::abs(pe::winding_number(g3, Complex(2.0, 0.0))) < 1e-10);
  }

  TEST_CASE("property: panel refinement leaves the residue integral unchanged") {
    for (int M = 1; M <= 3; ++M) {
      const pe::Contour s = pe::build_sigma_tilde(M, 0.05);
      const Complex coarse = pe::winding_number(pe::discretize(s, 4.0, 16), Complex(0.5, 0.0));
      const Complex fine = pe::winding_number(pe::discretize(s, 8.0, 16), Complex(0.5, 0.0));
      CHECK(std::abs(coarse - fine) < 1e-10);
    }
  }

  TEST_CASE("direct contours: Sigma encloses exactly the poles 0..n-1") {
    for (const ModelSpec& s : {ModelSpec::ginibre(6, 2), ModelSpec::with_inverses(6, 2, 1),
                               ModelSpec::truncated_unitary(6, 2, 3)}) {
      const pe::DirectContours d = pe::build_direct_contours(s);
      const pe::QuadratureGrid g = pe::discretize(d.Sigma, 4.0, 16);
      for (int k = 0; k < s.n; ++k) CHECK(std::abs(pe::winding_number(g, Complex(k, 0.0)) - 1.0) < 1e-10);
      CHECK(std::abs(pe::winding_number(g, Complex(-1.0, 0.0))) < 1e-10);
      CHECK(std::abs(pe::winding_number(g, Complex(s.n, 0.0))) < 1e-10);
      CHECK(std::abs(sum_weights(g, [](Complex z) { return z; })) < 1e-12 * s.n * s.n);
      CHECK(conjugation_closed(g, 1e-12));
      // C stays strictly left of Sigma.
      double cmax = -1e300, smin = 1e300;
      for (const Complex& z : pe::discretize(d.C, 1.0, 16).nodes) cmax = std::max(cmax, z.real());
      for (const Complex& z : g.nodes) smin = std::min(smin, z.real());
      CHECK(cmax < smin);
    }
  }

  TEST_CASE("direct C truncation keeps the dropped tail below 1e-15 of the peak") {
    const ModelSpec s = ModelSpec::ginibre(8, 2);
    const pe::DirectContours d = pe::build_direct_contours(s, 1.0);
    const pe::PhaseContext ctx{s, 1.0, 8};
    const pe::QuadratureGrid g = pe::discretize(d.C, 2.0, 16);
    double peak = -1e300;
    for (const Complex& z : g.nodes) peak = std::max(peak, pe::big_F(ctx, z).real());
    CHECK(pe::big_F(ctx, d.C.start()).real() - peak < std::log(1e-15));
    CHECK(pe::big_F(ctx, d.C.end()).real() - peak < std::log(1e-15));
  }

  TEST_CASE("bulk contours avoid the integers when n Re w is an integer") {
    const int n = 60;
    const ModelSpec s = ModelSpec::ginibre(n, 2);
    // Bisect for phi with n Re w+(phi) = 61.
    double lo = 0.3, hi = 0.7;
    auto g = [&](double phi) { return n * pe::saddle_points(s, phi).first.real() - 61.0; };
    REQUIRE(g(lo) * g(hi) < 0.0);
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
    }
    const pe::BulkContours bc = pe::build_bulk_contours(s, 0.5 * (lo + hi));
    CHECK(std::fabs(bc.X - std::round(bc.X)) >= 0.1);
    for (const auto& seg : bc.C.segments) CHECK(std::fabs(seg.start().real() - bc.X) < 1e-12);
    CHECK(conjugation_closed(pe::discretize(bc.SigmaCurved, 0.5, 16), 1e-12));
  }

  TEST_CASE("edge contours are conjugation symmetric") {
    const pe::EdgeContours ec = pe::build_edge_contours(ModelSpec::ginibre(60, 2));
    CHECK(conjugation_closed(pe::discretize(ec.C, 0.25, 16), 1e-12));
    CHECK(conjugation_closed(pe::discretize(ec.Sigma, 0.25, 16), 1e-12));
    CHECK(std::fabs(ec.edge.xStar - 6.75) < 1e-14);
  }

  TEST_CASE("contour CSV export") {
    std::ostringstream os;
    pe::write_contour_csv(os, pe::build_sigma_tilde(2, 0.05), 10);
    const std::string text = os.str();
    CHECK(text.rfind("segment_index,param,re,im\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') > 10);
  }
}
