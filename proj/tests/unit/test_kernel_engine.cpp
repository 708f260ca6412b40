#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/airy.hpp>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/kernel_engine.hpp"
#include "product_ensemble/moment_oracle.hpp"
#include "product_ensemble/quadrature.hpp"

using pe::ModelSpec;
using std::numbers::pi;

namespace {

// Christoffel-Darboux sum e^{-y} sum_{k<n} L_k(x) L_k(y) with Laguerre polynomials from
// the three-term recurrence; the Laguerre family is orthonormal for e^{-x}.
double laguerre_kernel(int n, double x, double y) {
  double lx0 = 1.0, lx1 = 1.0 - x, ly0 = 1.0, ly1 = 1.0 - y;
  double sum = lx0 * ly0 + (n > 1 ? lx1 * ly1 : 0.0);
  for (int k = 1; k + 1 < n; ++k) {
    const double lx2 = ((2 * k + 1 - x) * lx1 - k * lx0) / (k + 1);
    const double ly2 = ((2 * k + 1 - y) * ly1 - k * ly0) / (k + 1);
    sum += lx2 * ly2;
    lx0 = lx1, lx1 = lx2, ly0 = ly1, ly1 = ly2;
  }
  return std::exp(-y) * sum;
}

double airy_oracle(double x, double y) {
  using boost::math::airy_ai;
  using boost::math::airy_ai_prime;
  if (x == y) return airy_ai_prime(x) * airy_ai_prime(x) - x * airy_ai(x) * airy_ai(x);
  return (airy_ai(x) * airy_ai_prime(y) - airy_ai_prime(x) * airy_ai(y)) / (x - y);
}

// Nodes in u = log t, unit panels from -20, stopped once two panels add nothing.
struct LogRule {
  std::vector<double> t, w;
};

LogRule log_rule(double hi) {
  LogRule r;
  const pe::GaussRule& g = pe::gauss_legendre(8);
  for (double a = -20.0; a < hi; a += 1.0)
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double u = a + 0.5 + 0.5 * g.x[i];
      r.t.push_back(std::exp(u));
      r.w.push_back(0.5 * g.w[i] * std::exp(u));
    }
  return r;
}

}  // namespace

TEST_SUITE("kernel_engine") {
  TEST_CASE("finite-n kernel matches the moment oracle") {
    const ModelSpec s = ModelSpec::ginibre(3, 2);
    const pe::KernelValue k = pe::kernel_finite_n(s, 1.0, 1.0);
    const double d = pe::kernel_direct(s, 3, 1.0, 1.0);
    CHECK(std::fabs(k.value - d) <= 1e-8 * std::max(1.0, std::fabs(d)));
    CHECK(k.imagResidual <= 1e-6 * std::max(1.0, std::fabs(k.value)));
  }

  TEST_CASE("M=1 reduces to the Laguerre Christoffel-Darboux kernel") {
    const ModelSpec s = ModelSpec::ginibre(4, 1);
    for (double x : {0.3, 1.0, 2.5, 6.0})
      for (double y : {0.3, 1.0, 2.5, 6.0}) {
        const double want = laguerre_kernel(4, x, y);
        INFO("x=" << x << " y=" << y);
        CHECK(std::fabs(pe::kernel_finite_n(s, x, y).value - want) <= 1e-8 * std::max(1.0, std::fabs(want)));
      }
  }

  TEST_CASE("property: accepted values are real to 1e-6") {
    for (const ModelSpec& s : {ModelSpec::ginibre(5, 3, {0, 1, 0}), ModelSpec::with_inverses(5, 2, 1),
                               ModelSpec::truncated_unitary(5, 2, 3), ModelSpec::ginibre(40, 2)})
      for (double x : {0.5, 2.0})
        for (double y : {0.7, 3.0}) {
          const double scale = std::pow(double(s.n), pe::scaling_power(s) - 1.0);
          const pe::KernelValue k = pe::kernel_finite_n(s, x * scale, y * scale);
          CHECK(k.imagResidual <= 1e-6 * std::max(1.0, std::fabs(k.value)));
          CHECK(k.errorEstimate <= 1e-6 * std::max(1.0, std::fabs(k.value)));
        }
  }

  TEST_CASE("contour switch: C left or right of Sigma") {
    pe::KernelOptions left;
    left.contours = pe::ContourChoice::DirectLeft;
    left.tol = 1e-10;
    left.maxRefinements = 5;
    pe::KernelOptions right = left;
    right.contours = pe::ContourChoice::DirectRight;
    for (const ModelSpec& s : {ModelSpec::ginibre(4, 2, {0, 1}), ModelSpec::truncated_unitary(4, 2, 3)})
      for (double x : {0.5, 3.0}) {
        const double a = pe::kernel_finite_n(s, x, 1.75, left).value;
        const double b = pe::kernel_finite_n(s, x, 1.75, right).value;
        CHECK(std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a)));
      }
  }

  TEST_CASE("property: reproducing identity with the contour kernel (n=4, M=2)") {
    const ModelSpec s = ModelSpec::ginibre(4, 2);
    const LogRule r = log_rule(std::log(2e4));
    const double pts[2] = {0.7, 2.0};
    std::vector<double> kx[2], ky[2];
    for (int i = 0; i < 2; ++i)
      for (double t : r.t) {
        kx[i].push_back(pe::kernel_finite_n(s, pts[i], t).value);
        ky[i].push_back(pe::kernel_finite_n(s, t, pts[i]).value);
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double integral = 0.0;
        for (std::size_t q = 0; q < r.t.size(); ++q) integral += r.w[q] * kx[i][q] * ky[j][q];
        const double direct = pe::kernel_finite_n(s, pts[i], pts[j]).value;
        CHECK(std::fabs(integral - direct) <= 1e-4 * std::max(1.0, std::fabs(direct)));
      }
  }

  TEST_CASE("option and argument validation") {
    const ModelSpec s = ModelSpec::ginibre(3, 2);
    CHECK_THROWS_AS(pe::kernel_finite_n(s, 0.0, 1.0), pe::DomainError);
    pe::KernelOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(pe::kernel_finite_n(s, 1.0, 1.0, bad), pe::DomainError);
    pe::KernelOptions strict;
    strict.tol = 1e-30;
    strict.maxRefinements = 0;
    CHECK_THROWS_AS(pe::kernel_finite_n(ModelSpec::ginibre(60, 2), 60.0 * 60.0, 3600.0, strict),
                    pe::ConvergenceError);
    CHECK_THROWS_AS(pe::rescaled_bulk_kernel(s, pe::edge_frame(s), 0.0, 0.0), pe::DomainError);
  }

  TEST_CASE("sine kernel") {
    CHECK(pe::sine_kernel(0.0, 0.0) == 1.0);
    CHECK(std::fabs(pe::sine_kernel(0.0, 1.0)) < 1e-15);
    CHECK(pe::sine_kernel(0.0, 0.5) == doctest::Approx(2.0 / pi).epsilon(1e-15));
    CHECK(pe::sine_kernel(0.3, 0.3 + 1e-10) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("Airy kernel against boost and across methods") {
    CHECK(pe::airy_kernel(0.0, 0.0) == doctest::Approx(0.0669874837796639741437).epsilon(1e-13));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double x = -3.0 + i, y = -3.0 + j;
        const double f = pe::airy_kernel(x, y, pe::AiryMethod::AiryFormula);
        CHECK(std::fabs(f - airy_oracle(x, y)) < 1e-12);
        CHECK(std::fabs(f - pe::airy_kernel(x, y, pe::AiryMethod::ContourIntegral)) < 1e-8);
      }
    // Continuity across the removable diagonal.
    for (double x : {-2.0, 0.0, 0.7})
      CHECK(std::fabs(pe::airy_kernel(x, x + 1e-6) - pe::airy_kernel(x, x)) < 1e-6);
    CHECK_THROWS_AS(pe::airy_kernel(20.0, 0.0), pe::RangeError);
  }

  TEST_CASE("rescaled kernels near their limits at desk scale") {
    const ModelSpec m2 = ModelSpec::ginibre(100, 2);
    const pe::ScalingFrame bulk = pe::bulk_frame(m2, pi / 6);
    CHECK(std::fabs(pe::rescaled_bulk_kernel(m2, bulk, 0.0, 0.0) - 1.0) < 0.05);
    const pe::ScalingFrame edge = pe::edge_frame(m2);
    CHECK(std::fabs(pe::rescaled_edge_kernel(m2, edge, 0.0, 0.0) - pe::airy_kernel(0.0, 0.0)) < 0.05);
    CHECK(std::fabs(pe::rescaled_edge_kernel(m2, edge, -2.0, -2.0) - pe::airy_kernel(-2.0, -2.0)) < 0.08);
    // Wishart bulk.
    const ModelSpec m1 = ModelSpec::ginibre(100, 1);
    CHECK(std::fabs(pe::rescaled_bulk_kernel(m1, pe::bulk_frame(m1, pi / 4), 0.0, 0.0) - 1.0) < 0.05);
  }

  TEST_CASE("convergence report for the inverse-factor model decreases") {
    const ModelSpec s = ModelSpec::with_inverses(50, 2, 1);
    std::vector<std::pair<double, double>> grid;
    for (double a : {-2.0, 0.0, 2.0})
      for (double b : {-2.0, 0.0, 2.0}) grid.emplace_back(a, b);
    const pe::ConvergenceReport r =
        pe::convergence_report(s, pe::ScalingMode::Bulk, pe::inverse_param(s, 1.0), {50, 100}, grid);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.strictlyDecreasing);
    CHECK(r.rows[1].supError < r.rows[0].supError);
    CHECK_THROWS_AS(pe::convergence_report(s, pe::ScalingMode::Bulk, 0.5, {100, 50}, grid), pe::DomainError);
  }
}
