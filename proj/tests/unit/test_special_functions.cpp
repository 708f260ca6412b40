#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/quadrature.hpp"
#include "product_ensemble/special_functions.hpp"

using pe::Complex;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// Distance of the imaginary part from the nearest multiple of 2 pi.
double mod_two_pi(double v) { return std::fabs(std::remainder(v, 2.0 * pi)); }

}  // namespace

TEST_SUITE("special_functions") {
  TEST_CASE("log_gamma reference values") {
    CHECK(std::abs(pe::log_gamma(Complex(1.0, 0.0))) < 1e-15);
    CHECK(std::abs(pe::log_gamma(Complex(5.0, 0.0)) - std::log(24.0)) < 1e-14);
    // 30-digit values from an arbitrary-precision library.
    const Complex a = pe::log_gamma(Complex(1.0, 1.0));
    CHECK(std::abs(a - Complex(-0.650923199301856338885, -0.301640320467533197888)) < 1e-14);
    const Complex b = pe::log_gamma(Complex(0.3, -20.0));
    CHECK(std::abs(b - Complex(-31.0961169502636046103865, -39.6015696512852370510787)) < 1e-12);
  }

  TEST_CASE("log_gamma real matches boost lgamma") {
    for (double x : {0.01, 0.5, 1.5, 2.0, 7.25, 30.0, 171.5, 1e4})
      CHECK(std::fabs(pe::log_gamma(x) - boost::math::lgamma(x)) <=
            1e-13 * std::max(1.0, std::fabs(boost::math::lgamma(x))));
  }

  TEST_CASE("log_gamma poles throw") {
    CHECK_THROWS_AS(pe::log_gamma(Complex(0.0, 0.0)), pe::PoleError);
    CHECK_THROWS_AS(pe::log_gamma(Complex(-3.0, 0.0)), pe::PoleError);
  }

  TEST_CASE("property: reflection identity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(-20.0, 20.0), im(-50.0, 50.0);
    int checked = 0;
    while (checked < 200) {
      const Complex z(re(rng), im(rng));
      // Reflection needs z away from the integers; the product is bounded only for moderate Im z.
      if (std::fabs(z.real() - std::round(z.real())) <= 0.1 && std::fabs(z.imag()) < 0.1) continue;
      const Complex lhs = pe::log_gamma(z) + pe::log_gamma(1.0 - z) + std::log(std::sin(pi * z) / pi);
      CAPTURE(z);
      CHECK(std::fabs(lhs.real()) < 1e-11 * std::max(1.0, std::abs(z)));
      CHECK(mod_two_pi(lhs.imag()) < 1e-9);
      ++checked;
    }
  }

  TEST_CASE("property: recurrence modulo 2 pi i") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> re(-30.0, 60.0), im(-50.0, 50.0);
    for (int i = 0; i < 300; ++i) {
      const Complex z(re(rng), im(rng));
      if (std::fabs(z.imag()) < 0.1 && std::fabs(z.real() - std::round(z.real())) < 0.1) continue;
      const Complex d = pe::log_gamma(z + 1.0) - pe::log_gamma(z) - std::log(z);
      CAPTURE(z);
      CHECK(std::fabs(d.real()) < 1e-12 * std::max(1.0, std::abs(pe::log_gamma(z))));
      CHECK(mod_two_pi(d.imag()) < 1e-12 * std::max(1.0, std::abs(pe::log_gamma(z))));
    }
  }

  TEST_CASE("airy_ai closed forms at zero and the first zero") {
    const pe::AiryValue v = pe::airy_ai(0.0);
    CHECK(std::fabs(v.ai - 0.355028053887817239260) < 1e-15);
    CHECK(std::fabs(v.ai_prime + 0.258819403792806798405) < 1e-15);
    CHECK(std::fabs(pe::airy_ai(-2.33810741045976703849).ai) < 1e-9);
  }

  TEST_CASE("airy_ai matches boost on [-30, 30]") {
    for (int i = 0; i <= 600; ++i) {
      const double x = -30.0 + 0.1 * i;
      const pe::AiryValue v = pe::airy_ai(x);
      const double ai = boost::math::airy_ai(x), aip = boost::math::airy_ai_prime(x);
      CAPTURE(x);
      // Relative on the decaying side, absolute on the oscillating side.
      CHECK(std::fabs(v.ai - ai) <= 1e-11 * std::max(std::fabs(ai), x > 0 ? 0.0 : 1.0) + 1e-300);
      CHECK(std::fabs(v.ai_prime - aip) <= 1e-11 * std::max(std::fabs(aip), x > 0 ? 0.0 : 1.0) + 1e-300);
    }
    CHECK_THROWS_AS(pe::airy_ai(31.0), pe::RangeError);
  }

  TEST_CASE("weight_w closed forms") {
    CHECK(rel(pe::weight_w({1, {0}, 0}, 1.0), std::exp(-1.0)) < 1e-9);
    CHECK(rel(pe::weight_w({1, {2}, 1}, 1.0), std::exp(-1.0)) < 1e-9);
    // w_0(x) = 2 K_0(2 sqrt x) for M = 2.
    for (double x : {1e-6, 0.01, 0.3, 1.0, 4.0, 25.0, 100.0})
      CHECK(rel(pe::weight_w({2, {0, 0}, 0}, x), 2.0 * boost::math::cyl_bessel_k(0, 2.0 * std::sqrt(x))) < 1e-9);
    CHECK(rel(pe::weight_w({2, {0, 0}, 0}, 1.0), 0.227787745499066871305) < 1e-12);
    // Meijer G values from an arbitrary-precision library.
    CHECK(rel(pe::weight_w({3, {0, 0, 0}, 0}, 0.7), 0.255907459895093015690) < 1e-9);
    CHECK(rel(pe::weight_w({3, {0, 1, 1}, 0}, 2.5), 0.0984827407300438340883) < 1e-9);
  }

  TEST_CASE("property: M=1 weight equals x^(nu+k) e^-x on a log grid") {
    for (int nu : {0, 1, 3})
      for (int k : {0, 2, 5})
        for (int i = 0; i <= 40; ++i) {
          const double x = 1e-4 * std::pow(50.0 / 1e-4, i / 40.0);
          const double want = std::pow(x, nu + k) * std::exp(-x);
          INFO("nu=" << nu << " k=" << k << " x=" << x);
          CHECK(rel(pe::weight_w({1, {nu}, k}, x), want) < 1e-9);
          CHECK(std::fabs(pe::log_weight_w({1, {nu}, k}, x) - std::log(want)) < 1e-9);
        }
  }

  TEST_CASE("log_weight_w where weight_w underflows") {
    const double lw = pe::log_weight_w({1, {0}, 0}, 1000.0);
    CHECK(std::fabs(lw + 1000.0) < 1e-9 * 1000.0);
  }

  TEST_CASE("mellin_moment reference values") {
    CHECK(pe::mellin_moment(1, {1, {0}, 1}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(pe::mellin_moment(0, {2, {0, 0}, 0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pe::mellin_moment(2, {1, {0}, 0}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(pe::mellin_moment(200, {2, {0, 0}, 0}), pe::OverflowError);
    CHECK(std::isfinite(pe::log_mellin_moment(200, {2, {0, 0}, 0})));
  }

  TEST_CASE("property: mellin_moment equals the quadrature of x^j w") {
    // Panels in u = log x; the weights decay like exp(-(M+1) x^(1/(M+1))).
    const pe::GaussRule& g = pe::gauss_legendre(16);
    const pe::WeightSpec specs[] = {{1, {0}, 0}, {1, {2}, 1}, {2, {0, 1}, 0}, {2, {1, 3}, 2},
                                    {3, {0, 0, 0}, 0}, {3, {1, 0, 2}, 1}};
    for (const auto& s : specs) {
      std::vector<double> u, wt, w;
      const double lo = -40.0, hi = std::log(s.M == 3 ? 2e8 : 2e5);
      const int panels = static_cast<int>(std::ceil(hi - lo));
      const double h = (hi - lo) / panels;
      for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < g.x.size(); ++i) {
          u.push_back(lo + (p + 0.5) * h + 0.5 * h * g.x[i]);
          wt.push_back(0.5 * h * g.w[i]);
          w.push_back(std::exp(pe::log_weight_w(s, std::exp(u.back()))));
        }
      for (int j = 0; j <= 4; ++j) {
        double integral = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) integral += wt[i] * std::exp((j + 1) * u[i]) * w[i];
        INFO("M=" << s.M << " k=" << s.k << " j=" << j);
        CHECK(rel(integral, pe::mellin_moment(j, s)) < 1e-6);
      }
    }
  }
}
