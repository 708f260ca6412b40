#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/spectral_model.hpp"

using pe::Complex;
using pe::ModelSpec;
using std::numbers::pi;

namespace {

// Lattice paths with steps +M and -1 that stay nonnegative and end at 0 after (M+1)k steps,
// counted by dynamic programming over heights.
std::uint64_t fuss_catalan_paths(int M, int k) {
  const int steps = (M + 1) * k, top = M * k;
  std::vector<std::uint64_t> h(static_cast<std::size_t>(top) + 1, 0), next;
  h[0] = 1;
  for (int s = 0; s < steps; ++s) {
    next.assign(h.size(), 0);
    for (int v = 0; v <= top; ++v) {
      if (h[static_cast<std::size_t>(v)] == 0) continue;
      if (v + M <= top) next[static_cast<std::size_t>(v + M)] += h[static_cast<std::size_t>(v)];
      if (v >= 1) next[static_cast<std::size_t>(v - 1)] += h[static_cast<std::size_t>(v)];
    }
    h.swap(next);
  }
  return h[0];
}

// Saddle equation in polynomial form, scaled by |z|^(M+1).
double saddle_residual(const ModelSpec& s, double x0, Complex z) {
  Complex rhs = x0 * (z - 1.0);
  if (s.variant == pe::Variant::WithInverses) rhs *= std::pow(1.0 - z, s.K);
  if (s.variant == pe::Variant::TruncatedUnitary) rhs *= 1.0 + z;
  const Complex lhs = std::pow(z, s.M + 1);
  return std::abs(lhs - rhs) / std::abs(lhs);
}

std::vector<ModelSpec> variant_specs() {
  return {ModelSpec::ginibre(10, 1), ModelSpec::ginibre(10, 2), ModelSpec::ginibre(10, 4),
          ModelSpec::with_inverses(10, 2, 1), ModelSpec::with_inverses(10, 3, 1),
          ModelSpec::with_inverses(10, 3, 2), ModelSpec::truncated_unitary(10, 2, 3),
          ModelSpec::truncated_unitary(10, 3, 2)};
}

}  // namespace

TEST_SUITE("spectral_model") {
  TEST_CASE("model validation") {
    CHECK_THROWS_AS(ModelSpec::ginibre(5, 2, {0, -1}), pe::DomainError);
    CHECK_THROWS_AS(ModelSpec::ginibre(0, 2), pe::DomainError);
    CHECK_THROWS_AS(ModelSpec::truncated_unitary(5, 2, 1, {1, 0}), pe::DomainError);
    CHECK_NOTHROW(ModelSpec::truncated_unitary(5, 2, 2, {1, 0}));
    const ModelSpec s = ModelSpec::ginibre(5, 3, {0, 1, 0}).with_n(9);
    CHECK(s.n == 9);
    CHECK(s.nu == std::vector<int>{0, 1, 0});
  }

  TEST_CASE("param_x reference values") {
    const ModelSpec m1 = ModelSpec::ginibre(1, 1);
    CHECK(pe::param_x(m1, pi / 4) == doctest::Approx(2.0).epsilon(1e-14));
    for (int M = 1; M <= 4; ++M) {
      const ModelSpec s = ModelSpec::ginibre(1, M);
      const double xs = std::pow(M + 1.0, M + 1) / std::pow(M, M);
      CHECK(std::fabs(pe::param_x(s, 1e-6) / xs - 1.0) < 1e-3);
      CHECK(pe::param_x(s, pi / (M + 1) - 1e-7) < 1e-5);
    }
  }

  TEST_CASE("density_rho matches Marchenko-Pastur for M=1") {
    const ModelSpec s = ModelSpec::ginibre(1, 1);
    CHECK(pe::density_rho(s, pi / 4) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-14));
    for (double phi = 0.05; phi < pi / 2; phi += 0.1) {
      const double x = pe::param_x(s, phi);
      CHECK(pe::density_rho(s, phi) == doctest::Approx(std::sqrt(x * (4.0 - x)) / (2.0 * pi * x)).epsilon(1e-12));
    }
  }

  TEST_CASE("density_rho vanishes at the soft edge and blows up at the origin") {
    for (int M = 1; M <= 4; ++M) {
      const ModelSpec s = ModelSpec::ginibre(1, M);
      CHECK(pe::density_rho(s, 1e-6) < 1e-4);
      const double top = pe::phi_max(s);
      double prev = 0.0;
      for (int i = 0; i <= 100; ++i) {
        const double phi = 0.9 * top + 0.1 * top * i / 100.0 - (i == 100 ? 1e-7 : 0.0);
        const double r = pe::density_rho(s, phi);
        CHECK(r > prev);
        prev = r;
      }
    }
  }

  TEST_CASE("inverse_param") {
    CHECK(std::fabs(pe::inverse_param(ModelSpec::ginibre(1, 1), 2.0) - pi / 4) < 1e-12);
    const ModelSpec m2 = ModelSpec::ginibre(1, 2);
    CHECK(std::fabs(pe::inverse_param(m2, pe::param_x(m2, 0.7)) - 0.7) < 1e-12);
    CHECK_THROWS_AS(pe::inverse_param(m2, 6.75), pe::DomainError);
    CHECK_THROWS_AS(pe::inverse_param(m2, 0.0), pe::DomainError);
    const ModelSpec wi = ModelSpec::with_inverses(1, 2, 1);
    CHECK(std::fabs(pe::param_x(wi, pe::inverse_param(wi, 1.0)) - 1.0) < 1e-10);
  }

  TEST_CASE("saddle points reference values") {
    const auto [p1, m1] = pe::saddle_points(ModelSpec::ginibre(1, 1), pi / 4);
    CHECK(std::abs(p1 - Complex(1.0, 1.0)) < 1e-14);
    CHECK(std::abs(m1 - Complex(1.0, -1.0)) < 1e-14);
    const ModelSpec m2 = ModelSpec::ginibre(1, 2);
    const auto [p2, q2] = pe::saddle_points(m2, pi / 6);
    CHECK(std::abs(p2 - std::polar(2.0 / std::sqrt(3.0), pi / 6)) < 1e-14);
    CHECK(saddle_residual(m2, pe::param_x(m2, pi / 6), p2) < 1e-12);
  }

  TEST_CASE("property: saddle residuals and conjugate symmetry across variants") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.01, 0.99);
    const auto specs = variant_specs();
    for (int i = 0; i < 100; ++i) {
      const ModelSpec& s = specs[static_cast<std::size_t>(i) % specs.size()];
      const double phi = unit(rng) * pe::phi_max(s);
      const pe::BulkPoint b = pe::bulk_point(s, phi);
      INFO(pe::variant_name(s.variant) << " M=" << s.M << " phi=" << phi);
      CHECK(b.wMinus == std::conj(b.wPlus));
      CHECK(saddle_residual(s, b.x0, b.wPlus) < 1e-10);
      CHECK(b.rho > 0.0);
    }
  }

  TEST_CASE("property: param_x strictly decreasing") {
    for (const ModelSpec& s : variant_specs()) {
      const double top = pe::phi_max(s);
      double prev = std::numeric_limits<double>::infinity();
      for (int i = 1; i < 1000; ++i) {
        const double x = pe::param_x(s, top * i / 1000.0);
        CHECK(x < prev);
        prev = x;
      }
    }
  }

  TEST_CASE("property: saddle points approach z0 at the edge") {
    for (const ModelSpec& s : {ModelSpec::ginibre(1, 2), ModelSpec::ginibre(1, 3),
                               ModelSpec::truncated_unitary(1, 2, 3), ModelSpec::truncated_unitary(1, 3, 3)}) {
      const double z0 = pe::edge_constants(s).z0;
      double prev = std::numeric_limits<double>::infinity();
      for (double phi : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
        const double d = std::abs(pe::saddle_points(s, phi).first - z0);
        CHECK(d < prev);
        prev = d;
      }
      CHECK(prev < 1e-4);
    }
  }

  TEST_CASE("edge constants") {
    const pe::EdgeData e1 = pe::edge_constants(ModelSpec::ginibre(1, 1));
    CHECK(e1.xStar == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(e1.z0 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(e1.c2 == doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-14));
    for (int M = 1; M <= 4; ++M) {
      const pe::EdgeData e = pe::edge_constants(ModelSpec::ginibre(1, M));
      CHECK(e.c1 == doctest::Approx(e.xStar / e.c2).epsilon(1e-15));
      CHECK(e.z0 == doctest::Approx(1.0 + 1.0 / M).epsilon(1e-15));
    }
    const pe::EdgeData t3 = pe::edge_constants(ModelSpec::truncated_unitary(1, 3, 2));
    CHECK(t3.xStar == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(t3.z0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(pe::edge_constants(ModelSpec::with_inverses(1, 2, 1)), pe::NoSoftEdgeError);
    CHECK(std::isinf(pe::support_right_end(ModelSpec::with_inverses(1, 2, 1))));
  }

  TEST_CASE("fuss_catalan_moment against a lattice-path count") {
    CHECK(pe::fuss_catalan_moment(2, 2) == 3);
    CHECK(pe::fuss_catalan_moment(1, 3) == 5);
    for (int M = 1; M <= 4; ++M) {
      CHECK(pe::fuss_catalan_moment(M, 0) == 1);
      for (int k = 1; k <= 8; ++k) CHECK(pe::fuss_catalan_moment(M, k) == fuss_catalan_paths(M, k));
    }
    CHECK_THROWS_AS(pe::fuss_catalan_moment(4, 60), pe::OverflowError);
    CHECK(pe::fuss_catalan_string(1, 40) == "2622127042276492108820");
  }

  TEST_CASE("property: density moments are Fuss-Catalan numbers") {
    for (int M = 1; M <= 4; ++M)
      for (int k = 0; k <= 6; ++k) {
        const double want = static_cast<double>(pe::fuss_catalan_moment(M, k));
        INFO("M=" << M << " k=" << k);
        CHECK(std::fabs(pe::density_moment(ModelSpec::ginibre(1, M), k) - want) <= 1e-8 * want);
      }
    CHECK_THROWS_AS(pe::density_moment(ModelSpec::with_inverses(1, 2, 1), 1), pe::DomainError);
  }
}
