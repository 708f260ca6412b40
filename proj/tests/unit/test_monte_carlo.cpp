#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/monte_carlo.hpp"

using pe::ModelSpec;

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace

TEST_SUITE("monte_carlo") {
  TEST_CASE("Ginibre entries have mean 0 and unit variance") {
    pe::Rng rng = pe::trial_rng(1, 0);
    const Eigen::MatrixXcd g = pe::sample_ginibre(1000, 1000, rng);
    CHECK(std::abs(g.mean()) < 0.01);
    CHECK(std::fabs(g.cwiseAbs2().mean() - 1.0) < 0.01);
    CHECK_THROWS_AS(pe::sample_ginibre(0, 3, rng), pe::DomainError);
  }

  TEST_CASE("Haar unitaries are unitary and |U_11|^2 has mean 1/l") {
    pe::Rng rng = pe::trial_rng(2, 0);
    const int l = 5;
    for (int i = 0; i < 20; ++i) {
      const Eigen::MatrixXcd u = pe::sample_haar_unitary(l, rng);
      CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-12);
    }
    std::vector<double> u11;
    for (int i = 0; i < 100000; ++i) u11.push_back(std::norm(pe::sample_haar_unitary(l, rng)(0, 0)));
    const MeanSe s = mean_se(u11);
    CHECK(std::fabs(s.mean - 1.0 / l) < 3.0 * s.se);
  }

  TEST_CASE("truncated unitary blocks are contractions") {
    pe::Rng rng = pe::trial_rng(3, 0);
    for (int i = 0; i < 50; ++i) {
      const Eigen::MatrixXcd v = pe::sample_truncated_unitary(12, 10, 25, rng);
      const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXcd>(v).singularValues();
      CHECK(s.maxCoeff() < 1.0);
      CHECK(s.minCoeff() > 0.0);
    }
    CHECK_THROWS_AS(pe::sample_truncated_unitary(30, 10, 25, rng), pe::DomainError);
  }

  TEST_CASE("batches: size, sign and the stream-per-trial contract") {
    const ModelSpec s = ModelSpec::truncated_unitary(20, 2, 3);
    const pe::SampleBatch b = pe::sample_batch(s, 7, 99);
    CHECK(b.rescaledValues.size() == 7u * 20u);
    for (double v : b.rescaledValues) CHECK(v >= 0.0);
    const pe::SampleBatch again = pe::sample_batch(s, 7, 99);
    CHECK(again.rescaledValues == b.rescaledValues);
    // Serial recomputation of trial 4.
    pe::Rng rng = pe::trial_rng(99, 4);
    const std::vector<double> raw = pe::sample_squared_singular_values(s, rng);
    const double scale = std::pow(20.0, pe::scaling_power(s));
    for (int i = 0; i < 20; ++i) CHECK(raw[static_cast<std::size_t>(i)] / scale == b.rescaledValues[80 + static_cast<std::size_t>(i)]);
    CHECK(pe::sample_batch(s, 7, 100).rescaledValues != b.rescaledValues);
  }

  TEST_CASE("histogram counts and normalization") {
    for (const ModelSpec& s : {ModelSpec::ginibre(50, 2), ModelSpec::with_inverses(50, 2, 1)}) {
      const pe::SampleBatch b = pe::sample_batch(s, 10, 5);
      const pe::DensityComparison c = pe::empirical_vs_density(b, 40);
      const auto& h = c.hist;
      CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0LL) == static_cast<long long>(b.rescaledValues.size()));
      double mass = 0.0;
      for (std::size_t i = 0; i < h.counts.size(); ++i) mass += h.normalizedDensity[i] * (h.edges[i + 1] - h.edges[i]);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pe::empirical_vs_density(pe::sample_batch(ModelSpec::ginibre(5, 1), 2, 1), 3), pe::DomainError);
  }

  TEST_CASE("inverse-factor histogram up to the 99th percentile") {
    const pe::SampleBatch b = pe::sample_batch(ModelSpec::with_inverses(100, 2, 1), 50, 8);
    CHECK(pe::empirical_vs_density(b, 60).supError < 0.07);
  }

  TEST_CASE("property: first two rescaled moments are Fuss-Catalan numbers") {
    for (int M : {1, 2}) {
      const int n = 100;
      const pe::SampleBatch b = pe::sample_batch(ModelSpec::ginibre(n, M), 60, 17);
      std::vector<double> m1, m2;
      for (int t = 0; t < 60; ++t) {
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
          const double v = b.rescaledValues[static_cast<std::size_t>(t * n + i)];
          s1 += v;
          s2 += v * v;
        }
        m1.push_back(s1 / n);
        m2.push_back(s2 / n);
      }
      const MeanSe a = mean_se(m1), c = mean_se(m2);
      INFO("M=" << M << " m1=" << a.mean << "+-" << a.se << " m2=" << c.mean << "+-" << c.se);
      CHECK(std::fabs(a.mean - static_cast<double>(pe::fuss_catalan_moment(M, 1))) < 3.0 * a.se);
      CHECK(std::fabs(c.mean - static_cast<double>(pe::fuss_catalan_moment(M, 2))) < 3.0 * c.se);
    }
  }

  TEST_CASE("Marchenko-Pastur edge and fluctuation scale") {
    const pe::EdgeStatistics small = pe::edge_statistics(ModelSpec::ginibre(100, 1), 100, 23);
    const pe::EdgeStatistics large = pe::edge_statistics(ModelSpec::ginibre(400, 1), 50, 29);
    CHECK(std::fabs(large.meanMax - 4.0) < 0.1);
    CHECK(large.stdMax < small.stdMax);
    CHECK_THROWS_AS(pe::edge_statistics(ModelSpec::with_inverses(10, 2, 1), 5, 1), pe::NoSoftEdgeError);
  }

  TEST_CASE("limiting density outside the support is zero") {
    const ModelSpec s = ModelSpec::ginibre(10, 2);
    CHECK(pe::limiting_density(s, 7.0) == 0.0);
    CHECK(pe::limiting_density(s, -1.0) == 0.0);
    CHECK(pe::limiting_density(s, 1.0) > 0.0);
  }

  TEST_CASE("CSV export") {
    const pe::SampleBatch b = pe::sample_batch(ModelSpec::ginibre(4, 1), 2, 3);
    std::ostringstream a, h;
    pe::write_batch_csv(a, b);
    const std::string text = a.str();
    CHECK(text.rfind("trial,index,value\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 9);
    pe::write_histogram_csv(h, pe::empirical_vs_density(b, 5).hist);
    CHECK(h.str().rfind("bin_left,bin_right,count,density,analytic_density\n", 0) == 0);
  }
}
