#include "product_ensemble/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "product_ensemble/errors.hpp"
#include "product_ensemble/parallel.hpp"
#include "product_ensemble/quadrature.hpp"

namespace pe {

namespace {

// Column j of Q is scaled by the phase of R_jj so that R has a positive diagonal.
Eigen::MatrixXcd phase_corrected_q(const Eigen::MatrixXcd& g) {
  const int rows = static_cast<int>(g.rows()), cols = static_cast<int>(g.cols());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (int j = 0; j < cols; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

Eigen::VectorXd squared_singular_values(const Eigen::MatrixXcd& y) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(y);
  Eigen::VectorXd s = svd.singularValues().array().square();
  std::sort(s.data(), s.data() + s.size());
  return s;
}

// Product X_M ... X_first applied to start, with X_j of size (n+nu_j) x (n+nu_{j-1}).
Eigen::MatrixXcd left_multiply(const ModelSpec& spec, int first, Eigen::MatrixXcd y, Rng& rng) {
  for (int j = first; j <= spec.M; ++j) {
    const int rows = spec.n + spec.nu[static_cast<std::size_t>(j - 1)];
    y = sample_ginibre(rows, static_cast<int>(y.rows()), rng) * y;
  }
  return y;
}

std::vector<double> trial_values(const ModelSpec& spec, std::uint64_t seed, int trial) {
  Rng rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
  std::vector<double> out = sample_squared_singular_values(spec, rng);
  const double scale = std::pow(static_cast<double>(spec.n), scaling_power(spec));
  for (double& v : out) v /= scale;
  return out;
}

// Upper end of the histogram range.
double histogram_top(const SampleBatch& batch) {
  const double top = support_right_end(batch.spec);
  if (std::isfinite(top)) return top;
  std::vector<double> v = batch.rescaledValues;
  const std::size_t idx = static_cast<std::size_t>(std::floor(0.99 * (v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

}  // namespace

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

Eigen::MatrixXcd sample_ginibre(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw DomainError("sample_ginibre needs rows, cols >= 1");
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

Eigen::MatrixXcd sample_haar_unitary(int l, Rng& rng) {
  return phase_corrected_q(sample_ginibre(l, l, rng));
}

Eigen::MatrixXcd sample_truncated_unitary(int rows, int cols, int l, Rng& rng) {
  if (rows > l || cols > l) throw DomainError("truncated block larger than the unitary");
  return phase_corrected_q(sample_ginibre(l, cols, rng)).topRows(rows);
}

std::vector<double> sample_squared_singular_values(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Eigen::MatrixXcd y;
  if (spec.variant == Variant::GinibreProduct) {
    y = left_multiply(spec, 1, Eigen::MatrixXcd::Identity(spec.n, spec.n), rng);
  } else if (spec.variant == Variant::TruncatedUnitary) {
    const int l = 2 * spec.n + spec.kappa - 1;
    y = left_multiply(spec, 2, sample_truncated_unitary(spec.n + spec.nu[0], spec.n, l, rng), rng);
  } else {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(spec.n, spec.n);
    for (int k = 1; k <= spec.K; ++k) {
      const int rows = spec.n + spec.nuTilde[static_cast<std::size_t>(k - 1)];
      t = sample_ginibre(rows, static_cast<int>(t.rows()), rng) * t;
    }
    const Eigen::VectorXd ts = Eigen::BDCSVD<Eigen::MatrixXcd>(t).singularValues();
    if (!(ts(0) / ts(ts.size() - 1) <= 1e14))
      throw SingularFactorError("inverse factor condition exceeds 1e14");
    y = left_multiply(spec, 1, Eigen::MatrixXcd(t.partialPivLu().inverse()), rng);
  }
  const Eigen::VectorXd s = squared_singular_values(y);
  return {s.data(), s.data() + s.size()};
}

SampleBatch sample_batch(const ModelSpec& spec, int trials, std::uint64_t seed) {
  spec.validate();
  if (trials < 1) throw DomainError("sample_batch needs trials >= 1");
  SampleBatch batch{spec, trials, seed, {}};
  batch.rescaledValues.resize(static_cast<std::size_t>(trials) * static_cast<std::size_t>(spec.n));
  parallel_for_index(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const std::vector<double> v = trial_values(spec, seed, static_cast<int>(t));
    std::copy(v.begin(), v.end(), batch.rescaledValues.begin() + static_cast<std::ptrdiff_t>(t * v.size()));
  });
  return batch;
}

double limiting_density(const ModelSpec& spec, double x0) {
  if (!(x0 > 0.0) || x0 >= support_right_end(spec)) return 0.0;
  return density_rho(spec, inverse_param(spec, x0));
}

DensityComparison empirical_vs_density(const SampleBatch& batch, int bins) {
  if (bins < 5) throw DomainError("empirical_vs_density needs at least 5 bins");
  if (batch.rescaledValues.empty()) throw DomainError("empty sample batch");
  const double top = histogram_top(batch);
  const double width = top / bins;
  DensityComparison out;
  Histogram& h = out.hist;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = b * width;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  // Values past the range land in the last bin so that the counts sum to the sample size.
  for (double v : batch.rescaledValues) {
    const int b = std::clamp(static_cast<int>(std::floor(v / width)), 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  const double total = static_cast<double>(batch.rescaledValues.size());
  const GaussRule& g = gauss_legendre(16);
  h.normalizedDensity.resize(static_cast<std::size_t>(bins));
  h.analyticDensity.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    const std::size_t i = static_cast<std::size_t>(b);
    h.normalizedDensity[i] = static_cast<double>(h.counts[i]) / (total * width);
    const double mid = (b + 0.5) * width;
    double avg = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k)
      avg += 0.5 * g.w[k] * limiting_density(batch.spec, mid + 0.5 * width * g.x[k]);
    h.analyticDensity[i] = avg;
  }
  for (int b = 2; b < bins - 2; ++b) {
    const std::size_t i = static_cast<std::size_t>(b);
    out.supError = std::max(out.supError, std::fabs(h.normalizedDensity[i] - h.analyticDensity[i]));
  }
  return out;
}

EdgeStatistics edge_statistics(const ModelSpec& spec, int trials, std::uint64_t seed) {
  if (!std::isfinite(support_right_end(spec)))
    throw NoSoftEdgeError("edge_statistics needs a variant with a soft edge");
  if (trials < 2) throw DomainError("edge_statistics needs trials >= 2");
  const SampleBatch batch = sample_batch(spec, trials, seed);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double m = batch.rescaledValues[static_cast<std::size_t>(t) * n + n - 1];
    sum += m;
    sum2 += m * m;
  }
  EdgeStatistics s;
  s.meanMax = sum / trials;
  s.stdMax = std::sqrt(std::max(0.0, (sum2 - trials * s.meanMax * s.meanMax) / (trials - 1)));
  return s;
}

void write_batch_csv(std::ostream& out, const SampleBatch& batch) {
  out.precision(17);
  out << "trial,index,value\n";
  const std::size_t n = static_cast<std::size_t>(batch.spec.n);
  for (std::size_t i = 0; i < batch.rescaledValues.size(); ++i)
    out << i / n << ',' << i % n << ',' << batch.rescaledValues[i] << '\n';
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
  out.precision(17);
  out << "bin_left,bin_right,count,density,analytic_density\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out << hist.edges[i] << ',' << hist.edges[i + 1] << ',' << hist.counts[i] << ','
        << hist.normalizedDensity[i] << ',' << hist.analyticDensity[i] << '\n';
}

}  // namespace pe
