#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "product_ensemble/spectral_model.hpp"

namespace pe {

using Rng = std::mt19937_64;

/// Independent stream for one trial, derived from (seed, trial).
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Entries with independent N(0, 1/2) real and imaginary parts.
Eigen::MatrixXcd sample_ginibre(int rows, int cols, Rng& rng);

/// Haar unitary of size l: QR of a Ginibre matrix with the phases of diag(R) removed.
Eigen::MatrixXcd sample_haar_unitary(int l, Rng& rng);

/// Upper-left rows x cols block of an l x l Haar unitary (first cols columns only).
Eigen::MatrixXcd sample_truncated_unitary(int rows, int cols, int l, Rng& rng);

/// n squared singular values of the model's product matrix, ascending.
/// SingularFactorError when the inverted factor has condition number above 1e14.
std::vector<double> sample_squared_singular_values(const ModelSpec& spec, Rng& rng);

struct SampleBatch {
  ModelSpec spec;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> rescaledValues;  // trial-major, n per trial, divided by n^p
};

/// Trials run in parallel; trial i always uses trial_rng(seed, i).
SampleBatch sample_batch(const ModelSpec& spec, int trials, std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;
  std::vector<long long> counts;
  std::vector<double> normalizedDensity;
  std::vector<double> analyticDensity;  // bin average of the limiting density
};

struct DensityComparison {
  Histogram hist;
  double supError = 0.0;  // over interior bins, two excluded at each end
};

/// Histogram on (0, x*) or, without a soft edge, up to the 99th percentile.
DensityComparison empirical_vs_density(const SampleBatch& batch, int bins);

/// Limiting density in x at x0 (rho(phi) of the parametrization); 0 outside the support.
double limiting_density(const ModelSpec& spec, double x0);

struct EdgeStatistics {
  double meanMax = 0.0;
  double stdMax = 0.0;
};

/// Mean and standard deviation of the largest rescaled squared singular value.
EdgeStatistics edge_statistics(const ModelSpec& spec, int trials, std::uint64_t seed);

/// CSV: trial,index,value.
void write_batch_csv(std::ostream& out, const SampleBatch& batch);
/// CSV: bin_left,bin_right,count,density,analytic_density.
void write_histogram_csv(std::ostream& out, const Histogram& hist);

}  // namespace pe
