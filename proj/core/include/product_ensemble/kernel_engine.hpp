#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "product_ensemble/spectral_model.hpp"

namespace pe {

struct KernelValue {
  double value = 0.0;
  double imagResidual = 0.0;
  double errorEstimate = 0.0;
};

enum class ContourChoice {
  Auto,         // direct contours for n <= 24, bulk or edge contours above
  DirectLeft,   // C at Re s = -1/2
  DirectRight,  // C right of the ellipse
  DirectBest,   // whichever direct C has the smaller peak integrand
  Bulk,         // n-scaled Sigma~ with C through the saddle points
  Edge          // wedge contours at the soft edge
};

struct KernelOptions {
  ContourChoice contours = ContourChoice::Auto;
  double panelsPerUnitLength = 0.0;  // 0 selects a per-geometry default
  double tol = 1e-6;                 // relative acceptance bound on errorEstimate
  int maxRefinements = 3;
};

/// K_n(x, y) by double-contour quadrature. ConvergenceError when the order 16 and
/// order 32 results still differ by more than tol max(1, |K|) after the refinements.
KernelValue kernel_finite_n(const ModelSpec& spec, double x, double y,
                            const KernelOptions& options = {});

enum class ScalingMode { Bulk, Edge };

struct ScalingFrame {
  ScalingMode mode = ScalingMode::Bulk;
  std::optional<BulkPoint> bulk;
  std::optional<EdgeData> edge;
  int n = 1;
};

ScalingFrame bulk_frame(const ModelSpec& spec, double phi);
ScalingFrame edge_frame(const ModelSpec& spec);

/// Bulk-rescaled kernel at (xi, eta): conjugation factor, power of n and 1/rho
/// times K_n at the scaled arguments; tends to the sine kernel.
double rescaled_bulk_kernel(const ModelSpec& spec, const ScalingFrame& frame, double xi,
                            double eta, const KernelOptions& options = {});

/// Edge-rescaled kernel at (xi, eta); tends to the Airy kernel.
double rescaled_edge_kernel(const ModelSpec& spec, const ScalingFrame& frame, double xi,
                            double eta, const KernelOptions& options = {});

/// Rescaled kernel on the tensor grid xis x etas, row-major in xi; the contour
/// plan is built once and the evaluation runs in parallel.
std::vector<double> rescaled_kernel_grid(const ModelSpec& spec, const ScalingFrame& frame,
                                         const std::vector<double>& xis,
                                         const std::vector<double>& etas,
                                         const KernelOptions& options = {});

double sine_kernel(double xi, double eta);

enum class AiryMethod { AiryFormula, ContourIntegral };

double airy_kernel(double xi, double eta, AiryMethod method = AiryMethod::AiryFormula);

struct ConvergenceRow {
  int n = 0;
  double supError = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool strictlyDecreasing = false;
};

/// sup over the (xi, eta) pairs of |rescaled kernel - limit kernel| for each n.
/// location is phi for Bulk and ignored for Edge.
ConvergenceReport convergence_report(const ModelSpec& spec, ScalingMode mode, double location,
                                     const std::vector<int>& nList,
                                     const std::vector<std::pair<double, double>>& grid,
                                     const KernelOptions& options = {});

}  // namespace pe
