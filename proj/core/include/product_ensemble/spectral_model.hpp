#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pe {

using Complex = std::complex<double>;

enum class Variant { GinibreProduct, WithInverses, TruncatedUnitary };

const char* variant_name(Variant v);

/// Ensemble description. nu holds nu_1..nu_M (nu_0 = 0 is implicit);
/// nuTilde holds nu~_1..nu~_K with nu~_K = 0; kappa = l + 1 - 2n.
struct ModelSpec {
  Variant variant = Variant::GinibreProduct;
  int n = 1;
  int M = 1;
  int K = 0;
  std::vector<int> nu;
  std::vector<int> nuTilde;
  int kappa = 0;

  static ModelSpec ginibre(int n, int M, std::vector<int> nu = {});
  static ModelSpec with_inverses(int n, int M, int K, std::vector<int> nu = {},
                                 std::vector<int> nuTilde = {});
  static ModelSpec truncated_unitary(int n, int M, int kappa, std::vector<int> nu = {});

  /// Throws DomainError when an invariant fails.
  void validate() const;
  /// Copy with a different n.
  ModelSpec with_n(int new_n) const;
};

struct BulkPoint {
  double x0 = 0.0;
  double phi = 0.0;
  double rho = 0.0;
  Complex wPlus;
  Complex wMinus;
};

struct EdgeData {
  double xStar = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double z0 = 0.0;
};

/// Upper end of the angle interval: pi/(M+1), or 2 pi/(M+1) for TruncatedUnitary.
double phi_max(const ModelSpec& spec);

/// Power p in the global scaling x = n^p x0: M, M-K or M-1.
double scaling_power(const ModelSpec& spec);

/// Right end of the limiting support; +infinity for WithInverses with K > 0.
double support_right_end(const ModelSpec& spec);

double param_x(const ModelSpec& spec, double phi);
double density_rho(const ModelSpec& spec, double phi);
double inverse_param(const ModelSpec& spec, double x0);
std::pair<Complex, Complex> saddle_points(const ModelSpec& spec, double phi);
BulkPoint bulk_point(const ModelSpec& spec, double phi);
EdgeData edge_constants(const ModelSpec& spec);

/// Saddle curve zeta(phi) = R(phi) e^{i alpha phi} and its phi-derivative, for
/// phi in [0, phi_max]; zeta(0) = z0.
Complex saddle_curve(const ModelSpec& spec, double phi);
Complex saddle_curve_derivative(const ModelSpec& spec, double phi);

/// (1/(Mk+1)) binomial((M+1)k, k). OverflowError (message carries the exact value) past 64 bits.
std::uint64_t fuss_catalan_moment(int M, int k);
/// Exact decimal string of the Fuss-Catalan number.
std::string fuss_catalan_string(int M, int k);

/// k-th moment of the limiting density by quadrature in phi (GinibreProduct only).
double density_moment(const ModelSpec& spec, int k);

}  // namespace pe
