#include "product_ensemble/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include "product_ensemble/errors.hpp"

namespace pe {

namespace {

template <unsigned N>
GaussRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  GaussRule r;
  // Boost stores the nonnegative half; N is even so there is no node at 0.
  for (std::size_t i = a.size(); i-- > 0;) {
    r.x.push_back(-a[i]);
    r.w.push_back(w[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.x.push_back(a[i]);
    r.w.push_back(w[i]);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static const GaussRule r8 = make_rule<8>();
  static const GaussRule r16 = make_rule<16>();
  static const GaussRule r32 = make_rule<32>();
  switch (order) {
    case 8: return r8;
    case 16: return r16;
    case 32: return r32;
    default: throw DomainError("Gauss-Legendre order must be 8, 16 or 32");
  }
}

}  // namespace pe
