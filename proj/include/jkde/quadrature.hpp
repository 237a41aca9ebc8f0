#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <vector>

namespace jkde::quadrature {

//! Adaptive Gauss-Kronrod (7/15) integration of f over [a, b], split at
//! every knot that falls strictly inside the interval. Piecewise polynomial
//! integrands of moderate degree are integrated exactly up to rounding when
//! all breakpoints are supplied as knots.
template <typename F>
double integrate_piecewise(F&& f,
                           double a,
                           double b,
                           std::vector<double> knots = {},
                           double tol = 1e-14)
{
  if (!(a < b))
    return 0.0;
  knots.erase(std::remove_if(knots.begin(), knots.end(),
                             [&](double k) { return !(k > a && k < b); }),
              knots.end());
  knots.push_back(a);
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += gauss_kronrod<double, 15>::integrate(f, knots[i], knots[i + 1],
                                                  15, tol);
  }
  return total;
}

} // namespace jkde::quadrature
