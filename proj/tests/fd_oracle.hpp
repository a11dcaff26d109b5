#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>

namespace testing {

// Independent oracle: adaptive double-exponential quadrature of
//   1/Gamma(j+1) int_0^inf xi^j / (exp(xi - z) + 1) dxi,
// split at xi = z where the Fermi step sits.
inline double fd_oracle(double j, double z) {
  auto f = [&](double xi) {
    const double a = xi - z;
    const double fermi = a > 0 ? std::exp(-a) / (1 + std::exp(-a)) : 1 / (1 + std::exp(a));
    return std::pow(xi, j) * fermi;
  };
  double sum = 0;
  const double split = std::max(z, 0.0);
  if (split > 0) {
    boost::math::quadrature::tanh_sinh<double> ts;
    sum += ts.integrate(f, 0.0, split, 1e-15);
  }
  boost::math::quadrature::exp_sinh<double> es;
  sum += es.integrate([&](double s) { return f(split + s); }, 1e-15);
  return sum / std::tgamma(j + 1);
}

}  // namespace testing
