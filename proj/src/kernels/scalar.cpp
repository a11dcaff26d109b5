#include <cmath>

#include "perosim/kernels.hpp"

namespace perosim::kernels::scalar {

// Beyond |x| = 40 the exponentially small parts drop below 1e-17 relative.
constexpr double kLarge = 40.0;
constexpr double kSeries = 0.1;

double bernoulli(double x) {
  if (x == 0.0) return 1.0;
  if (x > kLarge) return x * std::exp(-x);
  if (x < -kLarge) return -x;
  return x / std::expm1(x);
}

double bernoulli_derivative(double x) {
  if (std::abs(x) < kSeries) {
    const double x2 = x * x;
    // -1/2 + x/6 - x^3/180 + x^5/5040 - x^7/151200 + x^9/4790016
    return -0.5 + x * (1.0 / 6.0 +
                       x2 * (-1.0 / 180.0 +
                             x2 * (1.0 / 5040.0 + x2 * (-1.0 / 151200.0 + x2 * (1.0 / 4790016.0)))));
  }
  const double b = bernoulli(x);
  return (b / x) * (1.0 - b) - b;
}

void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    b[i] = bernoulli(x[i]);
    db[i] = bernoulli_derivative(x[i]);
  }
}

void sg_flux(const FluxInputs& in, const FluxOutputs& out) {
  const std::size_t n = in.drive.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = in.drive[i];
    const double c = in.coeff[i];
    const double bp = bernoulli(s);
    const double bm = bernoulli(-s);
    const double dbp = bernoulli_derivative(s);
    const double dbm = bernoulli_derivative(-s);
    out.flux[i] = c * (bp * in.up[i] - bm * in.down[i]);
    out.d_up[i] = c * bp;
    out.d_down[i] = -(c * bm);
    out.d_drive[i] = c * (dbp * in.up[i] + dbm * in.down[i]);
  }
}

}  // namespace perosim::kernels::scalar
