#include "perosim/fermi_dirac.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "perosim/errors.hpp"

namespace perosim::fermi_dirac {
namespace {

constexpr int kGaussPoints = 16;
constexpr int kSeriesTerms = 200;
constexpr double kSeriesSwitch = -0.5;
constexpr double kAsymptoticSwitch = 40.0;
// Fermi factor below exp(-46) ~ 1e-20 is dropped at the top of the range.
constexpr double kTailCutoff = 46.0;

struct GaussRule {
  std::array<double, kGaussPoints> node{};
  std::array<double, kGaussPoints> weight{};
};

GaussRule make_gauss_legendre() {
  GaussRule rule;
  constexpr int n = kGaussPoints;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.node[i] = -x;
    rule.node[n - 1 - i] = x;
    rule.weight[i] = w;
    rule.weight[n - 1 - i] = w;
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_legendre();
  return rule;
}

double order_value(Order order) {
  switch (order) {
    case Order::MinusHalf: return -0.5;
    case Order::Half: return 0.5;
    case Order::ThreeHalves: return 1.5;
  }
  return 0.5;
}

int order_slot(Order order) { return static_cast<int>(order); }

// 1 / k^(j+1) for k = 1..kSeriesTerms, one table per order.
const std::array<std::array<double, kSeriesTerms + 1>, 3>& series_table() {
  static const auto table = [] {
    std::array<std::array<double, kSeriesTerms + 1>, 3> t{};
    const Order orders[] = {Order::MinusHalf, Order::Half, Order::ThreeHalves};
    for (Order o : orders) {
      const double p = order_value(o) + 1.0;
      for (int k = 1; k <= kSeriesTerms; ++k) t[order_slot(o)][k] = std::pow(k, -p);
    }
    return t;
  }();
  return table;
}

double series(Order order, double z) {
  const auto& inv = series_table()[order_slot(order)];
  const double x = std::exp(z);
  double xk = x;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= kSeriesTerms; ++k) {
    sum += sign * xk * inv[k];
    xk *= x;
    if (xk < 1e-18 * sum) break;
    sign = -sign;
  }
  return sum;
}

double gamma_of_order_plus_one(Order order) {
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  switch (order) {
    case Order::MinusHalf: return sqrt_pi;               // Gamma(1/2)
    case Order::Half: return 0.5 * sqrt_pi;              // Gamma(3/2)
    case Order::ThreeHalves: return 0.75 * sqrt_pi;      // Gamma(5/2)
  }
  return 1.0;
}

double asymptotic(Order order, double z) {
  // zeta(2k) for k = 1..7
  constexpr double pi = std::numbers::pi;
  const double zeta_even[] = {
      pi * pi / 6.0,
      std::pow(pi, 4) / 90.0,
      std::pow(pi, 6) / 945.0,
      std::pow(pi, 8) / 9450.0,
      std::pow(pi, 10) / 93555.0,
      691.0 * std::pow(pi, 12) / 638512875.0,
      2.0 * std::pow(pi, 14) / 18243225.0,
  };
  const double j = order_value(order);
  const double inv_z2 = 1.0 / (z * z);
  double correction = 0.0;
  double falling = 1.0;  // (j+1) j (j-1) ... over 2k factors
  double zpow = 1.0;
  for (int k = 1; k <= 7; ++k) {
    falling *= (j + 1.0 - (2 * k - 2)) * (j + 1.0 - (2 * k - 1));
    zpow *= inv_z2;
    const double eta_like = 2.0 * (1.0 - std::pow(2.0, 1 - 2 * k)) * zeta_even[k - 1];
    correction += eta_like * falling * zpow;
  }
  // Gamma(j+2) = (j+1) Gamma(j+1)
  const double lead = std::pow(z, j + 1.0) / ((j + 1.0) * gamma_of_order_plus_one(order));
  return lead * (1.0 + correction);
}

double fermi_factor(double t, double z) {
  const double a = t * t - z;
  if (a > 0.0) {
    const double e = std::exp(-a);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(a));
}

struct QuadratureSums {
  double weight_0 = 0.0;  // int f dt
  double weight_2 = 0.0;  // int t^2 f dt
  double weight_4 = 0.0;  // int t^4 f dt
};

QuadratureSums quadrature(double z, bool need_fourth) {
  const double modulus = std::hypot(z, std::numbers::pi);
  const double pole_distance = std::sqrt(0.5 * (modulus - z));
  const double width_target = std::min(1.0, 1.2 * pole_distance);
  const double t_hi = std::sqrt(std::max(z, 0.0) + kTailCutoff);
  const int panels = static_cast<int>(std::ceil(t_hi / width_target));
  const double width = t_hi / panels;
  const auto& rule = gauss_rule();

  QuadratureSums sums;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * width;
    const double half = 0.5 * width;
    double s0 = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (int q = 0; q < kGaussPoints; ++q) {
      const double t = mid + half * rule.node[q];
      const double wf = rule.weight[q] * fermi_factor(t, z);
      const double t2 = t * t;
      s0 += wf;
      s2 += wf * t2;
      if (need_fourth) s4 += wf * t2 * t2;
    }
    sums.weight_0 += half * s0;
    sums.weight_2 += half * s2;
    sums.weight_4 += half * s4;
  }
  return sums;
}

void require_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("Fermi-Dirac integral: non-finite argument");
}

}  // namespace

double reference(Order order, double z) {
  require_finite(z);
  if (z <= kSeriesSwitch) return series(order, z);
  if (z > kAsymptoticSwitch) return asymptotic(order, z);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  const QuadratureSums s = quadrature(z, order == Order::ThreeHalves);
  switch (order) {
    case Order::MinusHalf: return 2.0 / sqrt_pi * s.weight_0;
    case Order::Half: return 4.0 / sqrt_pi * s.weight_2;
    case Order::ThreeHalves: return 8.0 / (3.0 * sqrt_pi) * s.weight_4;
  }
  return 0.0;
}

namespace {

// Piecewise Chebyshev interpolants of the quadrature values on unit
// intervals of [kTableLo, kAsymptoticSwitch]. F_j(z) = -Li_{j+1}(-e^z) is
// analytic in the strip |Im z| < pi, so degree 16 on a unit interval is
// accurate to ~1e-17 relative to the interval maximum.
constexpr double kTableLo = -8.0;
constexpr int kChebDegree = 16;
constexpr int kIntervals = static_cast<int>(kAsymptoticSwitch - kTableLo);

struct ChebTable {
  std::array<std::array<double, kChebDegree + 1>, kIntervals> c{};
};

ChebTable make_table(Order order) {
  ChebTable t;
  constexpr int n = kChebDegree + 1;
  std::array<double, n> f{};
  for (int iv = 0; iv < kIntervals; ++iv) {
    const double mid = kTableLo + iv + 0.5;
    for (int j = 0; j < n; ++j) f[j] = reference(order, mid + 0.5 * std::cos(std::numbers::pi * (j + 0.5) / n));
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += f[j] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
      t.c[iv][k] = 2.0 / n * sum;
    }
  }
  return t;
}

const ChebTable& table(Order order) {
  static const std::array<ChebTable, 3> tables = {make_table(Order::MinusHalf), make_table(Order::Half),
                                                  make_table(Order::ThreeHalves)};
  return tables[order_slot(order)];
}

double clenshaw(const std::array<double, kChebDegree + 1>& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int k = kChebDegree; k >= 1; --k) {
    const double b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + 0.5 * c[0];
}

double tabulated(Order order, double z) {
  const int iv = std::min(kIntervals - 1, static_cast<int>(z - kTableLo));
  const double x = 2.0 * (z - (kTableLo + iv)) - 1.0;
  return clenshaw(table(order).c[iv], x);
}

}  // namespace

double integral(Order order, double z) {
  require_finite(z);
  if (z <= kTableLo) return series(order, z);
  if (z > kAsymptoticSwitch) return asymptotic(order, z);
  return tabulated(order, z);
}

HalfPair half_with_slope(double z) {
  require_finite(z);
  if (z <= kTableLo) return {series(Order::Half, z), series(Order::MinusHalf, z)};
  if (z > kAsymptoticSwitch) return {asymptotic(Order::Half, z), asymptotic(Order::MinusHalf, z)};
  return {tabulated(Order::Half, z), tabulated(Order::MinusHalf, z)};
}

}  // namespace perosim::fermi_dirac
