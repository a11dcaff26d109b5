#include "perosim/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "perosim/errors.hpp"
#include "perosim/fermi_dirac.hpp"

namespace perosim {

StatisticsKind StatisticsKind::blakemore(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ValidationError("statistics.gamma", "Blakemore gamma must be positive and finite");
  return StatisticsKind(StatisticsFamily::Blakemore, gamma);
}

double StatisticsKind::upper_limit() const noexcept {
  return bounded() ? 1.0 / gamma_ : std::numeric_limits<double>::infinity();
}

std::string StatisticsKind::name() const {
  switch (family_) {
    case StatisticsFamily::Boltzmann: return "boltzmann";
    case StatisticsFamily::FermiDiracHalf: return "fermi_dirac_half";
    case StatisticsFamily::Blakemore: {
      std::ostringstream os;
      os << "blakemore(gamma=" << gamma_ << ")";
      return os.str();
    }
  }
  return "unknown";
}

namespace statistics {
namespace {

void require_finite(double z, const char* op) {
  if (!std::isfinite(z)) throw DomainError(std::string(op) + ": non-finite argument");
}

void require_in_range(const StatisticsKind& kind, double u) {
  if (!std::isfinite(u)) throw RangeError("statistics inverse: non-finite density", "upper");
  if (!(u > 0.0)) throw RangeError("statistics inverse: density must be > 0", "lower");
  if (kind.bounded()) {
    const double top = kind.upper_limit();
    if (u <= kRangeGuard * top)
      throw RangeError("statistics inverse: density within guard of lower limit 0", "lower");
    if (u >= top * (1.0 - kRangeGuard))
      throw RangeError("statistics inverse: density within guard of upper limit 1/gamma", "upper");
  }
}

// Nilsson's approximation to F_{1/2}^{-1}; relative error ~5e-3.
double fermi_dirac_guess(double u) {
  const double nu = std::pow(0.75 * std::sqrt(std::numbers::pi) * u, 2.0 / 3.0);
  const double denom = 1.0 - u * u;
  const double log_part = std::abs(denom) < 1e-8 ? -0.5 : std::log(u) / denom;
  const double s = 0.24 + 1.08 * nu;
  return log_part + nu / (1.0 + 1.0 / (s * s));
}

struct ValueSlope {
  double value;
  double slope;
};

ValueSlope value_and_slope(const StatisticsKind& kind, double z) {
  if (kind.family() == StatisticsFamily::FermiDiracHalf) {
    const auto p = fermi_dirac::half_with_slope(z);
    return {p.value, p.slope};
  }
  return {eval(kind, z), deriv(kind, z)};
}

}  // namespace

double eval(const StatisticsKind& kind, double z) {
  require_finite(z, "eval");
  switch (kind.family()) {
    case StatisticsFamily::Boltzmann: return std::exp(z);
    case StatisticsFamily::FermiDiracHalf: return fermi_dirac::integral(fermi_dirac::Order::Half, z);
    case StatisticsFamily::Blakemore: {
      const double g = kind.gamma();
      if (z < 0.0) {
        const double x = std::exp(z);
        return x / (1.0 + g * x);
      }
      return 1.0 / (std::exp(-z) + g);
    }
  }
  return 0.0;
}

double deriv(const StatisticsKind& kind, double z) {
  require_finite(z, "deriv");
  switch (kind.family()) {
    case StatisticsFamily::Boltzmann: return std::exp(z);
    case StatisticsFamily::FermiDiracHalf:
      return fermi_dirac::integral(fermi_dirac::Order::MinusHalf, z);
    case StatisticsFamily::Blakemore: {
      const double g = kind.gamma();
      if (z < 0.0) {
        const double x = std::exp(z);
        const double d = 1.0 + g * x;
        return x / (d * d);
      }
      const double e = std::exp(-z);
      const double d = e + g;
      return e / (d * d);
    }
  }
  return 0.0;
}

double second_deriv(const StatisticsKind& kind, double z) {
  require_finite(z, "second_deriv");
  switch (kind.family()) {
    case StatisticsFamily::Boltzmann: return std::exp(z);
    case StatisticsFamily::FermiDiracHalf: {
      constexpr double h = 1e-4;
      return (deriv(kind, z + h) - deriv(kind, z - h)) / (2.0 * h);
    }
    case StatisticsFamily::Blakemore: {
      const double g = kind.gamma();
      const double d1 = deriv(kind, z);
      if (z < 0.0) {
        const double x = std::exp(z);
        return d1 * (1.0 - g * x) / (1.0 + g * x);
      }
      const double e = std::exp(-z);
      return d1 * (e - g) / (e + g);
    }
  }
  return 0.0;
}

double antiderivative(const StatisticsKind& kind, double z) {
  require_finite(z, "antiderivative");
  switch (kind.family()) {
    case StatisticsFamily::Boltzmann: return std::exp(z);
    case StatisticsFamily::FermiDiracHalf:
      return fermi_dirac::integral(fermi_dirac::Order::ThreeHalves, z);
    case StatisticsFamily::Blakemore: {
      // (1/g) ln(1 + g e^z)
      const double g = kind.gamma();
      if (z < 0.0) return std::log1p(g * std::exp(z)) / g;
      return (z + std::log(g) + std::log1p(std::exp(-z) / g)) / g;
    }
  }
  return 0.0;
}

double inverse(const StatisticsKind& kind, double u) {
  require_in_range(kind, u);
  switch (kind.family()) {
    case StatisticsFamily::Boltzmann: return std::log(u);
    case StatisticsFamily::Blakemore: return std::log(u) - std::log1p(-kind.gamma() * u);
    case StatisticsFamily::FermiDiracHalf: return inverse_numeric(kind, u);
  }
  return 0.0;
}

double inverse_numeric(const StatisticsKind& kind, double u) {
  require_in_range(kind, u);
  const double log_u = std::log(u);
  // F(z) <= e^z for every family, so the root lies at or above ln u. ln F is
  // concave and increasing, so Newton on g = ln F - ln u overshoots to the
  // right at most once and then decreases monotonically to the root.
  const double lo = log_u;
  double z = kind.family() == StatisticsFamily::FermiDiracHalf ? fermi_dirac_guess(u) : log_u;
  if (kind.bounded()) z = log_u - std::log1p(-0.5 * kind.gamma() * u);
  z = std::max(z, lo);

  for (int iter = 0; iter < 100; ++iter) {
    const ValueSlope f = value_and_slope(kind, z);
    const double g = std::log(f.value) - log_u;
    if (g == 0.0) return z;
    double next = z - g * f.value / f.slope;
    if (!(next > lo)) next = 0.5 * (lo + z);
    const double moved = std::abs(next - z);
    z = next;
    if (moved <= 4e-16 * std::max(1.0, std::abs(z))) return z;
  }
  return z;
}

}  // namespace statistics

ShiftedStatistics::ShiftedStatistics(StatisticsKind k, double zeta_shift, double density_of_states)
    : kind(k), zeta(zeta_shift), n_states(density_of_states) {
  if (!(n_states > 0.0) || !std::isfinite(n_states))
    throw ValidationError("density_of_states", "N_i must be positive and finite");
  if (!std::isfinite(zeta)) throw ValidationError("zeta", "zeta_i must be finite");
}

double carrier_density(const ShiftedStatistics& s, double v) {
  return s.n_states * statistics::eval(s.kind, v + s.zeta);
}

double chemical_potential(const ShiftedStatistics& s, double u) {
  return statistics::inverse(s.kind, u / s.n_states) - s.zeta;
}

double diffusion_enhancement(const ShiftedStatistics& s, double u) {
  return density_point(s, u).enhancement;
}

DensityPoint density_point(const ShiftedStatistics& s, double u) {
  const double w = u / s.n_states;
  switch (s.kind.family()) {
    case StatisticsFamily::Boltzmann: {
      statistics::inverse(s.kind, w);  // range check
      return {std::log(w), 0.0, 1.0, 0.0};
    }
    case StatisticsFamily::Blakemore: {
      const double eta = statistics::inverse(s.kind, w);
      const double g = s.kind.gamma();
      const double one_minus = 1.0 - g * w;
      return {eta, std::log1p(-g * w), 1.0 / one_minus, -g / (s.n_states * one_minus)};
    }
    case StatisticsFamily::FermiDiracHalf: {
      const double eta = statistics::inverse(s.kind, w);
      const double slope = fermi_dirac::integral(fermi_dirac::Order::MinusHalf, eta);
      const double enhancement = w / slope;
      return {eta, std::log(w) - eta, enhancement, (1.0 - enhancement) / u};
    }
  }
  return {0.0, 0.0, 1.0, 0.0};
}

bool AxiomReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
}

AxiomReport verify_axioms(const StatisticsKind& kind, std::span<const double> grid) {
  using namespace statistics;
  AxiomReport report;
  report.kind = kind;
  constexpr double slack = 1e-12;
  constexpr double fd_step = 1e-5;

  auto add = [&](std::string axiom, double z, bool pass, double value) {
    report.checks.push_back({std::move(axiom), z, pass, value});
  };

  std::vector<double> values;
  values.reserve(grid.size());
  for (double z : grid) {
    try {
      values.push_back(eval(kind, z));
    } catch (const std::exception&) {
      values.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double z = grid[k];
    if (!std::isfinite(z)) {
      add("finite grid point", z, false, z);
      continue;
    }
    const double f = values[k];
    const double d = deriv(kind, z);
    if (k + 1 < grid.size() && grid[k + 1] > z)
      add("monotone", z, values[k + 1] > f, values[k + 1] - f);

    const double fd = (eval(kind, z + fd_step) - eval(kind, z - fd_step)) / (2.0 * fd_step);
    const double c1_defect = std::abs(d - fd) / std::max(1.0, d);

    if (!kind.bounded()) {
      add("F12(i) C1 derivative consistency", z, c1_defect <= 1e-6, c1_defect);
      if (z >= 0.0) {
        const double ratio = z / (1.0 + f);
        report.empirical_c = std::max(report.empirical_c, ratio);
        add("F12(ii) z <= c(1+F(z))", z, std::isfinite(ratio), ratio);
      }
      const double ez = std::exp(z);
      const bool ok = d > 0.0 && d <= f * (1.0 + slack) && f <= ez * (1.0 + slack);
      add("F12(iii) 0 < F' <= F <= e^z", z, ok, f / ez);
    } else {
      const double d2 = second_deriv(kind, z);
      const double d2_fd = (deriv(kind, z + fd_step) - deriv(kind, z - fd_step)) / (2.0 * fd_step);
      const double c2_defect = std::max(c1_defect, std::abs(d2 - d2_fd) / std::max(1.0, std::abs(d2)));
      add("eigf(i) C2 derivative consistency", z, c2_defect <= 1e-6, c2_defect);
      if (z >= 0.0) {
        // Tail witness for lim F = 1: |1 - F(z)| <= e^{-z}.
        const double tail = std::abs(1.0 - f);
        // 1 - f carries an absolute rounding error of a few ulp of 1
        add("eigf(i) lim F = 1", z, tail <= std::exp(-z) * (1.0 + slack) + 4.0 * std::numeric_limits<double>::epsilon(), tail);
      }
      const double ez = std::exp(z);
      add("eigf(ii) F' < F < e^z", z, d > 0.0 && d < f && f < ez, f / ez);
      if (z > 0.0) {
        const double ratio = std::abs(d2) / d;
        add("eigf(iii) F'' < 0, |F''|/F' < 1", z, d2 < 0.0 && ratio < 1.0, ratio);
      }
      if (z >= 0.0) {
        const double inv = 1.0 / (ez * d);
        report.empirical_c = std::max(report.empirical_c, inv);
        add("eigf(iv) 1 < (e^z F')^{-1} < c", z, inv > 1.0 && std::isfinite(inv), inv);
      }
    }
  }
  return report;
}

}  // namespace perosim
