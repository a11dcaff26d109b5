#include "perosim/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

namespace perosim {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse LU that re-runs the symbolic analysis only when the pattern changes.
class LinearSolver {
 public:
  bool solve(SpMat& J, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
    J.makeCompressed();
    const bool same = analyzed_ && J.rows() == rows_ &&
                      std::equal(outer_.begin(), outer_.end(), J.outerIndexPtr()) &&
                      static_cast<Eigen::Index>(inner_.size()) == J.nonZeros() &&
                      std::equal(inner_.begin(), inner_.end(), J.innerIndexPtr());
    if (!same) {
      lu_.analyzePattern(J);
      rows_ = J.rows();
      outer_.assign(J.outerIndexPtr(), J.outerIndexPtr() + J.outerSize() + 1);
      inner_.assign(J.innerIndexPtr(), J.innerIndexPtr() + J.nonZeros());
      analyzed_ = true;
    }
    lu_.factorize(J);
    if (lu_.info() != Eigen::Success) return false;
    x = lu_.solve(rhs);
    return lu_.info() == Eigen::Success && x.allFinite();
  }

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  Eigen::Index rows_ = 0;
  std::vector<int> outer_, inner_;
};

struct Limits {
  std::vector<double> upper;  ///< per unknown; +inf for psi and unbounded species
  std::vector<char> density;  ///< 1 for density unknowns
};

Limits unknown_limits(const Device& d, const Layout& L) {
  Limits lim;
  lim.upper.assign(L.size(), kInf);
  lim.density.assign(L.size(), 0);
  for (int i = 0; i < L.species_count(); ++i) {
    const double u = d.species()[i].statistics.density_limit();
    for (int l = 0; l < L.block_size(i); ++l) {
      lim.upper[L.species(i, l)] = u;
      lim.density[L.species(i, l)] = 1;
    }
  }
  return lim;
}

// Largest step fraction keeping every density inside safeguard * distance
// to its range limits.
double safeguard_fraction(const Eigen::VectorXd& x, const Eigen::VectorXd& dx, const Limits& lim, double frac) {
  double lam = 1.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!lim.density[k]) continue;
    if (dx[k] < 0) lam = std::min(lam, frac * x[k] / -dx[k]);
    if (dx[k] > 0 && std::isfinite(lim.upper[k])) lam = std::min(lam, frac * (lim.upper[k] - x[k]) / dx[k]);
  }
  return lam;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool residual_at(const Device& d, const Layout& L, const Eigen::VectorXd& x, double t, const State& old, double dt,
                 const AssemblyOptions& opt, double& norm) {
  try {
    AssemblyOptions o = opt;
    o.jacobian = false;
    const Residual r = assemble_system(d, L.unpack(x, t), old, dt, o);
    norm = r.r.norm();
    return std::isfinite(norm);
  } catch (const std::range_error&) {
    return false;
  } catch (const std::domain_error&) {
    return false;
  }
}

void apply_noise(const Device& d, const Layout& L, Eigen::VectorXd& x, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < L.species_count(); ++i) {
    const double lim = d.species()[i].statistics.density_limit();
    for (int l = 0; l < L.block_size(i); ++l) {
      double& u = x[L.species(i, l)];
      double v = u * (1.0 + amplitude * U(rng));
      if (std::isfinite(lim)) v = std::min(v, u + 0.5 * (lim - u));
      u = v;
    }
  }
}

class Newton {
 public:
  Newton(const Device& d, const SolverConfig& cfg) : d_(d), cfg_(cfg), L_(d), lim_(unknown_limits(d, L_)) {}

  State step(const State& old, double dt, const State* guess, std::uint64_t noise_seed, NewtonStats* stats) {
    const double t = std::isinf(dt) ? old.t : old.t + dt;
    AssemblyOptions opt;
    opt.scheme = cfg_.scheme;
    opt.stationary = std::isinf(dt);
    Eigen::VectorXd x = L_.pack(guess ? *guess : old);
    if (cfg_.guess_noise > 0) apply_noise(d_, L_, x, cfg_.guess_noise, noise_seed);
    if (cfg_.gummel) x = gummel(x, t, old, dt, opt);
    return newton(x, t, old, dt, opt, stats);
  }

 private:
  State newton(Eigen::VectorXd x, double t, const State& old, double dt, const AssemblyOptions& opt,
               NewtonStats* stats) {
    NewtonStats local;
    NewtonStats& st = stats ? *stats : local;
    st = {};
    double last_step = kInf;
    for (int it = 0;; ++it) {
      Residual res = assemble_system(d_, L_.unpack(x, t), old, dt, opt);
      const double rn = res.r.norm();
      if (!std::isfinite(rn)) throw NewtonDiverged("non-finite residual");
      st.history.push_back(rn);
      st.iterations = it;
      st.residual = rn;
      if (it > 0 && rn <= cfg_.newton_tol && last_step <= cfg_.step_tol) break;
      if (it >= cfg_.max_newton_iters)
        throw NewtonDiverged("no convergence in " + std::to_string(cfg_.max_newton_iters) + " Newton iterations");
      Eigen::VectorXd dx;
      if (!lu_.solve(res.J, -res.r, dx)) throw NewtonDiverged("singular Jacobian");

      double lam = safeguard_fraction(x, dx, lim_, cfg_.density_safeguard);
      if (cfg_.damped_iterations == 0 || it < cfg_.damped_iterations) lam = std::min(lam, cfg_.damping_cap);
      bool accepted = false;
      for (int h = 0; h <= cfg_.max_halvings; ++h, lam *= 0.5) {
        const Eigen::VectorXd xt = x + lam * dx;
        double rt = 0;
        if (residual_at(d_, L_, xt, t, old, dt, opt, rt) && rt < rn) {
          last_step = lam * inf_norm(dx);
          x = xt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (rn <= cfg_.newton_tol) break;  // at the round-off floor
        throw NewtonDiverged("line search exhausted at residual " + std::to_string(rn));
      }
    }
    State s = L_.unpack(x, t);
    check_bounds(d_, s);
    return s;
  }

  // Nonlinear Poisson for frozen quasi Fermi potentials, then one block
  // Newton solve per species in the configured order; repeated until the
  // update is below gummel_tol.
  Eigen::VectorXd gummel(Eigen::VectorXd x, double t, const State& old, double dt, const AssemblyOptions& opt) {
    const int nn = d_.mesh().node_count();
    std::vector<int> order;
    if (cfg_.gummel_order.empty()) {
      order.resize(L_.species_count());
      std::iota(order.begin(), order.end(), 0);
    } else {
      for (const auto& id : cfg_.gummel_order) {
        const int i = d_.species_index(id);
        if (i < 0) throw ValidationError("/solver/gummel_order", "unknown species '" + id + "'");
        order.push_back(i);
      }
    }
    for (int sweep = 0; sweep < cfg_.gummel_max_iters; ++sweep) {
      const Eigen::VectorXd before = x;
      poisson_frozen_potentials(x, t, old, dt, opt, nn);
      for (int i : order) species_block(i, x, t, old, dt, opt);
      if (inf_norm(x - before) <= cfg_.gummel_tol) break;
    }
    return x;
  }

  void poisson_frozen_potentials(Eigen::VectorXd& x, double t, const State& old, double dt,
                                 const AssemblyOptions& opt, int nn) {
    State s = L_.unpack(x, t);
    std::vector<std::vector<double>> phi(L_.species_count());
    for (int i = 0; i < L_.species_count(); ++i) phi[i] = quasi_fermi(d_, i, s);
    auto densities = [&](State& st) {
      for (int i = 0; i < L_.species_count(); ++i) {
        const auto& R = d_.species_region(i);
        const auto& sp = d_.species()[i];
        for (int l = 0; l < R.size(); ++l) {
          if (R.contact[l] >= 0) continue;
          st.u[i][l] = carrier_density(sp.statistics, sp.charge * (phi[i][l] - st.psi[R.nodes[l]]));
        }
      }
    };
    for (int it = 0; it < 30; ++it) {
      AssemblyOptions o = opt;
      Residual res = assemble_system(d_, s, old, dt, o);
      Eigen::VectorXd r = res.r.head(nn);
      // reduced Jacobian J_pp + sum_i J_pu diag(du/dpsi), du/dpsi = -z u / g
      SpMat Jp = res.J.topLeftCorner(nn, nn);
      std::vector<double> diag(nn, 0.0);
      for (int i = 0; i < L_.species_count(); ++i) {
        const auto& R = d_.species_region(i);
        const auto& sp = d_.species()[i];
        for (int l = 0; l < R.size(); ++l) {
          if (R.contact[l] >= 0 || d_.node_contact()[R.nodes[l]] >= 0) continue;
          const double g = diffusion_enhancement(sp.statistics, s.u[i][l]);
          const double dudpsi = -sp.charge * s.u[i][l] / g;
          diag[R.nodes[l]] += -sp.charge * R.volume[l] * dudpsi;
        }
      }
      for (int k = 0; k < nn; ++k) Jp.coeffRef(k, k) += diag[k];
      Eigen::VectorXd dpsi;
      if (!plu_.solve(Jp, -r, dpsi)) throw NewtonDiverged("singular Gummel Poisson matrix");
      // limit potential updates to keep exponentials tame
      const double m = inf_norm(dpsi);
      if (m > 1.0) dpsi *= 1.0 / m;
      for (int k = 0; k < nn; ++k) s.psi[k] += dpsi[k];
      densities(s);
      if (m <= cfg_.gummel_tol) break;
    }
    x = L_.pack(s);
  }

  void species_block(int i, Eigen::VectorXd& x, double t, const State& old, double dt, const AssemblyOptions& opt) {
    const int off = L_.offset(i), n = L_.block_size(i);
    if (n == 0) return;
    for (int it = 0; it < 30; ++it) {
      Residual res = assemble_system(d_, L_.unpack(x, t), old, dt, opt);
      const Eigen::VectorXd r = res.r.segment(off, n);
      SpMat Jb = res.J.block(off, off, n, n);
      Eigen::VectorXd du;
      if (!blu_.solve(Jb, -r, du)) throw NewtonDiverged("singular Gummel species block");
      Eigen::VectorXd full = Eigen::VectorXd::Zero(x.size());
      full.segment(off, n) = du;
      const double lam = safeguard_fraction(x, full, lim_, cfg_.density_safeguard);
      x.segment(off, n) += lam * du;
      if (lam * inf_norm(du) <= cfg_.gummel_tol) break;
    }
  }

  const Device& d_;
  const SolverConfig& cfg_;
  Layout L_;
  Limits lim_;
  LinearSolver lu_, plu_, blu_;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<double> masses(const Device& d, const State& s) {
  std::vector<double> m(d.species().size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = species_mass(d, s, static_cast<int>(i));
  return m;
}

class Stepper {
 public:
  Stepper(const Device& d, const SolverConfig& cfg) : d_(d), cfg_(cfg), newton_(d, cfg) {}

  State step(const State& old, double dt, NewtonStats* stats) {
    return newton_.step(old, dt, nullptr, mix(cfg_.guess_seed, counter_++), stats);
  }

  // Advance exactly to `target`, halving on failure.
  State advance_to(const State& cur, double target, NewtonStats& stats, int& rejected, int depth = 0) {
    const double dt = target - cur.t;
    try {
      return step(cur, dt, &stats);
    } catch (const StepError&) {
    } catch (const std::range_error&) {
    } catch (const std::domain_error&) {
    }
    ++rejected;
    if (dt * 0.5 < cfg_.dt_min || depth > 40) throw StepFailure("step below dt_min");
    const State mid = advance_to(cur, cur.t + 0.5 * dt, stats, rejected, depth + 1);
    return advance_to(mid, target, stats, rejected, depth + 1);
  }

 private:
  const Device& d_;
  const SolverConfig& cfg_;
  Newton newton_;
  std::uint64_t counter_ = 0;
};

}  // namespace

void SolverConfig::validate() const {
  auto positive = [](double v, const char* f) {
    if (!(v > 0) || !std::isfinite(v)) throw ValidationError(f, "must be positive");
  };
  positive(newton_tol, "/solver/newton_tol");
  positive(step_tol, "/solver/step_tol");
  positive(gummel_tol, "/solver/gummel_tol");
  positive(dt_min, "/solver/dt_min");
  positive(dt_initial, "/solver/dt_initial");
  positive(dt_max, "/solver/dt_max");
  if (max_newton_iters < 1) throw ValidationError("/solver/max_newton_iters", "must be >= 1");
  if (max_halvings < 0) throw ValidationError("/solver/max_halvings", "must be >= 0");
  if (!(density_safeguard > 0 && density_safeguard < 1))
    throw ValidationError("/solver/density_safeguard", "must lie in (0, 1)");
  if (!(damping_cap > 0 && damping_cap <= 1)) throw ValidationError("/solver/damping_cap", "must lie in (0, 1]");
  if (!(dt_min <= dt_initial && dt_initial <= dt_max))
    throw ValidationError("/solver/dt_initial", "need dt_min <= dt_initial <= dt_max");
  if (!(dt_grow >= 1)) throw ValidationError("/solver/dt_grow", "must be >= 1");
  if (!(dt_shrink > 0 && dt_shrink < 1)) throw ValidationError("/solver/dt_shrink", "must lie in (0, 1)");
  if (grow_after < 1) throw ValidationError("/solver/grow_after", "must be >= 1");
  if (!(guess_noise >= 0 && guess_noise < 1)) throw ValidationError("/solver/guess_noise", "must lie in [0, 1)");
}

double state_distance(const State& a, const State& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.psi.size(); ++k) m = std::max(m, std::abs(a.psi[k] - b.psi[k]));
  for (std::size_t i = 0; i < a.u.size(); ++i)
    for (std::size_t l = 0; l < a.u[i].size(); ++l) m = std::max(m, std::abs(a.u[i][l] - b.u[i][l]));
  return m;
}

State solve_step(const Device& d, const State& old, double dt, const SolverConfig& config, NewtonStats* stats,
                 const State* guess) {
  check_dimensions(d, old);
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  Newton n(d, config);
  return n.step(old, dt, guess, mix(config.guess_seed, 0), stats);
}

Trajectory run_transient(const Device& d, double T, const SolverConfig& cfg, const std::optional<State>& initial,
                         const std::vector<double>* grid) {
  if (!(T > 0)) throw std::invalid_argument("final time must be positive");
  cfg.validate();
  State cur = initial ? *initial : initial_state(d);
  check_dimensions(d, cur);
  Stepper stepper(d, cfg);
  const std::vector<double> m0 = masses(d, cur);

  Trajectory tr;
  auto record = [&](const State& s, const State* old, double dt, const NewtonStats& st) {
    const DiagnosticsReport* prev = tr.reports.empty() ? nullptr : &tr.reports.back();
    tr.reports.push_back(make_report(d, s, old, prev, m0, dt, st.residual, st.iterations, cfg.scheme,
                                     cfg.tolerances));
    tr.times.push_back(s.t);
    tr.dts.push_back(dt);
    if (cfg.keep_states || tr.states.empty()) {
      tr.states.push_back(s);
    } else {
      if (tr.states.size() == 2) tr.states.back() = s;
      else tr.states.push_back(s);
    }
  };
  record(cur, nullptr, 0.0, NewtonStats{});

  auto abort = [&](const std::string& why, const State& last) {
    tr.aborted = true;
    tr.abort_reason = why;
    throw TransientAbort(why, tr, last);
  };

  const double t_end_tol = 1e-12 * std::max(1.0, T);
  if (grid || !cfg.adaptive) {
    std::vector<double> targets;
    if (grid) {
      for (double g : *grid)
        if (g > cur.t + t_end_tol) targets.push_back(g);
    } else {
      for (int k = 1;; ++k) {
        const double tk = cur.t + k * cfg.dt_initial;
        if (tk >= T - t_end_tol) {
          targets.push_back(T);
          break;
        }
        targets.push_back(tk);
      }
    }
    for (double target : targets) {
      NewtonStats st;
      State next;
      try {
        next = stepper.advance_to(cur, target, st, tr.rejected_steps);
      } catch (const StepFailure& e) {
        abort(std::string("time step fell below dt_min at t = ") + std::to_string(cur.t), cur);
      }
      const double dt = target - cur.t;
      const State old = cur;
      cur = std::move(next);
      cur.t = target;
      record(cur, &old, dt, st);
    }
    return tr;
  }

  double dt = cfg.dt_initial;
  int streak = 0;
  while (cur.t < T - t_end_tol) {
    double h = std::min(dt, T - cur.t);
    // avoid a sliver as the final step
    if (T - cur.t - h < 1e-3 * h) h = T - cur.t;
    // representable increment, so a replay of the time grid sees the same dt
    h = (cur.t + h) - cur.t;
    NewtonStats st;
    try {
      State next = stepper.step(cur, h, &st);
      if (T - next.t < t_end_tol) next.t = T;
      const State old = cur;
      cur = std::move(next);
      record(cur, &old, h, st);
      if (++streak >= cfg.grow_after) {
        dt = std::min(dt * cfg.dt_grow, cfg.dt_max);
        streak = 0;
      }
    } catch (const StepError&) {
      ++tr.rejected_steps;
      streak = 0;
      dt = h * cfg.dt_shrink;
      if (dt < cfg.dt_min) abort("time step fell below dt_min at t = " + std::to_string(cur.t), cur);
    } catch (const std::runtime_error&) {
      ++tr.rejected_steps;
      streak = 0;
      dt = h * cfg.dt_shrink;
      if (dt < cfg.dt_min) abort("time step fell below dt_min at t = " + std::to_string(cur.t), cur);
    }
  }
  return tr;
}

State solve_stationary(const Device& device, const SolverConfig& cfg, double bias, const std::optional<State>& start) {
  cfg.validate();
  const Device d = device.with_bias(bias);
  State ref = start ? *start : initial_state(d);
  check_dimensions(d, ref);
  // impose the Dirichlet data of this bias on the reference
  {
    const DirichletData dd = dirichlet_data(d, ref.t);
    for (int k = 0; k < d.mesh().node_count(); ++k)
      if (d.node_contact()[k] >= 0) ref.psi[k] = dd.psi[k];
    for (std::size_t i = 0; i < ref.u.size(); ++i) {
      const auto& R = d.species_region(static_cast<int>(i));
      for (int l = 0; l < R.size(); ++l)
        if (R.contact[l] >= 0) ref.u[i][l] = dd.u[i][l];
    }
  }
  SolverConfig c = cfg;
  c.guess_noise = 0;
  Newton newton(d, c);
  auto stationary = [&](const State& guess) { return newton.step(ref, kInf, &guess, 0, nullptr); };
  try {
    return stationary(ref);
  } catch (const StepError&) {
  } catch (const std::range_error&) {
  }

  // pseudo-transient continuation
  State cur = ref;
  double dt = cfg.dt_initial;
  for (int it = 0; it < 400; ++it) {
    try {
      State next = newton.step(cur, dt, nullptr, 0, nullptr);
      next.t = ref.t;
      cur = std::move(next);
      dt *= 2.0;
      if (dt > 1e3 || it % 4 == 3) {
        try {
          return stationary(cur);
        } catch (const StepError&) {
        } catch (const std::range_error&) {
        }
      }
    } catch (const StepError&) {
      dt *= 0.25;
    } catch (const std::range_error&) {
      dt *= 0.25;
    }
    if (dt < cfg.dt_min) break;
    dt = std::min(dt, 1e12);
  }
  throw ContinuationFailed("pseudo-transient continuation did not reach a stationary state at bias " +
                           std::to_string(bias));
}

std::vector<SweepPoint> bias_sweep(const Device& d, const SolverConfig& cfg, const std::vector<double>& biases) {
  std::vector<SweepPoint> out;
  std::optional<State> prev;
  double prev_bias = 0;
  for (double b : biases) {
    State s;
    try {
      s = solve_stationary(d, cfg, b, prev);
    } catch (const ContinuationFailed&) {
      if (!prev) throw;
      // bisect the bias increment
      State mid = *prev;
      const int pieces = 8;
      for (int k = 1; k <= pieces; ++k) mid = solve_stationary(d, cfg, prev_bias + (b - prev_bias) * k / pieces, mid);
      s = mid;
    }
    const Device db = d.with_bias(b);
    SweepPoint p;
    p.bias = b;
    p.currents = terminal_currents(db, s, s, kInf, cfg.scheme);
    p.state = s;
    out.push_back(std::move(p));
    prev = s;
    prev_bias = b;
  }
  return out;
}

ProbeResult uniqueness_probe(const Device& d, double T, const SolverConfig& cfg, int n, std::uint64_t seed,
                             bool vary_paths) {
  if (n < 2) throw std::invalid_argument("uniqueness probe needs at least 2 runs");
  ProbeResult result;
  result.threshold = 10.0 * cfg.newton_tol;

  std::vector<std::string> ids;
  for (const auto& s : d.species()) ids.push_back(s.id);

  std::vector<SolverConfig> configs(n, cfg);
  std::vector<std::string> descr(n, "baseline");
  for (int k = 0; k < n; ++k) {
    SolverConfig& c = configs[k];
    c.keep_states = true;
    if (!vary_paths) {
      c.guess_noise = cfg.guess_noise;
      c.guess_seed = seed;
      continue;
    }
    c.guess_noise = 0.1;
    c.guess_seed = mix(seed, static_cast<std::uint64_t>(k));
    switch (k % 3) {
      case 0:
        descr[k] = "newton, 10% guess noise";
        break;
      case 1:
        c.damping_cap = 0.5;
        c.damped_iterations = 4;
        descr[k] = "newton, damping capped at 1/2 for 4 iterations, 10% guess noise";
        break;
      case 2: {
        c.gummel = true;
        std::vector<std::string> order = ids;
        std::mt19937_64 rng(c.guess_seed);
        std::shuffle(order.begin(), order.end(), rng);
        c.gummel_order = order;
        std::string o;
        for (const auto& id : order) o += (o.empty() ? "" : ",") + id;
        descr[k] = "gummel order " + o + " then newton, 10% guess noise";
        break;
      }
    }
  }

  std::vector<Trajectory> runs(n);
  result.runs.resize(n);
  for (int k = 0; k < n; ++k) result.runs[k] = {k, descr[k], false, ""};

  auto guarded = [&](int k, const std::vector<double>* grid) {
    try {
      runs[k] = run_transient(d, T, configs[k], std::nullopt, grid);
    } catch (const std::exception& e) {
      result.runs[k].failed = true;
      result.runs[k].failure = e.what();
    }
  };
  guarded(0, nullptr);
  if (result.runs[0].failed) {
    result.failed = true;
    return result;
  }
  const std::vector<double> grid = runs[0].times;
  result.times = grid;
  std::vector<std::future<void>> jobs;
  for (int k = 1; k < n; ++k) jobs.push_back(std::async(std::launch::async, guarded, k, &grid));
  for (auto& j : jobs) j.get();

  for (int k = 0; k < n; ++k)
    if (result.runs[k].failed) result.failed = true;
  if (result.failed) return result;

  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (runs[a].states.size() != runs[b].states.size()) {
        result.failed = true;
        result.runs[b].failure = "time grid mismatch";
        continue;
      }
      for (std::size_t j = 0; j < runs[a].states.size(); ++j)
        result.max_discrepancy = std::max(result.max_discrepancy, state_distance(runs[a].states[j], runs[b].states[j]));
    }
  result.reference = std::move(runs[0]);
  return result;
}

}  // namespace perosim
