#include "perosim/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "perosim/errors.hpp"

namespace perosim {
namespace {

constexpr int kCheckpointVersion = 1;

std::string timestamp_line() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string("# written ") + buf + "\n";
}

std::string preamble(const OutputHeader& h, const std::string& doc) {
  std::string out = h.timestamp ? timestamp_line() : std::string("# written -\n");
  out += "# scenario=" + h.scenario + " seed=" + std::to_string(h.seed) + " " + doc + "\n";
  return out;
}

void join(std::ostringstream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

std::string qname(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "grad_q%g", q);
  return buf;
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string diagnostics_csv(const std::vector<DiagnosticsReport>& reports, const OutputHeader& header) {
  std::ostringstream os;
  os << preamble(header, "one row per accepted step");
  std::vector<std::string> cols{"t",           "dt",           "free_energy", "residual",     "newton_iterations",
                                "max_phi_gap", "energy_increase", "mass_drift", "bounds_breach"};
  std::vector<std::string> ids;
  std::vector<double> qs;
  if (!reports.empty()) {
    for (const auto& s : reports.front().species) ids.push_back(s.id);
    for (const auto& [q, v] : reports.front().gradient_norms) qs.push_back(q);
  }
  for (const auto& id : ids)
    for (const char* f : {"_mass", "_min", "_max", "_margin", "_balance"}) cols.push_back(id + f);
  for (double q : qs) cols.push_back(qname(q));
  join(os, cols);

  for (const auto& r : reports) {
    std::vector<std::string> row{fmt17(r.t),           fmt17(r.dt),         fmt17(r.free_energy),
                                 fmt17(r.residual),    std::to_string(r.newton_iterations),
                                 fmt17(r.max_phi_gap), r.energy_increase ? "1" : "0",
                                 r.mass_drift ? "1" : "0", r.bounds_breach ? "1" : "0"};
    for (const auto& s : r.species)
      for (double v : {s.mass, s.min, s.max, s.margin, s.balance_defect}) row.push_back(fmt17(v));
    for (double q : qs) {
      const auto it = r.gradient_norms.find(q);
      row.push_back(it == r.gradient_norms.end() ? "" : fmt17(it->second));
    }
    join(os, row);
  }
  return os.str();
}

std::string study_csv(const std::vector<std::pair<std::string, ConvergenceResult>>& studies,
                      const OutputHeader& header) {
  std::ostringstream os;
  os << preamble(header, "observed convergence orders between consecutive levels");
  join(os, {"study", "level", "h", "dt", "error", "order"});
  for (const auto& [name, res] : studies)
    for (const auto& r : res.rows)
      join(os, {name, std::to_string(r.level), fmt17(r.h), fmt17(r.dt), fmt17(r.error),
                r.order_defined ? fmt17(r.order) : std::string()});
  return os.str();
}

std::string axioms_csv(const std::vector<AxiomReport>& reports, const OutputHeader& header) {
  std::ostringstream os;
  os << preamble(header, "statistics axiom checks on a z grid");
  join(os, {"statistics", "axiom", "z", "pass", "value"});
  for (const auto& rep : reports)
    for (const auto& c : rep.checks)
      join(os, {rep.kind.name(), "\"" + c.axiom + "\"", fmt17(c.z), c.pass ? "1" : "0", fmt17(c.value)});
  return os.str();
}

std::string iv_csv(const Device& d, const std::vector<SweepPoint>& sweep, const OutputHeader& header) {
  std::ostringstream os;
  os << preamble(header, "terminal currents of the stationary states");
  std::vector<std::string> cols{"bias"};
  for (const auto& c : d.contacts()) cols.push_back("current_" + c.name);
  join(os, cols);
  for (const auto& p : sweep) {
    std::vector<std::string> row{fmt17(p.bias)};
    for (double j : p.currents) row.push_back(fmt17(j));
    join(os, row);
  }
  return os.str();
}

std::vector<std::string> profile_fields(const Device& d) {
  std::vector<std::string> f{"x"};
  if (d.dimension() == 2) f.push_back("y");
  f.push_back("psi");
  for (const auto& s : d.species()) f.push_back("phi_" + s.id);
  for (const auto& s : d.species()) f.push_back("u_" + s.id);
  f.push_back("G");
  f.push_back("R");
  return f;
}

std::string emit_profile(const Device& d, const State& s, const std::vector<std::string>& fields,
                         const OutputHeader& header) {
  check_dimensions(d, s);
  const int N = d.mesh().node_count();
  const int ns = static_cast<int>(d.species().size());

  // per species: node -> local index
  std::vector<std::vector<int>> local(ns, std::vector<int>(N, -1));
  std::vector<std::vector<double>> phi(ns);
  for (int i = 0; i < ns; ++i) {
    const auto& R = d.species_region(i);
    for (int l = 0; l < R.size(); ++l) local[i][R.nodes[l]] = l;
    phi[i] = quasi_fermi(d, i, s);
  }
  const int in = d.electron(), ip = d.hole();

  using Column = std::function<std::string(int)>;
  std::vector<Column> cols;
  for (const auto& name : fields) {
    if (name == "x") {
      cols.push_back([&](int k) { return fmt17(d.mesh().position(k)[0]); });
    } else if (name == "y" && d.dimension() == 2) {
      cols.push_back([&](int k) { return fmt17(d.mesh().position(k)[1]); });
    } else if (name == "psi") {
      cols.push_back([&](int k) { return fmt17(s.psi[k]); });
    } else if (name == "G") {
      cols.push_back([&](int k) { return fmt17(d.node_generation_point()[k]); });
    } else if (name == "R") {
      cols.push_back([&, in, ip](int k) {
        if (in < 0 || ip < 0) return fmt17(0.0);
        const int a = local[in][k], b = local[ip][k];
        if (a < 0 || b < 0) return std::string();
        return fmt17(recombination(d, s.u[in][a], s.u[ip][b]).R);
      });
    } else {
      bool found = false;
      for (int i = 0; i < ns && !found; ++i) {
        const std::string& id = d.species()[i].id;
        if (name == "u_" + id) {
          cols.push_back([&, i](int k) { return local[i][k] < 0 ? std::string() : fmt17(s.u[i][local[i][k]]); });
          found = true;
        } else if (name == "phi_" + id) {
          cols.push_back([&, i](int k) { return local[i][k] < 0 ? std::string() : fmt17(phi[i][local[i][k]]); });
          found = true;
        }
      }
      if (!found) throw ValidationError("fields", "unknown profile field '" + name + "'");
    }
  }

  std::ostringstream os;
  std::string doc = "nodal profile at t=" + fmt17(s.t);
  if (d.dimension() == 2)
    doc += "; nodes row-major, k = i + " + std::to_string(d.mesh().nx() + 1) + " j";
  os << preamble(header, doc);
  join(os, fields);
  for (int k = 0; k < N; ++k) {
    std::vector<std::string> row;
    row.reserve(cols.size());
    for (const auto& c : cols) row.push_back(c(k));
    join(os, row);
  }
  return os.str();
}

std::string checkpoint_text(const Device& d, const State& s) {
  check_dimensions(d, s);
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(d.hash()));
  os << "perosim-checkpoint " << kCheckpointVersion << '\n';
  os << "device " << hash << '\n';
  os << "t " << fmt17(s.t) << '\n';
  os << "psi " << s.psi.size() << '\n';
  for (double v : s.psi) os << fmt17(v) << '\n';
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    os << "species " << d.species()[i].id << ' ' << s.u[i].size() << '\n';
    for (double v : s.u[i]) os << fmt17(v) << '\n';
  }
  os << "end\n";
  return os.str();
}

State parse_checkpoint(const Device& d, const std::string& text) {
  std::istringstream in(text);
  auto fail = [](const std::string& msg) -> ValidationError { return ValidationError("checkpoint", msg); };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "perosim-checkpoint") throw fail("missing checkpoint header");
  if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));

  std::string hash;
  if (!(in >> word >> hash) || word != "device") throw fail("missing device hash");
  char expect[32];
  std::snprintf(expect, sizeof expect, "%016llx", static_cast<unsigned long long>(d.hash()));
  if (hash != expect) throw fail("device hash " + hash + " does not match " + expect);

  auto read_number = [&](double& v) {
    std::string tok;
    if (!(in >> tok)) throw fail("truncated file");
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw fail("bad number '" + tok + "'");
  };
  auto read_block = [&](std::vector<double>& out, std::size_t n) {
    out.resize(n);
    for (auto& v : out) read_number(v);
  };

  State s;
  if (!(in >> word) || word != "t") throw fail("missing time");
  read_number(s.t);
  std::size_t n = 0;
  if (!(in >> word >> n) || word != "psi") throw fail("missing psi block");
  read_block(s.psi, n);
  s.u.resize(d.species().size());
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    std::string id;
    if (!(in >> word >> id >> n) || word != "species") throw fail("missing species block");
    if (id != d.species()[i].id) throw fail("species '" + id + "' out of order");
    read_block(s.u[i], n);
  }
  if (!(in >> word) || word != "end") throw fail("missing end marker");
  try {
    check_dimensions(d, s);
  } catch (const DimensionError& e) {
    throw fail(e.what());
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw ValidationError(path.string(), "write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Device& d, const State& s) {
  write_text(path, checkpoint_text(d, s));
}

State load_checkpoint(const std::filesystem::path& path, const Device& d) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "cannot read checkpoint");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(d, ss.str());
}

}  // namespace perosim
