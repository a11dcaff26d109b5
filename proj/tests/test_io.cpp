#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "perosim/errors.hpp"
#include "perosim/io.hpp"
#include "perosim/solver.hpp"
#include "support.hpp"

using namespace perosim;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& row) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(row);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!row.empty() && row.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("checkpoints round-trip bit for bit") {
  const Device d = build_device(testing::pin_small(6, true));
  SolverConfig cfg;
  State s = solve_step(d, initial_state(d), 0.013, cfg);
  s.t = 1.0 / 3.0;
  const auto path = std::filesystem::temp_directory_path() / "perosim_test_ckpt" / "state.ckpt";
  save_checkpoint(path, d, s);
  const State back = load_checkpoint(path, d);
  CHECK(back.t == s.t);
  CHECK(back.psi == s.psi);
  CHECK(back.u == s.u);
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("checkpoints of another device are refused") {
  const Device d = build_device(testing::pin_small(6, true));
  const Device other = build_device(testing::pin_small(8, true));
  const auto text = checkpoint_text(d, initial_state(d));
  CHECK_THROWS_AS(parse_checkpoint(other, text), ValidationError);
  CHECK_THROWS_AS(parse_checkpoint(d, text.substr(0, text.size() / 2)), ValidationError);
  CHECK_THROWS_AS(parse_checkpoint(d, "perosim-checkpoint 9\n"), ValidationError);
}

TEST_CASE("CSV output differs between reruns only in the timestamp line") {
  const Device d = build_device(testing::bulk_np(10));
  SolverConfig cfg;
  const auto a = run_transient(d, 0.3, cfg);
  const auto b = run_transient(d, 0.3, cfg);
  OutputHeader h{"rerun", 5, true};
  auto la = lines(diagnostics_csv(a.reports, h));
  auto lb = lines(diagnostics_csv(b.reports, h));
  REQUIRE(la.size() == lb.size());
  CHECK(la[0].rfind("# written ", 0) == 0);
  CHECK(la[1].find("scenario=rerun seed=5") != std::string::npos);
  la.erase(la.begin());
  lb.erase(lb.begin());
  CHECK(la == lb);
  CHECK(split(la[1]).size() == split(la[2]).size());
}

TEST_CASE("profiles carry the requested fields with blanks outside a region") {
  auto c = testing::pin_small(4, true);
  c.generation.photon_flux = 2.0;
  c.generation.absorption = 1.0;
  const Device d = build_device(c);
  const State s = initial_state(d);
  const auto text = emit_profile(d, s, profile_fields(d), {"p", 0, false});
  const auto ls = lines(text);
  REQUIRE(ls.size() == 2 + 1 + static_cast<std::size_t>(d.mesh().node_count()));
  const auto head = split(ls[2]);
  CHECK(head == std::vector<std::string>{"x", "psi", "phi_n", "phi_p", "phi_a", "u_n", "u_p", "u_a", "G", "R"});
  const auto first = split(ls[3]);
  CHECK(first[7].empty());   // no vacancies in the etl
  CHECK(std::stod(first[8]) == doctest::Approx(2.0));  // G at the illuminated surface
  CHECK_THROWS_AS(emit_profile(d, s, {"x", "temperature"}, {}), ValidationError);
}

TEST_CASE("quasi Fermi potentials are flat in equilibrium") {
  const Device d = build_device(testing::bulk_np(12));
  SolverConfig cfg;
  const State eq = solve_stationary(d, cfg, 0.0);
  for (int i = 0; i < 2; ++i)
    for (double phi : quasi_fermi(d, i, eq)) CHECK(std::fabs(phi) <= 1e-9);
}
