#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "perosim/config.hpp"
#include "perosim/device.hpp"

namespace testing {

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(PEROSIM_SCENARIO_DIR) / (name + ".json");
}

inline perosim::ScenarioSpec load_scenario(const std::string& name) {
  return perosim::parse_config(scenario_path(name));
}

/// Bulk layer with Boltzmann electrons and holes and grounded contacts.
inline perosim::DeviceConfig bulk_np(int cells = 20) {
  using namespace perosim;
  DeviceConfig c;
  c.layers.push_back({"bulk", 1.0, cells, Region::Bulk, 1.0, 0.0});
  SpeciesConfig n;
  n.id = "n";
  n.role = SpeciesRole::Electron;
  n.charge = -1;
  n.initial.value = 1.0;
  n.initial.perturbation_amplitude = 0.3;
  SpeciesConfig p = n;
  p.id = "p";
  p.role = SpeciesRole::Hole;
  p.charge = 1;
  p.initial.perturbation_modes = 2;
  c.species = {n, p};
  c.contacts.push_back({"left", Side::XMin, std::nullopt, std::nullopt, 0, 0, 0, 0});
  c.contacts.push_back({"right", Side::XMax, std::nullopt, std::nullopt, 0, 0, 0, 0});
  c.recombination.r0 = 1.0;
  return c;
}

/// Three-layer stack with a Blakemore vacancy species in the middle layer.
inline perosim::DeviceConfig pin_small(int cells_per_layer = 8, bool fermi_dirac = true) {
  using namespace perosim;
  DeviceConfig c;
  c.layers.push_back({"etl", 0.3, cells_per_layer, Region::Bulk, 1.0, 1.0});
  c.layers.push_back({"perovskite", 0.4, cells_per_layer, Region::Perovskite, 2.0, -0.5});
  c.layers.push_back({"htl", 0.3, cells_per_layer, Region::Bulk, 1.0, -1.0});
  const auto st = fermi_dirac ? StatisticsKind::fermi_dirac_half() : StatisticsKind::boltzmann();
  SpeciesConfig n;
  n.id = "n";
  n.role = SpeciesRole::Electron;
  n.charge = -1;
  n.statistics = st;
  n.initial.value = 0.5;
  n.initial.per_layer = {{"etl", 1.0}, {"htl", 0.2}};
  n.initial.perturbation_amplitude = 0.3;
  n.initial.perturbation_modes = 3;
  SpeciesConfig p = n;
  p.id = "p";
  p.role = SpeciesRole::Hole;
  p.charge = 1;
  p.initial.per_layer = {{"etl", 0.2}, {"htl", 1.0}};
  p.initial.perturbation_modes = 2;
  SpeciesConfig a;
  a.id = "a";
  a.role = SpeciesRole::Vacancy;
  a.charge = 1;
  a.mobility_bulk = 0;
  a.mobility_perovskite = 0.1;
  a.statistics = StatisticsKind::blakemore(1.0);
  a.initial.value = 0.5;
  a.initial.perturbation_amplitude = 0.4;
  a.initial.perturbation_modes = 2;
  c.species = {n, p, a};
  c.contacts.push_back({"cathode", Side::XMin, std::nullopt, std::nullopt, 0, 0, 0, 0});
  c.contacts.push_back({"anode", Side::XMax, std::nullopt, std::nullopt, 0, 0, 0, 0});
  c.recombination.r0 = 1.0;
  return c;
}

}  // namespace testing
