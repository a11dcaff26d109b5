#include <doctest.h>

#include <string>

#include "perosim/config.hpp"
#include "perosim/errors.hpp"
#include "support.hpp"

using namespace perosim;

namespace {

const char* kMinimal = R"({
  "scenario": { "name": "mini", "kind": "transient", "T": 0.5 },
  "device": {
    "geometry": { "dimension": 1 },
    "layers": [ { "name": "bulk", "thickness": 1.0, "cells": 8, "region": "bulk" } ],
    "species": [
      { "id": "n", "role": "electron", "initial": { "value": 1.0 } },
      { "id": "p", "role": "hole", "initial": { "value": 1.0 } }
    ],
    "contacts": [ { "name": "left", "side": "xmin" }, { "name": "right", "side": "xmax" } ]
  }
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

std::string field_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const auto spec = parse_config_text(kMinimal);
  CHECK(spec.name == "mini");
  CHECK(spec.kind == ScenarioKind::Transient);
  CHECK(spec.T == 0.5);
  CHECK(spec.solver.newton_tol == 1e-10);
  CHECK(spec.device.layers[0].permittivity == 1.0);
  CHECK(spec.device.species[0].charge == -1);
  CHECK(spec.device.species[1].charge == 1);
}

TEST_CASE("unknown keys are reported by pointer") {
  const auto text = replace(kMinimal, "\"T\": 0.5", "\"T\": 0.5, \"tee\": 1");
  CHECK(field_of(text) == "/scenario/tee");
  const auto deep = replace(kMinimal, "\"cells\": 8", "\"cells\": 8, \"colour\": 1");
  CHECK(field_of(deep) == "/device/layers/0/colour");
}

TEST_CASE("wrongly typed values are reported by pointer") {
  CHECK(field_of(replace(kMinimal, "\"T\": 0.5", "\"T\": \"long\"")) == "/scenario/T");
  CHECK(field_of(replace(kMinimal, "\"kind\": \"transient\"", "\"kind\": \"teleport\"")) == "/scenario/kind");
}

TEST_CASE("syntax errors carry line and column") {
  const std::string text = "{\n  \"scenario\": {\n    \"name\": \"x\",,\n  }\n}\n";
  try {
    parse_config_text(text);
    FAIL("no error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 16);
  }
}

TEST_CASE("device semantics are validated on load") {
  const auto no_contacts =
      replace(kMinimal, R"([ { "name": "left", "side": "xmin" }, { "name": "right", "side": "xmax" } ])", "[]");
  try {
    parse_config_text(no_contacts);
    FAIL("accepted a device without contacts");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(A1)") != std::string::npos);
  }
  const auto dup = replace(kMinimal, "\"id\": \"p\"", "\"id\": \"n\"");
  CHECK(field_of(dup) == "/device/species/1/id");
}

TEST_CASE("every bundled scenario parses and validates") {
  for (const char* name : {"equilibrium_1d", "pin_perovskite_1d", "pin_perovskite_2d", "light_transient",
                           "dark_bias_sweep", "axioms"}) {
    CAPTURE(name);
    ScenarioSpec spec;
    CHECK_NOTHROW(spec = testing::load_scenario(name));
    CHECK(spec.name == name);
  }
}

TEST_CASE("device files are resolved next to the scenario") {
  const auto spec = testing::load_scenario("pin_perovskite_1d");
  REQUIRE(spec.device.species.size() == 3);
  CHECK(spec.device.species[2].role == SpeciesRole::Vacancy);
  CHECK(spec.device.layers.size() == 3);
}

TEST_CASE("resolved config echoes values and physical units") {
  const auto spec = testing::load_scenario("pin_perovskite_1d");
  const auto j = resolved_config(spec);
  CHECK(j["scenario"]["seed"] == spec.seed);
  CHECK(j["device"]["layers"].size() == 3);
  REQUIRE(j.contains("physical"));
  const auto plain = resolved_config(parse_config_text(kMinimal));
  CHECK(!plain.contains("physical"));
  CHECK(plain["solver"]["newton_tol"] == 1e-10);
}

TEST_CASE("scenario level limits") {
  CHECK(field_of(replace(kMinimal, "\"T\": 0.5", "\"T\": -1")) == "/scenario/T");
  CHECK(field_of(replace(kMinimal, "\"T\": 0.5", "\"T\": 1, \"levels\": 2")) == "/scenario/levels");
  CHECK(field_of(replace(kMinimal, "\"T\": 0.5", "\"T\": 1, \"poisson_cells\": [4, 7, 16]")) ==
        "/scenario/poisson_cells");
}
