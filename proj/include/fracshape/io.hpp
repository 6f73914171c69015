#pragma once

#include <string>

#include "fracshape/driver.hpp"

namespace fracshape {

// Full run configuration parsed from the INI-style config file. Every key
// has a default; unknown keys and malformed values are rejected with the
// offending line number.
struct RunConfig {
  Material material;
  SpecimenSpec specimen;
  LoadMode mode = LoadMode::Tension;
  double coarse_increment_um = 0.5;
  double switch_at_um = 3.5;
  double fine_increment_um = 0.1;
  int max_loadsteps = 100;
  OptimizerConfig optimizer;
  std::string output_directory = "out";
  int snapshot_every = 1;

  LoadSchedule schedule() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// ASCII mesh container, 17 significant digits, bit-exact round trip.
void write_mesh(const std::string& path, const TriMesh& mesh);
TriMesh read_mesh(const std::string& path);

void write_records_csv(const std::string& path, const SimulationResult& result);

}  // namespace fracshape
