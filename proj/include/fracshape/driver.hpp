#pragma once

#include <functional>
#include <string>

#include "fracshape/deformation.hpp"
#include "fracshape/specimen.hpp"

namespace fracshape {

enum class LoadMode { Tension, Shear };

struct LoadSchedule {
  LoadMode mode = LoadMode::Tension;
  std::vector<Vec2> displacements;  // prescribed Top displacement per loadstep [mm]

  // Coarse increments up to |switch_at|, then fine increments, at most
  // max_steps entries. Magnitudes in micrometers.
  static LoadSchedule stepped(LoadMode mode, double coarse_um, double switch_at_um, double fine_um,
                              int max_steps);
};

struct OptimizerConfig {
  double armijo_tau0 = 5e-3;
  double armijo_c = 1e-4;
  double tau_min = 1e-10;
  double tol_efrac = 1e-8;
  double tol_gradnorm = 1e-4;
  double quality_threshold = 0.30;
  int max_opt_iters = 200;
  double target_h = 0.045;  // remeshing size; set from the specimen level
  PenaltyConfig penalty;
};

struct StepRecord {
  int loadstep = 0;
  Vec2 w_d = Vec2::Zero();  // [mm]
  double e_bulk = 0, e_frac = 0, e_reg = 0, j = 0;
  Vec2 force = Vec2::Zero();  // boundary force on Top [N/mm]
  int opt_iters = 0;
  int remeshes = 0;
  double min_quality = 0;
  Vec2 tip = Vec2::Zero();
};

// Area/fracture-energy pair after each accepted descent step; used to check
// irreversibility across the whole run.
struct AcceptedStepTrace {
  double area = 0;
  double e_frac = 0;
};

struct SimulationResult {
  std::vector<StepRecord> records;
  std::vector<AcceptedStepTrace> accepted_steps;
  TriMesh final_mesh;
  bool completed = true;  // false when the run stopped on a numerical failure
  std::string stop_reason;
  double initial_angle_deg = 0;  // tip-path direction over the first 0.05 mm
};

// Crack-front vertex: minimal x1 under tension, minimal x1+x2 under shear.
Vec2 crack_tip(const TriMesh& mesh, LoadMode mode);

struct LoadstepResult {
  TriMesh mesh;
  StepRecord record;
  std::vector<AcceptedStepTrace> accepted_steps;
};

// One quasi-static load level: gradient descent over the shape until the
// fracture-energy increase, the gradient norm, or the line search indicates
// a (local) minimum.
LoadstepResult optimize_loadstep(const TriMesh& mesh, const Material& mat, const BoundaryCondition& bc,
                                 const OptimizerConfig& config, LoadMode mode);

using StepCallback = std::function<void(const StepRecord&, const TriMesh&)>;

SimulationResult run_simulation(const TriMesh& initial_mesh, const Material& mat,
                                const LoadSchedule& schedule, const OptimizerConfig& config,
                                const StepCallback& on_step = nullptr);

}  // namespace fracshape
