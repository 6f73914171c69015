#include "fracshape/driver.hpp"

#include <cmath>
#include <cstdio>

#include "fracshape/adjoint.hpp"
#include "fracshape/shape_derivative.hpp"

namespace fracshape {

LoadSchedule LoadSchedule::stepped(LoadMode mode, double coarse_um, double switch_at_um, double fine_um,
                                   int max_steps) {
  LoadSchedule s;
  s.mode = mode;
  const Vec2 dir = (mode == LoadMode::Tension) ? Vec2(0, 1) : Vec2(-1, 0);
  const double to_mm = 1e-3;
  double level = 0.0;
  for (int i = 0; i < max_steps; ++i) {
    level += (level + 1e-12 < switch_at_um) ? coarse_um : fine_um;
    s.displacements.push_back(level * to_mm * dir);
  }
  return s;
}

Vec2 crack_tip(const TriMesh& mesh, LoadMode mode) {
  bool found = false;
  Vec2 best = Vec2::Zero();
  double best_key = std::numeric_limits<double>::max();
  for (const auto& e : mesh.boundary) {
    if (e.tag != BoundaryTag::Crack && e.tag != BoundaryTag::CrackFixed) continue;
    for (int n : {e.a, e.b}) {
      const Vec2 p = mesh.nodes[n];
      const double key = (mode == LoadMode::Tension) ? p.x() : p.x() + p.y();
      if (key < best_key) {
        best_key = key;
        best = p;
        found = true;
      }
    }
  }
  if (!found) throw GeometryError("mesh has no crack boundary");
  return best;
}

LoadstepResult optimize_loadstep(const TriMesh& initial, const Material& mat, const BoundaryCondition& bc,
                                 const OptimizerConfig& config, LoadMode mode) {
  LoadstepResult out;
  out.mesh = initial;

  auto system = std::make_unique<ElasticSystem>(out.mesh, mat);
  NodalField2 w = system->solve_state(bc);
  double j_cur = objective(out.mesh, mat, w);
  double efrac_cur = fracture_energy(out.mesh, mat);

  NodalField2 warm;
  int iters = 0;
  int remeshes = 0;
  for (; iters < config.max_opt_iters; ++iters) {
    const NodalField2 z = solve_adjoint(*system, out.mesh, mat, w);
    const NodalField2 dL = shape_derivative_vector(out.mesh, mat, w, z);
    DeformationSolver deformation(out.mesh, mat);
    const NodalField2* warm_ptr = (warm.size() == dL.size()) ? &warm : nullptr;
    const NodalField2 V = deformation.solve(dL, config.penalty, warm_ptr);
    const double vv = deformation.metric_form(V, V);
    if (std::sqrt(vv) < config.tol_gradnorm) break;

    double tau = config.armijo_tau0;
    bool accepted = false;
    TriMesh trial_mesh;
    std::unique_ptr<ElasticSystem> trial_system;
    NodalField2 trial_w;
    double trial_j = 0;
    while (tau >= config.tau_min) {
      auto up = update_coordinates(out.mesh, V, tau);
      if (up.inverted_count == 0 && min_scaled_jacobian(up.mesh) > 0.0) {
        try {
          trial_system = std::make_unique<ElasticSystem>(up.mesh, mat);
          trial_w = trial_system->solve_state(bc);
          trial_j = objective(up.mesh, mat, trial_w);
          if (trial_j <= j_cur - config.armijo_c * tau * vv) {
            trial_mesh = std::move(up.mesh);
            accepted = true;
            break;
          }
        } catch (const SolveError&) {
          // near-degenerate trial geometry; shrink the step
        }
      }
      tau *= 0.5;
    }
    if (!accepted) break;

    out.mesh = std::move(trial_mesh);
    system = std::move(trial_system);
    w = std::move(trial_w);
    j_cur = trial_j;
    const double efrac_new = fracture_energy(out.mesh, mat);
    const double defrac = efrac_new - efrac_cur;
    efrac_cur = efrac_new;
    out.accepted_steps.push_back({out.mesh.total_area(), efrac_new});
    warm = V;

    if (min_scaled_jacobian(out.mesh) < config.quality_threshold) {
      out.mesh = remesh(out.mesh, config.target_h);
      ++remeshes;
      system = std::make_unique<ElasticSystem>(out.mesh, mat);
      w = system->solve_state(bc);
      j_cur = objective(out.mesh, mat, w);
      efrac_cur = fracture_energy(out.mesh, mat);
      warm.resize(0);  // field lives on the old discretization
    }

    if (defrac < config.tol_efrac) {
      ++iters;
      break;
    }
  }
  if (iters >= config.max_opt_iters) {
    std::fprintf(stderr, "warning: loadstep hit the optimization iteration cap (%d)\n",
                 config.max_opt_iters);
  }

  StepRecord rec;
  rec.w_d = bc.top;
  rec.e_bulk = bulk_energy(out.mesh, mat, w);
  rec.e_frac = fracture_energy(out.mesh, mat);
  rec.e_reg = reg_energy(out.mesh, mat);
  rec.j = rec.e_bulk + rec.e_frac - rec.e_reg;
  rec.force = boundary_force(out.mesh, mat, w);
  rec.opt_iters = iters;
  rec.remeshes = remeshes;
  rec.min_quality = min_scaled_jacobian(out.mesh);
  rec.tip = crack_tip(out.mesh, mode);
  out.record = rec;
  return out;
}

SimulationResult run_simulation(const TriMesh& initial_mesh, const Material& mat,
                                const LoadSchedule& schedule, const OptimizerConfig& config,
                                const StepCallback& on_step) {
  SimulationResult result;
  result.final_mesh = initial_mesh;
  const Vec2 tip0 = crack_tip(initial_mesh, schedule.mode);
  bool angle_set = false;

  int index = 0;
  for (const Vec2& wd : schedule.displacements) {
    ++index;
    BoundaryCondition bc{wd};
    LoadstepResult step;
    try {
      step = optimize_loadstep(result.final_mesh, mat, bc, config, schedule.mode);
    } catch (const std::exception& err) {
      result.completed = false;
      result.stop_reason = err.what();
      break;
    }
    result.final_mesh = step.mesh;
    step.record.loadstep = index;
    result.records.push_back(step.record);
    result.accepted_steps.insert(result.accepted_steps.end(), step.accepted_steps.begin(),
                                 step.accepted_steps.end());
    if (on_step) on_step(step.record, step.mesh);

    if (!angle_set) {
      const Vec2 d = step.record.tip - tip0;
      if (d.norm() >= 0.05) {
        result.initial_angle_deg = std::atan2(-d.y(), -d.x()) * 180.0 / M_PI;
        angle_set = true;
      }
    }
    if (schedule.mode == LoadMode::Tension && step.record.tip.x() < 2.0 * config.target_h) {
      result.stop_reason = "fully fractured";
      break;
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "schedule exhausted";
  return result;
}

}  // namespace fracshape
