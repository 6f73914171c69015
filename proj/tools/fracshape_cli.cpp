#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "fracshape/io.hpp"
#include "fracshape/verify.hpp"

namespace fs = std::filesystem;
using namespace fracshape;

namespace {

int cmd_mesh(const std::string& tip, double delta, const std::string& level, const std::string& out) {
  SpecimenSpec spec;
  const auto t = tip_from_name(tip);
  const auto l = level_from_name(level);
  if (!t) throw ParseError("unknown tip shape '" + tip + "'");
  if (!l) throw ParseError("unknown refinement level '" + level + "'");
  spec.tip = *t;
  spec.level = *l;
  spec.delta = delta;
  const TriMesh mesh = generate(spec);
  write_mesh(out, mesh);
  std::printf("wrote %s: %d nodes, %d elements, quality %.3f\n", out.c_str(), mesh.num_nodes(),
              mesh.num_triangles(), min_scaled_jacobian(mesh));
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& mesh_path, const std::string& out_dir) {
  RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output_directory = out_dir;
  fs::create_directories(cfg.output_directory);

  TriMesh mesh;
  if (!mesh_path.empty()) {
    mesh = read_mesh(mesh_path);
  } else {
    mesh = generate(cfg.specimen);
  }

  SimulationResult partial;
  auto on_step = [&](const StepRecord& rec, const TriMesh& m) {
    std::printf("loadstep %3d  wD=(%.4g, %.4g) um  J=%.6g  E_frac=%.6g  force=(%.4g, %.4g)  tip=(%.4g, "
                "%.4g)  iters=%d\n",
                rec.loadstep, rec.w_d.x() * 1e3, rec.w_d.y() * 1e3, rec.j, rec.e_frac, rec.force.x(),
                rec.force.y(), rec.tip.x(), rec.tip.y(), rec.opt_iters);
    std::fflush(stdout);
    if ((rec.loadstep - 1) % cfg.snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "mesh_%04d.fm", rec.loadstep);
      write_mesh((fs::path(cfg.output_directory) / name).string(), m);
    }
  };

  const SimulationResult result = run_simulation(mesh, cfg.material, cfg.schedule(), cfg.optimizer, on_step);
  write_records_csv((fs::path(cfg.output_directory) / "records.csv").string(), result);
  write_mesh((fs::path(cfg.output_directory) / "mesh_final.fm").string(), result.final_mesh);
  std::printf("simulation finished after %zu loadsteps: %s\n", result.records.size(),
              result.stop_reason.c_str());
  if (!result.completed) {
    std::fprintf(stderr, "error: simulation stopped prematurely: %s\n", result.stop_reason.c_str());
    return 2;
  }
  return 0;
}

int cmd_quality(const std::string& mesh_path) {
  const TriMesh mesh = read_mesh(mesh_path);
  std::printf("%d nodes, %d elements, min scaled Jacobian %.6f\n", mesh.num_nodes(), mesh.num_triangles(),
              min_scaled_jacobian(mesh));
  return 0;
}

int cmd_verify(const std::string& check, unsigned seed, const std::string& out_dir) {
  bool ok;
  if (check == "spectral") ok = verify_spectral(seed, out_dir);
  else if (check == "adjoint") ok = verify_adjoint(seed);
  else if (check == "shape") ok = verify_shape(seed);
  else if (check == "deformation") ok = verify_deformation(seed);
  else throw ParseError("unknown check '" + check + "'");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D quasi-static brittle-fracture simulation by shape-gradient descent"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh", "Generate a single-edge-notched specimen mesh");
  std::string tip = "round", level = "medium", mesh_out;
  double delta = 1e-2;
  mesh_cmd->add_option("--tip", tip, "Tip shape: flat|round|pointy");
  mesh_cmd->add_option("--delta", delta, "Slit half-width [mm]");
  mesh_cmd->add_option("--level", level, "very-coarse|coarse|medium|fine|very-fine");
  mesh_cmd->add_option("-o,--output", mesh_out, "Output mesh file")->required();

  auto* run_cmd = app.add_subcommand("run", "Run a quasi-static simulation");
  std::string config_path, run_mesh, run_out;
  run_cmd->add_option("--config", config_path, "Config file")->required();
  run_cmd->add_option("--mesh", run_mesh, "Initial mesh file (defaults to [specimen] settings)");
  run_cmd->add_option("--out", run_out, "Output directory (overrides [output] directory)");

  auto* verify_cmd = app.add_subcommand("verify", "Run numerical self-checks");
  std::string check, verify_out = ".";
  unsigned seed = 12345;
  verify_cmd->add_option("--check", check, "spectral|adjoint|shape|deformation")->required();
  verify_cmd->add_option("--seed", seed, "Random seed");
  verify_cmd->add_option("--out", verify_out, "Directory for CSV dumps");

  auto* quality_cmd = app.add_subcommand("quality", "Report mesh quality");
  std::string quality_mesh;
  quality_cmd->add_option("--mesh", quality_mesh, "Mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (mesh_cmd->parsed()) return cmd_mesh(tip, delta, level, mesh_out);
    if (run_cmd->parsed()) return cmd_run(config_path, run_mesh, run_out);
    if (verify_cmd->parsed()) return cmd_verify(check, seed, verify_out);
    if (quality_cmd->parsed()) return cmd_quality(quality_mesh);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
