#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracshape/adjoint.hpp"
#include "fracshape/io.hpp"
#include "fracshape/shape_derivative.hpp"
#include "fracshape/spectral.hpp"
#include "fracshape/verify.hpp"

namespace py = pybind11;
using namespace fracshape;

namespace {

Material make_material(double lambda_, double mu, double gc, double nu, double a_metric) {
  Material m;
  m.lambda = lambda_;
  m.mu = mu;
  m.gc = gc;
  m.nu_vol = nu;
  m.a_metric = a_metric;
  m.check();
  return m;
}

Eigen::MatrixXd node_matrix(const TriMesh& mesh) {
  Eigen::MatrixXd out(mesh.num_nodes(), 2);
  for (int i = 0; i < mesh.num_nodes(); ++i) out.row(i) = mesh.nodes[i].transpose();
  return out;
}

Eigen::MatrixXi triangle_matrix(const TriMesh& mesh) {
  Eigen::MatrixXi out(mesh.num_triangles(), 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) out(t, k) = mesh.triangles[t][k];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_fracshape, m) {
  m.doc() = "Brittle-fracture simulation by Riemannian shape-gradient descent";

  py::register_exception<GeometryError>(m, "GeometryError");
  py::register_exception<SolveError>(m, "SolveError");
  py::register_exception<ParseError>(m, "ParseError");

  py::class_<TriMesh>(m, "Mesh")
      .def_property_readonly("nodes", &node_matrix)
      .def_property_readonly("triangles", &triangle_matrix)
      .def_property_readonly("num_nodes", &TriMesh::num_nodes)
      .def_property_readonly("num_elements", &TriMesh::num_triangles)
      .def_property_readonly("boundary",
                             [](const TriMesh& mesh) {
                               std::vector<std::tuple<int, int, std::string>> out;
                               for (const auto& e : mesh.boundary) {
                                 out.emplace_back(e.a, e.b, tag_name(e.tag));
                               }
                               return out;
                             })
      .def("area", &TriMesh::total_area)
      .def("quality", [](const TriMesh& mesh) { return min_scaled_jacobian(mesh); })
      .def("__repr__", [](const TriMesh& mesh) {
        return "<fracshape.Mesh nodes=" + std::to_string(mesh.num_nodes()) +
               " elements=" + std::to_string(mesh.num_triangles()) + ">";
      });

  m.def(
      "generate_mesh",
      [](const std::string& tip, double delta, const std::string& level) {
        SpecimenSpec spec;
        auto t = tip_from_name(tip);
        auto l = level_from_name(level);
        if (!t) throw py::value_error("unknown tip shape '" + tip + "'");
        if (!l) throw py::value_error("unknown refinement level '" + level + "'");
        spec.tip = *t;
        spec.level = *l;
        spec.delta = delta;
        return generate(spec);
      },
      py::arg("tip") = "round", py::arg("delta") = 1e-2, py::arg("level") = "medium");

  m.def("remesh", &remesh, py::arg("mesh"), py::arg("target_h"));
  m.def("read_mesh", &read_mesh, py::arg("path"));
  m.def("write_mesh", &write_mesh, py::arg("path"), py::arg("mesh"));

  m.def(
      "split",
      [](double e11, double e12, double e22) {
        const auto s = split(SymTensor2{e11, e12, e22});
        py::dict d;
        d["alpha"] = s.alpha;
        d["Q"] = Eigen::MatrixXd(s.Q);
        d["R"] = Eigen::MatrixXd(s.R);
        d["sigma"] = Eigen::VectorXd(s.sigma);
        d["sigma_max"] = Eigen::VectorXd(s.sigma_max);
        d["eps_plus"] = Eigen::MatrixXd(s.eps_plus());
        d["degenerate"] = s.degenerate;
        return d;
      },
      py::arg("e11"), py::arg("e12"), py::arg("e22"));

  m.def(
      "solve_state",
      [](const TriMesh& mesh, std::pair<double, double> top, double lambda_, double mu, double gc,
         double nu, double a_metric) {
        const Material mat = make_material(lambda_, mu, gc, nu, a_metric);
        const NodalField2 w = solve_state(mesh, mat, {Vec2(top.first, top.second)});
        Eigen::MatrixXd out(mesh.num_nodes(), 2);
        for (int i = 0; i < mesh.num_nodes(); ++i) out.row(i) = node_value(w, i).transpose();
        return out;
      },
      py::arg("mesh"), py::arg("top"), py::arg("lambda_") = 121.15e3, py::arg("mu") = 80.77e3,
      py::arg("gc") = 2.7, py::arg("nu") = 10.0, py::arg("a_metric") = 10.0);

  m.def(
      "energies",
      [](const TriMesh& mesh, const Eigen::MatrixXd& w, double lambda_, double mu, double gc, double nu,
         double a_metric) {
        const Material mat = make_material(lambda_, mu, gc, nu, a_metric);
        if (w.rows() != mesh.num_nodes() || w.cols() != 2) {
          throw py::value_error("displacement array must be (num_nodes, 2)");
        }
        NodalField2 field(2 * mesh.num_nodes());
        for (int i = 0; i < mesh.num_nodes(); ++i) {
          field[2 * i] = w(i, 0);
          field[2 * i + 1] = w(i, 1);
        }
        py::dict d;
        d["bulk"] = bulk_energy(mesh, mat, field);
        d["fracture"] = fracture_energy(mesh, mat);
        d["regularization"] = reg_energy(mesh, mat);
        d["objective"] = objective(mesh, mat, field);
        const Vec2 f = boundary_force(mesh, mat, field);
        d["force"] = std::make_pair(f.x(), f.y());
        return d;
      },
      py::arg("mesh"), py::arg("w"), py::arg("lambda_") = 121.15e3, py::arg("mu") = 80.77e3,
      py::arg("gc") = 2.7, py::arg("nu") = 10.0, py::arg("a_metric") = 10.0);

  m.def(
      "run_simulation",
      [](const TriMesh& mesh, const std::string& mode, double coarse_um, double switch_at_um,
         double fine_um, int max_loadsteps, double lambda_, double mu, double gc, double nu,
         double a_metric) {
        const Material mat = make_material(lambda_, mu, gc, nu, a_metric);
        const LoadMode lm = (mode == "shear") ? LoadMode::Shear : LoadMode::Tension;
        const LoadSchedule schedule =
            LoadSchedule::stepped(lm, coarse_um, switch_at_um, fine_um, max_loadsteps);
        OptimizerConfig config;
        config.target_h = 0.045;
        const SimulationResult res = run_simulation(mesh, mat, schedule, config);
        py::list records;
        for (const auto& r : res.records) {
          py::dict d;
          d["loadstep"] = r.loadstep;
          d["w_d"] = std::make_pair(r.w_d.x(), r.w_d.y());
          d["E_bulk"] = r.e_bulk;
          d["E_frac"] = r.e_frac;
          d["E_reg"] = r.e_reg;
          d["J"] = r.j;
          d["force"] = std::make_pair(r.force.x(), r.force.y());
          d["tip"] = std::make_pair(r.tip.x(), r.tip.y());
          d["opt_iters"] = r.opt_iters;
          records.append(d);
        }
        py::dict out;
        out["records"] = records;
        out["completed"] = res.completed;
        out["stop_reason"] = res.stop_reason;
        out["final_mesh"] = res.final_mesh;
        return out;
      },
      py::arg("mesh"), py::arg("mode") = "tension", py::arg("coarse_increment_um") = 0.5,
      py::arg("switch_at_um") = 3.5, py::arg("fine_increment_um") = 0.1, py::arg("max_loadsteps") = 100,
      py::arg("lambda_") = 121.15e3, py::arg("mu") = 80.77e3, py::arg("gc") = 2.7, py::arg("nu") = 10.0,
      py::arg("a_metric") = 10.0);
}
