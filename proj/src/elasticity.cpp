#include "fracshape/elasticity.hpp"

#include <future>

#include "fracshape/spectral.hpp"

namespace fracshape {

SymTensor2 element_strain(const TriMesh& mesh, int triangle, const NodalField2& w) {
  const auto g = shape_gradients(mesh, triangle);
  const auto& tri = mesh.triangles[triangle];
  Mat2 grad = Mat2::Zero();  // grad(j,k) = d w_j / d x_k
  for (int i = 0; i < 3; ++i) {
    grad += node_value(w, tri[i]) * g.grad[i].transpose();
  }
  return sym(grad);
}

SymTensor2 stress(const Material& mat, const SymTensor2& eps) {
  const double tr = eps.trace();
  return {2.0 * mat.mu * eps.e11 + mat.lambda * tr, 2.0 * mat.mu * eps.e12,
          2.0 * mat.mu * eps.e22 + mat.lambda * tr};
}

namespace {

using ElemMatrix = Eigen::Matrix<double, 6, 6>;

ElemMatrix element_stiffness(const TriMesh& mesh, int t, const Material& mat) {
  const auto g = shape_gradients(mesh, t);
  ElemMatrix k;
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < 3; ++j) {
        for (int d = 0; d < 2; ++d) {
          const double gij = g.grad[i].dot(g.grad[j]);
          double v = mat.mu * ((c == d ? gij : 0.0) + g.grad[i][d] * g.grad[j][c]) +
                     mat.lambda * g.grad[i][c] * g.grad[j][d];
          k(2 * i + c, 2 * j + d) = g.area * v;
        }
      }
    }
  }
  return k;
}

std::vector<ElemMatrix> all_element_stiffness(const TriMesh& mesh, const Material& mat) {
  const int nt = mesh.num_triangles();
  std::vector<ElemMatrix> out(nt);
  const int threads = std::min(assembly_threads(), std::max(1, nt / 64));
  if (threads <= 1) {
    for (int t = 0; t < nt; ++t) out[t] = element_stiffness(mesh, t, mat);
    return out;
  }
  // Element matrices land in preassigned slots; the reduction below stays in
  // fixed element order, so results are identical for any thread count.
  std::vector<std::future<void>> jobs;
  const int chunk = (nt + threads - 1) / threads;
  for (int c = 0; c < threads; ++c) {
    const int lo = c * chunk, hi = std::min(nt, lo + chunk);
    jobs.push_back(std::async(std::launch::async, [&, lo, hi] {
      for (int t = lo; t < hi; ++t) out[t] = element_stiffness(mesh, t, mat);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace

struct ElasticSystem::Impl {
  Eigen::SparseMatrix<double> raw;
  Eigen::SparseMatrix<double> eliminated;
  std::map<int, int> dirichlet;  // node -> 0 bottom, 1 top
  std::unique_ptr<DirectSolver> solver;
  int n = 0;
};

ElasticSystem::ElasticSystem(const TriMesh& mesh, const Material& mat) : impl_(new Impl) {
  mat.check();
  const int n = 2 * mesh.num_nodes();
  impl_->n = n;

  for (const auto& e : mesh.boundary) {
    if (e.tag == BoundaryTag::Bottom) {
      impl_->dirichlet[e.a] = 0;
      impl_->dirichlet[e.b] = 0;
    }
  }
  for (const auto& e : mesh.boundary) {
    if (e.tag == BoundaryTag::Top) {
      impl_->dirichlet[e.a] = 1;
      impl_->dirichlet[e.b] = 1;
    }
  }
  if (impl_->dirichlet.empty()) {
    throw SolveError("state equation requires a nonempty Dirichlet boundary");
  }

  const auto kelem = all_element_stiffness(mesh, mat);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(kelem.size() * 36);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < 3; ++j) {
          for (int d = 0; d < 2; ++d) {
            trips.emplace_back(dof(tri[i], c), dof(tri[j], d), kelem[t](2 * i + c, 2 * j + d));
          }
        }
      }
    }
  }
  impl_->raw.resize(n, n);
  impl_->raw.setFromTriplets(trips.begin(), trips.end());

  SparseSystem sys{impl_->raw, Eigen::VectorXd::Zero(n)};
  std::map<int, double> constraints;
  for (const auto& [node, which] : impl_->dirichlet) {
    constraints[dof(node, 0)] = 0.0;
    constraints[dof(node, 1)] = 0.0;
  }
  apply_dirichlet(sys, constraints);
  impl_->eliminated = sys.A;
  impl_->solver = std::make_unique<DirectSolver>(impl_->eliminated);
}

ElasticSystem::~ElasticSystem() = default;
ElasticSystem::ElasticSystem(ElasticSystem&&) noexcept = default;

const Eigen::SparseMatrix<double>& ElasticSystem::matrix() const { return impl_->eliminated; }
const Eigen::SparseMatrix<double>& ElasticSystem::raw_matrix() const { return impl_->raw; }
const std::map<int, int>& ElasticSystem::dirichlet_nodes() const { return impl_->dirichlet; }

NodalField2 ElasticSystem::solve_state(const BoundaryCondition& bc) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(impl_->n);
  std::vector<double> value(impl_->n, 0.0);
  std::vector<char> fixed(impl_->n, 0);
  for (const auto& [node, which] : impl_->dirichlet) {
    const Vec2 v = which == 1 ? bc.top : Vec2::Zero();
    for (int c = 0; c < 2; ++c) {
      fixed[dof(node, c)] = 1;
      value[dof(node, c)] = v[c];
    }
  }
  // Move prescribed columns of the raw matrix to the rhs.
  for (int col = 0; col < impl_->raw.outerSize(); ++col) {
    if (!fixed[col] || value[col] == 0.0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(impl_->raw, col); it; ++it) {
      if (!fixed[it.row()]) b[it.row()] -= it.value() * value[col];
    }
  }
  for (int i = 0; i < impl_->n; ++i) {
    if (fixed[i]) b[i] = value[i];
  }
  return impl_->solver->solve(b);
}

NodalField2 ElasticSystem::solve_adjoint(const NodalField2& F) const {
  Eigen::VectorXd b = -F;
  for (const auto& [node, which] : impl_->dirichlet) {
    b[dof(node, 0)] = 0.0;
    b[dof(node, 1)] = 0.0;
  }
  return impl_->solver->solve(b);
}

NodalField2 solve_state(const TriMesh& mesh, const Material& mat, const BoundaryCondition& bc) {
  return ElasticSystem(mesh, mat).solve_state(bc);
}

double bulk_energy(const TriMesh& mesh, const Material& mat, const NodalField2& w) {
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const SymTensor2 eps = element_strain(mesh, t, w);
    const double area = mesh.triangle_area(t);
    double density;
    if (mat.strain_splitting) {
      const auto s = split(eps);
      const double trp = std::max(0.0, eps.trace());
      density = 0.5 * mat.lambda * trp * trp + mat.mu * s.trace_sigma_max_sq();
    } else {
      const double tr = eps.trace();
      density = 0.5 * mat.lambda * tr * tr + mat.mu * eps.ddot(eps);
    }
    total += area * density;
  }
  return total;
}

double fracture_energy(const TriMesh& mesh, const Material& mat) {
  double len = 0.0;
  for (const auto& e : mesh.boundary) {
    if (e.tag == BoundaryTag::Crack || e.tag == BoundaryTag::CrackFixed) {
      len += (mesh.nodes[e.b] - mesh.nodes[e.a]).norm();
    }
  }
  return 0.5 * mat.gc * len;
}

double reg_energy(const TriMesh& mesh, const Material& mat) { return mat.nu_vol * mesh.total_area(); }

double objective(const TriMesh& mesh, const Material& mat, const NodalField2& w) {
  return bulk_energy(mesh, mat, w) + fracture_energy(mesh, mat) - reg_energy(mesh, mat);
}

double constraint_integral(const TriMesh& mesh, const Material& mat, const NodalField2& w,
                           const NodalField2& z) {
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const SymTensor2 sw = stress(mat, element_strain(mesh, t, w));
    const SymTensor2 ez = element_strain(mesh, t, z);
    total += mesh.triangle_area(t) * sw.ddot(ez);
  }
  return total;
}

Vec2 boundary_force(const TriMesh& mesh, const Material& mat, const NodalField2& w) {
  const auto adj = boundary_triangles(mesh);
  Vec2 force = Vec2::Zero();
  bool any = false;
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    if (mesh.boundary[e].tag != BoundaryTag::Top) continue;
    any = true;
    const auto n = outward_normal(mesh, static_cast<int>(e));
    const SymTensor2 s = stress(mat, element_strain(mesh, adj[e], w));
    force += n.length * (s.matrix() * n.normal);
  }
  if (!any) throw GeometryError("mesh has no Top boundary edges");
  return force;
}

}  // namespace fracshape
