#include "fracshape/deformation.hpp"

#include <cmath>

namespace fracshape {

namespace {

struct CrackEdgeData {
  int a, b;
  Vec2 n;
  double length;
};

// 2-point Gauss rule on [0,1].
constexpr double kGauss1 = 0.5 - 0.28867513459481287;
constexpr double kGauss2 = 0.5 + 0.28867513459481287;

std::vector<CrackEdgeData> crack_edges(const TriMesh& mesh) {
  std::vector<CrackEdgeData> out;
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const BoundaryTag tag = mesh.boundary[e].tag;
    if (tag != BoundaryTag::Crack && tag != BoundaryTag::CrackFixed) continue;
    const auto en = outward_normal(mesh, static_cast<int>(e));
    out.push_back({mesh.boundary[e].a, mesh.boundary[e].b, en.normal, en.length});
  }
  return out;
}

}  // namespace

struct DeformationSolver::Impl {
  Eigen::SparseMatrix<double> metric;       // full integral form
  Eigen::SparseMatrix<double> metric_elim;  // pinned rows/cols -> identity
  std::vector<char> pinned;                 // per node
  std::vector<CrackEdgeData> edges;
  int n = 0;

  void zero_pinned(Eigen::VectorXd& v) const {
    for (int i = 0; i < static_cast<int>(pinned.size()); ++i) {
      if (pinned[i]) {
        v[2 * i] = 0.0;
        v[2 * i + 1] = 0.0;
      }
    }
  }
};

DeformationSolver::DeformationSolver(const TriMesh& mesh, const Material& mat) : impl_(new Impl) {
  const int n = 2 * mesh.num_nodes();
  impl_->n = n;
  impl_->pinned = pinned_nodes(mesh);
  impl_->edges = crack_edges(mesh);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * 21);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = shape_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double mass = g.area * ((i == j) ? 1.0 / 6.0 : 1.0 / 12.0);
        const double stiff = mat.a_metric * g.area * g.grad[i].dot(g.grad[j]);
        for (int c = 0; c < 2; ++c) {
          trips.emplace_back(dof(tri[i], c), dof(tri[j], c), mass + stiff);
        }
      }
    }
  }
  impl_->metric.resize(n, n);
  impl_->metric.setFromTriplets(trips.begin(), trips.end());

  SparseSystem sys{impl_->metric, Eigen::VectorXd::Zero(n)};
  std::map<int, double> constraints;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (impl_->pinned[i]) {
      constraints[2 * i] = 0.0;
      constraints[2 * i + 1] = 0.0;
    }
  }
  apply_dirichlet(sys, constraints);
  impl_->metric_elim = sys.A;
}

DeformationSolver::~DeformationSolver() = default;
DeformationSolver::DeformationSolver(DeformationSolver&&) noexcept = default;

const std::vector<char>& DeformationSolver::pinned() const { return impl_->pinned; }

double DeformationSolver::metric_form(const NodalField2& V, const NodalField2& W) const {
  return V.dot(impl_->metric * W);
}

Eigen::VectorXd DeformationSolver::residual(const NodalField2& V, const NodalField2& dL, double psi,
                                            double eps) const {
  Eigen::VectorXd r = impl_->metric_elim * V + dL;
  for (const auto& e : impl_->edges) {
    const double va = Vec2(V[2 * e.a], V[2 * e.a + 1]).dot(e.n);
    const double vb = Vec2(V[2 * e.b], V[2 * e.b + 1]).dot(e.n);
    for (double s : {kGauss1, kGauss2}) {
      const double m = std::max(0.0, (1.0 - s) * va + s * vb + eps);
      if (m <= 0.0) continue;
      const double wgt = psi * 0.5 * e.length * m * m;
      for (int c = 0; c < 2; ++c) {
        r[dof(e.a, c)] += wgt * (1.0 - s) * e.n[c];
        r[dof(e.b, c)] += wgt * s * e.n[c];
      }
    }
  }
  impl_->zero_pinned(r);
  return r;
}

Eigen::SparseMatrix<double> DeformationSolver::newton_jacobian_matrix(const NodalField2& V, double psi,
                                                                      double eps) const {
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& e : impl_->edges) {
    const double va = Vec2(V[2 * e.a], V[2 * e.a + 1]).dot(e.n);
    const double vb = Vec2(V[2 * e.b], V[2 * e.b + 1]).dot(e.n);
    const int nodes[2] = {e.a, e.b};
    for (double s : {kGauss1, kGauss2}) {
      const double m = std::max(0.0, (1.0 - s) * va + s * vb + eps);
      if (m <= 0.0) continue;
      const double wgt = 2.0 * psi * 0.5 * e.length * m;
      const double phi[2] = {1.0 - s, s};
      for (int i = 0; i < 2; ++i) {
        if (impl_->pinned[nodes[i]]) continue;
        for (int j = 0; j < 2; ++j) {
          if (impl_->pinned[nodes[j]]) continue;
          for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) {
              trips.emplace_back(dof(nodes[i], c), dof(nodes[j], d),
                                 wgt * phi[i] * phi[j] * e.n[c] * e.n[d]);
            }
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> pen(impl_->n, impl_->n);
  pen.setFromTriplets(trips.begin(), trips.end());
  return impl_->metric_elim + pen;
}

NodalField2 DeformationSolver::solve(const NodalField2& dL, const PenaltyConfig& config,
                                     const NodalField2* warm_start) const {
  if (dL.size() != impl_->n) throw std::invalid_argument("dL size does not match mesh");
  const double eps = config.epsilon_gap;
  const double tol = config.newton_tol * (1.0 + dL.norm());

  NodalField2 V;
  std::vector<double> schedule;
  if (warm_start && warm_start->size() == impl_->n) {
    V = *warm_start;
    impl_->zero_pinned(V);
    schedule = {config.psi_schedule.back()};
  } else {
    V = NodalField2::Zero(impl_->n);
    schedule = config.psi_schedule;
  }

  for (std::size_t pi = 0; pi < schedule.size(); ++pi) {
    const double psi = schedule[pi];
    const bool final_psi = (pi + 1 == schedule.size());
    Eigen::VectorXd r = residual(V, dL, psi, eps);
    double rnorm = r.norm();
    int it = 0;
    for (; it < config.newton_max_iter && rnorm > tol; ++it) {
      DirectSolver solver(newton_jacobian_matrix(V, psi, eps));
      Eigen::VectorXd dV = solver.solve(-r);
      double step = 1.0;
      bool accepted = false;
      while (step >= config.armijo_step_min) {
        NodalField2 Vt = V + step * dV;
        Eigen::VectorXd rt = residual(Vt, dL, psi, eps);
        if (rt.norm() <= (1.0 - config.armijo_c * step) * rnorm) {
          V = std::move(Vt);
          r = std::move(rt);
          rnorm = r.norm();
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    if (final_psi && rnorm > tol) {
      throw SolveError("deformation Newton did not reach tolerance at final psi (residual " +
                       std::to_string(rnorm) + ")");
    }
  }
  return V;
}

double metric_form(const TriMesh& mesh, const Material& mat, const NodalField2& V, const NodalField2& W) {
  return DeformationSolver(mesh, mat).metric_form(V, W);
}

NodalField2 solve_deformation(const TriMesh& mesh, const Material& mat, const NodalField2& dL,
                              const PenaltyConfig& config, const NodalField2* warm_start) {
  return DeformationSolver(mesh, mat).solve(dL, config, warm_start);
}

double newton_jacobian(const TriMesh& mesh, const Material& mat, const NodalField2& V, double psi,
                       double eps, const NodalField2& Wt, const NodalField2& W) {
  DeformationSolver solver(mesh, mat);
  double value = solver.metric_form(Wt, W);
  // Penalty part via quadrature over crack edges.
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const BoundaryTag tag = mesh.boundary[e].tag;
    if (tag != BoundaryTag::Crack && tag != BoundaryTag::CrackFixed) continue;
    const auto en = outward_normal(mesh, static_cast<int>(e));
    const int a = mesh.boundary[e].a, b = mesh.boundary[e].b;
    const double va = node_value(V, a).dot(en.normal), vb = node_value(V, b).dot(en.normal);
    const double wa = node_value(W, a).dot(en.normal), wb = node_value(W, b).dot(en.normal);
    const double ta = node_value(Wt, a).dot(en.normal), tb = node_value(Wt, b).dot(en.normal);
    for (double s : {kGauss1, kGauss2}) {
      const double m = std::max(0.0, (1.0 - s) * va + s * vb + eps);
      if (m <= 0.0) continue;
      const double wq = (1.0 - s) * wa + s * wb;
      const double tq = (1.0 - s) * ta + s * tb;
      value += 2.0 * psi * 0.5 * en.length * m * wq * tq;
    }
  }
  return value;
}

double penalty_violation(const TriMesh& mesh, const NodalField2& V, double eps) {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const BoundaryTag tag = mesh.boundary[e].tag;
    if (tag != BoundaryTag::Crack && tag != BoundaryTag::CrackFixed) continue;
    const auto en = outward_normal(mesh, static_cast<int>(e));
    const int a = mesh.boundary[e].a, b = mesh.boundary[e].b;
    const double va = node_value(V, a).dot(en.normal), vb = node_value(V, b).dot(en.normal);
    for (double s : {kGauss1, kGauss2}) {
      total += 0.5 * en.length * std::max(0.0, (1.0 - s) * va + s * vb + eps);
    }
  }
  return total;
}

}  // namespace fracshape
