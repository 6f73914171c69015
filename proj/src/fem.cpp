#include "fracshape/fem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cstdlib>
#include <string>

namespace fracshape {

ElementGradients shape_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const double det = cross2(p1 - p0, p2 - p0);
  if (det <= 0.0) throw GeometryError("degenerate or inverted element");
  ElementGradients g;
  g.area = 0.5 * det;
  // Gradient of barycentric coordinate i is the inward normal of the
  // opposite edge scaled by 1/(2A).
  auto perp = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
  g.grad[0] = perp(p2 - p1) / det;
  g.grad[1] = perp(p0 - p2) / det;
  g.grad[2] = perp(p1 - p0) / det;
  return g;
}

ElementGradients shape_gradients(const TriMesh& mesh, int triangle) {
  const auto& tri = mesh.triangles[triangle];
  return shape_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
}

void apply_dirichlet(SparseSystem& sys, const std::map<int, double>& constraints) {
  if (constraints.empty()) return;
  std::vector<char> fixed(sys.dimension(), 0);
  for (const auto& [d, v] : constraints) fixed[d] = 1;
  // Move column contributions to the rhs, then blank rows/columns.
  for (int col = 0; col < sys.A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (fixed[col] && !fixed[row]) {
        sys.b[row] -= it.value() * constraints.at(col);
      }
    }
  }
  for (int col = 0; col < sys.A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (fixed[row] || fixed[col]) {
        it.valueRef() = (row == col) ? 1.0 : 0.0;
      }
    }
  }
  for (const auto& [d, v] : constraints) sys.b[d] = v;
  sys.A.prune(0.0);
}

struct DirectSolver::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseMatrix<double> A;
  bool use_lu = false;
  double anorm = 0.0;
};

DirectSolver::DirectSolver(const Eigen::SparseMatrix<double>& A) : impl_(new Impl) {
  impl_->A = A;
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(A.rows());
  for (int col = 0; col < A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
      rowsum[it.row()] += std::abs(it.value());
    }
  }
  impl_->anorm = rowsum.size() ? rowsum.maxCoeff() : 0.0;
  impl_->ldlt.compute(A);
  bool ok = impl_->ldlt.info() == Eigen::Success;
  if (ok) {
    // LDLT succeeds structurally even for indefinite matrices; a vanishing
    // pivot still signals singularity.
    const auto& D = impl_->ldlt.vectorD();
    for (int i = 0; i < D.size(); ++i) {
      if (!(std::abs(D[i]) > 0.0) || !std::isfinite(D[i])) {
        int original = impl_->ldlt.permutationP().indices()[i];
        throw SolveError("singular pivot at degree of freedom " + std::to_string(original) + " (node " +
                         std::to_string(original / 2) + ", component " + std::to_string(original % 2) + ")");
      }
    }
  } else {
    impl_->use_lu = true;
    impl_->lu.compute(A);
    if (impl_->lu.info() != Eigen::Success) {
      throw SolveError("sparse factorization failed: " + impl_->lu.lastErrorMessage());
    }
  }
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = impl_->use_lu ? impl_->lu.solve(b).eval() : impl_->ldlt.solve(b).eval();
  const double resid = (impl_->A * x - b).norm();
  const double bound = 1e-10 * (b.norm() + impl_->anorm * x.norm());
  if (!(resid <= bound) || !x.allFinite()) {
    throw SolveError("direct solve residual " + std::to_string(resid) + " exceeds tolerance");
  }
  return x;
}

Eigen::VectorXd solve(const SparseSystem& sys) {
  DirectSolver solver(sys.A);
  return solver.solve(sys.b);
}

int assembly_threads() {
  const char* env = std::getenv("FRACSHAPE_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n > 0 ? n : 1;
}

}  // namespace fracshape
