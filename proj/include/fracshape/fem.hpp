#pragma once

#include <Eigen/Sparse>
#include <map>
#include <memory>

#include "fracshape/mesh.hpp"

namespace fracshape {

// Per-node 2-vector field, node-major interleaved: dof(i, c) = 2*i + c.
using NodalField2 = Eigen::VectorXd;

inline int dof(int node, int comp) { return 2 * node + comp; }
inline Vec2 node_value(const NodalField2& f, int node) { return Vec2(f[2 * node], f[2 * node + 1]); }

// Constant P1 basis gradients on one triangle plus its area.
struct ElementGradients {
  Vec2 grad[3];  // gradient of the barycentric basis function of each corner
  double area = 0.0;
};

ElementGradients shape_gradients(const TriMesh& mesh, int triangle);
ElementGradients shape_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2);

// Symmetric sparse system A x = b.
struct SparseSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;

  int dimension() const { return static_cast<int>(A.rows()); }
};

// Replaces constrained rows/columns by the identity with b = prescribed
// value; moves column contributions of constrained dof to the rhs.
void apply_dirichlet(SparseSystem& sys, const std::map<int, double>& constraints);

// Direct sparse solve (Cholesky with LU fallback). Checks the residual
// bound ||Ax-b|| <= 1e-10 (||b|| + ||A|| ||x||) and throws SolveError
// otherwise, naming the first bad pivot when the factorization fails.
Eigen::VectorXd solve(const SparseSystem& sys);

// Reusable factorization for repeated solves with the same matrix.
class DirectSolver {
public:
  explicit DirectSolver(const Eigen::SparseMatrix<double>& A);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Assembly parallelism cap from FRACSHAPE_THREADS (>=1; default 1).
int assembly_threads();

}  // namespace fracshape
