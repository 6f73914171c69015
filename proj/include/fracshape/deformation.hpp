#pragma once

#include <memory>
#include <vector>

#include "fracshape/elasticity.hpp"

namespace fracshape {

struct PenaltyConfig {
  // First optimization iteration sweeps the whole schedule from a zero
  // initial guess; later iterations warm-start at the final value.
  std::vector<double> psi_schedule = {1e10, 1e11, 1e12, 1e13, 1e14, 1e15};
  double epsilon_gap = 1e-7;       // slack in V.n <= -eps on the crack [mm]
  double newton_tol = 1e-10;       // ||R|| <= tol * (1 + ||dL||)
  int newton_max_iter = 60;
  double armijo_c = 1e-4;          // residual decrease parameter
  double armijo_step_min = 1e-10;
};

// Sobolev H1 metric with weight A plus the cubic irreversibility penalty on
// the crack boundary; deformations vanish on the outer boundary and on the
// pinned horizontal crack faces.
class DeformationSolver {
public:
  DeformationSolver(const TriMesh& mesh, const Material& mat);
  ~DeformationSolver();
  DeformationSolver(DeformationSolver&&) noexcept;

  // Solves a(V,W) + dL[W] + psi int_u max(0,V.n+eps)^2 W.n ds = 0 for all
  // admissible W (the steepest-descent orientation). Pass the previous V to
  // warm-start at the final psi.
  NodalField2 solve(const NodalField2& dL, const PenaltyConfig& config,
                    const NodalField2* warm_start = nullptr) const;

  double metric_form(const NodalField2& V, const NodalField2& W) const;
  Eigen::VectorXd residual(const NodalField2& V, const NodalField2& dL, double psi, double eps) const;
  Eigen::SparseMatrix<double> newton_jacobian_matrix(const NodalField2& V, double psi, double eps) const;
  const std::vector<char>& pinned() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double metric_form(const TriMesh& mesh, const Material& mat, const NodalField2& V, const NodalField2& W);

NodalField2 solve_deformation(const TriMesh& mesh, const Material& mat, const NodalField2& dL,
                              const PenaltyConfig& config, const NodalField2* warm_start = nullptr);

// W~^T J W with J = a(.,.) + 2 psi int_u max(0,V.n+eps) (W.n)(W~.n) ds.
double newton_jacobian(const TriMesh& mesh, const Material& mat, const NodalField2& V, double psi,
                       double eps, const NodalField2& Wt, const NodalField2& W);

// int_u max(0, V.n + eps) ds over Crack + CrackFixed edges.
double penalty_violation(const TriMesh& mesh, const NodalField2& V, double eps);

}  // namespace fracshape
