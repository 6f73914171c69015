#pragma once

#include <map>
#include <memory>

#include "fracshape/fem.hpp"
#include "fracshape/mesh.hpp"

namespace fracshape {

// Material and algorithmic constants. Stress units N/mm^2, Gc in N/mm.
struct Material {
  double lambda = 121.15e3;
  double mu = 80.77e3;
  double gc = 2.7;
  double nu_vol = 10.0;
  double a_metric = 10.0;
  // Debug toggle: with splitting off the clamps are removed and the full
  // strain drives the bulk energy (classical linear elasticity).
  bool strain_splitting = true;

  void check() const {
    if (!(lambda > 0) || !(mu > 0) || !(gc > 0) || !(nu_vol > 0) || !(a_metric > 0)) {
      throw std::invalid_argument("material constants must be positive");
    }
  }
};

// Dirichlet data: Bottom is clamped to (0,0), Top is prescribed both
// components; Left/Right/Crack faces are traction-free.
struct BoundaryCondition {
  Vec2 top = Vec2::Zero();  // [mm]
};

SymTensor2 element_strain(const TriMesh& mesh, int triangle, const NodalField2& w);
SymTensor2 stress(const Material& mat, const SymTensor2& eps);

// Elastic stiffness shared by the state and adjoint solves: the operator is
// self-adjoint, so both use the identical assembled/eliminated matrix and
// one factorization.
class ElasticSystem {
public:
  ElasticSystem(const TriMesh& mesh, const Material& mat);
  ~ElasticSystem();
  ElasticSystem(ElasticSystem&&) noexcept;

  NodalField2 solve_state(const BoundaryCondition& bc) const;
  // Solves K z = -F with homogeneous Dirichlet rows (z in H^1_D).
  NodalField2 solve_adjoint(const NodalField2& F) const;

  const Eigen::SparseMatrix<double>& matrix() const;      // after elimination
  const Eigen::SparseMatrix<double>& raw_matrix() const;  // before elimination
  const std::map<int, int>& dirichlet_nodes() const;      // node -> 0 bottom, 1 top

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

NodalField2 solve_state(const TriMesh& mesh, const Material& mat, const BoundaryCondition& bc);

double bulk_energy(const TriMesh& mesh, const Material& mat, const NodalField2& w);
double fracture_energy(const TriMesh& mesh, const Material& mat);
double reg_energy(const TriMesh& mesh, const Material& mat);
double objective(const TriMesh& mesh, const Material& mat, const NodalField2& w);

// int_Omega sigma(w) : eps(z) dx (the constraint functional).
double constraint_integral(const TriMesh& mesh, const Material& mat, const NodalField2& w,
                           const NodalField2& z);

// Sum over Top edges of sigma|_element * n * length [N/mm].
Vec2 boundary_force(const TriMesh& mesh, const Material& mat, const NodalField2& w);

}  // namespace fracshape
