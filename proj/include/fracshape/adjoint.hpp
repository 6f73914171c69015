#pragma once

#include "fracshape/elasticity.hpp"

namespace fracshape {

// Derivative of the bulk energy with respect to the state: the vector F
// with F . wtilde = d/dt E_bulk(w + t wtilde)|_{t=0}, covering both the
// degenerate and the rotation-angle spectral branch.
NodalField2 adjoint_rhs(const TriMesh& mesh, const Material& mat, const NodalField2& w);

// Solves eps(wtilde):sigma(z) = -F[wtilde] over the homogeneous Dirichlet
// space on Bottom + Top, with the same stiffness matrix as the state solve.
NodalField2 solve_adjoint(const TriMesh& mesh, const Material& mat, const NodalField2& w);
NodalField2 solve_adjoint(const ElasticSystem& system, const TriMesh& mesh, const Material& mat,
                          const NodalField2& w);

}  // namespace fracshape
