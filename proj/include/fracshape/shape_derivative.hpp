#pragma once

#include "fracshape/elasticity.hpp"

namespace fracshape {

// Shape derivative of the Lagrangian as a nodal vector (Riesz representative
// w.r.t. the Euclidean dof pairing): dL[V] = dot(vector, V). Split into the
// pieces whose sums form the five terms of the derivative so each one can be
// validated against the finite difference of its own energy contribution.
struct ShapeDerivativeTerms {
  NodalField2 lam_material;   // -int lam max(0,tr eps) tr(grad w grad V)
  NodalField2 coup_material;  // -int sym(grad w grad V):sigma(z) + sigma(w):sym(grad z grad V)
  NodalField2 mu_material;    // -int 2 mu {spectral branch}
  NodalField2 div_lam;        // +int div V * lam/2 max(0,tr eps)^2
  NodalField2 div_mu;         // +int div V * mu tr(Sigma_max^2)
  NodalField2 div_coup;       // +int div V * sigma(w):eps(z)
  NodalField2 div_reg;        // -int div V * nu
  NodalField2 crack;          // +int_u Gc/2 (div V - n^T grad V n)

  NodalField2 total() const {
    return lam_material + coup_material + mu_material + div_lam + div_mu + div_coup + div_reg + crack;
  }
};

ShapeDerivativeTerms shape_derivative_terms(const TriMesh& mesh, const Material& mat,
                                            const NodalField2& w, const NodalField2& z);

NodalField2 shape_derivative_vector(const TriMesh& mesh, const Material& mat, const NodalField2& w,
                                    const NodalField2& z);

// Fracture-length part of the shape derivative evaluated on a given field
// (equals Gc/2 times the integrated tangential stretch of the crack).
double crack_boundary_term(const TriMesh& mesh, const Material& mat, const NodalField2& V);

}  // namespace fracshape
