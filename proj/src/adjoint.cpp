#include "fracshape/adjoint.hpp"

#include "fracshape/spectral.hpp"

namespace fracshape {

namespace {

// Near eigenvalue coincidence the xi-derivative denominator is clamped to
// avoid overflow; the affected trace factor vanishes there anyway.
constexpr double kDenomFloor = 1e-20;

}  // namespace

NodalField2 adjoint_rhs(const TriMesh& mesh, const Material& mat, const NodalField2& w) {
  NodalField2 F = NodalField2::Zero(2 * mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = shape_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    const SymTensor2 eps = element_strain(mesh, t, w);

    double lam_factor;      // lambda * max(0, tr eps)
    double frac_coeff = 0;  // multiplies the xi-derivative of the test strain
    Mat2 qsq;               // Q Sigma_max Q^T (contracted with eps(wtilde))
    bool degenerate = true;
    if (mat.strain_splitting) {
      const auto s = split(eps);
      lam_factor = mat.lambda * std::max(0.0, eps.trace());
      degenerate = s.degenerate;
      if (degenerate) {
        qsq = s.SigmaMax();
      } else {
        qsq = s.Q * s.SigmaMax() * s.Q.transpose();
        const double diff = eps.e11 - eps.e22;
        const double denom = diff * diff + 4.0 * eps.e12 * eps.e12;
        if (denom >= kDenomFloor) {
          const Mat2 m = s.R.transpose() * eps.matrix() * s.Q + s.Q.transpose() * eps.matrix() * s.R;
          frac_coeff = (s.SigmaMax() * m).trace() / denom;
        }
      }
    } else {
      lam_factor = mat.lambda * eps.trace();
      qsq = eps.matrix();
    }

    const double diff = eps.e11 - eps.e22;
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        // Strain of the test function e_c * phi_i.
        const double t11 = (c == 0) ? g.grad[i][0] : 0.0;
        const double t22 = (c == 1) ? g.grad[i][1] : 0.0;
        const double t12 = 0.5 * ((c == 0) ? g.grad[i][1] : g.grad[i][0]);
        double val = lam_factor * (t11 + t22);
        // tr(Sigma_max Q^T eps(wt) Q) == (Q Sigma_max Q^T) : eps(wt)
        val += 2.0 * mat.mu * (qsq(0, 0) * t11 + 2.0 * qsq(0, 1) * t12 + qsq(1, 1) * t22);
        if (!degenerate && frac_coeff != 0.0) {
          val += 2.0 * mat.mu * frac_coeff * (t12 * diff - eps.e12 * (t11 - t22));
        }
        F[dof(tri[i], c)] += g.area * val;
      }
    }
  }
  return F;
}

NodalField2 solve_adjoint(const ElasticSystem& system, const TriMesh& mesh, const Material& mat,
                          const NodalField2& w) {
  return system.solve_adjoint(adjoint_rhs(mesh, mat, w));
}

NodalField2 solve_adjoint(const TriMesh& mesh, const Material& mat, const NodalField2& w) {
  ElasticSystem system(mesh, mat);
  return solve_adjoint(system, mesh, mat, w);
}

}  // namespace fracshape
