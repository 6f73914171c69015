#include "fracshape/shape_derivative.hpp"

#include "fracshape/spectral.hpp"

namespace fracshape {

namespace {

constexpr double kDenomFloor = 1e-20;

Mat2 displacement_gradient(const TriMesh& mesh, int t, const NodalField2& f, const ElementGradients& g) {
  const auto& tri = mesh.triangles[t];
  Mat2 grad = Mat2::Zero();
  for (int i = 0; i < 3; ++i) grad += node_value(f, tri[i]) * g.grad[i].transpose();
  return grad;
}

}  // namespace

ShapeDerivativeTerms shape_derivative_terms(const TriMesh& mesh, const Material& mat,
                                            const NodalField2& w, const NodalField2& z) {
  const int n = 2 * mesh.num_nodes();
  if (w.size() != n || z.size() != n) throw std::invalid_argument("field size does not match mesh");
  ShapeDerivativeTerms out;
  for (NodalField2* v : {&out.lam_material, &out.coup_material, &out.mu_material, &out.div_lam, &out.div_mu,
                         &out.div_coup, &out.div_reg, &out.crack}) {
    *v = NodalField2::Zero(n);
  }

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = shape_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    const Mat2 gw = displacement_gradient(mesh, t, w, g);
    const Mat2 gz = displacement_gradient(mesh, t, z, g);
    const SymTensor2 eps = sym(gw);
    const SymTensor2 epz = sym(gz);
    const Mat2 sw = stress(mat, eps).matrix();
    const Mat2 sz = stress(mat, epz).matrix();

    double lam_factor, e_lam, e_mu;
    Mat2 qsq;               // contracted against grad w grad V in the mu branch
    double frac_coeff = 0;  // T / denom, zero in the degenerate branch
    Mat2 mgwt = Mat2::Zero();
    if (mat.strain_splitting) {
      const auto s = split(eps);
      const double trp = std::max(0.0, eps.trace());
      lam_factor = mat.lambda * trp;
      e_lam = 0.5 * mat.lambda * trp * trp;
      e_mu = mat.mu * s.trace_sigma_max_sq();
      if (s.degenerate) {
        qsq = s.SigmaMax();
      } else {
        qsq = s.Q * s.SigmaMax() * s.Q.transpose();
        const double diff = eps.e11 - eps.e22;
        const double denom = diff * diff + 4.0 * eps.e12 * eps.e12;
        if (denom >= kDenomFloor) {
          const Mat2 m = s.R.transpose() * eps.matrix() * s.Q + s.Q.transpose() * eps.matrix() * s.R;
          frac_coeff = (s.SigmaMax() * m).trace() / denom;
          Mat2 M;
          M << -eps.e12, 0.5 * diff, 0.5 * diff, eps.e12;
          mgwt = M * gw.transpose();
        }
      }
    } else {
      const double tr = eps.trace();
      lam_factor = mat.lambda * tr;
      e_lam = 0.5 * mat.lambda * tr * tr;
      e_mu = mat.mu * eps.ddot(eps);
      qsq = eps.matrix();
    }
    const double coup = sw.cwiseProduct(epz.matrix()).sum();

    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        // grad V for V = e_c phi_i has row c equal to grad[i]; products with
        // it reduce to row/column picks.
        const Vec2 gi = g.grad[i];
        const double divv = gi[c];
        // tr(grad w grad V) = sum_j gw(j,c) gi[j]
        const double tr_gw_gv = gw(0, c) * gi[0] + gw(1, c) * gi[1];
        // (grad w grad V)_{jk} = gw(j,c) gi[k]; contract with symmetric S:
        auto contract = [&](const Mat2& S) {
          return gw(0, c) * (S(0, 0) * gi[0] + S(0, 1) * gi[1]) +
                 gw(1, c) * (S(1, 0) * gi[0] + S(1, 1) * gi[1]);
        };
        const double gz_contract_sw = gz(0, c) * (sw(0, 0) * gi[0] + sw(0, 1) * gi[1]) +
                                      gz(1, c) * (sw(1, 0) * gi[0] + sw(1, 1) * gi[1]);

        const int d = dof(tri[i], c);
        out.lam_material[d] -= g.area * lam_factor * tr_gw_gv;
        out.coup_material[d] -= g.area * (contract(sz) + gz_contract_sw);
        double mu_part = contract(qsq);
        if (frac_coeff != 0.0) {
          // (M grad w^T) : grad V picks row c of M grad w^T.
          mu_part += frac_coeff * (mgwt(c, 0) * gi[0] + mgwt(c, 1) * gi[1]);
        }
        out.mu_material[d] -= g.area * 2.0 * mat.mu * mu_part;
        out.div_lam[d] += g.area * divv * e_lam;
        out.div_mu[d] += g.area * divv * e_mu;
        out.div_coup[d] += g.area * divv * coup;
        out.div_reg[d] -= g.area * divv * mat.nu_vol;
      }
    }
  }

  // Crack-boundary term, evaluated with the adjacent element's constant
  // gradient: Gc/2 (div V - n^T grad V n) per unit length.
  const auto adj = boundary_triangles(mesh);
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const BoundaryTag tag = mesh.boundary[e].tag;
    if (tag != BoundaryTag::Crack && tag != BoundaryTag::CrackFixed) continue;
    const auto en = outward_normal(mesh, static_cast<int>(e));
    const auto g = shape_gradients(mesh, adj[e]);
    const auto& tri = mesh.triangles[adj[e]];
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        const Vec2 gi = g.grad[i];
        const double divv = gi[c];
        const double nvn = en.normal[c] * gi.dot(en.normal);
        out.crack[dof(tri[i], c)] += 0.5 * mat.gc * en.length * (divv - nvn);
      }
    }
  }
  return out;
}

NodalField2 shape_derivative_vector(const TriMesh& mesh, const Material& mat, const NodalField2& w,
                                    const NodalField2& z) {
  return shape_derivative_terms(mesh, mat, w, z).total();
}

double crack_boundary_term(const TriMesh& mesh, const Material& mat, const NodalField2& V) {
  const auto adj = boundary_triangles(mesh);
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const BoundaryTag tag = mesh.boundary[e].tag;
    if (tag != BoundaryTag::Crack && tag != BoundaryTag::CrackFixed) continue;
    const auto en = outward_normal(mesh, static_cast<int>(e));
    const auto g = shape_gradients(mesh, adj[e]);
    Mat2 gv = Mat2::Zero();
    const auto& tri = mesh.triangles[adj[e]];
    for (int i = 0; i < 3; ++i) gv += node_value(V, tri[i]) * g.grad[i].transpose();
    const double divv = gv.trace();
    const double nvn = en.normal.dot(gv * en.normal);
    total += 0.5 * mat.gc * en.length * (divv - nvn);
  }
  return total;
}

}  // namespace fracshape
