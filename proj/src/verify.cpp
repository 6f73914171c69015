#include "fracshape/verify.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "fracshape/adjoint.hpp"
#include "fracshape/shape_derivative.hpp"
#include "fracshape/spectral.hpp"

namespace fracshape {

namespace {

double rel_err(double got, double want) {
  const double scale = std::max({std::abs(got), std::abs(want), 1e-300});
  if (std::abs(got) < 1e-14 && std::abs(want) < 1e-14) return 0.0;
  return std::abs(got - want) / scale;
}

void dump_split_csv(const std::string& path, const TriMesh& mesh, const NodalField2& w) {
  std::ofstream out(path, std::ios::trunc);
  out << "element,eps11,eps12,eps22,alpha,sigma1,sigma2,offdiag,clamped1,clamped2\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const SymTensor2 eps = element_strain(mesh, t, w);
    const auto s = split(eps);
    const Mat2 rot = s.Q.transpose() * eps.matrix() * s.Q;
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                  eps.e11, eps.e12, eps.e22, s.alpha, s.sigma[0], s.sigma[1], rot(0, 1), s.sigma_max[0],
                  s.sigma_max[1]);
    out << buf;
  }
}

// Gaussian bump with fixed direction, zeroed at pinned nodes.
NodalField2 bump_field(const TriMesh& mesh, const Vec2& center, double radius, const Vec2& dir) {
  NodalField2 V = NodalField2::Zero(2 * mesh.num_nodes());
  const auto pinned = pinned_nodes(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (pinned[i]) continue;
    const double r2 = (mesh.nodes[i] - center).squaredNorm();
    const double amp = std::exp(-r2 / (2.0 * radius * radius));
    V[2 * i] = amp * dir.x();
    V[2 * i + 1] = amp * dir.y();
  }
  return V;
}

double lagrangian(const TriMesh& mesh, const Material& mat, const BoundaryCondition& bc) {
  ElasticSystem system(mesh, mat);
  const NodalField2 w = system.solve_state(bc);
  const NodalField2 z = solve_adjoint(system, mesh, mat, w);
  return objective(mesh, mat, w) + constraint_integral(mesh, mat, w, z);
}

}  // namespace

bool verify_spectral(unsigned seed, const std::string& out_dir) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  bool ok = true;
  double worst_offdiag = 0, worst_eig = 0, worst_trace = 0;
  for (int k = 0; k < 10000; ++k) {
    double scale = std::pow(10.0, -6 + 12.0 * (k % 13) / 12.0);
    SymTensor2 eps{uni(rng) * scale, uni(rng) * scale, uni(rng) * scale};
    if (k % 7 == 0) eps.e12 = 0.0;
    if (k % 11 == 0) eps.e22 = eps.e11;
    const auto s = split(eps);
    const double tol = 1e-12 * (1.0 + eps.norm());
    const Mat2 rot = s.Q.transpose() * eps.matrix() * s.Q;
    worst_offdiag = std::max(worst_offdiag, std::abs(rot(0, 1)) / (1.0 + eps.norm()));
    // Closed-form eigenvalues from trace/determinant.
    const double mid = 0.5 * eps.trace();
    const double rad = std::sqrt(std::max(0.0, mid * mid - eps.det()));
    const double lo = mid - rad, hi = mid + rad;
    const double d1 = std::min(s.sigma[0], s.sigma[1]), d2 = std::max(s.sigma[0], s.sigma[1]);
    worst_eig = std::max({worst_eig, std::abs(d1 - lo) / (1.0 + eps.norm()),
                          std::abs(d2 - hi) / (1.0 + eps.norm())});
    const Mat2 ep = s.eps_plus();
    const double tr_direct = ep.cwiseProduct(ep).sum();
    worst_trace = std::max(worst_trace, std::abs(tr_direct - s.trace_sigma_max_sq()) /
                                            (1.0 + s.trace_sigma_max_sq()));
    if (std::abs(rot(0, 1)) > tol || s.sigma_max[0] < 0.0 || s.sigma_max[1] < 0.0) ok = false;
  }
  ok = ok && worst_eig <= 1e-12 && worst_trace <= 1e-12;
  std::printf("spectral random sweep: offdiag %.3e  eig %.3e  trace %.3e -> %s\n", worst_offdiag,
              worst_eig, worst_trace, ok ? "ok" : "FAIL");

  // Strain-split demonstration on the medium mesh, tension 5 um and shear
  // -10 um.
  SpecimenSpec spec;
  const TriMesh mesh = generate(spec);
  Material mat;
  ElasticSystem system(mesh, mat);
  struct Case {
    const char* name;
    Vec2 load;
  } cases[] = {{"tension", Vec2(0, 5e-3)}, {"shear", Vec2(-10e-3, 0)}};
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (const auto& c : cases) {
    const NodalField2 w = system.solve_state({c.load});
    double max_off = 0, min_clamped = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const SymTensor2 eps = element_strain(mesh, t, w);
      const auto s = split(eps);
      const Mat2 rot = s.Q.transpose() * eps.matrix() * s.Q;
      max_off = std::max(max_off, std::abs(rot(0, 1)));
      min_clamped = std::min({min_clamped, s.sigma_max[0], s.sigma_max[1]});
    }
    const std::string path = (fs::path(out_dir) / (std::string("spectral_") + c.name + ".csv")).string();
    dump_split_csv(path, mesh, w);
    const bool case_ok = max_off <= 1e-10 && min_clamped >= -1e-16;
    ok = ok && case_ok;
    std::printf("spectral %s demo: max offdiag %.3e  min clamped %.3e  (%s) -> %s\n", c.name, max_off,
                min_clamped, path.c_str(), case_ok ? "ok" : "FAIL");
  }
  return ok;
}

bool verify_adjoint(unsigned seed) {
  SpecimenSpec spec;
  spec.tip = TipShape::Flat;
  spec.delta = 0.05;
  const TriMesh mesh = generate_with_h(spec, 0.3);
  Material mat;
  BoundaryCondition bc{Vec2(0, 2e-3)};
  ElasticSystem system(mesh, mat);
  const NodalField2 w = system.solve_state(bc);
  const NodalField2 F = adjoint_rhs(mesh, mat, w);

  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  const double hs[3] = {1e-5, 1e-6, 1e-7};
  bool ok = true;
  std::printf("adjoint FD check on %d nodes (w_D = 2 um tension)\n", mesh.num_nodes());
  std::printf("%4s  %12s  %12s  %12s  %10s\n", "dir", "err(1e-5)", "err(1e-6)", "err(1e-7)", "result");
  for (int k = 0; k < 20; ++k) {
    NodalField2 dir = NodalField2::Zero(w.size());
    for (int i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    dir *= 1e-3 / dir.norm() * std::sqrt(static_cast<double>(dir.size()));
    const double analytic = F.dot(dir);
    double errs[3];
    for (int hi = 0; hi < 3; ++hi) {
      const double h = hs[hi];
      const double ep = bulk_energy(mesh, mat, w + h * dir);
      const double em = bulk_energy(mesh, mat, w - h * dir);
      errs[hi] = rel_err((ep - em) / (2.0 * h), analytic);
    }
    const double best = std::min({errs[0], errs[1], errs[2]});
    const bool pass = best <= 1e-6;
    ok = ok && pass;
    std::printf("%4d  %12.3e  %12.3e  %12.3e  %10s\n", k, errs[0], errs[1], errs[2],
                pass ? "ok" : "FAIL");
  }
  return ok;
}

bool verify_shape(unsigned seed) {
  SpecimenSpec spec;
  spec.level = RefinementLevel::Coarse;
  const TriMesh mesh = generate(spec);
  Material mat;
  BoundaryCondition bc{Vec2(0, 4e-3)};
  ElasticSystem system(mesh, mat);
  const NodalField2 w = system.solve_state(bc);
  const NodalField2 z = solve_adjoint(system, mesh, mat, w);
  const auto terms = shape_derivative_terms(mesh, mat, w, z);
  const NodalField2 dL = terms.total();

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Vec2 tip = crack_tip(mesh, LoadMode::Tension);
  bool ok = true;
  const double h = 1e-6;
  std::printf("shape-derivative FD check (coarse mesh, w_D = 4 um tension, h = %g)\n", h);
  std::printf("%4s  %11s %11s %11s %11s %11s %11s  %6s\n", "fld", "full", "lam", "mu", "coup", "reg",
              "crack", "result");
  for (int k = 0; k < 5; ++k) {
    const Vec2 center = (k == 0) ? tip : Vec2(tip + 0.35 * Vec2(uni(rng), uni(rng)));
    const Vec2 dir = Vec2(uni(rng), uni(rng)).normalized();
    const NodalField2 V = bump_field(mesh, center, 0.12, dir);

    auto moved = [&](double t) { return update_coordinates(mesh, V, t).mesh; };
    const TriMesh mp = moved(h), mm = moved(-h);

    // Full Lagrangian with fresh solves.
    const double fd_full = (lagrangian(mp, mat, bc) - lagrangian(mm, mat, bc)) / (2.0 * h);
    const double e_full = rel_err(fd_full, dL.dot(V));

    // Per-term pieces with transported nodal fields.
    auto lam_piece = [&](const TriMesh& m) {
      double total = 0;
      for (int t = 0; t < m.num_triangles(); ++t) {
        const double trp = std::max(0.0, element_strain(m, t, w).trace());
        total += m.triangle_area(t) * 0.5 * mat.lambda * trp * trp;
      }
      return total;
    };
    auto mu_piece = [&](const TriMesh& m) {
      double total = 0;
      for (int t = 0; t < m.num_triangles(); ++t) {
        total += m.triangle_area(t) * mat.mu * split(element_strain(m, t, w)).trace_sigma_max_sq();
      }
      return total;
    };
    auto coup_piece = [&](const TriMesh& m) { return constraint_integral(m, mat, w, z); };

    const double e_lam =
        rel_err((lam_piece(mp) - lam_piece(mm)) / (2.0 * h), (terms.lam_material + terms.div_lam).dot(V));
    const double e_mu =
        rel_err((mu_piece(mp) - mu_piece(mm)) / (2.0 * h), (terms.mu_material + terms.div_mu).dot(V));
    const double e_coup = rel_err((coup_piece(mp) - coup_piece(mm)) / (2.0 * h),
                                  (terms.coup_material + terms.div_coup).dot(V));
    const double e_reg = rel_err((-reg_energy(mp, mat) + reg_energy(mm, mat)) / (2.0 * h),
                                 terms.div_reg.dot(V));
    const double e_crack = rel_err((fracture_energy(mp, mat) - fracture_energy(mm, mat)) / (2.0 * h),
                                   terms.crack.dot(V));
    const bool pass = e_full <= 1e-4 && e_lam <= 1e-4 && e_mu <= 1e-4 && e_coup <= 1e-4 &&
                      e_reg <= 1e-4 && e_crack <= 1e-4;
    ok = ok && pass;
    std::printf("%4d  %11.3e %11.3e %11.3e %11.3e %11.3e %11.3e  %6s\n", k, e_full, e_lam, e_mu, e_coup,
                e_reg, e_crack, pass ? "ok" : "FAIL");
  }
  return ok;
}

bool verify_deformation(unsigned seed) {
  SpecimenSpec spec;
  spec.tip = TipShape::Flat;
  spec.delta = 0.05;
  const TriMesh small = generate_with_h(spec, 0.3);
  Material mat;
  bool ok = true;

  // Dense SPD check of the metric on a small mesh.
  {
    DeformationSolver solver(small, mat);
    const int n = 2 * small.num_nodes();
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[i] = 1.0;
      Eigen::VectorXd col(n);
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        f[j] = 1.0;
        col[j] = solver.metric_form(f, e);
      }
      dense.col(i) = col;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    const double min_eig = eig.eigenvalues().minCoeff();
    const bool spd = min_eig > 0.0;
    ok = ok && spd;
    std::printf("metric dense eigencheck (%d dof): min eigenvalue %.3e -> %s\n", n, min_eig,
                spd ? "ok" : "FAIL");
  }

  // Newton convergence and the contact conditions on the medium mesh.
  SpecimenSpec med;
  const TriMesh mesh = generate(med);
  BoundaryCondition bc{Vec2(0, 5e-3)};
  ElasticSystem system(mesh, mat);
  const NodalField2 w = system.solve_state(bc);
  const NodalField2 z = solve_adjoint(system, mesh, mat, w);
  const NodalField2 dL = shape_derivative_vector(mesh, mat, w, z);
  PenaltyConfig pc;
  DeformationSolver solver(mesh, mat);
  const NodalField2 V = solver.solve(dL, pc);
  const double rnorm = solver.residual(V, dL, pc.psi_schedule.back(), pc.epsilon_gap).norm();
  const double rtol = pc.newton_tol * (1.0 + dL.norm());
  const double viol = penalty_violation(mesh, V, pc.epsilon_gap);
  double pinned_max = 0;
  const auto& pinned = solver.pinned();
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (pinned[i]) pinned_max = std::max({pinned_max, std::abs(V[2 * i]), std::abs(V[2 * i + 1])});
  }
  const bool newton_ok = rnorm <= rtol;
  const bool viol_ok = viol <= 1e-6;
  const bool pin_ok = pinned_max == 0.0;
  ok = ok && newton_ok && viol_ok && pin_ok;
  std::printf("newton residual %.3e (tol %.3e) -> %s\n", rnorm, rtol, newton_ok ? "ok" : "FAIL");
  std::printf("penalty violation integral %.3e -> %s\n", viol, viol_ok ? "ok" : "FAIL");
  std::printf("max |V| on pinned dof %.3e -> %s\n", pinned_max, pin_ok ? "ok" : "FAIL");
  (void)seed;
  return ok;
}

}  // namespace fracshape
