#include "fracshape/spectral.hpp"

#include <cmath>

namespace fracshape {

bool is_degenerate(const SymTensor2& eps) {
  return std::abs(eps.e11 - eps.e22) <= kDegenerateTol && std::abs(eps.e12) <= kDegenerateTol;
}

double rotation_angle(const SymTensor2& eps) {
  if (is_degenerate(eps)) return 0.0;
  const double diff = eps.e11 - eps.e22;
  double base;
  if (diff == 0.0) {
    base = (eps.e12 > 0.0) ? -0.25 * M_PI : 0.25 * M_PI;
  } else {
    base = 0.5 * std::atan(2.0 * eps.e12 / diff);
  }
  return base + (eps.e11 <= eps.e22 ? 0.0 : 0.5 * M_PI);
}

SpectralSplit split(const SymTensor2& eps) {
  SpectralSplit s;
  s.degenerate = is_degenerate(eps);
  s.alpha = rotation_angle(eps);
  const double c = std::cos(s.alpha), sn = std::sin(s.alpha);
  s.Q << c, -sn, sn, c;
  s.R << -sn, -c, c, -sn;
  if (s.degenerate) {
    s.sigma = Vec2(eps.e11, eps.e22);
  } else {
    Mat2 rotated = s.Q.transpose() * eps.matrix() * s.Q;
    s.sigma = Vec2(rotated(0, 0), rotated(1, 1));
  }
  s.sigma_max = s.sigma.cwiseMax(0.0);
  return s;
}

}  // namespace fracshape
