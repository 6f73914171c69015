#pragma once

#include "fracshape/geometry.hpp"

namespace fracshape {

// Degeneracy thresholds for the spectral decomposition: below these the
// tensor counts as a multiple of the identity and Q = I is used.
inline constexpr double kDegenerateTol = 1e-10;

// Spectral decomposition of a symmetric 2x2 strain with the rotation-angle
// construction: eps = Q Sigma Q^T, Sigma diagonal, plus the clamped
// tensile part Sigma_max and the angle derivative R = dQ/dalpha.
struct SpectralSplit {
  double alpha = 0.0;
  Mat2 Q = Mat2::Identity();
  Mat2 R;                  // [[-sin a, -cos a], [cos a, -sin a]]
  Vec2 sigma;              // diagonal of Sigma = Q^T eps Q
  Vec2 sigma_max;          // componentwise max(0, sigma)
  bool degenerate = false; // eps was (numerically) a multiple of I

  Mat2 Sigma() const { return sigma.asDiagonal(); }
  Mat2 SigmaMax() const { return sigma_max.asDiagonal(); }
  // Tensile strain part Q Sigma_max Q^T.
  Mat2 eps_plus() const { return Q * sigma_max.asDiagonal() * Q.transpose(); }
  double trace_sigma_max_sq() const {
    return sigma_max[0] * sigma_max[0] + sigma_max[1] * sigma_max[1];
  }
};

// True iff |e11 - e22| <= 1e-10 and |e12| <= 1e-10.
bool is_degenerate(const SymTensor2& eps);

// Rotation angle diagonalizing eps: 1/2 arctan(2 e12 / (e11 - e22)) plus
// pi/2 when e11 > e22; the e11 == e22, e12 != 0 limit takes
// -sign(e12) pi/4 (continuity from the e11 < e22 side). Degenerate
// tensors return 0.
double rotation_angle(const SymTensor2& eps);

SpectralSplit split(const SymTensor2& eps);

}  // namespace fracshape
