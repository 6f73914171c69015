#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fracshape {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Thrown on invalid mesh topology or unusable geometry (non-manifold edges,
// self-intersecting boundary, degenerate elements).
class GeometryError : public std::runtime_error {
public:
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a linear or nonlinear solve cannot be completed.
class SolveError : public std::runtime_error {
public:
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on malformed config or mesh files (user input).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Symmetric 2x2 tensor, stored as the three independent entries.
struct SymTensor2 {
  double e11 = 0.0;
  double e12 = 0.0;
  double e22 = 0.0;

  double trace() const { return e11 + e22; }
  double det() const { return e11 * e22 - e12 * e12; }
  double norm() const { return std::sqrt(e11 * e11 + 2.0 * e12 * e12 + e22 * e22); }

  Mat2 matrix() const {
    Mat2 m;
    m << e11, e12, e12, e22;
    return m;
  }

  static SymTensor2 from_matrix(const Mat2& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
  }

  // Frobenius product with another symmetric tensor.
  double ddot(const SymTensor2& o) const {
    return e11 * o.e11 + 2.0 * e12 * o.e12 + e22 * o.e22;
  }

  SymTensor2 operator+(const SymTensor2& o) const { return {e11 + o.e11, e12 + o.e12, e22 + o.e22}; }
  SymTensor2 operator-(const SymTensor2& o) const { return {e11 - o.e11, e12 - o.e12, e22 - o.e22}; }
  SymTensor2 operator*(double s) const { return {e11 * s, e12 * s, e22 * s}; }
};

inline SymTensor2 sym(const Mat2& a) {
  return {a(0, 0), 0.5 * (a(0, 1) + a(1, 0)), a(1, 1)};
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace fracshape
