#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracshape/geometry.hpp"

namespace fracshape {

enum class BoundaryTag { Bottom, Top, Left, Right, Crack, CrackFixed };

const char* tag_name(BoundaryTag tag);
std::optional<BoundaryTag> tag_from_name(const std::string& name);

struct BoundaryEdge {
  int a = -1;  // endpoint node indices, ordered so the adjacent triangle lies left
  int b = -1;
  BoundaryTag tag = BoundaryTag::Crack;
};

// Triangular mesh of the physical domain. Nodes in mm, triangles CCW,
// boundary edges tagged by geometry. Treated as immutable after
// construction; coordinate updates and remeshing return new instances.
struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  // Half-width of the initial slit; needed to recognize the pinned
  // horizontal crack faces when tags are recomputed.
  double crack_halfwidth = 0.0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
  double total_area() const;
};

struct EdgeNormal {
  int edge = -1;      // index into mesh.boundary
  Vec2 normal;        // unit outward normal of the physical domain
  double length = 0;  // edge length [mm]
};

// Geometric tolerance for assigning boundary tags (mm).
inline constexpr double kTagTol = 1e-9;

// True if a point lies on one of the pinned horizontal slit faces
// x2 = 1/2 +- delta with x1 >= 1/2.
bool on_horizontal_crack_face(const Vec2& p, double delta, double tol = kTagTol);

// Extracts and tags the boundary edges of the given connectivity.
// Throws GeometryError on non-manifold edges.
std::vector<BoundaryEdge> compute_boundary(const std::vector<Vec2>& nodes,
                                           const std::vector<std::array<int, 3>>& triangles,
                                           double crack_halfwidth);

// Rebuilds mesh.boundary in place from connectivity + geometry.
void retag_boundary(TriMesh& mesh);

// Unit outward normal and length of a boundary edge.
EdgeNormal outward_normal(const TriMesh& mesh, int edge_index);

// Minimum over all triangles and corners of the scaled Jacobian quality
// measure; 1 for an equilateral triangle, <= 0 for degenerate/inverted.
double min_scaled_jacobian(const TriMesh& mesh);
double scaled_jacobian(const Vec2& p0, const Vec2& p1, const Vec2& p2);

struct UpdateResult {
  TriMesh mesh;
  int inverted_count = 0;  // triangles with non-positive area after the move
};

// Moves every node by tau * V (node-major interleaved dof vector).
// V must vanish on outer-boundary and CrackFixed nodes; violations throw.
UpdateResult update_coordinates(const TriMesh& mesh, const Eigen::VectorXd& V, double tau);

// Nodes that must not move: all nodes on outer-boundary edges plus all
// nodes on CrackFixed edges. Returned as a per-node flag vector.
std::vector<char> pinned_nodes(const TriMesh& mesh);

// Index of the unique triangle adjacent to each boundary edge.
std::vector<int> boundary_triangles(const TriMesh& mesh);

// Signed area enclosed by the boundary loops (shoelace over tagged edges).
double boundary_polygon_area(const TriMesh& mesh);

// Structural validation: positive triangle areas, every boundary edge on
// exactly one triangle, closed boundary loops. Throws GeometryError.
void validate(const TriMesh& mesh);

}  // namespace fracshape
