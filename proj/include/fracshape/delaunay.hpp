#pragma once

#include <functional>
#include <vector>

#include "fracshape/mesh.hpp"

namespace fracshape {

// One segment of the (closed, CCW) boundary polyline handed to the mesher.
// Protected segments are kept vertex-for-vertex; unprotected ones may be
// split during refinement.
struct TaggedSegment {
  Vec2 a;
  Vec2 b;
  BoundaryTag tag = BoundaryTag::Crack;
  bool keep = false;  // true: segment must survive unsplit
};

using SizeField = std::function<double(const Vec2&)>;

struct MeshingOptions {
  double min_angle_deg = 23.0;  // refinement quality target
  double size_factor = 1.45;    // longest edge allowed = factor * size(x)
  int max_nodes = 400000;
};

// Conforming constrained-Delaunay triangulation of the region enclosed by
// the given boundary loops, refined until every triangle meets the angle
// target (where attainable without splitting protected segments) and the
// local size bound. Boundary tags are taken from the input segments.
TriMesh triangulate_polygon(const std::vector<TaggedSegment>& segments, const SizeField& size,
                            const MeshingOptions& opts, double crack_halfwidth);

}  // namespace fracshape
