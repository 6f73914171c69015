#pragma once

#include <optional>
#include <string>

#include "fracshape/mesh.hpp"

namespace fracshape {

enum class TipShape { Flat, Round, Pointy };
enum class RefinementLevel { VeryCoarse, Coarse, Medium, Fine, VeryFine };

std::optional<TipShape> tip_from_name(const std::string& name);
std::optional<RefinementLevel> level_from_name(const std::string& name);
const char* tip_name(TipShape tip);
const char* level_name(RefinementLevel level);

// Target edge length per refinement level (mm).
double level_target_h(RefinementLevel level);

// Single-edge-notched specimen: unit square with a horizontal slit of
// half-width delta from the center to the right edge.
struct SpecimenSpec {
  TipShape tip = TipShape::Round;
  double delta = 1e-2;
  RefinementLevel level = RefinementLevel::Medium;
};

TriMesh generate(const SpecimenSpec& spec);
TriMesh generate_with_h(const SpecimenSpec& spec, double target_h);

// Re-triangulates the region bounded by the current mesh boundary. Crack
// faces are preserved vertex-for-vertex; the outer boundary is re-sampled
// at spacing ~ target_h. Throws GeometryError if the boundary polyline
// self-intersects or quality 0.30 cannot be restored.
TriMesh remesh(const TriMesh& mesh, double target_h);

}  // namespace fracshape
