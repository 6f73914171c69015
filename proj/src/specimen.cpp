#include "fracshape/specimen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "fracshape/delaunay.hpp"

namespace fracshape {

std::optional<TipShape> tip_from_name(const std::string& name) {
  if (name == "flat") return TipShape::Flat;
  if (name == "round") return TipShape::Round;
  if (name == "pointy") return TipShape::Pointy;
  return std::nullopt;
}

std::optional<RefinementLevel> level_from_name(const std::string& name) {
  if (name == "very-coarse") return RefinementLevel::VeryCoarse;
  if (name == "coarse") return RefinementLevel::Coarse;
  if (name == "medium") return RefinementLevel::Medium;
  if (name == "fine") return RefinementLevel::Fine;
  if (name == "very-fine") return RefinementLevel::VeryFine;
  return std::nullopt;
}

const char* tip_name(TipShape tip) {
  switch (tip) {
    case TipShape::Flat: return "flat";
    case TipShape::Round: return "round";
    case TipShape::Pointy: return "pointy";
  }
  return "?";
}

const char* level_name(RefinementLevel level) {
  switch (level) {
    case RefinementLevel::VeryCoarse: return "very-coarse";
    case RefinementLevel::Coarse: return "coarse";
    case RefinementLevel::Medium: return "medium";
    case RefinementLevel::Fine: return "fine";
    case RefinementLevel::VeryFine: return "very-fine";
  }
  return "?";
}

double level_target_h(RefinementLevel level) {
  switch (level) {
    case RefinementLevel::VeryCoarse: return 0.085;
    case RefinementLevel::Coarse: return 0.062;
    case RefinementLevel::Medium: return 0.045;
    case RefinementLevel::Fine: return 0.033;
    case RefinementLevel::VeryFine: return 0.020;
  }
  return 0.045;
}

namespace {

// Size-field slope away from the tip; coarse meshes return to the
// background size faster so the tip cone stays a bounded fraction of the
// node budget.
double tip_growth(double h) { return std::max(1.0, h / 0.045); }

double tip_size(double delta, double h) {
  return std::clamp(0.5 * delta, h / 10.0, h);
}

// Uniform subdivision of the straight segment a -> b at spacing ~ h.
void emit_uniform(std::vector<TaggedSegment>& out, const Vec2& a, const Vec2& b, double h, BoundaryTag tag,
                  bool keep) {
  double len = (b - a).norm();
  int n = std::max(1, static_cast<int>(std::lround(len / h)));
  Vec2 prev = a;
  for (int k = 1; k <= n; ++k) {
    Vec2 p = (k == n) ? b : Vec2(a + (static_cast<double>(k) / n) * (b - a));
    out.push_back({prev, p, tag, keep});
    prev = p;
  }
}

// Subdivision of a -> b whose spacing grows from h_fine (at a) towards
// h_coarse, growth factor ~1.3 per step.
void emit_graded(std::vector<TaggedSegment>& out, const Vec2& a, const Vec2& b, double h_fine, double h_coarse,
                 BoundaryTag tag, bool keep) {
  double len = (b - a).norm();
  std::vector<double> stops{0.0};
  double d = 0.0, step = h_fine;
  while (d + 1.5 * step < len) {
    d += step;
    stops.push_back(d);
    step = std::min(h_coarse, step * 1.5);
  }
  stops.push_back(len);
  Vec2 dir = (b - a) / len;
  for (std::size_t k = 1; k < stops.size(); ++k) {
    Vec2 p = (k + 1 == stops.size()) ? b : Vec2(a + stops[k] * dir);
    out.push_back({a + stops[k - 1] * dir, p, tag, keep});
  }
}

std::vector<Vec2> tip_polyline(TipShape tip, double delta) {
  const Vec2 lo(0.5, 0.5 - delta), hi(0.5, 0.5 + delta);
  std::vector<Vec2> pts{lo};
  switch (tip) {
    case TipShape::Flat: {
      const int n = 4;
      for (int k = 1; k < n; ++k) pts.emplace_back(0.5, 0.5 - delta + 2.0 * delta * k / n);
      break;
    }
    case TipShape::Round: {
      const int n = 8;  // arc approximated by >= 8 polyline segments
      for (int k = 1; k < n; ++k) {
        double theta = 1.5 * M_PI - M_PI * k / n;
        pts.emplace_back(0.5 + delta * std::cos(theta), 0.5 + delta * std::sin(theta));
      }
      break;
    }
    case TipShape::Pointy: {
      const Vec2 apex(0.5 - delta, 0.5);
      pts.push_back(0.5 * (lo + apex));
      pts.push_back(apex);
      pts.push_back(0.5 * (apex + hi));
      break;
    }
  }
  pts.push_back(hi);
  return pts;
}

}  // namespace

TriMesh generate_with_h(const SpecimenSpec& spec, double target_h) {
  if (spec.delta <= 0.0 || spec.delta > 0.05) {
    throw GeometryError("slit half-width must satisfy 0 < delta <= 0.05");
  }
  const double h = target_h;
  const double delta = spec.delta;
  if (delta < h / 4.0) {
    std::fprintf(stderr, "warning: slit half-width %.3g below %.3g/4; tip may be under-resolved\n", delta, h);
  }
  const Vec2 c00(0, 0), c10(1, 0), c11(1, 1), c01(0, 1);
  const Vec2 mouth_lo(1, 0.5 - delta), mouth_hi(1, 0.5 + delta);
  const double h_tip = tip_size(delta, h);
  // Face sampling must start at the scale of the tip polyline segments or
  // the arc-face junction cannot be meshed at quality.
  const double face_start = std::min(0.5 * delta, h);

  std::vector<TaggedSegment> segs;
  emit_uniform(segs, c00, c10, h, BoundaryTag::Bottom, false);
  emit_uniform(segs, c10, mouth_lo, h, BoundaryTag::Right, false);
  {
    // Lower slit face, finest at the tip end; graded tip->mouth, emitted in
    // boundary (CCW) order mouth->tip.
    std::vector<TaggedSegment> face;
    emit_graded(face, Vec2(0.5, 0.5 - delta), mouth_lo, face_start, h, BoundaryTag::CrackFixed, true);
    for (auto it = face.rbegin(); it != face.rend(); ++it) {
      segs.push_back({it->b, it->a, it->tag, it->keep});
    }
  }
  {
    auto tip = tip_polyline(spec.tip, delta);
    for (std::size_t k = 1; k < tip.size(); ++k) {
      segs.push_back({tip[k - 1], tip[k], BoundaryTag::Crack, true});
    }
  }
  emit_graded(segs, Vec2(0.5, 0.5 + delta), mouth_hi, face_start, h, BoundaryTag::CrackFixed, true);
  emit_uniform(segs, mouth_hi, c11, h, BoundaryTag::Right, false);
  emit_uniform(segs, c11, c01, h, BoundaryTag::Top, false);
  emit_uniform(segs, c01, c00, h, BoundaryTag::Left, false);

  const Vec2 tip_center(0.5, 0.5);
  const double growth = tip_growth(h);
  SizeField size = [h, h_tip, growth, tip_center](const Vec2& x) {
    return std::min(h, h_tip + growth * (x - tip_center).norm());
  };
  MeshingOptions opts;
  TriMesh mesh = triangulate_polygon(segs, size, opts, delta);
  const double q = min_scaled_jacobian(mesh);
  if (q < 0.30) {
    throw GeometryError("generated specimen mesh below quality threshold (got " + std::to_string(q) + ")");
  }
  return mesh;
}

TriMesh generate(const SpecimenSpec& spec) { return generate_with_h(spec, level_target_h(spec.level)); }

namespace {

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) { return cross2(q - p, r - p); };
  double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

void check_self_intersection(const std::vector<TaggedSegment>& segs) {
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const auto &s = segs[i], &t = segs[j];
      if ((s.a - t.a).norm() == 0 || (s.a - t.b).norm() == 0 || (s.b - t.a).norm() == 0 ||
          (s.b - t.b).norm() == 0) {
        continue;  // shared endpoint
      }
      if (segments_intersect(s.a, s.b, t.a, t.b)) {
        throw GeometryError("boundary polyline self-intersects; geometry is unrecoverable");
      }
    }
  }
}

Vec2 snap_outer(Vec2 p, BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Bottom: p.y() = 0.0; break;
    case BoundaryTag::Top: p.y() = 1.0; break;
    case BoundaryTag::Left: p.x() = 0.0; break;
    case BoundaryTag::Right: p.x() = 1.0; break;
    default: break;
  }
  if (std::abs(p.x()) <= kTagTol) p.x() = 0.0;
  if (std::abs(p.x() - 1.0) <= kTagTol) p.x() = 1.0;
  if (std::abs(p.y()) <= kTagTol) p.y() = 0.0;
  if (std::abs(p.y() - 1.0) <= kTagTol) p.y() = 1.0;
  return p;
}

}  // namespace

TriMesh remesh(const TriMesh& mesh, double target_h) {
  if (mesh.boundary.empty()) throw GeometryError("remesh requires a tagged boundary");
  const double h = target_h;

  // Chain the directed boundary edges into loops.
  std::map<int, int> outgoing;  // node -> boundary edge index starting there
  for (int e = 0; e < static_cast<int>(mesh.boundary.size()); ++e) {
    if (!outgoing.emplace(mesh.boundary[e].a, e).second) {
      throw GeometryError("boundary is not a union of simple loops");
    }
  }
  std::vector<std::vector<int>> loops;
  std::vector<char> used(mesh.boundary.size(), 0);
  for (int e0 = 0; e0 < static_cast<int>(mesh.boundary.size()); ++e0) {
    if (used[e0]) continue;
    std::vector<int> loop;
    int e = e0;
    do {
      loop.push_back(e);
      used[e] = 1;
      auto it = outgoing.find(mesh.boundary[e].b);
      if (it == outgoing.end()) throw GeometryError("open boundary loop");
      e = it->second;
    } while (e != e0);
    loops.push_back(std::move(loop));
  }

  auto is_crack = [](BoundaryTag t) { return t == BoundaryTag::Crack || t == BoundaryTag::CrackFixed; };

  std::vector<TaggedSegment> segs;
  for (const auto& loop : loops) {
    std::size_t i = 0;
    while (i < loop.size()) {
      const BoundaryEdge& be = mesh.boundary[loop[i]];
      if (is_crack(be.tag)) {
        segs.push_back({mesh.nodes[be.a], mesh.nodes[be.b], be.tag, true});
        ++i;
        continue;
      }
      // Maximal run of same-tag outer edges.
      std::size_t j = i;
      std::vector<Vec2> run{mesh.nodes[be.a]};
      while (j < loop.size() && mesh.boundary[loop[j]].tag == be.tag) {
        run.push_back(mesh.nodes[mesh.boundary[loop[j]].b]);
        ++j;
      }
      Vec2 P = snap_outer(run.front(), be.tag);
      Vec2 Q = snap_outer(run.back(), be.tag);
      // Outer nodes are pinned, so the run must be straight; fall back to
      // keeping it verbatim if it is not.
      bool straight = true;
      Vec2 dir = Q - P;
      double len = dir.norm();
      for (const Vec2& p : run) {
        if (std::abs(cross2(dir, p - P)) > 1e-9 * std::max(len, 1.0)) straight = false;
      }
      if (straight && len > 0) {
        std::vector<TaggedSegment> tmp;
        emit_uniform(tmp, P, Q, h, be.tag, false);
        for (auto& s : tmp) {
          s.a = snap_outer(s.a, be.tag);
          s.b = snap_outer(s.b, be.tag);
          segs.push_back(s);
        }
      } else {
        for (std::size_t k = 1; k < run.size(); ++k) {
          segs.push_back({run[k - 1], run[k], be.tag, true});
        }
      }
      i = j;
    }
  }

  check_self_intersection(segs);

  // Size field graded away from the current crack tip.
  Vec2 tip(0.5, 0.5);
  double min_x1 = std::numeric_limits<double>::max();
  for (const auto& e : mesh.boundary) {
    if (!is_crack(e.tag)) continue;
    for (int n : {e.a, e.b}) {
      if (mesh.nodes[n].x() < min_x1) {
        min_x1 = mesh.nodes[n].x();
        tip = mesh.nodes[n];
      }
    }
  }
  double near_seg = h / 8.0;
  for (const auto& s : segs) {
    if (s.tag != BoundaryTag::Crack) continue;
    if ((0.5 * (s.a + s.b) - tip).norm() < 3.0 * h) near_seg = std::min(near_seg, (s.b - s.a).norm());
  }
  const double h_tip = std::clamp(1.5 * near_seg, h / 24.0, h);
  const double growth = tip_growth(h);
  SizeField size = [h, h_tip, growth, tip](const Vec2& x) {
    return std::min(h, h_tip + growth * (x - tip).norm());
  };

  MeshingOptions opts;
  TriMesh out = triangulate_polygon(segs, size, opts, mesh.crack_halfwidth);
  double old_area = mesh.total_area();
  double new_area = out.total_area();
  if (std::abs(new_area - old_area) > 1e-8 * std::max(1.0, old_area)) {
    throw GeometryError("remesh changed the domain area");
  }
  if (min_scaled_jacobian(out) < 0.30) {
    throw GeometryError("remesh could not restore mesh quality above 0.30");
  }
  return out;
}

}  // namespace fracshape
