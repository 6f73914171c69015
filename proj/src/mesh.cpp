#include "fracshape/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace fracshape {

const char* tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Bottom: return "bottom";
    case BoundaryTag::Top: return "top";
    case BoundaryTag::Left: return "left";
    case BoundaryTag::Right: return "right";
    case BoundaryTag::Crack: return "crack";
    case BoundaryTag::CrackFixed: return "crack_fixed";
  }
  return "?";
}

std::optional<BoundaryTag> tag_from_name(const std::string& name) {
  if (name == "bottom") return BoundaryTag::Bottom;
  if (name == "top") return BoundaryTag::Top;
  if (name == "left") return BoundaryTag::Left;
  if (name == "right") return BoundaryTag::Right;
  if (name == "crack") return BoundaryTag::Crack;
  if (name == "crack_fixed") return BoundaryTag::CrackFixed;
  return std::nullopt;
}

double TriMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross2(nodes[tri[1]] - nodes[tri[0]], nodes[tri[2]] - nodes[tri[0]]);
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

bool on_horizontal_crack_face(const Vec2& p, double delta, double tol) {
  if (delta <= 0.0) return false;
  const bool on_face = std::abs(p.y() - (0.5 - delta)) <= tol || std::abs(p.y() - (0.5 + delta)) <= tol;
  return on_face && p.x() >= 0.5 - tol;
}

namespace {

BoundaryTag classify_edge(const Vec2& pa, const Vec2& pb, double delta) {
  auto both = [&](auto pred) { return pred(pa) && pred(pb); };
  if (both([](const Vec2& p) { return std::abs(p.y()) <= kTagTol; })) return BoundaryTag::Bottom;
  if (both([](const Vec2& p) { return std::abs(p.y() - 1.0) <= kTagTol; })) return BoundaryTag::Top;
  if (both([](const Vec2& p) { return std::abs(p.x()) <= kTagTol; })) return BoundaryTag::Left;
  if (both([](const Vec2& p) { return std::abs(p.x() - 1.0) <= kTagTol; })) return BoundaryTag::Right;
  if (both([&](const Vec2& p) { return on_horizontal_crack_face(p, delta); })) return BoundaryTag::CrackFixed;
  return BoundaryTag::Crack;
}

}  // namespace

std::vector<BoundaryEdge> compute_boundary(const std::vector<Vec2>& nodes,
                                           const std::vector<std::array<int, 3>>& triangles,
                                           double crack_halfwidth) {
  // Count adjacency per undirected edge; keep the directed (CCW) copy so
  // boundary edges come out with the triangle on their left.
  std::map<std::pair<int, int>, int> count;
  std::map<std::pair<int, int>, std::pair<int, int>> directed;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      auto key = std::minmax(a, b);
      int c = ++count[key];
      if (c > 2) {
        throw GeometryError("non-manifold edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") shared by more than two triangles");
      }
      if (c == 1) directed[key] = {a, b};
    }
  }
  std::vector<BoundaryEdge> result;
  for (const auto& [key, c] : count) {
    if (c != 1) continue;
    auto [a, b] = directed[key];
    BoundaryEdge e;
    e.a = a;
    e.b = b;
    e.tag = classify_edge(nodes[a], nodes[b], crack_halfwidth);
    result.push_back(e);
  }
  return result;
}

void retag_boundary(TriMesh& mesh) {
  mesh.boundary = compute_boundary(mesh.nodes, mesh.triangles, mesh.crack_halfwidth);
}

EdgeNormal outward_normal(const TriMesh& mesh, int edge_index) {
  const BoundaryEdge& e = mesh.boundary[edge_index];
  Vec2 d = mesh.nodes[e.b] - mesh.nodes[e.a];
  double len = d.norm();
  if (len <= 0.0) throw GeometryError("zero-length boundary edge");
  // Boundary edges are stored CCW (domain on the left), so the outward
  // normal is the clockwise rotation of the edge direction.
  EdgeNormal n;
  n.edge = edge_index;
  n.length = len;
  n.normal = Vec2(d.y() / len, -d.x() / len);
  return n;
}

double scaled_jacobian(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  static const double kNorm = 2.0 / std::sqrt(3.0);
  const Vec2 p[3] = {p0, p1, p2};
  double q = std::numeric_limits<double>::max();
  for (int i = 0; i < 3; ++i) {
    Vec2 ea = p[(i + 1) % 3] - p[i];
    Vec2 eb = p[(i + 2) % 3] - p[i];
    double den = ea.norm() * eb.norm();
    if (den == 0.0) return 0.0;
    q = std::min(q, kNorm * cross2(ea, eb) / den);
  }
  return q;
}

double min_scaled_jacobian(const TriMesh& mesh) {
  if (mesh.triangles.empty()) throw GeometryError("quality of empty mesh");
  double q = std::numeric_limits<double>::max();
  for (const auto& tri : mesh.triangles) {
    q = std::min(q, scaled_jacobian(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]));
  }
  return q;
}

std::vector<char> pinned_nodes(const TriMesh& mesh) {
  std::vector<char> pinned(mesh.nodes.size(), 0);
  for (const auto& e : mesh.boundary) {
    if (e.tag == BoundaryTag::Crack) continue;
    pinned[e.a] = 1;
    pinned[e.b] = 1;
  }
  return pinned;
}

UpdateResult update_coordinates(const TriMesh& mesh, const Eigen::VectorXd& V, double tau) {
  if (V.size() != 2 * mesh.num_nodes()) {
    throw GeometryError("deformation field size does not match mesh");
  }
  const auto pinned = pinned_nodes(mesh);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (pinned[i] && (V[2 * i] != 0.0 || V[2 * i + 1] != 0.0)) {
      throw GeometryError("deformation field nonzero on pinned node " + std::to_string(i));
    }
  }
  UpdateResult res;
  res.mesh = mesh;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    res.mesh.nodes[i] += tau * Vec2(V[2 * i], V[2 * i + 1]);
  }
  for (int t = 0; t < res.mesh.num_triangles(); ++t) {
    if (res.mesh.triangle_area(t) <= 0.0) ++res.inverted_count;
  }
  return res;
}

std::vector<int> boundary_triangles(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> owner;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      owner.emplace(std::minmax(tri[k], tri[(k + 1) % 3]), t);
    }
  }
  std::vector<int> adj(mesh.boundary.size(), -1);
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    auto it = owner.find(std::minmax(mesh.boundary[e].a, mesh.boundary[e].b));
    if (it == owner.end()) throw GeometryError("boundary edge without adjacent triangle");
    adj[e] = it->second;
  }
  return adj;
}

double boundary_polygon_area(const TriMesh& mesh) {
  // Boundary edges are CCW around the domain, so the shoelace sum over all
  // of them yields the enclosed area regardless of loop count.
  double a = 0.0;
  for (const auto& e : mesh.boundary) {
    a += 0.5 * cross2(mesh.nodes[e.a], mesh.nodes[e.b]);
  }
  return a;
}

void validate(const TriMesh& mesh) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= mesh.num_nodes()) {
        throw GeometryError("triangle " + std::to_string(t) + " references invalid node");
      }
    }
    if (mesh.triangle_area(t) <= 0.0) {
      throw GeometryError("triangle " + std::to_string(t) + " is not CCW / has non-positive area");
    }
  }
  auto expected = compute_boundary(mesh.nodes, mesh.triangles, mesh.crack_halfwidth);
  if (expected.size() != mesh.boundary.size()) {
    throw GeometryError("stored boundary does not match connectivity");
  }
  std::set<std::pair<int, int>> have;
  for (const auto& e : mesh.boundary) have.insert(std::minmax(e.a, e.b));
  for (const auto& e : expected) {
    if (!have.count(std::minmax(e.a, e.b))) {
      throw GeometryError("boundary edge list is missing an edge of the connectivity");
    }
  }
  // Each boundary node must have exactly two incident boundary edges.
  std::map<int, int> deg;
  for (const auto& e : mesh.boundary) {
    ++deg[e.a];
    ++deg[e.b];
  }
  for (const auto& [node, d] : deg) {
    if (d != 2) {
      throw GeometryError("boundary is not a set of closed loops at node " + std::to_string(node));
    }
  }
}

}  // namespace fracshape
