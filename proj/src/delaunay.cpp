#include "fracshape/delaunay.hpp"

#include <cstdio>
#include <cstdlib>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace fracshape {
namespace {

// ---------------------------------------------------------------------------
// Predicates. Double evaluation with an error-bound filter, long-double
// fallback for the filtered cases; remaining ties resolve conservatively.
// ---------------------------------------------------------------------------

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double detl = (a.x() - c.x()) * (b.y() - c.y());
  const double detr = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detl - detr;
  const double detsum = std::abs(detl) + std::abs(detr);
  if (std::abs(det) > 3.33e-16 * detsum) return det;
  const long double ll = (static_cast<long double>(a.x()) - c.x()) * (static_cast<long double>(b.y()) - c.y()) -
                         (static_cast<long double>(a.y()) - c.y()) * (static_cast<long double>(b.x()) - c.x());
  if (ll > 0) return 1.0;
  if (ll < 0) return -1.0;
  return 0.0;
}

// > 0 iff p lies strictly inside the circumcircle of CCW triangle (a,b,c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const double adx = a.x() - p.x(), ady = a.y() - p.y();
  const double bdx = b.x() - p.x(), bdy = b.y() - p.y();
  const double cdx = c.x() - p.x(), cdy = c.y() - p.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  const double det = ad * (bdx * cdy - bdy * cdx) + bd * (cdx * ady - cdy * adx) + cd * (adx * bdy - ady * bdx);
  const double mag = ad * (std::abs(bdx * cdy) + std::abs(bdy * cdx)) +
                     bd * (std::abs(cdx * ady) + std::abs(cdy * adx)) +
                     cd * (std::abs(adx * bdy) + std::abs(ady * bdx));
  if (std::abs(det) > 1.2e-15 * mag) return det;
  const long double ax = a.x(), ay = a.y(), bx = b.x(), by = b.y(), cx = c.x(), cy = c.y(), px = p.x(), py = p.y();
  const long double Adx = ax - px, Ady = ay - py, Bdx = bx - px, Bdy = by - py, Cdx = cx - px, Cdy = cy - py;
  const long double Ad = Adx * Adx + Ady * Ady, Bd = Bdx * Bdx + Bdy * Bdy, Cd = Cdx * Cdx + Cdy * Cdy;
  const long double ld =
      Ad * (Bdx * Cdy - Bdy * Cdx) + Bd * (Cdx * Ady - Cdy * Adx) + Cd * (Adx * Bdy - Ady * Bdx);
  if (ld > 0) return 1.0;
  if (ld < 0) return -1.0;
  return 0.0;
}

inline std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct SegmentInfo {
  BoundaryTag tag = BoundaryTag::Crack;
  bool keep = false;
};

struct Tri {
  int v[3];
  int nb[3];  // neighbor across edge k = (v[k], v[(k+1)%3]); -1 = none
  bool alive = true;
  bool inside = false;
};

class Triangulator {
public:
  Triangulator(const std::vector<TaggedSegment>& segments, const SizeField& size, const MeshingOptions& opts)
      : size_(size), opts_(opts) {
    collect_input(segments);
    build_super_box();
    for (int i = 4; i < static_cast<int>(pts_.size()); ++i) insert_vertex(i);
    recover_all_segments();
    classify_inside();
    refine();
  }

  TriMesh extract(double crack_halfwidth) const;

private:
  const SizeField& size_;
  MeshingOptions opts_;
  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> vert2tri_;
  std::unordered_map<std::int64_t, SegmentInfo> constraints_;
  std::vector<std::pair<int, int>> input_segments_;
  double scale_ = 1.0;

  static int mod3(int k) { return k % 3; }

  int add_point(const Vec2& p) {
    pts_.push_back(p);
    vert2tri_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
  }

  int add_tri(int a, int b, int c) {
    Tri t;
    t.v[0] = a;
    t.v[1] = b;
    t.v[2] = c;
    t.nb[0] = t.nb[1] = t.nb[2] = -1;
    tris_.push_back(t);
    int id = static_cast<int>(tris_.size()) - 1;
    vert2tri_[a] = vert2tri_[b] = vert2tri_[c] = id;
    return id;
  }

  void collect_input(const std::vector<TaggedSegment>& segments) {
    std::map<std::pair<double, double>, int> index;
    pts_.resize(4);  // reserve slots for the super-box corners
    vert2tri_.resize(4, -1);
    auto get_id = [&](const Vec2& p) {
      auto key = std::make_pair(p.x(), p.y());
      auto it = index.find(key);
      if (it != index.end()) return it->second;
      int id = add_point(p);
      index.emplace(key, id);
      return id;
    };
    for (const auto& s : segments) {
      int ia = get_id(s.a);
      int ib = get_id(s.b);
      if (ia == ib) throw GeometryError("zero-length boundary segment");
      constraints_[edge_key(ia, ib)] = {s.tag, s.keep};
      input_segments_.emplace_back(ia, ib);
    }
  }

  void build_super_box() {
    Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    Vec2 hi = -lo;
    for (std::size_t i = 4; i < pts_.size(); ++i) {
      lo = lo.cwiseMin(pts_[i]);
      hi = hi.cwiseMax(pts_[i]);
    }
    scale_ = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    const double m = 10.0 * scale_ + 1.0;
    pts_[0] = Vec2(lo.x() - m, lo.y() - m);
    pts_[1] = Vec2(hi.x() + m, lo.y() - m);
    pts_[2] = Vec2(hi.x() + m, hi.y() + m);
    pts_[3] = Vec2(lo.x() - m, hi.y() + m);
    int t0 = add_tri(0, 1, 2);
    int t1 = add_tri(0, 2, 3);
    tris_[t0].nb[1] = t1;  // edge (1? no: edge 1 of t0 = (1,2)... fix below
    // t0 = (0,1,2): edges (0,1),(1,2),(2,0); t1 = (0,2,3): edges (0,2),(2,3),(3,0).
    tris_[t0].nb[0] = -1;
    tris_[t0].nb[1] = -1;
    tris_[t0].nb[2] = t1;  // shared edge (2,0)
    tris_[t1].nb[0] = t0;  // shared edge (0,2)
    tris_[t1].nb[1] = -1;
    tris_[t1].nb[2] = -1;
  }

  bool is_constrained(int a, int b) const { return constraints_.count(edge_key(a, b)) != 0; }

  int edge_index_of(const Tri& t, int a, int b) const {
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] == a && t.v[mod3(k + 1)] == b) return k;
    }
    return -1;
  }

  // Walks from `start` towards p. Returns the containing triangle, or -2 with
  // *blocked set when the straight walk would cross a constrained edge.
  int locate(const Vec2& p, int start, std::int64_t* blocked = nullptr, bool stop_at_constraint = false) {
    int t = start;
    if (t < 0 || !tris_[t].alive) {
      for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i) {
        if (tris_[i].alive) {
          t = i;
          break;
        }
      }
    }
    const int max_steps = static_cast<int>(tris_.size()) * 4 + 64;
    int prev = -1;
    for (int step = 0; step < max_steps; ++step) {
      const Tri& tri = tris_[t];
      int move = -1;
      double worst = 0.0;
      for (int k = 0; k < 3; ++k) {
        if (tri.nb[k] == prev && prev != -1) continue;
        double o = orient2d(pts_[tri.v[k]], pts_[tri.v[mod3(k + 1)]], p);
        if (o < worst) {
          worst = o;
          move = k;
        }
      }
      if (move == -1) {
        // also allow stepping back if that is the only strictly-negative edge
        for (int k = 0; k < 3; ++k) {
          double o = orient2d(pts_[tri.v[k]], pts_[tri.v[mod3(k + 1)]], p);
          if (o < 0.0) {
            move = k;
            break;
          }
        }
      }
      if (move == -1) return t;
      int a = tri.v[move], b = tri.v[mod3(move + 1)];
      if (stop_at_constraint && is_constrained(a, b)) {
        if (blocked) *blocked = edge_key(a, b);
        return -2;
      }
      int next = tri.nb[move];
      if (next == -1) return t;  // at the super-box hull; treat as found
      prev = t;
      t = next;
    }
    // Robustness fallback: exhaustive scan.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      const Tri& tri = tris_[i];
      if (!tri.alive) continue;
      bool in = true;
      for (int k = 0; k < 3 && in; ++k) {
        if (orient2d(pts_[tri.v[k]], pts_[tri.v[mod3(k + 1)]], p) < 0.0) in = false;
      }
      if (in) return i;
    }
    throw GeometryError("point location failed");
  }

  // Bowyer-Watson insertion of pts_[pid]. `crossable` lets the cavity grow
  // across one specific constrained edge (used when splitting it).
  // Returns false if the insertion had to be rejected.
  bool insert_vertex(int pid, int hint = -1, std::int64_t crossable = -1) {
    const Vec2& p = pts_[pid];
    int t0 = locate(p, hint);
    // reject duplicates
    for (int k = 0; k < 3; ++k) {
      if ((pts_[tris_[t0].v[k]] - p).norm() <= 1e-13 * scale_) return false;
    }
    std::vector<int> cavity;
    std::unordered_set<int> in_cavity;
    std::deque<int> work{t0};
    in_cavity.insert(t0);
    // A triangle may join the cavity only if p sees all its constrained
    // edges strictly from the interior side; otherwise the rim would not be
    // star-shaped around p.
    auto star_safe = [&](int tid) {
      const Tri& t = tris_[tid];
      for (int k = 0; k < 3; ++k) {
        std::int64_t key = edge_key(t.v[k], t.v[mod3(k + 1)]);
        if (key == crossable || !constraints_.count(key)) continue;
        if (orient2d(pts_[t.v[k]], pts_[t.v[mod3(k + 1)]], p) <= 0.0) return false;
      }
      return true;
    };
    if (!star_safe(t0)) return false;
    auto cavity_ok = [&](int tid) {
      const Tri& t = tris_[tid];
      return incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p) > 0.0 && star_safe(tid);
    };
    while (!work.empty()) {
      int tid = work.front();
      work.pop_front();
      cavity.push_back(tid);
      const Tri& t = tris_[tid];
      for (int k = 0; k < 3; ++k) {
        int n = t.nb[k];
        if (n == -1 || in_cavity.count(n)) continue;
        std::int64_t key = edge_key(t.v[k], t.v[mod3(k + 1)]);
        if (constraints_.count(key) && key != crossable) continue;
        if (cavity_ok(n)) {
          in_cavity.insert(n);
          work.push_back(n);
        }
      }
    }
    // Collect rim (directed edges with cavity on the left) and repair until
    // the fan is strictly star-shaped around p.
    for (int guard = 0; guard < 256; ++guard) {
      bool grew = false;
      std::vector<std::array<int, 4>> rim;  // a, b, external tri, internal tri
      for (int tid : cavity) {
        const Tri& t = tris_[tid];
        for (int k = 0; k < 3; ++k) {
          int n = t.nb[k];
          if (n != -1 && in_cavity.count(n)) continue;
          rim.push_back({t.v[k], t.v[mod3(k + 1)], n, tid});
        }
      }
      for (const auto& e : rim) {
        const Vec2 &u = pts_[e[0]], &w = pts_[e[1]];
        // Require the fan triangle (u, w, p) to be non-degenerate relative
        // to its size, or slivers self-replicate during refinement.
        const double raw = cross2(w - u, p - u);
        const double eps = 1e-12 * (w - u).norm() * ((p - u).norm() + (p - w).norm());
        if (raw <= eps) {
          int n = e[2];
          std::int64_t key = edge_key(e[0], e[1]);
          if (n == -1 || (constraints_.count(key) && key != crossable)) return false;
          if (!in_cavity.count(n)) {
            in_cavity.insert(n);
            cavity.push_back(n);
            grew = true;
          }
        }
      }
      if (!grew) {
        return retriangulate_cavity(pid, cavity, in_cavity, rim);
      }
    }
    return false;
  }

  bool retriangulate_cavity(int pid, const std::vector<int>& cavity, const std::unordered_set<int>& in_cavity,
                            const std::vector<std::array<int, 4>>& rim) {
    // Chain rim edges into a loop around the cavity.
    std::unordered_map<int, const std::array<int, 4>*> next_of;
    for (const auto& e : rim) next_of[e[0]] = &e;
    if (next_of.size() != rim.size()) return false;
    std::vector<const std::array<int, 4>*> loop;
    const std::array<int, 4>* cur = &rim.front();
    for (std::size_t i = 0; i < rim.size(); ++i) {
      loop.push_back(cur);
      auto it = next_of.find((*cur)[1]);
      if (it == next_of.end()) return false;
      cur = it->second;
    }
    if (loop.size() != rim.size() || (*loop.back())[1] != (*loop.front())[0]) return false;
    bool inside_any = false;
    for (int tid : cavity) inside_any = inside_any || tris_[tid].inside;
    (void)inside_any;
    for (int tid : cavity) tris_[tid].alive = false;
    std::vector<int> fans(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto& e = *loop[i];
      int id = add_tri(e[0], e[1], pid);
      tris_[id].inside = tris_[e[3]].inside;  // region side is inherited
      tris_[id].nb[0] = e[2];
      if (e[2] != -1) {
        int k = edge_index_of(tris_[e[2]], e[1], e[0]);
        if (k < 0) throw GeometryError("adjacency inconsistency during insertion");
        tris_[e[2]].nb[k] = id;
      }
      fans[i] = id;
    }
    for (std::size_t i = 0; i < loop.size(); ++i) {
      std::size_t j = (i + 1) % loop.size();
      tris_[fans[i]].nb[1] = fans[j];  // edge (b, p) of fan i meets edge (p, a=b) of fan j
      tris_[fans[j]].nb[2] = fans[i];
    }
    (void)in_cavity;
    return true;
  }

  // --- constrained edge recovery ------------------------------------------

  struct Fan {
    std::vector<int> tris;
  };

  // Rotates around vertex v collecting the (closed) fan of alive triangles.
  std::vector<int> fan_of(int v) const {
    std::vector<int> out;
    int start = vert2tri_[v];
    if (start < 0 || !tris_[start].alive || !has_vertex(start, v)) {
      start = -1;
      for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
        if (tris_[i].alive && has_vertex(i, v)) {
          start = i;
          break;
        }
      }
      if (start < 0) throw GeometryError("vertex with no incident triangle");
    }
    int t = start;
    for (int guard = 0; guard < static_cast<int>(tris_.size()) + 4; ++guard) {
      out.push_back(t);
      const Tri& tri = tris_[t];
      int k = 0;
      while (tri.v[k] != v) ++k;
      int n = tri.nb[k];  // neighbor across edge (v, next) -> rotate CCW
      if (n == -1 || n == start) break;
      t = n;
    }
    return out;
  }

  bool has_vertex(int tid, int v) const {
    const Tri& t = tris_[tid];
    return t.v[0] == v || t.v[1] == v || t.v[2] == v;
  }

  bool edge_exists(int a, int b) const {
    for (int tid : fan_of(a)) {
      const Tri& t = tris_[tid];
      for (int k = 0; k < 3; ++k) {
        if ((t.v[k] == a && t.v[mod3(k + 1)] == b) || (t.v[k] == b && t.v[mod3(k + 1)] == a)) return true;
      }
    }
    return false;
  }

  void flip(int t1, int k1) {
    // Edge (c,d) = edge k1 of t1; t2 across. Replaces (c,d) by (p1,p2).
    int t2 = tris_[t1].nb[k1];
    Tri& a = tris_[t1];
    Tri& b = tris_[t2];
    int c = a.v[k1], d = a.v[mod3(k1 + 1)];
    int k2 = edge_index_of(b, d, c);
    int p1 = a.v[mod3(k1 + 2)];
    int p2 = b.v[mod3(k2 + 2)];
    int na1 = a.nb[mod3(k1 + 1)];  // across (d, p1)
    int na2 = a.nb[mod3(k1 + 2)];  // across (p1, c)
    int nb1 = b.nb[mod3(k2 + 1)];  // across (c, p2)
    int nb2 = b.nb[mod3(k2 + 2)];  // across (p2, d)
    a.v[0] = p1;
    a.v[1] = c;
    a.v[2] = p2;
    a.nb[0] = na2;
    a.nb[1] = nb1;
    a.nb[2] = t2;
    b.v[0] = p2;
    b.v[1] = d;
    b.v[2] = p1;
    b.nb[0] = nb2;
    b.nb[1] = na1;
    b.nb[2] = t1;
    auto relink = [&](int n, int u, int w, int self) {
      if (n == -1) return;
      int k = edge_index_of(tris_[n], w, u);
      if (k >= 0) tris_[n].nb[k] = self;
    };
    relink(na2, p1, c, t1);
    relink(nb1, c, p2, t1);
    relink(nb2, p2, d, t2);
    relink(na1, d, p1, t2);
    vert2tri_[p1] = t1;
    vert2tri_[c] = t1;
    vert2tri_[p2] = t2;
    vert2tri_[d] = t2;
  }

  static bool proper_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
    double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
    return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
  }

  void recover_segment(int a, int b, int depth = 0) {
    if (depth > 64) throw GeometryError("constraint recovery recursion overflow");
    if (edge_exists(a, b)) return;
    // Find the fan triangle whose opposite edge crosses (a,b).
    int cross_t = -1, cross_k = -1;
    for (int tid : fan_of(a)) {
      const Tri& t = tris_[tid];
      int k = 0;
      while (t.v[k] != a) ++k;
      int u = t.v[mod3(k + 1)], w = t.v[mod3(k + 2)];
      // Vertex exactly on the segment: recover the two halves.
      for (int vv : {u, w}) {
        if (orient2d(pts_[a], pts_[b], pts_[vv]) == 0.0) {
          double dot = (pts_[vv] - pts_[a]).dot(pts_[b] - pts_[a]);
          double len2 = (pts_[b] - pts_[a]).squaredNorm();
          if (dot > 0 && dot < len2) {
            auto info = constraints_[edge_key(a, b)];
            constraints_.erase(edge_key(a, b));
            constraints_[edge_key(a, vv)] = info;
            constraints_[edge_key(vv, b)] = info;
            recover_segment(a, vv, depth + 1);
            recover_segment(vv, b, depth + 1);
            return;
          }
        }
      }
      if (proper_cross(pts_[a], pts_[b], pts_[u], pts_[w])) {
        cross_t = tid;
        cross_k = edge_index_of(t, u, w);
        break;
      }
    }
    if (cross_t < 0) throw GeometryError("failed to start constraint recovery");
    std::deque<std::pair<int, int>> crossing;  // edges as vertex pairs
    crossing.emplace_back(tris_[cross_t].v[cross_k], tris_[cross_t].v[mod3(cross_k + 1)]);
    int guard = 0;
    const int max_iter = 64 * static_cast<int>(tris_.size()) + 1024;
    while (!crossing.empty()) {
      if (++guard > max_iter) throw GeometryError("constraint recovery did not terminate");
      auto [c, d] = crossing.front();
      crossing.pop_front();
      // Edge may already be gone.
      int t1 = -1, k1 = -1;
      for (int tid : fan_of(c)) {
        int k = edge_index_of(tris_[tid], c, d);
        if (k >= 0 && tris_[tid].nb[k] != -1) {
          t1 = tid;
          k1 = k;
          break;
        }
        k = edge_index_of(tris_[tid], d, c);
        if (k >= 0 && tris_[tid].nb[k] != -1) {
          t1 = tid;
          k1 = k;
          break;
        }
      }
      if (t1 < 0) continue;
      c = tris_[t1].v[k1];
      d = tris_[t1].v[mod3(k1 + 1)];
      if (!proper_cross(pts_[a], pts_[b], pts_[c], pts_[d])) continue;
      int t2 = tris_[t1].nb[k1];
      int k2 = edge_index_of(tris_[t2], d, c);
      int p1 = tris_[t1].v[mod3(k1 + 2)];
      int p2 = tris_[t2].v[mod3(k2 + 2)];
      if (proper_cross(pts_[p1], pts_[p2], pts_[c], pts_[d])) {
        flip(t1, k1);
        if (proper_cross(pts_[a], pts_[b], pts_[p1], pts_[p2])) crossing.emplace_back(p1, p2);
      } else {
        crossing.emplace_back(c, d);  // not convex yet; retry later
      }
    }
    if (!edge_exists(a, b)) throw GeometryError("constraint recovery failed");
  }

  void recover_all_segments() {
    for (auto [a, b] : input_segments_) {
      if (constraints_.count(edge_key(a, b))) recover_segment(a, b);
    }
  }

  void classify_inside() {
    // Everything reachable from the super-box corners without crossing a
    // constrained edge is outside the domain.
    std::deque<int> work;
    std::vector<char> outside(tris_.size(), 0);
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (!tris_[i].alive) continue;
      tris_[i].inside = true;
      for (int k = 0; k < 3; ++k) {
        if (tris_[i].v[k] < 4) {
          if (!outside[i]) {
            outside[i] = 1;
            work.push_back(i);
          }
          break;
        }
      }
    }
    while (!work.empty()) {
      int tid = work.front();
      work.pop_front();
      const Tri& t = tris_[tid];
      for (int k = 0; k < 3; ++k) {
        int n = t.nb[k];
        if (n == -1 || outside[n] || !tris_[n].alive) continue;
        if (is_constrained(t.v[k], t.v[mod3(k + 1)])) continue;
        outside[n] = 1;
        work.push_back(n);
      }
    }
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (tris_[i].alive) tris_[i].inside = !outside[i];
    }
  }

  // --- refinement -----------------------------------------------------------

  static double tri_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
    double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    double mn = std::numeric_limits<double>::max();
    auto ang = [](double opp, double s1, double s2) {
      double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
      return std::acos(std::clamp(cosv, -1.0, 1.0));
    };
    mn = std::min({ang(la, lb, lc), ang(lb, lc, la), ang(lc, la, lb)});
    return mn * 180.0 / M_PI;
  }

  Vec2 circumcenter(int tid) const {
    const Tri& t = tris_[tid];
    const Vec2& a = pts_[t.v[0]];
    Vec2 ab = pts_[t.v[1]] - a, ac = pts_[t.v[2]] - a;
    double d = 2.0 * cross2(ab, ac);
    double ux = (ab.squaredNorm() * ac.y() - ac.squaredNorm() * ab.y()) / d;
    double uy = (ac.squaredNorm() * ab.x() - ab.squaredNorm() * ac.x()) / d;
    return a + Vec2(ux, uy);
  }

  // Fallback insertion point when the circumcenter is unusable: walk from
  // the midpoint of the shortest edge towards the circumcenter, but only one
  // shortest-edge length away (an off-center in the sense of Ungor).
  Vec2 offcenter(int tid) const {
    const Tri& t = tris_[tid];
    int sa = 0;
    double smin = std::numeric_limits<double>::max();
    for (int k = 0; k < 3; ++k) {
      double l = (pts_[t.v[k]] - pts_[t.v[mod3(k + 1)]]).squaredNorm();
      if (l < smin) {
        smin = l;
        sa = k;
      }
    }
    const Vec2 m = 0.5 * (pts_[t.v[sa]] + pts_[t.v[mod3(sa + 1)]]);
    const Vec2 cc = circumcenter(tid);
    const double dist = (cc - m).norm();
    const double cap = 1.2 * std::sqrt(smin);
    if (!(dist > cap)) return cc;
    return m + (cc - m) * (cap / dist);
  }

  bool seg_encroached_by(int a, int b, const Vec2& p) const {
    Vec2 mid = 0.5 * (pts_[a] + pts_[b]);
    double r2 = (pts_[a] - mid).squaredNorm();
    return (p - mid).squaredNorm() < r2 * (1.0 - 1e-12);
  }

  // Splits constrained segment (a,b) at its midpoint. Returns new vertex id
  // or -1.
  int split_segment(int a, int b) {
    auto it = constraints_.find(edge_key(a, b));
    if (it == constraints_.end() || it->second.keep) return -1;
    SegmentInfo info = it->second;
    Vec2 mid = 0.5 * (pts_[a] + pts_[b]);
    int pid = add_point(mid);
    std::int64_t key = edge_key(a, b);
    if (!insert_vertex(pid, vert2tri_[a], key)) {
      pts_.pop_back();
      vert2tri_.pop_back();
      return -1;
    }
    constraints_.erase(key);
    constraints_[edge_key(a, pid)] = info;
    constraints_[edge_key(pid, b)] = info;
    return pid;
  }

  struct SegRef {
    int a, b;
  };

  void refine() {
    const double min_angle = opts_.min_angle_deg;
    std::deque<SegRef> seg_queue;
    for (const auto& [key, info] : constraints_) {
      if (!info.keep) seg_queue.push_back({static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffff)});
    }
    std::deque<int> tri_queue;
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (tris_[i].alive && tris_[i].inside) tri_queue.push_back(i);
    }
    std::unordered_set<int> unfixable;
    auto queue_new_tris = [&](std::size_t from) {
      for (std::size_t i = from; i < tris_.size(); ++i) {
        if (tris_[i].alive && tris_[i].inside) tri_queue.push_back(static_cast<int>(i));
      }
    };
    auto apex_encroaches = [&](int a, int b) -> bool {
      // For Delaunay-ish meshes checking the two apexes suffices.
      for (int tid : fan_of(a)) {
        const Tri& t = tris_[tid];
        int k = edge_index_of(t, a, b);
        if (k < 0) k = edge_index_of(t, b, a);
        if (k < 0) continue;
        int apex = t.v[mod3(k + 2)];
        if (apex >= 4 && seg_encroached_by(a, b, pts_[apex])) return true;
      }
      return false;
    };

    long pops = 0;
    long n_split = 0, n_cc = 0, n_oc = 0, n_bisect = 0;
    const long max_pops = 80L * opts_.max_nodes;
    while (!seg_queue.empty() || !tri_queue.empty()) {
      if (++pops > max_pops) throw GeometryError("mesh refinement did not terminate");
      if (static_cast<int>(pts_.size()) > opts_.max_nodes) {
        if (const char* dump = std::getenv("FRACSHAPE_MESH_DUMP")) {
          FILE* f = std::fopen(dump, "w");
          for (const auto& t : tris_) {
            if (!t.alive || !t.inside) continue;
            std::fprintf(f, "%.17g %.17g %.17g %.17g %.17g %.17g\n", pts_[t.v[0]].x(), pts_[t.v[0]].y(),
                         pts_[t.v[1]].x(), pts_[t.v[1]].y(), pts_[t.v[2]].x(), pts_[t.v[2]].y());
          }
          std::fclose(f);
        }
        Vec2 lo(1e30, 1e30), hi(-1e30, -1e30);
        for (std::size_t i = pts_.size() - 1000; i < pts_.size(); ++i) {
          lo = lo.cwiseMin(pts_[i]);
          hi = hi.cwiseMax(pts_[i]);
        }
        char box[160];
        std::snprintf(box, sizeof(box), " last-1000 bbox [%.6f,%.6f]x[%.6f,%.6f]", lo.x(), hi.x(), lo.y(),
                      hi.y());
        throw GeometryError("mesh refinement exceeded node budget (splits " + std::to_string(n_split) +
                            ", cc " + std::to_string(n_cc) + ", oc " + std::to_string(n_oc) +
                            ", bisect " + std::to_string(n_bisect) + ")" + box);
      }
      if (!seg_queue.empty()) {
        auto [a, b] = seg_queue.front();
        seg_queue.pop_front();
        if (!constraints_.count(edge_key(a, b))) continue;
        if (!apex_encroaches(a, b)) continue;
        std::size_t before = tris_.size();
        int m = split_segment(a, b);
        if (m >= 0) {
          ++n_split;
          seg_queue.push_back({a, m});
          seg_queue.push_back({m, b});
          queue_new_tris(before);
        }
        continue;
      }
      int tid = tri_queue.front();
      tri_queue.pop_front();
      if (!tris_[tid].alive || !tris_[tid].inside || unfixable.count(tid)) continue;
      // Copies: insertions below reallocate the point/triangle stores.
      const std::array<int, 3> tv = {tris_[tid].v[0], tris_[tid].v[1], tris_[tid].v[2]};
      const Vec2 pa = pts_[tv[0]], pb = pts_[tv[1]], pc = pts_[tv[2]];
      double longest = std::max({(pa - pb).norm(), (pb - pc).norm(), (pc - pa).norm()});
      Vec2 centroid = (pa + pb + pc) / 3.0;
      double h = std::max(size_(centroid), 1e-6 * scale_);
      bool too_big = longest > opts_.size_factor * h;
      bool bad_angle = tri_min_angle(pa, pb, pc) < min_angle;
      if (!too_big && !bad_angle) continue;

      // Attempt an insertion at p. Returns +1 inserted, 0 a splittable
      // segment was split instead (requeue the triangle), -1 unusable.
      auto try_insert = [&](const Vec2& p) -> int {
        if (!std::isfinite(p.x()) || !std::isfinite(p.y())) return -1;
        // A point inside the diametral disk of a protected segment would
        // start an unbounded densification against it.
        for (const auto& [key, info] : constraints_) {
          if (!info.keep) continue;
          int sa = static_cast<int>(key >> 32), sb = static_cast<int>(key & 0xffffffff);
          if (seg_encroached_by(sa, sb, p)) return -1;
        }
        std::int64_t blocked = -1;
        int loc = locate(p, tid, &blocked, true);
        if (loc == -2) {
          int ba = static_cast<int>(blocked >> 32), bb = static_cast<int>(blocked & 0xffffffff);
          std::size_t before = tris_.size();
          int m = split_segment(ba, bb);
          if (m < 0) return -1;
          seg_queue.push_back({ba, m});
          seg_queue.push_back({m, bb});
          queue_new_tris(before);
          return 0;
        }
        if (!tris_[loc].inside) return -1;
        int pid = add_point(p);
        std::size_t before = tris_.size();
        if (!insert_vertex(pid, loc)) {
          pts_.pop_back();
          vert2tri_.pop_back();
          return -1;
        }
        // Ruppert encroachment rule: a vertex landing in the diametral disk
        // of a splittable segment triggers that split as well.
        for (const auto& [key, info] : constraints_) {
          if (info.keep) continue;
          int sa = static_cast<int>(key >> 32), sb = static_cast<int>(key & 0xffffffff);
          if (seg_encroached_by(sa, sb, pts_[pid])) seg_queue.push_back({sa, sb});
        }
        queue_new_tris(before);
        return 1;
      };

      const Vec2 cc_pt = circumcenter(tid);
      const Vec2 offcenter_pt = offcenter(tid);
      int rc = try_insert(cc_pt);
      if (rc == 1) ++n_cc;
      if (rc == -1) {
        rc = try_insert(offcenter_pt);
        if (rc == 1) ++n_oc;
      }
      if (rc == -1 && tri_min_angle(pa, pb, pc) < 17.0) {
        // Hemmed in by protected segments (thin wedge along the crack):
        // bisect the longest non-protected edge, which shrinks the local
        // length scale until well-shaped triangles fit the wedge.
        const Vec2 pv[3] = {pa, pb, pc};
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int x, int y) {
          return (pv[x] - pv[(x + 1) % 3]).squaredNorm() > (pv[y] - pv[(y + 1) % 3]).squaredNorm();
        });
        for (int k : order) {
          const int a = tv[k], b = tv[(k + 1) % 3];
          const auto it = constraints_.find(edge_key(a, b));
          if (it != constraints_.end() && it->second.keep) continue;
          rc = try_insert(0.5 * (pv[k] + pv[(k + 1) % 3]));
          if (rc == 1) ++n_bisect;
          if (rc != -1) break;
        }
      }
      if (rc == 0) {
        tri_queue.push_back(tid);
      } else if (rc == -1) {
        unfixable.insert(tid);
      }
    }
  }
};

TriMesh Triangulator::extract(double crack_halfwidth) const {
  TriMesh mesh;
  mesh.crack_halfwidth = crack_halfwidth;
  std::vector<int> remap(pts_.size(), -1);
  for (const auto& t : tris_) {
    if (!t.alive || !t.inside) continue;
    for (int k = 0; k < 3; ++k) {
      if (remap[t.v[k]] == -1) {
        remap[t.v[k]] = static_cast<int>(mesh.nodes.size());
        mesh.nodes.push_back(pts_[t.v[k]]);
      }
    }
    mesh.triangles.push_back({remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]});
  }
  if (mesh.triangles.empty()) throw GeometryError("triangulation produced no interior triangles");
  retag_boundary(mesh);
  return mesh;
}

}  // namespace

TriMesh triangulate_polygon(const std::vector<TaggedSegment>& segments, const SizeField& size,
                            const MeshingOptions& opts, double crack_halfwidth) {
  Triangulator tri(segments, size, opts);
  TriMesh mesh = tri.extract(crack_halfwidth);
  validate(mesh);
  return mesh;
}

}  // namespace fracshape
