#pragma once
//
// Curves, quadrature meshes and the box-grid partition.
//
// Box boundaries are traversed counter-clockwise from the bottom-left corner:
// S left to right, E bottom to top, N right to left, W top to bottom. Each
// straight edge carries its own sigmoid grading, so an edge mesh depends only
// on its two end points and n. That is what lets a box edge and the matching
// piece of the outer boundary (or of the neighbouring box) share nodes.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "msdd/common.hpp"

namespace msdd {

enum class Side : int { S = 0, E = 1, N = 2, W = 3 };

inline const char* side_name(Side s) {
  static const char* names[] = {"S", "E", "N", "W"};
  return names[static_cast<int>(s)];
}

inline Side opposite(Side s) { return static_cast<Side>((static_cast<int>(s) + 2) % 4); }

/// Boundary piece label: one side of one box.
struct SegmentId {
  int box = 0;
  Side side = Side::S;
  friend bool operator==(const SegmentId&, const SegmentId&) = default;
  friend auto operator<=>(const SegmentId& a, const SegmentId& b) {
    if (a.box != b.box) return a.box <=> b.box;
    return static_cast<int>(a.side) <=> static_cast<int>(b.side);
  }
};

inline std::string to_string(const SegmentId& s) {
  return std::to_string(s.box) + side_name(s.side);
}

// ---------------------------------------------------------------------------
// Scatterers

class Scatterer {
 public:
  enum class Kind { circle, segment };

  static Scatterer circle(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw ParameterError("circle radius must be positive");
    Scatterer s;
    s.kind_ = Kind::circle;
    s.p0_ = center;
    s.radius_ = radius;
    return s;
  }
  static Scatterer segment(Vec2 a, Vec2 b) {
    if (!((a - b).norm() > 0.0)) throw ParameterError("segment endpoints must be distinct");
    Scatterer s;
    s.kind_ = Kind::segment;
    s.p0_ = a;
    s.p1_ = b;
    return s;
  }

  Kind kind() const { return kind_; }
  bool is_circle() const { return kind_ == Kind::circle; }
  Vec2 center() const { return is_circle() ? p0_ : Vec2(0.5 * (p0_ + p1_)); }
  double radius() const { return radius_; }
  Vec2 endpoint_a() const { return p0_; }
  Vec2 endpoint_b() const { return p1_; }
  double length() const { return (p1_ - p0_).norm(); }
  /// Diameter of a circle, length of a segment.
  double footprint() const { return is_circle() ? 2.0 * radius_ : length(); }

 private:
  Kind kind_ = Kind::circle;
  Vec2 p0_ = Vec2::Zero(), p1_ = Vec2::Zero();
  double radius_ = 0.0;
};

namespace detail {

inline double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a), d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c), d4 = cross2(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

}  // namespace detail

/// Euclidean distance between two scatterers (0 if they intersect).
inline double scatterer_distance(const Scatterer& p, const Scatterer& q) {
  using detail::point_segment_distance;
  if (p.is_circle() && q.is_circle())
    return std::max(0.0, (p.center() - q.center()).norm() - p.radius() - q.radius());
  if (p.is_circle() != q.is_circle()) {
    const Scatterer& c = p.is_circle() ? p : q;
    const Scatterer& s = p.is_circle() ? q : p;
    return std::max(0.0, point_segment_distance(c.center(), s.endpoint_a(), s.endpoint_b()) -
                             c.radius());
  }
  const Vec2 a = p.endpoint_a(), b = p.endpoint_b(), c = q.endpoint_a(), d = q.endpoint_b();
  if (detail::segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// ---------------------------------------------------------------------------
// Box grid

struct Rect {
  Vec2 lo, hi;
  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  bool contains(const Vec2& x) const {
    return x.x() > lo.x() && x.x() < hi.x() && x.y() > lo.y() && x.y() < hi.y();
  }
  /// Distance from an interior point to the rectangle boundary.
  double inner_distance(const Vec2& x) const {
    return std::min({x.x() - lo.x(), hi.x() - x.x(), x.y() - lo.y(), hi.y() - x.y()});
  }
};

/// Distance from a scatterer to the boundary of a rectangle that contains it;
/// negative if it pokes out.
inline double clearance_to_boundary(const Scatterer& s, const Rect& r) {
  if (s.is_circle()) return r.inner_distance(s.center()) - s.radius();
  return std::min(r.inner_distance(s.endpoint_a()), r.inner_distance(s.endpoint_b()));
}

struct BoxGrid {
  Vec2 origin = Vec2::Zero();
  double box_width = 1.0, box_height = 1.0;
  int cols = 1, rows = 1;
  /// Scatterers owned by each box, indexed by box id = row * cols + col.
  std::vector<std::vector<Scatterer>> scatterers;

  int box_count() const { return cols * rows; }
  int box_id(int row, int col) const { return row * cols + col; }
  int row_of(int id) const { return id / cols; }
  int col_of(int id) const { return id % cols; }

  Rect box(int id) const {
    const int r = row_of(id), c = col_of(id);
    return {origin + Vec2(c * box_width, r * box_height),
            origin + Vec2((c + 1) * box_width, (r + 1) * box_height)};
  }
  Rect outer() const { return {origin, origin + Vec2(cols * box_width, rows * box_height)}; }

  std::size_t scatterer_count() const {
    std::size_t n = 0;
    for (const auto& v : scatterers) n += v.size();
    return n;
  }

  /// Throws unless the boxes are well formed and every scatterer sits inside
  /// its box with at least `clearance` to the box boundary.
  void validate(double clearance = 0.0) const {
    if (cols < 1 || rows < 1) throw ParameterError("grid needs at least one box");
    if (!(box_width > 0.0) || !(box_height > 0.0)) throw ParameterError("degenerate box size");
    if (static_cast<int>(scatterers.size()) != box_count())
      throw ParameterError("per-box scatterer lists do not match the grid");
    for (int id = 0; id < box_count(); ++id)
      for (const auto& s : scatterers[id]) {
        const double d = clearance_to_boundary(s, box(id));
        if (!(d > 0.0) || d < clearance)
          throw GeometryError("scatterer in box " + std::to_string(id) +
                              " is closer than the clearance to the box boundary");
      }
  }
};

/// Boxes of a grid with empty scatterer lists.
inline BoxGrid make_grid(Vec2 origin, double box_width, double box_height, int cols, int rows) {
  BoxGrid g;
  g.origin = origin;
  g.box_width = box_width;
  g.box_height = box_height;
  g.cols = cols;
  g.rows = rows;
  g.scatterers.assign(std::max(0, cols * rows), {});
  g.validate();
  return g;
}

/// Smallest pairwise distance between scatterers (all pairs, all boxes).
inline double min_pairwise_separation(const BoxGrid& g) {
  std::vector<const Scatterer*> all;
  for (const auto& v : g.scatterers)
    for (const auto& s : v) all.push_back(&s);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      best = std::min(best, scatterer_distance(*all[i], *all[j]));
  return best;
}

// ---------------------------------------------------------------------------
// Random clouds

struct CloudSpec {
  Scatterer::Kind kind = Scatterer::Kind::segment;
  /// Radius for circles, length for segments.
  double size = 0.4;
  int per_box_count = 0;
  /// Negative means the default, half the footprint.
  double clearance = -1.0;
  std::uint64_t seed = 0;
  int max_attempts = 10000;
};

inline double footprint_of(const CloudSpec& spec) {
  return spec.kind == Scatterer::Kind::circle ? 2.0 * spec.size : spec.size;
}

inline double clearance_of(const CloudSpec& spec) {
  return spec.clearance < 0.0 ? 0.5 * footprint_of(spec) : spec.clearance;
}

namespace detail {

// Uniform double in [0,1) with a fixed bit recipe, so clouds do not depend on
// the standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Fills each box of `grid` with `per_box_count` random scatterers by
/// rejection sampling. Deterministic for a fixed seed.
inline BoxGrid generate_cloud(BoxGrid grid, const CloudSpec& spec) {
  grid.scatterers.assign(grid.box_count(), {});
  grid.validate();
  if (spec.per_box_count < 0) throw ParameterError("per_box_count must be >= 0");
  if (spec.per_box_count == 0) return grid;
  if (!(spec.size > 0.0)) throw ParameterError("scatterer size must be positive");
  const double fp = footprint_of(spec);
  const double delta = clearance_of(spec);
  if (!(delta > 0.0)) throw ParameterError("clearance must be positive");
  if (spec.per_box_count * (fp + delta) * (fp + delta) >= grid.box_width * grid.box_height)
    throw ParameterError("cloud infeasible: per_box_count*(footprint+clearance)^2 >= box area");

  std::mt19937_64 rng(spec.seed);
  auto uni = [&] { return detail::unit_uniform(rng); };
  for (int id = 0; id < grid.box_count(); ++id) {
    const Rect r = grid.box(id);
    // Centres are drawn from the box shrunk so that the clearance to the box
    // boundary holds for any orientation.
    const double margin = delta + 0.5 * fp;
    const double wx = r.width() - 2.0 * margin, wy = r.height() - 2.0 * margin;
    if (!(wx > 0.0) || !(wy > 0.0))
      throw PlacementError("box " + std::to_string(id) + " too small for the scatterer size");
    auto& list = grid.scatterers[id];
    for (int m = 0; m < spec.per_box_count; ++m) {
      bool placed = false;
      for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
        const Vec2 c = r.lo + Vec2(margin + wx * uni(), margin + wy * uni());
        Scatterer cand = Scatterer::circle(c, 1.0);
        if (spec.kind == Scatterer::Kind::circle) {
          cand = Scatterer::circle(c, spec.size);
        } else {
          const double th = 2.0 * kPi * uni();
          const Vec2 h = 0.5 * spec.size * Vec2(std::cos(th), std::sin(th));
          cand = Scatterer::segment(c - h, c + h);
        }
        if (clearance_to_boundary(cand, r) < delta) continue;
        bool ok = true;
        for (const auto& other : list)
          if (scatterer_distance(cand, other) < delta) {
            ok = false;
            break;
          }
        if (ok) {
          list.push_back(cand);
          placed = true;
        }
      }
      if (!placed)
        throw PlacementError("could not place scatterer " + std::to_string(m) + " in box " +
                             std::to_string(id) + " after " +
                             std::to_string(spec.max_attempts) + " attempts");
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Meshes

enum class Topology { closed_smooth, closed_cornered, open_arc };

/// Nyström mesh of one curve.
///
/// Closed curves use an equispaced periodic parameter grid t_m = t_0 + m h,
/// h = 2π/N. Open arcs keep n nodes s_j = π(j+½)/n of a 2n-point periodic grid
/// in the cosine variable; the even extension supplies the other half.
struct MeshedBoundary {
  std::vector<Vec2> nodes;
  std::vector<Vec2> normals;
  RVector weights;    // quadrature weight per node (physical arc length)
  RVector speed;      // |x'(t)|
  RVector curvature;  // signed curvature (0 on straight edges and arcs)
  RVector param;      // t_m (closed) or s_j (arcs)
  std::vector<SegmentId> labels;  // box meshes only; empty otherwise
  Topology topology = Topology::closed_smooth;
  std::vector<Vec2> vertices;  // polygon corners; edge e holds nodes [e*per_edge, (e+1)*per_edge)
  int per_edge = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  bool closed() const { return topology != Topology::open_arc; }
  /// Quadrature weight of the nearest node, used as the local mesh spacing.
  double spacing_near(const Vec2& x) const {
    int best = 0;
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
      const double di = (nodes[i] - x).squaredNorm();
      if (di < d) {
        d = di;
        best = i;
      }
    }
    return weights[best];
  }
  double min_distance(const Vec2& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& y : nodes) d = std::min(d, (y - x).norm());
    return d;
  }
};

namespace detail {

inline void resize_mesh(MeshedBoundary& m, int n) {
  m.nodes.resize(n);
  m.normals.resize(n);
  m.weights.resize(n);
  m.speed.resize(n);
  m.curvature.resize(n);
  m.param.resize(n);
}

// Kress sigmoid on [0, 2π]: w(0)=0, w(2π)=2π, w' vanishing to order p-1 at
// both ends. Returns w(u) and w'(u).
inline std::pair<double, double> kress_sigmoid(double u, int p) {
  const double a = 1.0 / p - 0.5;
  const double r = (kPi - u) / kPi;
  const double v = a * r * r * r + (u - kPi) / (p * kPi) + 0.5;
  const double dv = -3.0 * a * r * r / kPi + 1.0 / (p * kPi);
  const double vp = std::pow(v, p), wp = std::pow(1.0 - v, p);
  const double den = vp + wp;
  const double w = 2.0 * kPi * vp / den;
  const double dw = 2.0 * kPi * p * std::pow(v, p - 1) * std::pow(1.0 - v, p - 1) * dv / (den * den);
  return {w, dw};
}

// Closed polygon with each edge graded independently; edge e runs from
// verts[e] to verts[e+1]. Every edge gets n nodes at local u_i = 2π(i+½)/n.
inline MeshedBoundary graded_polygon(const std::vector<Vec2>& verts,
                                     const std::vector<SegmentId>& edge_labels, int n, int p) {
  const int E = static_cast<int>(verts.size());
  MeshedBoundary m;
  m.topology = Topology::closed_cornered;
  resize_mesh(m, E * n);
  m.labels.resize(E * n);
  m.vertices = verts;
  m.per_edge = n;
  const int N = E * n;
  for (int e = 0; e < E; ++e) {
    const Vec2 a = verts[e], b = verts[(e + 1) % E];
    const Vec2 ab = b - a;
    const double len = ab.norm();
    const Vec2 tangent = ab / len;
    const Vec2 normal(tangent.y(), -tangent.x());  // outward for CCW traversal
    for (int i = 0; i < n; ++i) {
      const int idx = e * n + i;
      const double u = 2.0 * kPi * (i + 0.5) / n;
      const auto [w, dw] = kress_sigmoid(u, p);
      const double lam = w / (2.0 * kPi);
      m.nodes[idx] = a + lam * ab;
      m.normals[idx] = normal;
      // t = (2π e + u)/E, so dx/dt = E * len * w'(u) / (2π).
      m.speed[idx] = E * len * dw / (2.0 * kPi);
      m.weights[idx] = (2.0 * kPi / N) * m.speed[idx];
      m.curvature[idx] = 0.0;
      m.param[idx] = 2.0 * kPi * (idx + 0.5) / N;
      m.labels[idx] = edge_labels[e];
    }
  }
  return m;
}

}  // namespace detail

inline MeshedBoundary build_circle_mesh(const Vec2& center, double radius, int n) {
  if (n < 8 || n % 2 != 0) throw ParameterError("circle mesh needs an even n >= 8");
  if (!(radius > 0.0)) throw ParameterError("circle radius must be positive");
  MeshedBoundary m;
  m.topology = Topology::closed_smooth;
  detail::resize_mesh(m, n);
  for (int j = 0; j < n; ++j) {
    const double t = 2.0 * kPi * j / n;
    const Vec2 dir(std::cos(t), std::sin(t));
    m.nodes[j] = center + radius * dir;
    m.normals[j] = dir;
    m.speed[j] = radius;
    m.weights[j] = 2.0 * kPi * radius / n;
    m.curvature[j] = 1.0 / radius;
    m.param[j] = t;
  }
  return m;
}

/// Graded mesh of a rectangle with n_per_edge nodes per side; labels carry
/// `box_id`.
inline MeshedBoundary build_box_mesh(const Rect& box, int n_per_edge, int p = 4, int box_id = 0) {
  if (n_per_edge < 8) throw ParameterError("box mesh needs n_per_edge >= 8");
  if (p < 2) throw ParameterError("grading exponent must be >= 2");
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) throw ParameterError("degenerate rectangle");
  const std::vector<Vec2> v = {box.lo, Vec2(box.hi.x(), box.lo.y()), box.hi,
                               Vec2(box.lo.x(), box.hi.y())};
  const std::vector<SegmentId> lab = {
      {box_id, Side::S}, {box_id, Side::E}, {box_id, Side::N}, {box_id, Side::W}};
  return detail::graded_polygon(v, lab, n_per_edge, p);
}

inline MeshedBoundary build_box_mesh(const BoxGrid& g, int box_id, int n_per_edge, int p = 4) {
  return build_box_mesh(g.box(box_id), n_per_edge, p, box_id);
}

/// Mesh of the outer boundary ∂B₀ made of the outward-facing box edges, each
/// graded on its own so nodes coincide with the box meshes. Labels name the
/// owning box edge.
inline MeshedBoundary build_outer_mesh(const BoxGrid& g, int n_per_edge, int p = 4) {
  if (n_per_edge < 8) throw ParameterError("box mesh needs n_per_edge >= 8");
  if (p < 2) throw ParameterError("grading exponent must be >= 2");
  std::vector<Vec2> v;
  std::vector<SegmentId> lab;
  for (int c = 0; c < g.cols; ++c) {
    const int id = g.box_id(0, c);
    v.push_back(Vec2(g.box(id).lo.x(), g.box(id).lo.y()));
    lab.push_back({id, Side::S});
  }
  for (int r = 0; r < g.rows; ++r) {
    const int id = g.box_id(r, g.cols - 1);
    v.push_back(Vec2(g.box(id).hi.x(), g.box(id).lo.y()));
    lab.push_back({id, Side::E});
  }
  for (int c = g.cols - 1; c >= 0; --c) {
    const int id = g.box_id(g.rows - 1, c);
    v.push_back(Vec2(g.box(id).hi.x(), g.box(id).hi.y()));
    lab.push_back({id, Side::N});
  }
  for (int r = g.rows - 1; r >= 0; --r) {
    const int id = g.box_id(r, 0);
    v.push_back(Vec2(g.box(id).lo.x(), g.box(id).hi.y()));
    lab.push_back({id, Side::W});
  }
  return detail::graded_polygon(v, lab, n_per_edge, p);
}

/// Cosine mesh of a segment: x(s) = mid + (L/2) cos(s) e, s_j = π(j+½)/n.
/// The weights (π/n)(L/2) sin s_j integrate a bounded density; the solver
/// works with the density times sin s, which absorbs the endpoint
/// inverse-square-root behaviour.
inline MeshedBoundary build_arc_mesh(const Scatterer& seg, int n) {
  if (seg.is_circle()) throw TopologyError("build_arc_mesh needs a segment scatterer");
  if (n < 8 || n % 2 != 0) throw ParameterError("arc mesh needs an even n >= 8");
  const double L = seg.length();
  if (!(L > 0.0)) throw ParameterError("zero-length segment");
  const Vec2 e = (seg.endpoint_b() - seg.endpoint_a()) / L;
  const Vec2 mid = seg.center();
  const Vec2 normal(-e.y(), e.x());
  MeshedBoundary m;
  m.topology = Topology::open_arc;
  detail::resize_mesh(m, n);
  for (int j = 0; j < n; ++j) {
    const double s = kPi * (j + 0.5) / n;
    m.nodes[j] = mid + 0.5 * L * std::cos(s) * e;
    m.normals[j] = normal;
    m.speed[j] = 0.5 * L * std::sin(s);
    m.weights[j] = (kPi / n) * m.speed[j];
    m.curvature[j] = 0.0;
    m.param[j] = s;
  }
  return m;
}

inline MeshedBoundary build_scatterer_mesh(const Scatterer& s, int n) {
  return s.is_circle() ? build_circle_mesh(s.center(), s.radius(), n) : build_arc_mesh(s, n);
}

/// Pairing of the shared-edge nodes of two adjacent boxes: node a_index[i] of
/// box a coincides with node b_index[i] of box b.
struct InterfaceMap {
  SegmentId side_a, side_b;
  std::vector<int> a_index, b_index;
};

inline std::vector<int> label_indices(const MeshedBoundary& m, const SegmentId& id) {
  std::vector<int> idx;
  for (int i = 0; i < m.size(); ++i)
    if (m.labels[i] == id) idx.push_back(i);
  return idx;
}

inline InterfaceMap interface_node_map(const BoxGrid& g, int box_a, int box_b,
                                       const MeshedBoundary& mesh_a,
                                       const MeshedBoundary& mesh_b) {
  const int ra = g.row_of(box_a), ca = g.col_of(box_a);
  const int rb = g.row_of(box_b), cb = g.col_of(box_b);
  Side sa;
  if (ra == rb && cb == ca + 1) sa = Side::E;
  else if (ra == rb && cb == ca - 1) sa = Side::W;
  else if (ca == cb && rb == ra + 1) sa = Side::N;
  else if (ca == cb && rb == ra - 1) sa = Side::S;
  else throw ConformityError("boxes " + std::to_string(box_a) + " and " +
                             std::to_string(box_b) + " are not adjacent");
  InterfaceMap map;
  map.side_a = {box_a, sa};
  map.side_b = {box_b, opposite(sa)};
  map.a_index = label_indices(mesh_a, map.side_a);
  const auto bi = label_indices(mesh_b, map.side_b);
  if (map.a_index.empty() || map.a_index.size() != bi.size())
    throw ConformityError("interface " + to_string(map.side_a) + " has mismatched node counts");
  // Both boxes traverse the shared edge in opposite directions.
  map.b_index.assign(bi.rbegin(), bi.rend());
  for (std::size_t i = 0; i < bi.size(); ++i) {
    const double d = (mesh_a.nodes[map.a_index[i]] - mesh_b.nodes[map.b_index[i]]).norm();
    if (d > 1e-12)
      throw ConformityError("interface " + to_string(map.side_a) +
                            " nodes do not coincide (mismatch " + std::to_string(d) + ")");
  }
  return map;
}

}  // namespace msdd
