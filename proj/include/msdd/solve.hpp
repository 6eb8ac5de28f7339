#pragma once
//
// Outer solve and field recovery.
//
// With 𝒮^int (root of the merge tree) and 𝒮^ext on ∂B₀, the scattered Robin
// datum on ∂B₀ solves
//   (𝒮^ext - 𝒮^int) g₋ = 𝒮^int g₋^inc - g₊^inc,   g₊ = 𝒮^ext g₋.
// The total-field datum g₋ + g₋^inc drives the tree: through Y^int (merged
// trace maps) or through back substitution and the leaf maps. The scattered
// field is u^s = -Σ_p SL_p ψ_p with ψ_p the scatterer densities.
//

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "msdd/fields.hpp"
#include "msdd/merge.hpp"

namespace msdd {

struct SolverOptions {
  MergeOptions merge;
  /// Largest number of entries kept for the root trace maps Y^int; above it
  /// only the back-substitution route runs.
  double trace_map_budget = 6e7;
  double max_outer_condition = 1e14;
  /// Relative disagreement between the two recovery routes that is treated
  /// as an internal failure.
  double route_tolerance = 1e-6;
};

struct StageTimings {
  double offline = 0.0;      // leaf maps
  double elimination = 0.0;  // merge tree, exterior map, outer factorization
  double solution = 0.0;     // accumulated over solve() calls
};

struct SolveOutput {
  IncidentField incident;
  RobinData outer_robin;    // scattered field on the outer mesh
  CauchyData outer_cauchy;  // u^s and ∂_{n₀}u^s on the outer mesh
  std::vector<CVector> leaf_incoming;          // total-field (∂_n - iη)u per box
  std::vector<std::vector<CVector>> densities;  // per box, per scatterer
  bool route_a = false;
  double route_discrepancy = std::numeric_limits<double>::quiet_NaN();
  double outer_residual = 0.0;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Factored outer system on the outer mesh, reusable for any number of
/// incident fields.
class OuterSystem {
 public:
  OuterSystem(CMatrix S_int, RtrMap S_ext, double max_condition = 1e14)
      : S_int_(std::move(S_int)), S_ext_(std::move(S_ext)) {
    if (S_int_.rows() != S_ext_.size()) throw PartitionError("interior and exterior maps differ in size");
    lu_.compute(S_ext_.matrix - S_int_);
    condition_ = detail::condition_estimate(lu_);
    if (!std::isfinite(condition_) || condition_ > max_condition)
      throw ConditioningError("outer system is ill conditioned", condition_);
  }

  /// Steps 1-4: scattered Robin and Cauchy data on ∂B₀ from the incident
  /// Robin traces.
  void solve(const RobinData& inc, SolveOutput& out) const {
    const double eta = S_ext_.eta;
    const CVector rhs = S_int_ * inc.minus - inc.plus;
    out.outer_robin.minus = lu_.solve(rhs);
    out.outer_robin.plus = S_ext_.matrix * out.outer_robin.minus;
    out.outer_cauchy = from_robin(out.outer_robin, eta);
    const CVector res = (S_ext_.matrix - S_int_) * out.outer_robin.minus - rhs;
    const double scale = rhs.cwiseAbs().maxCoeff();
    out.outer_residual = scale > 0.0 ? res.cwiseAbs().maxCoeff() / scale : res.cwiseAbs().maxCoeff();
  }

  double condition() const { return condition_; }
  const RtrMap& exterior() const { return S_ext_; }
  const CMatrix& interior() const { return S_int_; }

 private:
  CMatrix S_int_;
  RtrMap S_ext_;
  Eigen::PartialPivLU<CMatrix> lu_;
  double condition_ = 0.0;
};

/// One-shot outer solve; S_int must be in outer-mesh node order.
inline SolveOutput solve_outer(const CMatrix& S_int, const RtrMap& S_ext, const IncidentField& f) {
  SolveOutput out;
  out.incident = f;
  OuterSystem(S_int, S_ext).solve(incident_traces(f, S_ext.nodes, S_ext.normals, S_ext.eta), out);
  return out;
}

/// The whole direct solver: leaf maps, merge tree and outer factorization
/// are built once; solve() costs triangular solves and products.
class DDSolver {
 public:
  DDSolver(BoxGrid grid, Discretization disc, RtrParams prm, SolverOptions opt = {})
      : grid_(std::move(grid)), disc_(disc), prm_(prm), opt_(opt) {
    grid_.validate();
    disc_.validate();
    prm_.validate();
    auto t0 = std::chrono::steady_clock::now();
    LeafBuildStats stats;
    std::vector<SubdomainMaps> leaves = build_leaf_maps(grid_, disc_, prm_, &stats);
    factorizations_ += stats.factorizations;
    timings_.offline = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    scatterer_rows_ = 0;
    for (const auto& v : grid_.scatterers) scatterer_rows_ += static_cast<double>(v.size());
    scatterer_rows_ *= disc_.n_per_scatterer;
    outer_ = build_outer_mesh(grid_, disc_.n_per_edge, disc_.grading);
    MergeOptions mo = opt_.merge;
    mo.keep_trace_maps = mo.keep_trace_maps &&
                         scatterer_rows_ * static_cast<double>(outer_.size()) <= opt_.trace_map_budget;
    tree_ = hierarchical_merge(grid_, std::move(leaves), mo);
    factorizations_ += tree_.merge_count();
    perm_ = partition_permutation(tree_.S_int, outer_);
    RtrMap ext = rtr_exterior(outer_, prm_, &exterior_condition_);
    ++factorizations_;
    outer_system_.emplace(tree_.S_int.matrix(perm_, perm_), std::move(ext), opt_.max_outer_condition);
    ++factorizations_;
    timings_.elimination = detail::seconds_since(t0);

    meshes_.resize(grid_.box_count());
    for (int b = 0; b < grid_.box_count(); ++b)
      for (const auto& s : grid_.scatterers[b])
        meshes_[b].push_back(build_scatterer_mesh(s, disc_.n_per_scatterer));
  }

  SolveOutput solve(const IncidentField& f) const {
    if (std::abs(f.k - prm_.k) > 1e-14 * prm_.k)
      throw ParameterError("incident wavenumber differs from the solver wavenumber");
    SolveOutput out = solve_traces(incident_traces(f, outer_.nodes, outer_.normals, prm_.eta));
    out.incident = f;
    return out;
  }

  /// Solve for any incident field given by its Robin traces on the outer
  /// mesh. The solve is linear in these data.
  SolveOutput solve_traces(const RobinData& inc) const {
    const auto t0 = std::chrono::steady_clock::now();
    if (inc.minus.size() != outer_.size() || inc.plus.size() != outer_.size())
      throw PartitionError("incident traces do not match the outer mesh");
    SolveOutput out;
    outer_system_->solve(inc, out);

    // Total-field datum in root partition order.
    const CVector total = out.outer_robin.minus + inc.minus;
    CVector root(total.size());
    root(perm_) = total;

    out.leaf_incoming = back_substitute(tree_, root);
    std::vector<std::vector<CVector>> route_b(grid_.box_count());
    double scale = 0.0;
    for (int b = 0; b < grid_.box_count(); ++b)
      for (const auto& t : tree_.leaves[b].Y) {
        route_b[b].push_back(t.matrix * out.leaf_incoming[b]);
        scale = std::max(scale, route_b[b].back().cwiseAbs().maxCoeff());
      }
    if (tree_.has_Y_int) {
      out.route_a = true;
      out.densities = route_b;
      double diff = 0.0;
      for (const auto& t : tree_.Y_int) {
        CVector d = t.matrix * root;
        diff = std::max(diff, (d - route_b[t.box][t.index]).cwiseAbs().maxCoeff());
        out.densities[t.box][t.index] = std::move(d);
      }
      out.route_discrepancy = scale > 0.0 ? diff / scale : diff;
      if (out.route_discrepancy > opt_.route_tolerance)
        throw ConsistencyError("scatterer recovery routes disagree (relative " +
                               std::to_string(out.route_discrepancy) + ")");
    } else {
      out.densities = std::move(route_b);
    }
    timings_.solution += detail::seconds_since(t0);
    return out;
  }

  const BoxGrid& grid() const { return grid_; }
  const Discretization& discretization() const { return disc_; }
  const RtrParams& params() const { return prm_; }
  const MergeTree& tree() const { return tree_; }
  const MeshedBoundary& outer_mesh() const { return outer_; }
  const OuterSystem& outer_system() const { return *outer_system_; }
  const std::vector<std::vector<MeshedBoundary>>& scatterer_meshes() const { return meshes_; }
  double exterior_condition() const { return exterior_condition_; }
  int factorization_count() const { return factorizations_; }
  const StageTimings& timings() const { return timings_; }
  double max_leaf_condition() const {
    double c = 0.0;
    for (const auto& l : tree_.leaves) c = std::max(c, l.condition);
    return c;
  }

 private:
  BoxGrid grid_;
  Discretization disc_;
  RtrParams prm_;
  SolverOptions opt_;
  MergeTree tree_;
  MeshedBoundary outer_;
  std::vector<int> perm_;
  std::optional<OuterSystem> outer_system_;
  std::vector<std::vector<MeshedBoundary>> meshes_;
  double exterior_condition_ = 0.0;
  double scatterer_rows_ = 0.0;
  int factorizations_ = 0;
  mutable StageTimings timings_;
};

/// u_∞ of the scattered field, -Σ_p (far field of SL_p ψ_p).
inline CVector far_field_pattern(const DDSolver& s, const SolveOutput& out,
                                 const std::vector<Vec2>& directions) {
  const Wavenumber k(s.params().k);
  CVector u = CVector::Zero(static_cast<Eigen::Index>(directions.size()));
  for (int b = 0; b < s.grid().box_count(); ++b)
    for (std::size_t p = 0; p < s.scatterer_meshes()[b].size(); ++p)
      u -= far_field(LayerKind::SL, s.scatterer_meshes()[b][p], out.densities[b][p], directions, k);
  return u;
}

/// u_∞ from the Cauchy data on ∂B₀: far field of DL[u^s] - SL[∂_n u^s].
inline CVector far_field_from_outer(const DDSolver& s, const SolveOutput& out,
                                    const std::vector<Vec2>& directions) {
  const Wavenumber k(s.params().k);
  return far_field(LayerKind::DL, s.outer_mesh(), out.outer_cauchy.u, directions, k) -
         far_field(LayerKind::SL, s.outer_mesh(), out.outer_cauchy.dn, directions, k);
}

inline constexpr double kRcsFloorDb = -200.0;

/// 10 log₁₀(2π|u_∞|²), floored.
inline RVector rcs_db(const CVector& u_inf) {
  RVector r(u_inf.size());
  for (Eigen::Index i = 0; i < u_inf.size(); ++i) {
    const double p = 2.0 * kPi * std::norm(u_inf[i]);
    r[i] = p > 0.0 ? std::max(kRcsFloorDb, 10.0 * std::log10(p)) : kRcsFloorDb;
  }
  return r;
}

/// Scattered field outside B₀ from its Cauchy data on ∂B₀:
/// u^s = [-iη SL + DL]u^s - SL[(∂_n - iη)u^s].
inline FieldResult eval_exterior_field(const DDSolver& s, const SolveOutput& out,
                                       const std::vector<Vec2>& points) {
  const Rect r = s.grid().outer();
  for (const auto& x : points)
    if (!(x.x() < r.lo.x() || x.x() > r.hi.x() || x.y() < r.lo.y() || x.y() > r.hi.y()))
      throw ParameterError("eval_exterior_field: point inside the outer box");
  const Wavenumber k(s.params().k);
  const double eta = s.params().eta;
  const MeshedBoundary& m = s.outer_mesh();
  FieldResult a = eval_potential(LayerKind::DL, m, out.outer_cauchy.u, points, k);
  const FieldResult b = eval_potential(LayerKind::SL, m, out.outer_robin.minus + (kI * eta) * out.outer_cauchy.u,
                                       points, k);
  a.values -= b.values;
  return a;
}

/// Total field inside box `box` from the leaf's Cauchy data and its
/// scatterer densities: u = [iη SL - DL]u + SL g - Σ_p SL_p ψ_p.
inline FieldResult eval_interior_field(const DDSolver& s, const SolveOutput& out, int box,
                                       const std::vector<Vec2>& points) {
  const Rect r = s.grid().box(box);
  for (const auto& x : points)
    if (!r.contains(x)) throw ParameterError("eval_interior_field: point outside box " + std::to_string(box));
  const Wavenumber k(s.params().k);
  const double eta = s.params().eta;
  const MeshedBoundary m = build_box_mesh(s.grid(), box, s.discretization().n_per_edge,
                                          s.discretization().grading);
  const CVector& g = out.leaf_incoming[box];
  const CVector f = s.tree().leaves[box].S.matrix * g;
  const CVector u = (f - g) / (2.0 * kI * eta);
  FieldResult res = eval_potential(LayerKind::SL, m, g + (kI * eta) * u, points, k);
  res.values -= eval_potential(LayerKind::DL, m, u, points, k).values;
  std::vector<char> near(points.size(), 0);
  for (int p : res.near_points) near[p] = 1;
  for (std::size_t p = 0; p < s.scatterer_meshes()[box].size(); ++p) {
    const FieldResult sp = eval_potential(LayerKind::SL, s.scatterer_meshes()[box][p],
                                          out.densities[box][p], points, k);
    res.values -= sp.values;
    for (int q : sp.near_points) near[q] = 1;
  }
  res.near_points.clear();
  for (std::size_t p = 0; p < points.size(); ++p)
    if (near[p]) {
      res.near_points.push_back(static_cast<int>(p));
      res.values[static_cast<Eigen::Index>(p)] = cplx(std::nan(""), std::nan(""));
    }
  return res;
}

/// Total field anywhere away from the scatterers: u^inc - Σ_p SL_p ψ_p.
inline FieldResult eval_total_field(const DDSolver& s, const SolveOutput& out,
                                    const std::vector<Vec2>& points) {
  const Wavenumber k(s.params().k);
  FieldResult res;
  res.values = out.incident.values(points);
  std::vector<char> near(points.size(), 0);
  for (int b = 0; b < s.grid().box_count(); ++b)
    for (std::size_t p = 0; p < s.scatterer_meshes()[b].size(); ++p) {
      const FieldResult sp = eval_potential(LayerKind::SL, s.scatterer_meshes()[b][p],
                                            out.densities[b][p], points, k);
      for (int q : sp.near_points) near[q] = 1;
      for (std::size_t q = 0; q < points.size(); ++q)
        if (!near[q]) res.values[static_cast<Eigen::Index>(q)] -= sp.values[static_cast<Eigen::Index>(q)];
    }
  for (std::size_t p = 0; p < points.size(); ++p)
    if (near[p]) {
      res.near_points.push_back(static_cast<int>(p));
      res.values[static_cast<Eigen::Index>(p)] = cplx(std::nan(""), std::nan(""));
    }
  return res;
}

/// Largest jump of u and ∂_n u across shared box edges and between the leaf
/// data and the outer total-field data on ∂B₀, relative to max |u|, max |∂_n u|.
struct TraceJumps {
  double interior_u = 0.0, interior_dn = 0.0;
  double outer_u = 0.0, outer_dn = 0.0;
};

inline TraceJumps trace_jumps(const DDSolver& s, const SolveOutput& out) {
  const double eta = s.params().eta;
  const int B = s.grid().box_count();
  std::vector<CauchyData> leaf(B);
  double su = 0.0, sd = 0.0;
  for (int b = 0; b < B; ++b) {
    const CVector& g = out.leaf_incoming[b];
    leaf[b] = from_robin({g, s.tree().leaves[b].S.matrix * g}, eta);
    su = std::max(su, leaf[b].u.cwiseAbs().maxCoeff());
    sd = std::max(sd, leaf[b].dn.cwiseAbs().maxCoeff());
  }
  TraceJumps j;
  for (int b = 0; b < B; ++b) {
    const RtrMap& S = s.tree().leaves[b].S;
    for (const auto& seg : S.partition.segments) {
      const auto nb = neighbour_segment(s.grid(), seg.id);
      if (!nb) continue;
      const PartitionSegment& o = s.tree().leaves[nb->box].S.partition.find(*nb);
      for (int i = 0; i < seg.count; ++i) {
        const int a = seg.start + i, c = o.start + o.count - 1 - i;
        j.interior_u = std::max(j.interior_u, std::abs(leaf[b].u[a] - leaf[nb->box].u[c]));
        j.interior_dn = std::max(j.interior_dn, std::abs(leaf[b].dn[a] + leaf[nb->box].dn[c]));
      }
    }
  }
  const MeshedBoundary& m = s.outer_mesh();
  const CauchyData inc = plane_wave_cauchy(out.incident, m.nodes, m.normals);
  const BoundaryPartition op = BoundaryPartition::from_labels(m);
  for (const auto& seg : op.segments) {
    const PartitionSegment& ls = s.tree().leaves[seg.id.box].S.partition.find(seg.id);
    for (int i = 0; i < seg.count; ++i) {
      const int a = seg.start + i, c = ls.start + i;
      j.outer_u = std::max(j.outer_u,
                           std::abs(out.outer_cauchy.u[a] + inc.u[a] - leaf[seg.id.box].u[c]));
      j.outer_dn = std::max(j.outer_dn,
                            std::abs(out.outer_cauchy.dn[a] + inc.dn[a] - leaf[seg.id.box].dn[c]));
    }
  }
  j.interior_u /= su;
  j.outer_u /= su;
  j.interior_dn /= sd;
  j.outer_dn /= sd;
  return j;
}

}  // namespace msdd
