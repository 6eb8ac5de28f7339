#pragma once
//
// Robin-to-Robin maps of box subdomains and of the exterior of the outer box.
//
// Interior box B with sound-soft scatterers S_p. Unknowns: u on ∂B and ψ_p on
// each scatterer (Neumann trace of the total field for closed curves, jump of
// the normal derivative for segments), from
//   u = SL_B[∂u] - DL_B[u] - Σ_p SL_p[ψ_p].
// With ∂u = g + iη u the box rows combine the Dirichlet trace with 2 S_κ
// times the Neumann trace, and closed scatterers use a Burton-Miller row.
// The incoming datum is g = (∂_n - iη)u, the outgoing one (∂_n + iη)u =
// g + 2iη u, hence 𝒮 = I + 2iη X_B with X the solution operator of the system.
//

#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "msdd/bio.hpp"

namespace msdd {

struct PartitionSegment {
  SegmentId id;
  int start = 0, count = 0;
};

/// Ordered contiguous runs of boundary nodes, each tagged with a box side.
struct BoundaryPartition {
  std::vector<PartitionSegment> segments;

  int size() const {
    int n = 0;
    for (const auto& s : segments) n += s.count;
    return n;
  }
  bool contains(const SegmentId& id) const {
    for (const auto& s : segments)
      if (s.id == id) return true;
    return false;
  }
  const PartitionSegment& find(const SegmentId& id) const {
    for (const auto& s : segments)
      if (s.id == id) return s;
    throw PartitionError("segment " + to_string(id) + " not in partition");
  }

  static BoundaryPartition from_labels(const MeshedBoundary& m) {
    BoundaryPartition p;
    for (int i = 0; i < m.size(); ++i) {
      if (p.segments.empty() || !(p.segments.back().id == m.labels[i]))
        p.segments.push_back({m.labels[i], i, 0});
      ++p.segments.back().count;
    }
    return p;
  }
};

struct RtrMap {
  CMatrix matrix;
  BoundaryPartition partition;
  double eta = 1.0;
  RVector weights;
  std::vector<Vec2> nodes, normals;

  int size() const { return static_cast<int>(matrix.rows()); }
};

/// Rows of a Robin-to-scatterer map belonging to one scatterer.
struct TraceMap {
  CMatrix matrix;
  int box = 0;
  int index = 0;  // position in its box's scatterer list
  bool arc = false;
};

struct RtrParams {
  double k = 1.0;
  double eta = 1.0;
  double epsilon = 0.4;
  double mu = 1.0;

  cplx kappa() const { return {k, epsilon}; }

  /// η = k, ε = 0.4 k^{1/3}, μ = max(k, 1).
  static RtrParams defaults(double k) {
    RtrParams p;
    p.k = k;
    p.eta = k;
    p.epsilon = 0.4 * std::cbrt(k);
    p.mu = std::max(k, 1.0);
    return p;
  }
  void validate() const {
    if (!(k > 0.0)) throw ParameterError("wavenumber must be positive");
    if (!(eta > 0.0)) throw ParameterError("eta must be positive");
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (mu == 0.0 || !std::isfinite(mu)) throw ParameterError("mu must be a nonzero real");
  }
};

/// Box-only blocks of the subdomain system. They depend on the box shape and
/// mesh but not on its position, so congruent boxes share one copy.
struct BoxBlocks {
  CMatrix A_BB;   // system block acting on u_B
  CMatrix R_B;    // right-hand-side operator acting on g
  CMatrix S_kappa;
};

namespace detail {

// Box row split into its u and ∂_n u coefficients, with ∂_n u = g + iη u
// giving A = U + iη Dn and right-hand side -Dn g. Interior rows read
//   ½u + Ku - S∂u - 2S_κ[Nu + (½ - Kᵀ)∂u] = 0,
// exterior rows
//   ½u - Ku + S∂u - 2S_κ[Nu - (½ + Kᵀ)∂u] = 0.
struct RowBlocks {
  CMatrix U, Dn, S_kappa;
};

inline RowBlocks box_rows(const MeshedBoundary& box, const RtrParams& prm, bool exterior,
                          const CornerCorrection* corr) {
  prm.validate();
  const int n = box.size();
  const CorrectedOperators ok = corrected_self_set(box, prm.k, corr);
  const CMatrix Sc = assemble_self(OpKind::S, box, Wavenumber(prm.kappa()));
  const CMatrix I = CMatrix::Identity(n, n);
  const double sg = exterior ? -1.0 : 1.0;
  RowBlocks r;
  r.U = 0.5 * I + sg * ok.K.on_u - 2.0 * (Sc * ok.N.on_u);
  r.Dn = sg * (ok.K.on_dn - ok.S - Sc) + 2.0 * (Sc * ok.Kt) - 2.0 * (Sc * ok.N.on_dn);
  r.S_kappa = Sc;
  return r;
}

}  // namespace detail

inline BoxBlocks assemble_box_blocks(const MeshedBoundary& box, const RtrParams& prm,
                                     const CornerCorrection* corr = nullptr) {
  detail::RowBlocks r = detail::box_rows(box, prm, false, corr);
  BoxBlocks b;
  b.A_BB = r.U + (kI * prm.eta) * r.Dn;
  b.R_B = -r.Dn;
  b.S_kappa = std::move(r.S_kappa);
  return b;
}

struct SubdomainSystem {
  CMatrix A;     // (nB + nS) square
  CMatrix rhs;   // (nB + nS) x nB
  int nB = 0;
  std::vector<int> offsets;  // scatterer row offsets, plus the end
  std::vector<bool> arcs;
};

inline SubdomainSystem assemble_subdomain_system(const MeshedBoundary& box,
                                                 const std::vector<MeshedBoundary>& scat,
                                                 const RtrParams& prm,
                                                 const BoxBlocks* shared = nullptr) {
  prm.validate();
  std::optional<BoxBlocks> own;
  if (!shared) {
    own = assemble_box_blocks(box, prm);
    shared = &*own;
  }
  const BoxBlocks& bb = *shared;
  const int nB = box.size();
  if (bb.A_BB.rows() != nB) throw ParameterError("box blocks do not match the box mesh");
  Rect r{box.nodes[0], box.nodes[0]};
  for (const auto& x : box.nodes) r.lo = r.lo.cwiseMin(x), r.hi = r.hi.cwiseMax(x);
  for (std::size_t p = 0; p < scat.size(); ++p)
    for (const auto& x : scat[p].nodes)
      if (!(r.inner_distance(x) > 0.0))
        throw GeometryError("scatterer " + std::to_string(p) + " touches or leaves the box");
  SubdomainSystem sys;
  sys.nB = nB;
  sys.offsets.push_back(nB);
  for (const auto& m : scat) {
    sys.offsets.push_back(sys.offsets.back() + m.size());
    sys.arcs.push_back(!m.closed());
  }
  const int n = sys.offsets.back();
  sys.A.setZero(n, n);
  sys.rhs.setZero(n, nB);
  sys.A.topLeftCorner(nB, nB) = bb.A_BB;
  sys.rhs.topRows(nB) = bb.R_B;

  const Wavenumber k(prm.k);
  const cplx ieta = kI * prm.eta, imu = kI * prm.mu;
  const int P = static_cast<int>(scat.size());
  for (int p = 0; p < P; ++p) {
    const MeshedBoundary& mp = scat[p];
    const int op = sys.offsets[p], np = mp.size();
    try {
      // Scatterer p acting on the box rows.
      const CMatrix sl_pb = assemble_cross(OpKind::SLcross, mp, box, k);
      const CMatrix dnsl_pb = assemble_cross(OpKind::dnSLcross, mp, box, k);
      sys.A.block(0, op, nB, np) = sl_pb - 2.0 * (bb.S_kappa * dnsl_pb);

      // Box acting on scatterer p.
      const CMatrix sl_bp = assemble_cross(OpKind::SLcross, box, mp, k);
      const CMatrix dl_bp = assemble_cross(OpKind::DLcross, box, mp, k);
      if (mp.closed()) {
        const CMatrix dnsl_bp = assemble_cross(OpKind::dnSLcross, box, mp, k);
        const CMatrix dndl_bp = assemble_cross(OpKind::dnDLcross, box, mp, k);
        sys.A.block(op, 0, np, nB) = -ieta * dnsl_bp + dndl_bp - imu * (-ieta * sl_bp + dl_bp);
        sys.rhs.block(op, 0, np, nB) = dnsl_bp - imu * sl_bp;
        const SelfOperators self = assemble_self_set(mp, k, {true, false, true, false});
        sys.A.block(op, op, np, np) =
            0.5 * CMatrix::Identity(np, np) + self.Kt - imu * self.S;
      } else {
        sys.A.block(op, 0, np, nB) = -ieta * sl_bp + dl_bp;
        sys.rhs.block(op, 0, np, nB) = sl_bp;
        sys.A.block(op, op, np, np) = assemble_arc_self_S(mp, k);
      }
      for (int q = 0; q < P; ++q) {
        if (q == p) continue;
        const int oq = sys.offsets[q], nq = scat[q].size();
        const CMatrix sl = assemble_cross(OpKind::SLcross, scat[q], mp, k);
        if (mp.closed())
          sys.A.block(op, oq, np, nq) =
              assemble_cross(OpKind::dnSLcross, scat[q], mp, k) - imu * sl;
        else
          sys.A.block(op, oq, np, nq) = sl;
      }
    } catch (const GeometryError&) {
      throw GeometryError("scatterer " + std::to_string(p) +
                          " touches the box boundary or another scatterer");
    }
  }
  return sys;
}

namespace detail {

// Reciprocal condition estimate in the 1-norm from an LU factorization.
template <class LU>
double condition_estimate(const LU& lu) {
  const double rc = lu.rcond();
  return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

}  // namespace detail

struct SubdomainMaps {
  RtrMap S;
  std::vector<TraceMap> Y;
  double condition = 0.0;
};

/// 𝒮 and Y of one box from its assembled system (one factorization).
inline SubdomainMaps rtr_interior_subdomain(const SubdomainSystem& sys, const MeshedBoundary& box,
                                            const RtrParams& prm, int box_id = 0) {
  Eigen::PartialPivLU<CMatrix> lu(sys.A);
  SubdomainMaps out;
  out.condition = detail::condition_estimate(lu);
  if (!std::isfinite(out.condition) || out.condition > 1e14)
    throw ConditioningError("subdomain system of box " + std::to_string(box_id) + " is singular",
                            out.condition);
  const CMatrix X = lu.solve(sys.rhs);
  const int nB = sys.nB;
  out.S.matrix = CMatrix::Identity(nB, nB) + (2.0 * kI * prm.eta) * X.topRows(nB);
  out.S.partition = BoundaryPartition::from_labels(box);
  out.S.eta = prm.eta;
  out.S.weights = box.weights;
  out.S.nodes = box.nodes;
  out.S.normals = box.normals;
  for (std::size_t p = 0; p + 1 < sys.offsets.size(); ++p) {
    TraceMap t;
    t.matrix = X.middleRows(sys.offsets[p], sys.offsets[p + 1] - sys.offsets[p]);
    t.box = box_id;
    t.index = static_cast<int>(p);
    t.arc = sys.arcs[p];
    out.Y.push_back(std::move(t));
  }
  return out;
}

struct Discretization {
  int n_per_edge = 64;
  int grading = 4;
  int n_per_scatterer = 32;

  void validate() const {
    if (n_per_edge < 8) throw ParameterError("n_per_edge must be >= 8");
    if (grading < 2) throw ParameterError("grading must be >= 2");
    if (n_per_scatterer < 8 || n_per_scatterer % 2 != 0)
      throw ParameterError("n_per_scatterer must be even and >= 8");
  }
};

struct LeafBuildStats {
  double max_condition = 0.0;
  int factorizations = 0;
};

/// 𝒮ʲ and Yʲ of every box of the grid. All boxes are congruent, so the box
/// blocks are assembled once; empty boxes share one map.
inline std::vector<SubdomainMaps> build_leaf_maps(const BoxGrid& g, const Discretization& disc,
                                                  const RtrParams& prm,
                                                  LeafBuildStats* stats = nullptr) {
  disc.validate();
  prm.validate();
  g.validate();
  const int B = g.box_count();
  const MeshedBoundary box0 = build_box_mesh(g, 0, disc.n_per_edge, disc.grading);
  const CornerCorrection corr = corner_correction(box0);
  const BoxBlocks blocks = assemble_box_blocks(box0, prm, &corr);
  std::vector<SubdomainMaps> out(B);
  std::optional<SubdomainMaps> empty;
  int factorizations = 0;
  std::vector<int> busy;
  for (int id = 0; id < B; ++id) {
    if (!g.scatterers[id].empty()) {
      busy.push_back(id);
      continue;
    }
    const MeshedBoundary box = build_box_mesh(g, id, disc.n_per_edge, disc.grading);
    if (!empty) {
      empty = rtr_interior_subdomain(assemble_subdomain_system(box, {}, prm, &blocks), box, prm, id);
      ++factorizations;
    }
    out[id] = *empty;
    out[id].S.partition = BoundaryPartition::from_labels(box);
    out[id].S.nodes = box.nodes;
    out[id].S.normals = box.normals;
  }
  std::vector<std::exception_ptr> errors(busy.size());
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < static_cast<int>(busy.size()); ++t) {
    const int id = busy[t];
    try {
      const MeshedBoundary box = build_box_mesh(g, id, disc.n_per_edge, disc.grading);
      std::vector<MeshedBoundary> scat;
      for (const auto& s : g.scatterers[id]) scat.push_back(build_scatterer_mesh(s, disc.n_per_scatterer));
      out[id] = rtr_interior_subdomain(assemble_subdomain_system(box, scat, prm, &blocks), box, prm, id);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  factorizations += static_cast<int>(busy.size());
  if (stats) {
    stats->factorizations = factorizations;
    stats->max_condition = 0.0;
    for (const auto& m : out) stats->max_condition = std::max(stats->max_condition, m.condition);
  }
  return out;
}

/// 𝒮ᵉˣᵗ on the outer boundary: maps (∂_n - iη)u to (∂_n + iη)u for radiating u
/// (n the outward normal of the box).
inline RtrMap rtr_exterior(const MeshedBoundary& outer, const RtrParams& prm,
                           double* condition = nullptr) {
  const int n = outer.size();
  const detail::RowBlocks r = detail::box_rows(outer, prm, true, nullptr);
  const CMatrix A = r.U + (kI * prm.eta) * r.Dn;
  Eigen::PartialPivLU<CMatrix> lu(A);
  const double cond = detail::condition_estimate(lu);
  if (condition) *condition = cond;
  if (!std::isfinite(cond) || cond > 1e14)
    throw ConditioningError("exterior RtR system is singular", cond);
  RtrMap m;
  m.matrix = CMatrix::Identity(n, n) - (2.0 * kI * prm.eta) * lu.solve(r.Dn);
  m.partition = BoundaryPartition::from_labels(outer);
  m.eta = prm.eta;
  m.weights = outer.weights;
  m.nodes = outer.nodes;
  m.normals = outer.normals;
  return m;
}

/// Relative deviation |‖𝒮g‖_W - ‖g‖_W| / ‖g‖_W in the quadrature-weighted norm.
inline double unitarity_defect(const RtrMap& m, const CVector& g) {
  const CVector w = m.weights.cwiseSqrt().cast<cplx>();
  const double a = (w.asDiagonal() * g).norm();
  const double b = (w.asDiagonal() * (m.matrix * g)).norm();
  return std::abs(b - a) / a;
}

}  // namespace msdd
