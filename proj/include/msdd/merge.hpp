#pragma once
//
// Pairwise merging of Robin-to-Robin maps and the merge tree over a box grid.
//
// On a shared edge C the normals of the two boxes are opposite, so the
// incoming datum of one side is minus the outgoing datum of the other:
//   g_a = -(S^b_CE g_b,E + S^b_CC g_b,C),  g_b = -(S^a_CE g_a,E + S^a_CC g_a,C).
// Both interface data follow from one solve with
//   D = [[I, S^b_CC], [S^a_CC, I]],
// and the merged map acts on the retained data [g_a,E; g_b,E].
//

#include <algorithm>
#include <bit>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msdd/rtr.hpp"

namespace msdd {

/// A leaf box or a union of boxes: its RtR map and, unless dropped, the trace
/// maps of every scatterer it contains.
struct MergeNode {
  RtrMap S;
  std::vector<TraceMap> Y;
  std::vector<int> boxes;
};

/// Paired positions of the shared nodes in the maps of two subdomains.
struct InterfaceCorrespondence {
  std::vector<std::pair<SegmentId, SegmentId>> pairs;
  std::vector<int> a_index, b_index;

  int size() const { return static_cast<int>(a_index.size()); }
  std::string name() const {
    std::string s;
    for (const auto& [a, b] : pairs) s += (s.empty() ? "" : "+") + to_string(a) + "|" + to_string(b);
    return s;
  }
};

/// Row and column index sets splitting a map into interface and rest.
struct SplitBlocks {
  std::vector<int> c, rest;

  CMatrix cc(const CMatrix& m) const { return m(c, c); }
  CMatrix c_rest(const CMatrix& m) const { return m(c, rest); }
  CMatrix rest_c(const CMatrix& m) const { return m(rest, c); }
  CMatrix rest_rest(const CMatrix& m) const { return m(rest, rest); }
};

inline SplitBlocks split_blocks(const RtrMap& map, const std::vector<SegmentId>& interface) {
  std::vector<bool> in_c(map.size(), false);
  SplitBlocks s;
  for (const auto& id : interface) {
    const PartitionSegment& seg = map.partition.find(id);
    for (int i = 0; i < seg.count; ++i) {
      s.c.push_back(seg.start + i);
      in_c[seg.start + i] = true;
    }
  }
  for (int i = 0; i < map.size(); ++i)
    if (!in_c[i]) s.rest.push_back(i);
  return s;
}

inline SplitBlocks split_blocks(const RtrMap& map, const SegmentId& interface) {
  return split_blocks(map, std::vector<SegmentId>{interface});
}

/// The edge of the neighbouring box that coincides with `s`, if any.
inline std::optional<SegmentId> neighbour_segment(const BoxGrid& g, const SegmentId& s) {
  int r = g.row_of(s.box), c = g.col_of(s.box);
  switch (s.side) {
    case Side::S: --r; break;
    case Side::E: ++c; break;
    case Side::N: ++r; break;
    case Side::W: --c; break;
  }
  if (r < 0 || r >= g.rows || c < 0 || c >= g.cols) return std::nullopt;
  return SegmentId{g.box_id(r, c), opposite(s.side)};
}

/// Shared edges of two subdomains. Each edge is traversed in opposite
/// directions by the two sides, so node i of a pairs with node n-1-i of b.
inline InterfaceCorrespondence find_interface(const BoxGrid& g, const RtrMap& a, const RtrMap& b) {
  InterfaceCorrespondence ic;
  const double tol = 1e-10 * std::max(g.box_width, g.box_height);
  for (const auto& sa : a.partition.segments) {
    const auto nb = neighbour_segment(g, sa.id);
    if (!nb || !b.partition.contains(*nb)) continue;
    const PartitionSegment& sb = b.partition.find(*nb);
    if (sa.count != sb.count)
      throw ConformityError("interface " + to_string(sa.id) + " has mismatched node counts");
    ic.pairs.push_back({sa.id, sb.id});
    for (int i = 0; i < sa.count; ++i) {
      const int ia = sa.start + i, ib = sb.start + sb.count - 1 - i;
      if (!a.nodes.empty() && !b.nodes.empty() && (a.nodes[ia] - b.nodes[ib]).norm() > tol)
        throw ConformityError("interface " + to_string(sa.id) + " nodes do not coincide");
      ic.a_index.push_back(ia);
      ic.b_index.push_back(ib);
    }
  }
  if (ic.pairs.empty()) throw ConformityError("subdomains share no edge");
  return ic;
}

/// Data needed to recover the eliminated interface data from the merged
/// incoming datum: [g_a,C; g_b,C] = E [g_a,E; g_b,E].
struct BackSubRecord {
  std::vector<std::pair<SegmentId, SegmentId>> interface;
  CMatrix E;
  std::vector<int> a_index, b_index;  // interface positions in the children
  std::vector<int> a_keep, b_keep;    // retained positions in the children
  double condition = 0.0;

  int interface_size() const { return static_cast<int>(a_index.size()); }
};

struct MergeOptions {
  double max_condition = 1e8;
  bool keep_trace_maps = true;
};

struct MergeResult {
  MergeNode node;
  BackSubRecord record;
};

namespace detail {

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<int>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(v[i]);
  return out;
}

inline BoundaryPartition retained_partition(const BoundaryPartition& p,
                                            const std::vector<std::pair<SegmentId, SegmentId>>& c,
                                            bool a_side, int offset) {
  BoundaryPartition out;
  for (const auto& s : p.segments) {
    const bool gone = std::any_of(c.begin(), c.end(), [&](const auto& pr) {
      return (a_side ? pr.first : pr.second) == s.id;
    });
    if (gone) continue;
    out.segments.push_back({s.id, offset, s.count});
    offset += s.count;
  }
  return out;
}

}  // namespace detail

/// Merges two adjacent subdomains along all of their shared edges.
inline MergeResult merge_pair(const MergeNode& a, const MergeNode& b, const BoxGrid& g,
                              const MergeOptions& opt = {}) {
  if (a.S.eta != b.S.eta) throw ParameterError("merged maps use different eta");
  const InterfaceCorrespondence ic = find_interface(g, a.S, b.S);
  std::vector<SegmentId> ca, cb;
  for (const auto& [x, y] : ic.pairs) {
    ca.push_back(x);
    cb.push_back(y);
  }
  // Retained indices come from the partitions so that the merged node order
  // follows segment order.
  const SplitBlocks sa = split_blocks(a.S, ca), sb = split_blocks(b.S, cb);
  const int nC = ic.size();
  const int na = static_cast<int>(sa.rest.size()), nb = static_cast<int>(sb.rest.size());
  const CMatrix& A = a.S.matrix;
  const CMatrix& B = b.S.matrix;

  CMatrix D = CMatrix::Identity(2 * nC, 2 * nC);
  D.topRightCorner(nC, nC) = B(ic.b_index, ic.b_index);
  D.bottomLeftCorner(nC, nC) = A(ic.a_index, ic.a_index);
  Eigen::PartialPivLU<CMatrix> lu(D);
  MergeResult res;
  BackSubRecord& rec = res.record;
  rec.interface = ic.pairs;
  rec.condition = detail::condition_estimate(lu);
  if (!std::isfinite(rec.condition) || rec.condition > opt.max_condition)
    throw ConditioningError("interface " + ic.name() + " is ill conditioned", rec.condition);

  CMatrix rhs = CMatrix::Zero(2 * nC, na + nb);
  rhs.topRightCorner(nC, nb) = -B(ic.b_index, sb.rest);
  rhs.bottomLeftCorner(nC, na) = -A(ic.a_index, sa.rest);
  rec.E = lu.solve(rhs);
  rec.a_index = ic.a_index;
  rec.b_index = ic.b_index;
  rec.a_keep = sa.rest;
  rec.b_keep = sb.rest;

  MergeNode& m = res.node;
  m.S.eta = a.S.eta;
  m.S.matrix.setZero(na + nb, na + nb);
  m.S.matrix.topLeftCorner(na, na) = A(sa.rest, sa.rest);
  m.S.matrix.bottomRightCorner(nb, nb) = B(sb.rest, sb.rest);
  m.S.matrix.topRows(na) += A(sa.rest, ic.a_index) * rec.E.topRows(nC);
  m.S.matrix.bottomRows(nb) += B(sb.rest, ic.b_index) * rec.E.bottomRows(nC);

  m.S.partition = detail::retained_partition(a.S.partition, ic.pairs, true, 0);
  const BoundaryPartition pb = detail::retained_partition(b.S.partition, ic.pairs, false, na);
  m.S.partition.segments.insert(m.S.partition.segments.end(), pb.segments.begin(),
                                pb.segments.end());
  m.S.weights.resize(na + nb);
  m.S.weights << a.S.weights(sa.rest), b.S.weights(sb.rest);
  m.S.nodes = detail::pick(a.S.nodes, sa.rest);
  m.S.normals = detail::pick(a.S.normals, sa.rest);
  for (int i : sb.rest) {
    m.S.nodes.push_back(b.S.nodes[i]);
    m.S.normals.push_back(b.S.normals[i]);
  }

  m.boxes = a.boxes;
  m.boxes.insert(m.boxes.end(), b.boxes.begin(), b.boxes.end());
  if (opt.keep_trace_maps) {
    for (const auto& t : a.Y) {
      TraceMap u = t;
      u.matrix.setZero(t.matrix.rows(), na + nb);
      u.matrix.leftCols(na) = t.matrix(Eigen::all, sa.rest);
      u.matrix += t.matrix(Eigen::all, ic.a_index) * rec.E.topRows(nC);
      m.Y.push_back(std::move(u));
    }
    for (const auto& t : b.Y) {
      TraceMap u = t;
      u.matrix.setZero(t.matrix.rows(), na + nb);
      u.matrix.rightCols(nb) = t.matrix(Eigen::all, sb.rest);
      u.matrix += t.matrix(Eigen::all, ic.b_index) * rec.E.bottomRows(nC);
      m.Y.push_back(std::move(u));
    }
  }
  return res;
}

/// Position of every node of `target` in `map`, matched by segment label.
/// Both must traverse each segment in the same direction.
inline std::vector<int> partition_permutation(const RtrMap& map, const MeshedBoundary& target) {
  const BoundaryPartition tp = BoundaryPartition::from_labels(target);
  if (tp.size() != map.size())
    throw PartitionError("partition sizes differ: " + std::to_string(tp.size()) + " vs " +
                         std::to_string(map.size()));
  std::vector<int> perm;
  perm.reserve(tp.size());
  for (const auto& ts : tp.segments) {
    const PartitionSegment& ms = map.partition.find(ts.id);
    if (ms.count != ts.count) throw PartitionError("segment " + to_string(ts.id) + " size differs");
    for (int i = 0; i < ts.count; ++i) perm.push_back(ms.start + i);
  }
  if (!map.nodes.empty())
    for (int i = 0; i < tp.size(); ++i)
      if ((map.nodes[perm[i]] - target.nodes[i]).norm() > 1e-10 * (1.0 + target.nodes[i].norm()))
        throw ConformityError("partition nodes do not match the target mesh");
  return perm;
}

/// Merge hierarchy. Ids below `leaf_count` are leaves (box ids); internal
/// node i has id leaf_count + i.
struct MergeTree {
  struct Internal {
    int left = -1, right = -1;
    BackSubRecord record;
    BoundaryPartition partition;
    std::vector<int> boxes;
    double seconds = 0.0;
  };

  std::vector<SubdomainMaps> leaves;
  std::vector<Internal> internal;
  int root = 0;
  /// 𝒮^int and Y^int in root partition order.
  RtrMap S_int;
  std::vector<TraceMap> Y_int;
  bool has_Y_int = false;

  int leaf_count() const { return static_cast<int>(leaves.size()); }
  int merge_count() const { return static_cast<int>(internal.size()); }
  bool is_leaf(int id) const { return id < leaf_count(); }
  std::vector<double> conditions() const {
    std::vector<double> c;
    for (const auto& n : internal) c.push_back(n.record.condition);
    return c;
  }
};

namespace detail {

inline std::string describe_boxes(const std::vector<int>& boxes) {
  std::string s;
  for (int b : boxes) s += (s.empty() ? "" : ",") + std::to_string(b);
  return "{" + s + "}";
}

}  // namespace detail

/// Merges the leaves of an ℓ₁×ℓ₂ grid: boxes within each row first, then the
/// row strips. Counts that are powers of two merge pairwise level by level;
/// other counts fold sequentially.
inline MergeTree hierarchical_merge(const BoxGrid& g, std::vector<SubdomainMaps> leaves,
                                    const MergeOptions& opt = {}) {
  if (static_cast<int>(leaves.size()) != g.box_count())
    throw ParameterError("leaf count does not match the grid");
  MergeTree tree;
  tree.leaves = std::move(leaves);
  const int L = tree.leaf_count();
  std::vector<std::optional<MergeNode>> work(L);
  auto leaf_node = [&](int id) {
    MergeNode n;
    n.S = tree.leaves[id].S;
    if (opt.keep_trace_maps) n.Y = tree.leaves[id].Y;
    n.boxes = {id};
    return n;
  };
  auto node_of = [&](int id) -> MergeNode {
    if (id < L) return leaf_node(id);
    return std::move(*work[id]);
  };

  auto merge = [&](int ia, int ib) {
    const MergeNode a = node_of(ia), b = node_of(ib);
    const auto t0 = std::chrono::steady_clock::now();
    MergeResult r;
    try {
      r = merge_pair(a, b, g, opt);
    } catch (const ConditioningError& e) {
      throw ConditioningError(std::string(e.what()) + " (merging boxes " +
                                  detail::describe_boxes(a.boxes) + " and " +
                                  detail::describe_boxes(b.boxes) + ")",
                              e.condition_estimate);
    }
    MergeTree::Internal in;
    in.left = ia;
    in.right = ib;
    in.record = std::move(r.record);
    in.partition = r.node.S.partition;
    in.boxes = r.node.boxes;
    in.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    tree.internal.push_back(std::move(in));
    work.push_back(std::move(r.node));
    return L + tree.merge_count() - 1;
  };
  auto reduce = [&](std::vector<int> ids) {
    if (std::has_single_bit(ids.size())) {
      while (ids.size() > 1) {
        std::vector<int> next;
        for (std::size_t i = 0; i + 1 < ids.size(); i += 2) next.push_back(merge(ids[i], ids[i + 1]));
        ids = std::move(next);
      }
      return ids[0];
    }
    int acc = ids[0];
    for (std::size_t i = 1; i < ids.size(); ++i) acc = merge(acc, ids[i]);
    return acc;
  };

  std::vector<int> strips;
  for (int r = 0; r < g.rows; ++r) {
    std::vector<int> row;
    for (int c = 0; c < g.cols; ++c) row.push_back(g.box_id(r, c));
    strips.push_back(reduce(row));
  }
  tree.root = reduce(strips);
  MergeNode root = node_of(tree.root);
  tree.S_int = std::move(root.S);
  tree.Y_int = std::move(root.Y);
  tree.has_Y_int = opt.keep_trace_maps;
  return tree;
}

/// Incoming Robin datum of every leaf, from the root datum (root partition
/// order) by top-down application of the back-substitution records.
inline std::vector<CVector> back_substitute(const MergeTree& tree, const CVector& root_datum) {
  if (root_datum.size() != tree.S_int.size())
    throw PartitionError("root datum has " + std::to_string(root_datum.size()) +
                         " entries, the root partition " + std::to_string(tree.S_int.size()));
  const int L = tree.leaf_count();
  std::vector<CVector> out(L);
  std::vector<std::pair<int, CVector>> stack{{tree.root, root_datum}};
  while (!stack.empty()) {
    auto [id, g] = std::move(stack.back());
    stack.pop_back();
    if (id < L) {
      out[id] = std::move(g);
      continue;
    }
    const MergeTree::Internal& n = tree.internal[id - L];
    const BackSubRecord& r = n.record;
    const int nC = r.interface_size();
    const int na = static_cast<int>(r.a_keep.size()), nb = static_cast<int>(r.b_keep.size());
    const CVector z = r.E * g;
    CVector ga(na + nC), gb(nb + nC);
    ga(r.a_keep) = g.head(na);
    ga(r.a_index) = z.head(nC);
    gb(r.b_keep) = g.tail(nb);
    gb(r.b_index) = z.tail(nC);
    stack.push_back({n.left, std::move(ga)});
    stack.push_back({n.right, std::move(gb)});
  }
  return out;
}

/// Largest mismatch |g_ℓ + 𝒮ʲg_j| over all shared leaf edges, relative to the
/// largest incoming datum.
inline double matching_residual(const BoxGrid& g, const MergeTree& tree,
                                const std::vector<CVector>& leaf_incoming) {
  double worst = 0.0, scale = 0.0;
  for (const auto& v : leaf_incoming) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  for (int j = 0; j < tree.leaf_count(); ++j) {
    const RtrMap& Sj = tree.leaves[j].S;
    const CVector f = Sj.matrix * leaf_incoming[j];
    for (const auto& seg : Sj.partition.segments) {
      const auto nb = neighbour_segment(g, seg.id);
      if (!nb) continue;
      const RtrMap& Sl = tree.leaves[nb->box].S;
      const PartitionSegment& other = Sl.partition.find(*nb);
      for (int i = 0; i < seg.count; ++i) {
        const cplx gl = leaf_incoming[nb->box][other.start + other.count - 1 - i];
        worst = std::max(worst, std::abs(gl + f[seg.start + i]));
      }
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace msdd
