#include <random>

#include <gtest/gtest.h>

#include "msdd/fields.hpp"
#include "msdd/oracle.hpp"
#include "msdd/rtr.hpp"

using namespace msdd;

namespace {

constexpr double kK = 5.0;
const Rect kUnit{Vec2(0, 0), Vec2(1, 1)};

MeshedBoundary unit_box(int n) { return build_box_mesh(kUnit, n, 4); }

SubdomainMaps interior_map(int n, const std::vector<MeshedBoundary>& scat = {},
                           const RtrParams& prm = RtrParams::defaults(kK)) {
  const MeshedBoundary box = unit_box(n);
  return rtr_interior_subdomain(assemble_subdomain_system(box, scat, prm), box, prm);
}

double point_source_error(const RtrMap& S, const Vec2& x0) {
  const RobinData r = point_source_traces(kK, x0, S.nodes, S.normals, S.eta);
  return rel_max_error(S.matrix * r.minus, r.plus);
}

CVector random_datum(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  CVector g(n);
  for (int i = 0; i < n; ++i) g[i] = cplx(d(rng), d(rng));
  return g;
}

}  // namespace

TEST(BoundaryPartition, CoversEveryNodeOnce) {
  const MeshedBoundary box = unit_box(16);
  const BoundaryPartition p = BoundaryPartition::from_labels(box);
  ASSERT_EQ(p.segments.size(), 4u);
  int next = 0;
  for (const auto& s : p.segments) {
    EXPECT_EQ(s.start, next);
    EXPECT_EQ(s.count, 16);
    next += s.count;
  }
  EXPECT_EQ(next, box.size());
  EXPECT_THROW(p.find(SegmentId{3, Side::E}), PartitionError);
}

TEST(SubdomainSystem, EmptyBoxIsTheBoxBlock) {
  const MeshedBoundary box = unit_box(16);
  const RtrParams prm = RtrParams::defaults(kK);
  const SubdomainSystem sys = assemble_subdomain_system(box, {}, prm);
  const BoxBlocks bb = assemble_box_blocks(box, prm);
  EXPECT_EQ(sys.A.rows(), 64);
  EXPECT_EQ((sys.A - bb.A_BB).norm(), 0.0);
  EXPECT_EQ((sys.rhs - bb.R_B).norm(), 0.0);
}

TEST(SubdomainSystem, BlockDimensionsWithOneCircle) {
  const MeshedBoundary box = unit_box(16);
  const SubdomainSystem sys =
      assemble_subdomain_system(box, {build_circle_mesh({0.5, 0.5}, 0.2, 24)}, RtrParams::defaults(kK));
  EXPECT_EQ(sys.A.rows(), 64 + 24);
  EXPECT_EQ(sys.A.cols(), 64 + 24);
  EXPECT_EQ(sys.rhs.rows(), 64 + 24);
  EXPECT_EQ(sys.rhs.cols(), 64);
}

TEST(SubdomainSystem, ConditionBoundedUnderRefinement) {
  for (int n : {16, 32, 64}) {
    const SubdomainMaps m = interior_map(n, {build_circle_mesh({0.5, 0.5}, 0.25, 2 * n)});
    EXPECT_LT(m.condition, 1e3) << n;
  }
}

TEST(SubdomainSystem, ScattererTouchingTheBoxIsRejected) {
  EXPECT_THROW(assemble_subdomain_system(unit_box(16), {build_circle_mesh({0.5, 0.5}, 0.5, 32)},
                                         RtrParams::defaults(kK)),
               GeometryError);
}

TEST(InteriorRtr, PointSourceOutsideTheBox) {
  const double e32 = point_source_error(interior_map(32).S, {2.0, 0.5});
  const double e64 = point_source_error(interior_map(64).S, {2.0, 0.5});
  EXPECT_LT(e64, 1e-6);
  EXPECT_GE(e32 / e64, 4.0);
}

TEST(InteriorRtr, UnitarityDriftDecreases) {
  std::vector<double> d;
  for (int n : {32, 64}) {
    const RtrMap S = interior_map(n).S;
    d.push_back(unitarity_defect(S, random_datum(S.size(), 11)));
  }
  EXPECT_GE(d[0] / d[1], 4.0);
}

TEST(InteriorRtr, YReproducesTheMieNeumannTrace) {
  const double k = kK, a = 0.25;
  const Vec2 c(0.5, 0.5);
  const RtrParams prm = RtrParams::defaults(k);
  const MeshedBoundary box = unit_box(64);
  const SubdomainMaps m = interior_map(64, {build_circle_mesh(c, a, 64)}, prm);
  const MieSeries mie(a, c, k, 0.7);
  const IncidentField f = IncidentField::plane_wave(k, 0.7);
  CauchyData total = plane_wave_cauchy(f, box.nodes, box.normals);
  total.u += mie.scattered(box.nodes);
  const auto grad = mie.scattered_gradient(box.nodes);
  for (int i = 0; i < box.size(); ++i) total.dn[i] += box.normals[i].cast<cplx>().dot(grad[i]);
  const RobinData r = to_robin(total, prm.eta);
  std::vector<double> theta;
  for (int j = 0; j < 64; ++j) theta.push_back(2.0 * kPi * j / 64);
  ASSERT_EQ(m.Y.size(), 1u);
  EXPECT_LT(rel_max_error(m.Y[0].matrix * r.minus, mie.neumann_trace(theta)), 1e-6);
}

TEST(InteriorRtr, IndependentOfScattererOrder) {
  const std::vector<MeshedBoundary> s = {build_circle_mesh({0.3, 0.3}, 0.12, 32),
                                         build_arc_mesh(Scatterer::segment({0.55, 0.7}, {0.8, 0.6}), 32)};
  const SubdomainMaps ab = interior_map(24, {s[0], s[1]});
  const SubdomainMaps ba = interior_map(24, {s[1], s[0]});
  EXPECT_LT((ab.S.matrix - ba.S.matrix).norm() / ab.S.matrix.norm(), 1e-12);
  EXPECT_LT((ab.Y[0].matrix - ba.Y[1].matrix).norm() / ab.Y[0].matrix.norm(), 1e-12);
  EXPECT_LT((ab.Y[1].matrix - ba.Y[0].matrix).norm() / ab.Y[1].matrix.norm(), 1e-12);
}

TEST(InteriorRtr, PhysicalTracesDoNotDependOnEta) {
  const MeshedBoundary box = unit_box(64);
  const CauchyData exact = point_source_cauchy(kK, {2.0, 0.5}, box.nodes, box.normals);
  std::vector<CVector> u;
  for (double eta : {kK, 2.5 * kK}) {
    RtrParams prm = RtrParams::defaults(kK);
    prm.eta = eta;
    const RtrMap S = interior_map(64, {}, prm).S;
    const CVector g = to_robin(exact, eta).minus;
    u.push_back(from_robin({g, S.matrix * g}, eta).u);
  }
  EXPECT_LT(rel_max_error(u[0], u[1]), 1e-6);
  EXPECT_LT(rel_max_error(u[1], exact.u), 1e-6);
}

TEST(ExteriorRtr, PointSourceInsideTheBox) {
  std::vector<double> e;
  for (int n : {32, 64}) e.push_back(point_source_error(rtr_exterior(unit_box(n), RtrParams::defaults(kK)), {0.5, 0.5}));
  EXPECT_LT(e[1], 1e-6);
  EXPECT_GE(e[0] / e[1], 4.0);
}

TEST(ExteriorRtr, ZeroDatumGivesZero) {
  const RtrMap S = rtr_exterior(unit_box(16), RtrParams::defaults(kK));
  EXPECT_EQ((S.matrix * CVector::Zero(S.size())).norm(), 0.0);
}

TEST(ExteriorRtr, UnitarityDriftDecreases) {
  std::vector<double> d;
  for (int n : {32, 64}) {
    const RtrMap S = rtr_exterior(unit_box(n), RtrParams::defaults(kK));
    d.push_back(unitarity_defect(S, random_datum(S.size(), 11)));
  }
  EXPECT_LT(d[1], d[0]);
}
