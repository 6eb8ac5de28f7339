#include <gtest/gtest.h>

#include "msdd/bio.hpp"

using namespace msdd;

namespace {

struct Traces {
  CVector u, dn;
};

// Plane wave e^{ik d·x}: an interior solution for any curve.
Traces plane_wave(const MeshedBoundary& m, double k, Vec2 d) {
  Traces t{CVector(m.size()), CVector(m.size())};
  for (int i = 0; i < m.size(); ++i) {
    const cplx u = std::exp(kI * k * d.dot(m.nodes[i]));
    t.u[i] = u;
    t.dn[i] = kI * k * d.dot(m.normals[i]) * u;
  }
  return t;
}

// Radiating point source G(· - x0).
Traces point_source(const MeshedBoundary& m, cplx k, Vec2 x0) {
  Traces t{CVector(m.size()), CVector(m.size())};
  for (int i = 0; i < m.size(); ++i) {
    const Vec2 d = m.nodes[i] - x0;
    const double r = d.norm();
    const CylinderValues v = cylinder01(k * r);
    t.u[i] = 0.25 * kI * v.h0;
    t.dn[i] = -0.25 * kI * k * v.h1 * m.normals[i].dot(d) / r;
  }
  return t;
}

double rel_max(const CVector& a, const CVector& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

struct CalderonErrors {
  double dirichlet, neumann;
};

// Max-norm residuals of the two Calderón identities with the corrected
// operators. The Neumann residual is measured after S_κ, the form in which N
// enters the box systems; pointwise it stays O(1) at the first node off a
// corner.
CalderonErrors calderon(const MeshedBoundary& m, cplx k, const Traces& t, double side) {
  const CorrectedOperators op = corrected_self_set(m, Wavenumber(k));
  const CMatrix Sk = assemble_self(OpKind::S, m, Wavenumber(cplx(k.real(), 0.4 * std::cbrt(k.real()))));
  const CVector r1 = op.S * t.dn - (side * 0.5 * t.u + op.K.on_u * t.u + op.K.on_dn * t.dn);
  const CVector r2 = op.N.on_u * t.u + op.N.on_dn * t.dn - (-side * 0.5 * t.dn + op.Kt * t.dn);
  return {r1.cwiseAbs().maxCoeff() / t.u.cwiseAbs().maxCoeff(),
          (Sk * r2).cwiseAbs().maxCoeff() / (Sk * t.dn).cwiseAbs().maxCoeff()};
}

CalderonErrors interior_calderon(const MeshedBoundary& m, double k) {
  return calderon(m, k, plane_wave(m, k, Vec2(0.6, 0.8)), 1.0);
}

CalderonErrors exterior_calderon(const MeshedBoundary& m, cplx k, Vec2 x0) {
  return calderon(m, k, point_source(m, k, x0), -1.0);
}

}  // namespace

TEST(SelfOperators, SingleLayerOnConstantsOfUnitCircle) {
  const auto m = build_circle_mesh(Vec2::Zero(), 1.0, 64);
  const CMatrix S = assemble_self(OpKind::S, m, 1.0);
  const CVector v = S * CVector::Ones(64);
  const cplx ev = 0.5 * kI * kPi * bessel_jy(0, 1.0).j * hankel1(0, 1.0);
  EXPECT_NEAR(ev.real(), -0.1061, 5e-5);
  EXPECT_NEAR(ev.imag(), 0.9197, 5e-5);
  for (int i = 0; i < 64; ++i) EXPECT_LT(std::abs(v[i] - ev), 1e-13);
}

TEST(SelfOperators, CalderonOnCircleIsSpectral) {
  const auto m1 = build_circle_mesh(Vec2(0.2, -0.1), 1.3, 32);
  const auto m2 = build_circle_mesh(Vec2(0.2, -0.1), 1.3, 64);
  const auto e1 = interior_calderon(m1, 3.0), e2 = interior_calderon(m2, 3.0);
  EXPECT_LT(e2.dirichlet, 1e-12);
  EXPECT_LT(e2.neumann, 1e-11);
  EXPECT_GT(e1.dirichlet, e2.dirichlet);
}

TEST(SelfOperators, CalderonOnGradedBoxConverges) {
  const Rect box{Vec2(0, 0), Vec2(1, 1)};
  double prev_d = 1, prev_n = 1;
  for (int n : {16, 32, 64}) {
    const auto e = interior_calderon(build_box_mesh(box, n, 4), 5.0);
    if (n > 16) {
      EXPECT_GT(prev_d / e.dirichlet, 8.0) << n;
      EXPECT_GT(prev_n / e.neumann, 8.0) << n;
    }
    prev_d = e.dirichlet;
    prev_n = e.neumann;
  }
  EXPECT_LT(prev_d, 1e-6);
  EXPECT_LT(prev_n, 1e-6);
}

TEST(SelfOperators, ExteriorCalderonWithComplexWavenumber) {
  const Rect box{Vec2(0, 0), Vec2(1, 1)};
  const auto e1 = exterior_calderon(build_box_mesh(box, 32, 4), cplx(5.0, 0.7), Vec2(0.4, 0.55));
  const auto e2 = exterior_calderon(build_box_mesh(box, 64, 4), cplx(5.0, 0.7), Vec2(0.4, 0.55));
  EXPECT_GT(e1.dirichlet / e2.dirichlet, 8.0);
  EXPECT_GT(e1.neumann / e2.neumann, 8.0);
  EXPECT_LT(e2.dirichlet, 1e-6);
  EXPECT_LT(e2.neumann, 1e-6);
  const auto c = build_circle_mesh(Vec2::Zero(), 1.0, 64);
  const auto ec = exterior_calderon(c, 4.0, Vec2(0.2, 0.3));
  EXPECT_LT(ec.dirichlet, 1e-10);
  EXPECT_LT(ec.neumann, 1e-10);
}

TEST(CornerCorrection, ExactOnLaplaceLinearFunctions) {
  // For harmonic linear u the Laplace parts of the corrections are exact by
  // construction: N₀u = (-½ + K₀ᵀ)∂_n u, checked through the corrected N at
  // small k.
  const auto m = build_box_mesh(Rect{Vec2(0, 0), Vec2(2, 1)}, 24, 4);
  const CorrectedOperators op = corrected_self_set(m, Wavenumber(1e-6));
  const Vec2 a(0.3, -1.1);
  CVector u(m.size()), dn(m.size());
  for (int i = 0; i < m.size(); ++i) {
    u[i] = a.dot(m.nodes[i]);
    dn[i] = a.dot(m.normals[i]);
  }
  const CVector lhs = op.N.on_u * u + op.N.on_dn * dn;
  const CVector rhs = -0.5 * dn + op.Kt * dn;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_THROW(corner_correction(build_circle_mesh(Vec2::Zero(), 1.0, 16)), TopologyError);
}

TEST(SelfOperators, HypersingularAnnihilatesConstantsInLaplaceLimit) {
  const auto m = build_circle_mesh(Vec2::Zero(), 1.0, 64);
  double prev = 1e300;
  for (double k : {1e-1, 1e-2, 1e-3}) {
    const double v = (assemble_self(OpKind::N, m, k) * CVector::Ones(64)).cwiseAbs().maxCoeff();
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(SelfOperators, SingleLayerSymmetricAfterWeighting) {
  const auto m = build_box_mesh(Rect{Vec2(0, 0), Vec2(1, 2)}, 16, 4);
  const CMatrix S = assemble_self(OpKind::S, m, 2.0);
  const CMatrix W = m.weights.cast<cplx>().asDiagonal();
  // S = S̃ diag(speed): the symmetric core is S diag(1/speed).
  const CMatrix core = S * m.speed.cwiseInverse().cast<cplx>().asDiagonal();
  EXPECT_LT((core - core.transpose()).cwiseAbs().maxCoeff(), 1e-14 * core.cwiseAbs().maxCoeff());
  (void)W;
}

TEST(SelfOperators, ArcMeshRejected) {
  const auto arc = build_arc_mesh(Scatterer::segment(Vec2(0, 0), Vec2(1, 0)), 16);
  EXPECT_THROW(assemble_self(OpKind::S, arc, 1.0), TopologyError);
  const auto c = build_circle_mesh(Vec2::Zero(), 1.0, 16);
  EXPECT_THROW(assemble_arc_self_S(c, 1.0), TopologyError);
}

TEST(ArcOperator, CommutesWithReversal) {
  const auto arc = build_arc_mesh(Scatterer::segment(Vec2(0.1, 0.2), Vec2(0.9, 0.7)), 24);
  const CMatrix A = assemble_arc_self_S(arc, 6.0);
  const int n = arc.size();
  CMatrix P = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, n - 1 - i) = 1.0;
  EXPECT_LT((A * P - P * A).cwiseAbs().maxCoeff(), 1e-13 * A.cwiseAbs().maxCoeff());
  const CMatrix Ac = assemble_arc_self_S(arc, Wavenumber(cplx(6.0, 1e-3)));
  EXPECT_TRUE(Ac.allFinite());
}

TEST(ArcOperator, SoundSoftSegmentConverges) {
  const auto seg = Scatterer::segment(Vec2(-0.3, 0.1), Vec2(0.4, -0.2));
  const double k = 8.0;
  const Vec2 d(std::cos(0.3), std::sin(0.3));
  const auto dirs = uniform_directions(32);
  auto solve = [&](int n) {
    const auto m = build_arc_mesh(seg, n);
    CVector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -std::exp(kI * k * d.dot(m.nodes[i]));
    const CVector phi = assemble_arc_self_S(m, k).partialPivLu().solve(rhs);
    return far_field(LayerKind::SL, m, phi, dirs, k);
  };
  const CVector ref = solve(256);
  const double e1 = rel_max(solve(8), ref), e2 = rel_max(solve(16), ref);
  EXPECT_GE(e1 / std::max(e2, 1e-15), 4.0) << e1 << " " << e2;
  EXPECT_LT(rel_max(solve(64), ref), 1e-10);
}

TEST(CrossOperators, DegenerateSourceAndReciprocity) {
  MeshedBoundary point;
  point.nodes = {Vec2(0, 0)};
  point.normals = {Vec2(1, 0)};
  point.weights = RVector::Ones(1);
  point.speed = RVector::Ones(1);
  point.curvature = RVector::Zero(1);
  point.param = RVector::Zero(1);
  MeshedBoundary target = point;
  target.nodes = {Vec2(0.3, 0.4)};
  const CMatrix A = assemble_cross(OpKind::SLcross, point, target, 2.0);
  EXPECT_LT(std::abs(A(0, 0) - greens_kernel(2.0, 0.5)), 1e-16);

  const auto ma = build_circle_mesh(Vec2(0, 0), 0.5, 16);
  const auto mb = build_box_mesh(Rect{Vec2(-2, -2), Vec2(2, 2)}, 8, 4);
  const CMatrix ab = assemble_cross(OpKind::SLcross, ma, mb, 3.0);
  const CMatrix ba = assemble_cross(OpKind::SLcross, mb, ma, 3.0);
  const CMatrix lhs = mb.weights.cast<cplx>().asDiagonal() * ab;
  const CMatrix rhs = (ma.weights.cast<cplx>().asDiagonal() * ba).transpose();
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(assemble_cross(OpKind::SLcross, ma, ma, 3.0), GeometryError);
}

TEST(CrossOperators, GreenRepresentationOnDisjointCurves) {
  // Interior solution on a circle evaluated on a smaller concentric box via
  // u = SL[∂u] - DL[u]; its normal derivative via dnSL, dnDL.
  const double k = 4.0;
  const auto src = build_circle_mesh(Vec2(0.5, 0.5), 1.5, 96);
  const auto tgt = build_box_mesh(Rect{Vec2(0.2, 0.2), Vec2(0.8, 0.8)}, 8, 4);
  const Traces s = plane_wave(src, k, Vec2(0.8, -0.6));
  const Traces t = plane_wave(tgt, k, Vec2(0.8, -0.6));
  const CVector u = assemble_cross(OpKind::SLcross, src, tgt, k) * s.dn -
                    assemble_cross(OpKind::DLcross, src, tgt, k) * s.u;
  const CVector du = assemble_cross(OpKind::dnSLcross, src, tgt, k) * s.dn -
                     assemble_cross(OpKind::dnDLcross, src, tgt, k) * s.u;
  EXPECT_LT(rel_max(u, t.u), 1e-12);
  EXPECT_LT(rel_max(du, t.dn), 1e-11);
}

TEST(Potentials, ZeroAndNearFieldReporting) {
  const auto m = build_circle_mesh(Vec2::Zero(), 1.0, 32);
  const std::vector<Vec2> pts = {Vec2(3, 0), Vec2(1.01, 0)};
  const auto r = eval_potential(LayerKind::SL, m, CVector::Zero(32), pts, 2.0);
  EXPECT_EQ(r.values[0], cplx(0.0));
  ASSERT_EQ(r.near_points.size(), 1u);
  EXPECT_EQ(r.near_points[0], 1);
  EXPECT_TRUE(std::isnan(r.values[1].real()));
}

TEST(Potentials, DoubleLayerOfConstantsVanishesOutsideInLaplaceLimit) {
  const auto m = build_circle_mesh(Vec2::Zero(), 1.0, 64);
  const std::vector<Vec2> pts = {Vec2(2, 0), Vec2(0, -3)};
  const auto r = eval_potential(LayerKind::DL, m, CVector::Ones(64), pts, 1e-4);
  EXPECT_LT(r.values.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FarField, PointSourceAndZero) {
  MeshedBoundary point;
  point.nodes = {Vec2(0, 0)};
  point.normals = {Vec2(1, 0)};
  point.weights = RVector::Ones(1);
  point.speed = RVector::Ones(1);
  point.curvature = RVector::Zero(1);
  point.param = RVector::Zero(1);
  const auto dirs = uniform_directions(7);
  const CVector f = far_field(LayerKind::SL, point, CVector::Ones(1), dirs, 3.0);
  for (int q = 0; q < 7; ++q) EXPECT_LT(std::abs(f[q] - far_field_constant(3.0)), 1e-16);
  const auto m = build_circle_mesh(Vec2::Zero(), 1.0, 16);
  EXPECT_EQ(far_field(LayerKind::DL, m, CVector::Zero(16), dirs, 3.0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(far_field(LayerKind::SL, m, CVector::Zero(16), dirs, Wavenumber(cplx(3.0, 0.1))),
               UnsupportedError);
}
