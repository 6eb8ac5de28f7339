#include <gtest/gtest.h>

#include "msdd/geometry.hpp"

using namespace msdd;

TEST(CircleMesh, UniformRule) {
  const auto m = build_circle_mesh(Vec2::Zero(), 1.0, 8);
  ASSERT_EQ(m.size(), 8);
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(m.weights[i], kPi / 4, 1e-15);
    EXPECT_NEAR(m.nodes[i].norm(), 1.0, 1e-15);
  }
  EXPECT_NEAR(m.weights.sum(), 2 * kPi, 1e-14);
  EXPECT_NEAR((m.nodes[0] - Vec2(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((m.normals[0] - Vec2(1, 0)).norm(), 0.0, 1e-15);
  const auto m2 = build_circle_mesh(Vec2(1, 2), 0.3, 64);
  EXPECT_LT(std::abs(m2.weights.sum() - 2 * kPi * 0.3), 1e-10);
  EXPECT_THROW(build_circle_mesh(Vec2::Zero(), 1.0, 9), ParameterError);
  EXPECT_THROW(build_circle_mesh(Vec2::Zero(), 1.0, 6), ParameterError);
}

TEST(BoxMesh, NodesAvoidCornersAndLabelsAreContiguous) {
  const Rect box{Vec2(0, 0), Vec2(1, 1)};
  const auto m = build_box_mesh(box, 16, 4);
  ASSERT_EQ(m.size(), 64);
  const Vec2 corners[] = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  for (const auto& x : m.nodes)
    for (const auto& c : corners) EXPECT_GT((x - c).norm(), 1e-8);
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < 16; ++i) EXPECT_EQ(static_cast<int>(m.labels[16 * s + i].side), s);
  // Grading: the first node sits much closer to its corner than a uniform
  // half-step would put it.
  EXPECT_LT(m.nodes[0].x(), 0.25 / 16);
}

TEST(BoxMesh, PerimeterConvergesUnderRefinement) {
  const Rect box{Vec2(0, 0), Vec2(1, 1)};
  const double e16 = std::abs(build_box_mesh(box, 16, 4).weights.sum() - 4.0);
  const double e32 = std::abs(build_box_mesh(box, 32, 4).weights.sum() - 4.0);
  EXPECT_LT(e32, 1e-3);
  EXPECT_TRUE(e32 == 0.0 || e16 / e32 >= 8.0) << e16 << " " << e32;
}

TEST(BoxMesh, MirrorSymmetry) {
  const Rect box{Vec2(0, 0), Vec2(2, 1)};
  const auto m = build_box_mesh(box, 16, 4);
  for (const auto& x : m.nodes) {
    const Vec2 y(2.0 - x.x(), x.y());
    double best = 1e9;
    for (const auto& z : m.nodes) best = std::min(best, (z - y).norm());
    EXPECT_LT(best, 1e-13);
  }
}

TEST(BoxMesh, RejectsBadInput) {
  EXPECT_THROW(build_box_mesh(Rect{Vec2(0, 0), Vec2(0, 1)}, 16, 4), ParameterError);
  EXPECT_THROW(build_box_mesh(Rect{Vec2(0, 0), Vec2(1, 1)}, 4, 4), ParameterError);
}

TEST(ArcMesh, SymmetricAndClearOfEndpoints) {
  const auto seg = Scatterer::segment(Vec2(0, 0), Vec2(1, 0));
  const auto m = build_arc_mesh(seg, 16);
  ASSERT_EQ(m.size(), 16);
  for (int j = 0; j < 16; ++j) {
    EXPECT_NEAR(m.nodes[j].x() - 0.5, -(m.nodes[15 - j].x() - 0.5), 1e-15);
    EXPECT_GT(std::min(m.nodes[j].x(), 1.0 - m.nodes[j].x()), 0.0);
  }
  EXPECT_NEAR(m.weights.sum(), 1.0, 0.01);
  EXPECT_NEAR(build_arc_mesh(seg, 256).weights.sum(), 1.0, 1e-5);
}

TEST(OuterMesh, NodesCoincideWithBoxEdges) {
  BoxGrid g = make_grid(Vec2(-1, -1), 1.0, 1.0, 2, 2);
  const auto outer = build_outer_mesh(g, 12, 4);
  ASSERT_EQ(outer.size(), 8 * 12);
  for (int id = 0; id < 4; ++id) {
    const auto bm = build_box_mesh(g, id, 12, 4);
    for (int s = 0; s < 4; ++s) {
      const SegmentId sid{id, static_cast<Side>(s)};
      const auto oi = label_indices(outer, sid);
      if (oi.empty()) continue;
      const auto bi = label_indices(bm, sid);
      ASSERT_EQ(oi.size(), bi.size());
      for (std::size_t i = 0; i < oi.size(); ++i) {
        EXPECT_LT((outer.nodes[oi[i]] - bm.nodes[bi[i]]).norm(), 1e-14);
        EXPECT_NEAR(outer.weights[oi[i]], bm.weights[bi[i]], 1e-14);
      }
    }
  }
}

TEST(Interface, MirroredPairing) {
  BoxGrid g = make_grid(Vec2(0, 0), 1.0, 1.0, 2, 1);
  const auto a = build_box_mesh(g, 0, 16, 4), b = build_box_mesh(g, 1, 16, 4);
  const auto map = interface_node_map(g, 0, 1, a, b);
  EXPECT_EQ(map.side_a.side, Side::E);
  EXPECT_EQ(map.side_b.side, Side::W);
  ASSERT_EQ(map.a_index.size(), 16u);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(map.a_index[i], 16 + i);
    EXPECT_EQ(map.b_index[i], 63 - i);
    EXPECT_LT((a.nodes[map.a_index[i]] - b.nodes[map.b_index[i]]).norm(), 1e-12);
  }
  BoxGrid g3 = make_grid(Vec2(0, 0), 1.0, 1.0, 3, 1);
  const auto c = build_box_mesh(g3, 2, 16, 4);
  EXPECT_THROW(interface_node_map(g3, 0, 2, a, c), ConformityError);
}

TEST(Cloud, TableSizedCloud) {
  BoxGrid g = make_grid(Vec2(0, 0), 4.0, 4.0, 4, 4);
  CloudSpec spec;
  spec.kind = Scatterer::Kind::segment;
  spec.size = 0.4;
  spec.per_box_count = 40;
  spec.seed = 7;
  const BoxGrid cloud = generate_cloud(g, spec);
  EXPECT_EQ(cloud.scatterer_count(), 640u);
  cloud.validate(0.2);
  EXPECT_GE(min_pairwise_separation(cloud), 0.2);
  for (const auto& list : cloud.scatterers)
    for (const auto& s : list) EXPECT_NEAR(s.length(), 0.4, 1e-14);
}

TEST(Cloud, DeterministicAndEmpty) {
  BoxGrid g = make_grid(Vec2(0, 0), 2.0, 2.0, 2, 2);
  CloudSpec spec;
  spec.kind = Scatterer::Kind::circle;
  spec.size = 0.1;
  spec.per_box_count = 5;
  spec.seed = 123;
  const BoxGrid a = generate_cloud(g, spec), b = generate_cloud(g, spec);
  for (int id = 0; id < 4; ++id)
    for (std::size_t i = 0; i < a.scatterers[id].size(); ++i)
      EXPECT_EQ(a.scatterers[id][i].center(), b.scatterers[id][i].center());
  spec.per_box_count = 0;
  const BoxGrid e = generate_cloud(g, spec);
  EXPECT_EQ(e.scatterer_count(), 0u);
}

TEST(Cloud, InfeasibleAndPlacementFailures) {
  BoxGrid g = make_grid(Vec2(0, 0), 1.0, 1.0, 1, 1);
  CloudSpec spec;
  spec.kind = Scatterer::Kind::circle;
  spec.size = 0.2;
  spec.per_box_count = 20;
  EXPECT_THROW(generate_cloud(g, spec), ParameterError);
  spec.per_box_count = 3;
  spec.max_attempts = 1;
  spec.size = 0.12;
  // With one attempt per scatterer some placement must fail for this seed
  // range; the error names the box.
  bool failed = false;
  for (std::uint64_t seed = 0; seed < 50 && !failed; ++seed) {
    spec.seed = seed;
    try {
      generate_cloud(g, spec);
    } catch (const PlacementError& e) {
      failed = std::string(e.what()).find("box 0") != std::string::npos;
    }
  }
  EXPECT_TRUE(failed);
}

TEST(Scatterer, DistanceAudit) {
  const auto c1 = Scatterer::circle(Vec2(0, 0), 1.0), c2 = Scatterer::circle(Vec2(3, 0), 0.5);
  EXPECT_NEAR(scatterer_distance(c1, c2), 1.5, 1e-15);
  const auto s1 = Scatterer::segment(Vec2(-1, 2), Vec2(1, 2));
  EXPECT_NEAR(scatterer_distance(c1, s1), 1.0, 1e-15);
  const auto s2 = Scatterer::segment(Vec2(0, 1), Vec2(0, 3));
  EXPECT_EQ(scatterer_distance(s1, s2), 0.0);
  EXPECT_THROW(Scatterer::circle(Vec2(0, 0), 0.0), ParameterError);
  EXPECT_THROW(Scatterer::segment(Vec2(1, 1), Vec2(1, 1)), ParameterError);
}
