#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "brepforge/error.hpp"
#include "brepforge/topology.hpp"
#include "support/fixtures.hpp"

using namespace brepforge;
using namespace brepforge::testing;

TEST_CASE("hand-built cube has the expected counts and Euler characteristic") {
  const Topology t = cube_topology();
  CHECK(t.num_faces == 6);
  CHECK(t.num_edges == 12);
  CHECK(t.num_verts == 8);
  CHECK(t.num_verts - t.num_edges + t.num_faces == 2);
}

TEST_CASE("triangular prism satisfies the Euler characteristic") {
  const Topology t = triangular_prism_topology();
  CHECK(t.num_faces == 5);
  CHECK(t.num_edges == 9);
  CHECK(t.num_verts == 6);
  CHECK(t.num_verts - t.num_edges + t.num_faces == 2);
}

TEST_CASE("build_topology rejects duplicate IDs in a row") {
  CHECK_THROWS_AS(build_topology({{0, 0}}, {{0, 1}}), Error);
  CHECK_THROWS_AS(build_topology({{0, 1}}, {{2, 2}}), Error);
  try {
    build_topology({{0, 0}}, {{0, 1}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedPair);
  }
}

TEST_CASE("build_topology accepts bad rows only when unchecked") {
  const Topology t = build_topology({{0, 0}}, {{0, 1}}, /*unchecked=*/true);
  CHECK(t.num_faces == 1);
  CHECK(t.num_edges == 1);
}

TEST_CASE("build_topology rejects empty input") {
  CHECK_THROWS_AS(build_topology({}, {}), Error);
}

TEST_CASE("minimal two-face record infers counts") {
  const Topology t = build_topology({{0, 1}}, {{0, 1}});
  CHECK(t.num_faces == 2);
  CHECK(t.num_edges == 1);
  CHECK(t.num_verts == 2);
}

TEST_CASE("derive_fef on the cube") {
  const Topology t = cube_topology();
  const FefMatrix m = derive_fef(t);
  REQUIRE(m.n == 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(m.at(k, k) == 0);
    int ones = 0;
    int zeros = 0;
    for (int l = 0; l < 6; ++l) {
      if (l == k) continue;
      if (m.at(k, l) == 1) ++ones;
      if (m.at(k, l) == 0) ++zeros;
    }
    CHECK(ones == 4);
    CHECK(zeros == 1);  // the opposite face
  }
  CHECK(m.upper_triangle_sum() == t.num_edges);
}

TEST_CASE("derive_fef counts multiplicity") {
  const Topology single = build_topology({{0, 1}}, {{0, 1}});
  const FefMatrix m1 = derive_fef(single);
  CHECK(m1.at(0, 1) == 1);
  CHECK(m1.at(1, 0) == 1);

  const Topology twice = build_topology({{0, 1}, {0, 1}}, {{0, 1}, {1, 0}});
  const FefMatrix m2 = derive_fef(twice);
  CHECK(m2.at(0, 1) == 2);
  CHECK(m2.at(1, 0) == 2);
}

TEST_CASE("derive_face_edges lists each face's edges ascending") {
  const Topology t = cube_topology();
  const auto fe = derive_face_edges(t);
  REQUIRE(fe.size() == 6);
  for (const auto& edges : fe) CHECK(edges.size() == 4);
  CHECK(fe[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(fe[2] == std::vector<int>{0, 4, 8, 9});

  const auto fe1 = derive_face_edges(build_topology({{0, 1}}, {{0, 1}}));
  CHECK(fe1[0] == std::vector<int>{0});
  CHECK(fe1[1] == std::vector<int>{0});

  const auto fe2 = derive_face_edges(build_topology({{0, 1}, {0, 1}}, {{0, 1}, {1, 0}}));
  CHECK(fe2[0] == std::vector<int>{0, 1});
}

TEST_CASE("face-edge lists and ef rows are mutually consistent") {
  const Topology t = cube_topology();
  const auto fe = derive_face_edges(t);
  for (int e = 0; e < t.num_edges; ++e) {
    int occurrences = 0;
    for (int f = 0; f < t.num_faces; ++f) {
      const bool listed = std::find(fe[f].begin(), fe[f].end(), e) != fe[f].end();
      const bool incident = t.ef[e][0] == f || t.ef[e][1] == f;
      CHECK(listed == incident);
      if (listed) ++occurrences;
    }
    CHECK(occurrences == 2);
  }
}
