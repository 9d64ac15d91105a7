#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "brepforge/serialize.hpp"
#include "brepforge/validate.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace brepforge;
using namespace brepforge::testing;

TEST_CASE("cube validates fully") {
  const ValidityReport r = validate(cube_topology());
  CHECK(r.c1_ok);
  CHECK(r.c2_ok);
  CHECK(r.c3_ok);
  CHECK(r.manifold_ok);
  CHECK(r.valid());
  CHECK(r.violations.empty());
}

TEST_CASE("duplicate vertex row breaks C2") {
  Topology t = cube_topology();
  t.ev[3] = {3, 3};
  const Topology bad = build_topology(t.ef, t.ev, /*unchecked=*/true);
  const ValidityReport r = validate(bad);
  CHECK_FALSE(r.c2_ok);
  bool found = false;
  for (const auto& v : r.violations)
    if (v.constraint == "C2" && v.ids == std::vector<int>{3}) found = true;
  CHECK(found);
}

TEST_CASE("rewired loop breaks C3") {
  Topology t = cube_topology();
  // Edge 2 normally joins vertices {2,3} in the bottom loop; rewire one end
  // to the top ring so face 0's degree profile breaks.
  t.ev[2] = {2, 6};
  const Topology bad = build_topology(t.ef, t.ev, /*unchecked=*/true);
  const ValidityReport r = validate(bad);
  CHECK_FALSE(r.c3_ok);
  CHECK_FALSE(r.valid());
}

TEST_CASE("duplicate face row breaks C1") {
  Topology t = cube_topology();
  t.ef[0] = {2, 2};
  const Topology bad = build_topology(t.ef, t.ev, /*unchecked=*/true);
  CHECK_FALSE(validate(bad).c1_ok);
}

TEST_CASE("degenerate two-edge loops are accepted") {
  // Three lune faces between two poles: every pair of faces shares one edge,
  // every face is a closed two-edge loop.
  const Topology theta =
      build_topology({{0, 1}, {0, 2}, {1, 2}}, {{0, 1}, {0, 1}, {0, 1}});
  const ValidityReport r = validate(theta);
  CHECK(r.valid());
}

TEST_CASE("validate agrees before and after canonicalization") {
  for (const Topology& t :
       {cube_topology(), triangular_prism_topology(), square_pyramid_topology()}) {
    CHECK(validate(canonicalize(t)).valid() == validate(t).valid());
  }
}

TEST_CASE("topology hash is invariant under random relabeling") {
  const Topology cube = cube_topology();
  const TopoHash expected = topology_hash(cube);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<int> fperm(cube.num_faces), vperm(cube.num_verts), eperm(cube.num_edges);
    std::iota(fperm.begin(), fperm.end(), 0);
    std::iota(vperm.begin(), vperm.end(), 0);
    std::iota(eperm.begin(), eperm.end(), 0);
    std::shuffle(fperm.begin(), fperm.end(), rng);
    std::shuffle(vperm.begin(), vperm.end(), rng);
    std::shuffle(eperm.begin(), eperm.end(), rng);
    std::vector<IdPair> ef(cube.num_edges), ev(cube.num_edges);
    for (int e = 0; e < cube.num_edges; ++e) {
      ef[eperm[e]] = {fperm[cube.ef[e][0]], fperm[cube.ef[e][1]]};
      ev[eperm[e]] = {vperm[cube.ev[e][0]], vperm[cube.ev[e][1]]};
      if (trial % 2) std::swap(ev[eperm[e]][0], ev[eperm[e]][1]);
    }
    const Topology relabeled = build_topology(std::move(ef), std::move(ev));
    CHECK(topology_hash(relabeled) == expected);
  }
}

TEST_CASE("topology hash separates the fixture families") {
  const TopoHash cube = topology_hash(cube_topology());
  const TopoHash prism = topology_hash(triangular_prism_topology());
  const TopoHash pyramid = topology_hash(square_pyramid_topology());
  CHECK(cube.digest != prism.digest);
  CHECK(cube.digest != pyramid.digest);
  CHECK(prism.digest != pyramid.digest);
}

TEST_CASE("topology hash is deterministic across calls") {
  const TopoHash a = topology_hash(cube_topology());
  const TopoHash b = topology_hash(cube_topology());
  CHECK(a.digest == b.digest);
  CHECK(a.rounds == b.rounds);
}

TEST_CASE("topology hash refuses invalid topologies") {
  Topology t = cube_topology();
  t.ev[0] = {0, 0};
  const Topology bad = build_topology(t.ef, t.ev, /*unchecked=*/true);
  CHECK_THROWS_AS(topology_hash(bad), Error);
}

TEST_CASE("hash equality matches brute-force isomorphism on fixtures") {
  const std::vector<Topology> fixtures = {
      cube_topology(),
      triangular_prism_topology(),
      square_pyramid_topology(),
      worked_example_topology(),
      canonicalize(cube_topology(), TieBreak::seeded(3)),
  };
  for (size_t i = 0; i < fixtures.size(); ++i) {
    for (size_t j = 0; j < fixtures.size(); ++j) {
      const bool same_hash =
          topology_hash(fixtures[i]).digest == topology_hash(fixtures[j]).digest;
      const bool iso = isomorphic_oracle(fixtures[i], fixtures[j]);
      CHECK(same_hash == iso);
    }
  }
}

TEST_CASE("novelty metrics on simple fixtures") {
  const Topology cube = cube_topology();
  const Topology prism = triangular_prism_topology();

  SUBCASE("generated equals training") {
    const auto m = novelty_metrics({cube}, {cube});
    CHECK(m.novel_pct == doctest::Approx(0.0));
    CHECK(m.unique_pct == doctest::Approx(100.0));
    CHECK(m.valid_pct == doctest::Approx(100.0));
  }
  SUBCASE("duplicates are not unique") {
    const auto m = novelty_metrics({cube, canonicalize(cube)}, {});
    CHECK(m.unique_pct == doctest::Approx(0.0));
    CHECK(m.novel_pct == doctest::Approx(100.0));
  }
  SUBCASE("mixed batch") {
    const auto m = novelty_metrics({cube, prism, prism}, {cube});
    CHECK(m.valid_pct == doctest::Approx(100.0));
    CHECK(m.novel_pct == doctest::Approx(100.0 * 2.0 / 3.0));
    CHECK(m.unique_pct == doctest::Approx(100.0 / 3.0));
  }
  SUBCASE("empty generated set is an error") {
    CHECK_THROWS_AS(novelty_metrics({}, {cube}), Error);
  }
}
