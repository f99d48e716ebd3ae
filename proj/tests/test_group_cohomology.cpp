// Group cochain complexes: coboundary identities, the homogeneous dictionary,
// builtin cocycles with their structural certificates, and the discretized
// cover forms they induce on circle and torus lattices.
#include <catch2/catch_amalgamated.hpp>

#include "bhi/group_cohomology.hpp"

using namespace bhi;

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ull;
  x ^= x >> 33;
  return x;
}

std::uint64_t hash_words(std::span<const GElem> g, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const auto& w : g) {
    h = mix64(h ^ (0x9e3779b97f4a7c15ull * (w.size() + 1)));
    for (std::int32_t v : w) h = mix64(h ^ std::uint64_t(std::uint32_t(v)));
  }
  return h;
}

// Deterministic pseudo-random function on Gamma^k: a generic cochain with no
// special structure, for combinatorial identities.
GroupCochain random_function_cochain(std::shared_ptr<const GroupSpec> spec, int degree,
                                     std::uint64_t seed) {
  GroupCochain c;
  c.spec = std::move(spec);
  c.degree = degree;
  c.eval = [seed](std::span<const GElem> g) -> cdouble {
    std::uint64_t a = hash_words(g, seed);
    std::uint64_t b = mix64(a ^ 0xabcdef1234567ull);
    return {double(a >> 11) * 0x1.0p-52 - 1.0, double(b >> 11) * 0x1.0p-52 - 1.0};
  };
  return c;
}

HomogeneousCochain random_function_homogeneous(std::shared_ptr<const GroupSpec> spec, int degree,
                                               std::uint64_t seed) {
  HomogeneousCochain c;
  c.spec = std::move(spec);
  c.degree = degree;
  c.eval = [seed](std::span<const GElem> g) -> cdouble {
    std::uint64_t a = hash_words(g, seed);
    std::uint64_t b = mix64(a ^ 0x1133557799ull);
    return {double(a >> 11) * 0x1.0p-52 - 1.0, double(b >> 11) * 0x1.0p-52 - 1.0};
  };
  return c;
}

std::vector<GElem> random_args(const GroupSpec& gs, Rng& rng, int count, int radius) {
  std::vector<GElem> t(count);
  for (auto& g : t) g = gs.random_element(rng, radius);
  return t;
}

}  // namespace

TEST_CASE("nonhomogeneous coboundary squares to zero") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  auto f2 = std::make_shared<const GroupSpec>(GroupSpec::free_group(2));
  Rng rng(201);
  for (auto spec : {z2, f2}) {
    for (int degree = 0; degree <= 3; ++degree) {
      auto c = random_function_cochain(spec, degree, 7000 + std::uint64_t(degree));
      auto dd = nhom_delta(nhom_delta(c));
      for (int rep = 0; rep < 60; ++rep) {
        auto args = random_args(*spec, rng, degree + 2, 4);
        REQUIRE(std::abs(dd.eval(args)) < 1e-13);
      }
    }
  }
}

TEST_CASE("homogeneous coboundary squares to zero") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  Rng rng(202);
  for (int degree = 0; degree <= 3; ++degree) {
    auto phi = random_function_homogeneous(z2, degree, 9000 + std::uint64_t(degree));
    auto dd = hom_delta(hom_delta(phi));
    for (int rep = 0; rep < 60; ++rep) {
      auto args = random_args(*z2, rng, degree + 3, 4);
      REQUIRE(std::abs(dd.eval(args)) < 1e-13);
    }
  }
}

TEST_CASE("homogeneous dictionary: round trips and intertwining") {
  auto f2 = std::make_shared<const GroupSpec>(GroupSpec::free_group(2));
  Rng rng(203);
  for (int degree = 1; degree <= 3; ++degree) {
    auto c = random_function_cochain(f2, degree, 1234 + std::uint64_t(degree));

    // nonhomogeneous -> homogeneous -> nonhomogeneous is the identity
    auto back = from_homogeneous(to_homogeneous(c));
    for (int rep = 0; rep < 40; ++rep) {
      auto args = random_args(*f2, rng, degree, 5);
      REQUIRE(std::abs(back.eval(args) - c.eval(args)) < 1e-15);
    }

    // homogeneous -> nonhomogeneous -> homogeneous fixes invariant cochains
    auto phi = to_homogeneous(c);
    auto phi2 = to_homogeneous(from_homogeneous(phi));
    for (int rep = 0; rep < 40; ++rep) {
      auto args = random_args(*f2, rng, degree + 1, 4);
      REQUIRE(std::abs(phi2.eval(args) - phi.eval(args)) < 1e-15);
    }

    // the dictionary intertwines the two coboundaries
    auto lhs = to_homogeneous(nhom_delta(c));
    auto rhs = hom_delta(to_homogeneous(c));
    for (int rep = 0; rep < 40; ++rep) {
      auto args = random_args(*f2, rng, degree + 2, 4);
      REQUIRE(std::abs(lhs.eval(args) - rhs.eval(args)) < 1e-13);
    }
  }
}

TEST_CASE("builtin cocycles are closed") {
  Rng rng(204);
  auto z1 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  auto z4 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(4));

  std::vector<GroupCochain> cocycles;
  cocycles.push_back(builtin_cocycle(z2, "trivial-degree-0"));
  cocycles.push_back(builtin_cocycle(z1, "linear-on-Zk", {1.0}));
  cocycles.push_back(builtin_cocycle(z2, "linear-on-Zk", {2.0, -1.0}));
  cocycles.push_back(builtin_cocycle(z2, "area-on-Z2"));
  cocycles.push_back(builtin_cocycle(z4, "volume-on-Z2p"));

  for (const auto& c : cocycles) {
    auto dc = nhom_delta(c);
    for (int rep = 0; rep < 50; ++rep) {
      auto args = random_args(*c.spec, rng, c.degree + 1, 6);
      REQUIRE(std::abs(dc.eval(args)) < 1e-10);
    }
  }
}

TEST_CASE("builtin cocycles: structural certificates") {
  Rng rng(205);
  auto z1 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  auto z4 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(4));

  std::vector<GroupCochain> cocycles;
  cocycles.push_back(builtin_cocycle(z2, "trivial-degree-0"));
  cocycles.push_back(builtin_cocycle(z1, "linear-on-Zk"));
  cocycles.push_back(builtin_cocycle(z2, "area-on-Z2"));
  cocycles.push_back(builtin_cocycle(z4, "volume-on-Z2p"));

  for (const auto& c : cocycles) {
    REQUIRE(check_normalized(c, rng, 200, 6) < 1e-12);
    REQUIRE(check_antisym_image(c, rng, 200, 6) < 1e-12);
    REQUIRE(check_growth(c, rng, 200, 6) <= 0.0);
  }
}

TEST_CASE("antisymmetrization fixes the homogeneous image of the area cocycle") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  auto c = builtin_cocycle(z2, "area-on-Z2");
  auto phi = to_homogeneous(c);
  auto alt = antisymmetrize(phi);
  Rng rng(206);
  for (int rep = 0; rep < 60; ++rep) {
    auto args = random_args(*z2, rng, 3, 6);
    REQUIRE(std::abs(alt.eval(args) - phi.eval(args)) < 1e-12);
  }
}

TEST_CASE("permutation signs") {
  REQUIRE(perm_sign({0, 1, 2}) == 1);
  REQUIRE(perm_sign({1, 0, 2}) == -1);
  REQUIRE(perm_sign({2, 0, 1}) == 1);
  REQUIRE(perm_sign({2, 1, 0}) == -1);
}

TEST_CASE("circle cover form integrates to the winding pairing") {
  auto z1 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
  auto c = builtin_cocycle(z1, "linear-on-Zk", {1.0});
  for (int n : {24, 40, 64}) {
    CircleCover cover(n);
    DiscreteForm f = cech_form_circle(cover, c);
    REQUIRE(f.degree == 1);
    REQUIRE(std::abs(f.total() - 1.0) < 1e-12);
  }
  // partition of unity property
  CircleCover cover(32);
  for (int x = 0; x < 32; ++x)
    REQUIRE(std::abs(cover.chi(0, x) + cover.chi(1, x) - 1.0) < 1e-15);
}

TEST_CASE("torus cover form integrates to twice the area pairing") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  auto c = builtin_cocycle(z2, "area-on-Z2");
  for (auto [n1, n2] : std::vector<std::pair<int, int>>{{24, 24}, {32, 24}}) {
    TorusCover cover(n1, n2);
    DiscreteForm f = cech_form_torus(cover, c);
    REQUIRE(f.degree == 2);
    REQUIRE(std::abs(f.total() - 2.0) < 1e-10);
  }
}

TEST_CASE("scaling a cocycle scales its cover form") {
  auto z1 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
  auto c3 = builtin_cocycle(z1, "linear-on-Zk", {3.0});
  CircleCover cover(28);
  REQUIRE(std::abs(cech_form_circle(cover, c3).total() - 3.0) < 1e-12);
}
