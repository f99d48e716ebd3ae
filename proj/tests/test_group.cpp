// Group backends and convolution algebras: word arithmetic, balls, random
// sampling determinism, convolution identities, and weighted norms.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "bhi/group.hpp"

using namespace bhi;

namespace {

std::shared_ptr<const GroupSpec> sym3() {
  // permutations of {0,1,2} listed as: id, (01), (02), (12), (012), (021)
  auto perm_mul = [](std::array<int, 3> p, std::array<int, 3> q) {
    std::array<int, 3> r{};
    for (int i = 0; i < 3; ++i) r[i] = p[q[i]];
    return r;
  };
  std::vector<std::array<int, 3>> elems = {
      {0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}, {2, 0, 1}};
  auto index_of = [&](std::array<int, 3> p) {
    for (size_t i = 0; i < elems.size(); ++i)
      if (elems[i] == p) return int(i);
    throw std::logic_error("permutation not found");
  };
  std::vector<std::vector<int>> table(6, std::vector<int>(6));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) table[i][j] = index_of(perm_mul(elems[i], elems[j]));
  return std::make_shared<const GroupSpec>(GroupSpec::finite(table, {1, 3}));
}

}  // namespace

TEST_CASE("free abelian rank 2: word arithmetic") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  GElem e = z2->identity();
  REQUIRE(z2->is_identity(e));

  GElem a = {3, -1};
  GElem b = {-3, 1};
  REQUIRE(z2->mul(a, b) == e);
  REQUIRE(z2->inv(a) == b);
  REQUIRE(z2->word_length(a) == 4);

  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    GElem x = z2->random_element(rng, 5);
    GElem y = z2->random_element(rng, 5);
    GElem z = z2->random_element(rng, 5);
    REQUIRE(z2->mul(z2->mul(x, y), z) == z2->mul(x, z2->mul(y, z)));
    REQUIRE(z2->mul(x, z2->inv(x)) == e);
    REQUIRE(z2->word_length(z2->mul(x, y)) <= z2->word_length(x) + z2->word_length(y));
  }
}

TEST_CASE("free abelian ball: size and contents") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  auto ball = z2->ball(2);
  REQUIRE(ball.size() == 13);  // 1 + 4 + 8 lattice points with |x|+|y| <= 2
  std::set<GElem> seen(ball.begin(), ball.end());
  REQUIRE(seen.size() == ball.size());
  for (const auto& g : ball) REQUIRE(z2->word_length(g) <= 2);
}

TEST_CASE("free group rank 2: reduction and associativity") {
  auto f2 = std::make_shared<const GroupSpec>(GroupSpec::free_group(2));
  GElem e = f2->identity();

  // generator letters: 1, 2 with inverses -1, -2
  GElem a = {1};
  GElem abar = {-1};
  GElem b = {2};
  REQUIRE(f2->mul(a, abar) == e);
  REQUIRE(f2->mul(f2->mul(a, b), f2->inv(f2->mul(a, b))) == e);
  REQUIRE(f2->word_length(f2->mul(a, b)) == 2);

  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    GElem x = f2->random_element(rng, 6);
    GElem y = f2->random_element(rng, 6);
    GElem z = f2->random_element(rng, 6);
    REQUIRE(f2->mul(f2->mul(x, y), z) == f2->mul(x, f2->mul(y, z)));
    REQUIRE(f2->is_identity(f2->mul(f2->inv(x), x)));
    // reduced words never contain adjacent cancelling letters
    GElem w = f2->mul(x, y);
    for (size_t i = 0; i + 1 < w.size(); ++i) REQUIRE(w[i] != -w[i + 1]);
  }

  auto ball = f2->ball(2);
  REQUIRE(ball.size() == 17);  // 1 + 4 + 12 reduced words of length <= 2
}

TEST_CASE("cyclic group: order and inverses") {
  auto c6 = std::make_shared<const GroupSpec>(GroupSpec::cyclic(6));
  GElem g = c6->generators.at(0);
  GElem acc = c6->identity();
  for (int i = 0; i < 6; ++i) acc = c6->mul(acc, g);
  REQUIRE(c6->is_identity(acc));
  GElem g2 = c6->mul(g, g);
  REQUIRE(c6->mul(g2, c6->inv(g2)) == c6->identity());
  REQUIRE(c6->word_length(c6->inv(g)) >= 1);
}

TEST_CASE("finite symmetric group: table closure and word metric") {
  auto s3 = sym3();
  for (int i = 0; i < 6; ++i) {
    GElem gi = {i};
    REQUIRE(s3->mul(gi, s3->inv(gi)) == s3->identity());
  }
  // transpositions have length 1, 3-cycles length 2 under {(01),(12)}
  REQUIRE(s3->word_length({1}) == 1);
  REQUIRE(s3->word_length({3}) == 1);
  REQUIRE(s3->word_length({4}) == 2);
  REQUIRE(s3->word_length({5}) == 2);
  REQUIRE(s3->word_length({2}) <= 3);
  REQUIRE(s3->ball(10).size() == 6);
}

TEST_CASE("random sampling is seed-deterministic") {
  auto f2 = std::make_shared<const GroupSpec>(GroupSpec::free_group(2));
  Rng r1(99), r2(99);
  for (int i = 0; i < 50; ++i) REQUIRE(f2->random_element(r1, 8) == f2->random_element(r2, 8));
}

TEST_CASE("scalar convolution: delta algebra and associativity") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  Rng rng(7);

  ScalarGA da(z2), db(z2);
  GElem g = {1, -2}, h = {0, 3};
  da.set(g, 1.0);
  db.set(h, 1.0);
  ScalarGA dd = convolve(da, db);
  REQUIRE(dd.support.size() == 1);
  REQUIRE(std::abs(dd.support.at(z2->mul(g, h)) - cdouble(1.0, 0.0)) < 1e-15);

  for (int trial = 0; trial < 25; ++trial) {
    ScalarGA a(z2), b(z2), c(z2);
    for (int i = 0; i < 4; ++i) {
      a.set(z2->random_element(rng, 3), rng.cgauss());
      b.set(z2->random_element(rng, 3), rng.cgauss());
      c.set(z2->random_element(rng, 3), rng.cgauss());
    }
    ScalarGA lhs = convolve(convolve(a, b), c);
    ScalarGA rhs = convolve(a, convolve(b, c));
    double gap = 0.0;
    std::set<GElem> keys;
    for (auto& [k, v] : lhs.support) keys.insert(k);
    for (auto& [k, v] : rhs.support) keys.insert(k);
    for (const auto& k : keys) {
      cdouble lv = lhs.support.count(k) ? lhs.support.at(k) : 0.0;
      cdouble rv = rhs.support.count(k) ? rhs.support.at(k) : 0.0;
      gap = std::max(gap, std::abs(lv - rv));
    }
    REQUIRE(gap < 1e-12);
  }
}

TEST_CASE("weighted norms and the operator-norm diagnostic") {
  auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    ScalarGA a(z2);
    double l1 = 0.0;
    for (int i = 0; i < 5; ++i) a.set(z2->random_element(rng, 2), rng.cgauss());
    for (auto& [g, v] : a.support) l1 += std::abs(v);

    // nu_k increases with k and dominates the plain two-norm
    double n0 = nu_norm(a, 0);
    double n1 = nu_norm(a, 1);
    double n2 = nu_norm(a, 2);
    REQUIRE(n0 <= n1 + 1e-15);
    REQUIRE(n1 <= n2 + 1e-15);
    REQUIRE(std::abs(n0 - a.norm2()) < 1e-13);

    // left-convolution operator norm on a ball is at most the l1 norm
    double op = conv_op_norm_on_ball(a, 6);
    REQUIRE(op <= l1 * (1.0 + 1e-10) + 1e-12);
    // polynomial growth: the rapid-decay ratio stays modest
    REQUIRE(rd_diagnostic(a, 2, 6) <= 4.0);
  }
}
