// Group-decorated window operators, the cocycle-twisted trace current, the
// dual-circle defect current on invariant families, and the relative cocycle
// identities that tie them together along the indicial map.
#include <catch2/catch_amalgamated.hpp>

#include "bhi/equivariant.hpp"

using namespace bhi;

namespace {

struct DecoratedLab {
  std::shared_ptr<const GroupSpec> spec;
  std::shared_ptr<const Window> win;
  RegularizationData reg;
  GammaOp<BKernel> unit_w;
  GammaOp<FourierKernel> unit_f;

  static DecoratedLab make(std::shared_ptr<const GroupSpec> spec, int nb) {
    DecoratedLab lab;
    lab.spec = std::move(spec);
    lab.win = make_window(-26, 9, nb, 12);
    lab.reg = RegularizationData{4};  // junction at t = -4
    lab.unit_w = gamma_unit(lab.spec, bk_identity(lab.win));
    lab.unit_f = gamma_unit(lab.spec, FourierKernel::identity(nb));
    return lab;
  }
};

FourierKernel random_invariant(Rng& rng, int nb, double scale) {
  FourierKernel k = FourierKernel::zero(nb);
  for (int n = -1; n <= 1; ++n) k.hop[n] = scale * rng.cmatrix(nb, nb);
  return k;
}

// residual supported on [lo, t_hi]^2: stays trusted under short products
Mat trusted_residual(Rng& rng, const Window& w, int lo, double scale) {
  Mat r = Mat::Zero(w.rows(), w.rows());
  int span = (w.t_hi - lo + 1) * w.nb;
  r.block(w.row(lo, 0), w.row(lo, 0), span, span) = scale * rng.cmatrix(span, span);
  return r;
}

// Inverse-closed support pool on which the given cocycle takes nonzero
// values, so that the product-one constraint in the trace current is met by
// tuples the cocycle actually weighs. Independent random supports would make
// every identity below hold vacuously (0 == 0).
std::vector<GElem> support_pool(Rng& rng, const GroupSpec& gs, const GroupCochain& c) {
  std::vector<GElem> pool{gs.identity()};
  auto nonidentity = [&]() {
    for (int tries = 0; tries < 200; ++tries) {
      GElem g = gs.random_element(rng, 2);
      if (g != gs.identity()) return g;
    }
    throw infeasible_error("support_pool: group too small for a non-identity draw");
  };
  if (c.degree == 0) {
    if (gs.kind != GroupKind::Finite || gs.table.size() > 1) {
      GElem g = nonidentity();
      pool.push_back(g);
      pool.push_back(gs.inv(g));
    }
    return pool;
  }
  if (c.degree == 1) {
    GElem g = nonidentity();
    for (int tries = 0; tries < 200 && std::abs(c({g})) < 0.5; ++tries) g = nonidentity();
    pool.push_back(g);
    pool.push_back(gs.inv(g));
    return pool;
  }
  // degree 2: two directions the cocycle pairs nontrivially, closed under
  // inverses and under the product needed by the constraint
  GElem g = nonidentity();
  GElem h = nonidentity();
  for (int tries = 0; tries < 500 && std::abs(c({g, h})) < 0.5; ++tries) {
    g = nonidentity();
    h = nonidentity();
  }
  GElem gh = gs.mul(g, h);
  for (auto& e : {g, h, gh}) {
    pool.push_back(e);
    pool.push_back(gs.inv(e));
  }
  return pool;
}

GammaOp<BKernel> random_decorated_window(Rng& rng, const DecoratedLab& lab,
                                         const std::vector<GElem>& pool) {
  GammaOp<BKernel> a(lab.spec);
  const Window& w = *lab.win;
  double scale = 0.7 / static_cast<double>(pool.size());
  for (const GElem& g : pool)
    a.accumulate(g,
                 bk_add(BKernel::invariant(lab.win, random_invariant(rng, w.nb, scale)),
                        BKernel::residual(lab.win, trusted_residual(rng, w, w.eval_lo + 8, scale))));
  return a;
}

GammaOp<FourierKernel> random_decorated_fiber(Rng& rng, const DecoratedLab& lab,
                                              const std::vector<GElem>& pool) {
  GammaOp<FourierKernel> a(lab.spec);
  double scale = 0.7 / static_cast<double>(pool.size());
  for (const GElem& g : pool) a.accumulate(g, random_invariant(rng, lab.win->nb, scale));
  return a;
}

template <class E>
Unital<E> wrap(E op, cdouble omega) {
  Unital<E> u;
  u.body = std::move(op);
  u.omega = omega;
  return u;
}

// Evaluate every component of the relative differential on random tuples of
// the given arity and return the worst residual, relative to the tuple size.
struct IdentityProbe {
  double worst_b_tau = 0.0;    // (b tau - pullback sigma) component
  double worst_B_tau = 0.0;    // connes-B component of tau
  double worst_b_sigma = 0.0;  // hochschild component of sigma
  double worst_B_sigma = 0.0;  // connes-B component of sigma
  int tuples = 0;
};

IdentityProbe probe_relative_cocycle(Rng& rng, const DecoratedLab& lab, const GroupCochain& c,
                                     int samples) {
  auto rc = relative_trace_pair(c, lab.reg, lab.unit_w, lab.unit_f);
  auto d = relative_differential(rc);
  int k = c.degree;
  IdentityProbe out;
  std::vector<GElem> pool = support_pool(rng, *lab.spec, c);

  // the pair itself must evaluate to something nonzero on generic tuples,
  // otherwise every identity below would pass vacuously
  {
    std::vector<Unital<GammaOp<BKernel>>> t;
    for (int i = 0; i <= k; ++i)
      t.push_back(wrap(random_decorated_window(rng, lab, pool), cdouble(0.0)));
    REQUIRE(std::abs(rc.tau.eval_degree(std::span<const Unital<GammaOp<BKernel>>>(t))) > 1e-8);
    std::vector<Unital<GammaOp<FourierKernel>>> s;
    for (int i = 0; i <= k + 1; ++i)
      s.push_back(wrap(random_decorated_fiber(rng, lab, pool), cdouble(0.0)));
    REQUIRE(std::abs(rc.sigma.eval_degree(std::span<const Unital<GammaOp<FourierKernel>>>(s))) >
            1e-10);
  }
  auto tau_tuple = [&](int arity) {
    std::vector<Unital<GammaOp<BKernel>>> t;
    for (int i = 0; i < arity; ++i)
      t.push_back(wrap(random_decorated_window(rng, lab, pool), 0.3 * rng.cgauss()));
    return t;
  };
  auto sigma_tuple = [&](int arity) {
    std::vector<Unital<GammaOp<FourierKernel>>> t;
    for (int i = 0; i < arity; ++i)
      t.push_back(wrap(random_decorated_fiber(rng, lab, pool), 0.3 * rng.cgauss()));
    return t;
  };
  for (int s = 0; s < samples; ++s) {
    auto t1 = tau_tuple(k + 2);
    out.worst_b_tau = std::max(
        out.worst_b_tau, std::abs(d.tau.eval_degree(std::span<const Unital<GammaOp<BKernel>>>(t1))));
    ++out.tuples;
    if (k >= 1) {
      auto t2 = tau_tuple(k);
      out.worst_B_tau = std::max(
          out.worst_B_tau,
          std::abs(d.tau.eval_degree(std::span<const Unital<GammaOp<BKernel>>>(t2))));
      ++out.tuples;
    }
    auto t3 = sigma_tuple(k + 3);
    out.worst_b_sigma = std::max(
        out.worst_b_sigma,
        std::abs(d.sigma.eval_degree(std::span<const Unital<GammaOp<FourierKernel>>>(t3))));
    ++out.tuples;
    auto t4 = sigma_tuple(k + 1);
    out.worst_B_sigma = std::max(
        out.worst_B_sigma,
        std::abs(d.sigma.eval_degree(std::span<const Unital<GammaOp<FourierKernel>>>(t4))));
    ++out.tuples;
  }
  return out;
}

}  // namespace

TEST_CASE("decorated operators form an algebra over the group") {
  Rng rng(601);
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  DecoratedLab lab = DecoratedLab::make(spec, 2);
  auto pool = support_pool(rng, *spec, builtin_cocycle(spec, "trivial-degree-0"));
  GammaOp<BKernel> a = random_decorated_window(rng, lab, pool);
  GammaOp<BKernel> b = random_decorated_window(rng, lab, pool);
  GammaOp<BKernel> c = random_decorated_window(rng, lab, pool);
  // associativity and unit
  REQUIRE(enorm(esub(emul(emul(a, b), c), emul(a, emul(b, c)))) < 1e-10);
  REQUIRE(enorm(esub(emul(a, lab.unit_w), a)) < 1e-13);
  REQUIRE(enorm(esub(emul(lab.unit_w, a), a)) < 1e-13);
  // adjoint is an anti-homomorphism
  REQUIRE(enorm(esub(eadj(emul(a, b)), emul(eadj(b), eadj(a)))) < 1e-10);
}

TEST_CASE("indicial map is a unital algebra homomorphism") {
  Rng rng(602);
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  DecoratedLab lab = DecoratedLab::make(spec, 2);
  auto pool = support_pool(rng, *spec, builtin_cocycle(spec, "trivial-degree-0"));
  GammaOp<BKernel> a = random_decorated_window(rng, lab, pool);
  GammaOp<BKernel> b = random_decorated_window(rng, lab, pool);
  auto lhs = indicial_family(emul(a, b));
  auto rhs = emul(indicial_family(a), indicial_family(b));
  REQUIRE(enorm(esub(lhs, rhs)) < 1e-11);
  REQUIRE(enorm(esub(indicial_family(lab.unit_w), lab.unit_f)) < 1e-14);
  REQUIRE(enorm(esub(indicial_family(eadj(a)), eadj(indicial_family(a)))) < 1e-12);
}

TEST_CASE("twisted trace current matches a direct small-support evaluation") {
  Rng rng(603);
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
  DecoratedLab lab = DecoratedLab::make(spec, 2);
  GroupCochain c = builtin_cocycle(spec, "linear-on-Zk", {1.7});
  std::function<cdouble(const BKernel&)> lt = [&lab](const BKernel& b) {
    return b_trace(b, lab.reg);
  };
  auto tau = gamma_trace_current<BKernel>(c, lt, lab.unit_w);

  auto pool = support_pool(rng, *spec, c);
  GammaOp<BKernel> a0 = random_decorated_window(rng, lab, pool);
  GammaOp<BKernel> a1 = random_decorated_window(rng, lab, pool);
  CKahanSum direct;
  for (auto& [g0, v0] : a0.coef)
    for (auto& [g1, v1] : a1.coef) {
      if (spec->mul(g0, g1) != spec->identity()) continue;
      direct.add(c({g1}) * b_trace(bk_mul(v0, v1), lab.reg));
    }
  std::array<Unital<GammaOp<BKernel>>, 2> args{wrap(a0, cdouble(0.0)), wrap(a1, cdouble(0.0))};
  cdouble via = tau(std::span<const Unital<GammaOp<BKernel>>>(args));
  REQUIRE(std::abs(direct.value()) > 1e-8);  // the comparison is not vacuous
  REQUIRE(std::abs(via - direct.value()) < 1e-10);
}

TEST_CASE("defect current matches the pairwise dual-circle integral") {
  Rng rng(604);
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  DecoratedLab lab = DecoratedLab::make(spec, 2);
  GroupCochain c = builtin_cocycle(spec, "trivial-degree-0");
  auto sigma = sigma_defect_current(c, lab.unit_f);

  auto pool = support_pool(rng, *spec, c);
  GammaOp<FourierKernel> b0 = random_decorated_fiber(rng, lab, pool);
  GammaOp<FourierKernel> b1 = random_decorated_fiber(rng, lab, pool);
  CKahanSum direct;
  for (auto& [g0, v0] : b0.coef) {
    const FourierKernel* v1 = b1.find(spec->inv(g0));
    if (!v1) continue;
    direct.add(defect_integral(v0, *v1));
  }
  std::array<Unital<GammaOp<FourierKernel>>, 2> args{wrap(b0, cdouble(0.0)),
                                                     wrap(b1, cdouble(0.0))};
  cdouble via = sigma(std::span<const Unital<GammaOp<FourierKernel>>>(args));
  REQUIRE(std::abs(direct.value()) > 1e-10);  // the comparison is not vacuous
  REQUIRE(std::abs(via - direct.value()) < 1e-10);
}

TEST_CASE("relative cocycle identities across the builtin cocycles") {
  Rng rng(605);

  SECTION("trivial group, degree 0") {
    auto spec = std::make_shared<const GroupSpec>(GroupSpec::trivial());
    DecoratedLab lab = DecoratedLab::make(spec, 2);
    GroupCochain c = builtin_cocycle(spec, "trivial-degree-0");
    IdentityProbe p = probe_relative_cocycle(rng, lab, c, 12);
    CHECK(p.tuples == 36);
    REQUIRE(p.worst_b_tau < 1e-8);
    REQUIRE(p.worst_b_sigma < 1e-8);
    REQUIRE(p.worst_B_sigma < 1e-8);
  }
  SECTION("free abelian rank 1, linear weight") {
    auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
    DecoratedLab lab = DecoratedLab::make(spec, 2);
    GroupCochain c = builtin_cocycle(spec, "linear-on-Zk", {2.0});
    IdentityProbe p = probe_relative_cocycle(rng, lab, c, 8);
    CHECK(p.tuples == 32);
    REQUIRE(p.worst_b_tau < 1e-8);
    REQUIRE(p.worst_B_tau < 1e-8);
    REQUIRE(p.worst_b_sigma < 1e-8);
    REQUIRE(p.worst_B_sigma < 1e-8);
  }
  SECTION("free abelian rank 2, area cocycle") {
    auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
    DecoratedLab lab = DecoratedLab::make(spec, 2);
    GroupCochain c = builtin_cocycle(spec, "area-on-Z2");
    IdentityProbe p = probe_relative_cocycle(rng, lab, c, 8);
    CHECK(p.tuples == 32);
    REQUIRE(p.worst_b_tau < 1e-8);
    REQUIRE(p.worst_B_tau < 1e-8);
    REQUIRE(p.worst_b_sigma < 1e-8);
    REQUIRE(p.worst_B_sigma < 1e-8);
  }
}

TEST_CASE("weighted norms and resolvent decay diagnostics") {
  Rng rng(606);
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
  DecoratedLab lab = DecoratedLab::make(spec, 2);
  auto pool = support_pool(rng, *spec, builtin_cocycle(spec, "trivial-degree-0"));
  GammaOp<BKernel> a = random_decorated_window(rng, lab, pool);

  std::function<double(const BKernel&)> ln = [](const BKernel& b) { return bk_norm(b); };
  double n0 = word_weighted_norm<BKernel>(a, 0, ln);
  double n1 = word_weighted_norm<BKernel>(a, 1, ln);
  double n2 = word_weighted_norm<BKernel>(a, 2, ln);
  REQUIRE(n0 > 0.0);
  REQUIRE(n0 <= n1);
  REQUIRE(n1 <= n2);
  REQUIRE(triple_norm_weighted(a, 1, lab.reg) > 0.0);

  // shifted-inverse fiber families of a gapped chiral block carry finite
  // weighted mass, uniformly in the shift
  CylinderModel cyl = build_cylinder_dirac(rng.gapped_hermitian(2, 0.7), DiffScheme::balanced);
  WeightedResolventFit fit = resolvent_decay_fit(cyl.dplus, 1, {0.0, 0.5, 1.0, 2.0});
  REQUIRE(fit.weights.size() == 4);
  for (double wgt : fit.weights) {
    REQUIRE(std::isfinite(wgt));
    REQUIRE(wgt > 0.0);
  }
  REQUIRE(fit.fitted_c >= fit.weights[0]);
}
