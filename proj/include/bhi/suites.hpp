#pragma once
// Named self-check suites behind the `verify` command: each check seeds its
// own generator from (base seed, check index), computes one residual, and
// compares it against a pinned threshold.  Checks are independent, so they
// can run on a thread pool; results are merged by index, which keeps the
// rendered report byte-identical no matter how many workers ran.

#include "bhi/btrace.hpp"
#include "bhi/cyclic.hpp"
#include "bhi/group_cohomology.hpp"
#include "bhi/projectors.hpp"

#include <atomic>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace bhi {

struct CheckSpec {
  std::string name;
  double threshold = 0.0;
  std::function<double(Rng&)> run;  // returns the measured residual
};

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace suite_detail {

// --- random multilinear material for the complex identities ---------------

inline CyclicCochain<Mat> random_normalized_cochain(Rng& rng, int degree, int dim) {
  auto mats = std::make_shared<std::vector<Mat>>();
  for (int i = 0; i <= degree; ++i) mats->push_back(rng.cmatrix(dim, dim));
  CyclicCochain<Mat> c;
  c.degree = degree;
  c.normalized = true;
  c.eval = [mats, dim, degree](std::span<const Unital<Mat>> a) -> cdouble {
    Mat prod = (*mats)[0];
    Mat a0 = a[0].body ? *a[0].body : Mat(Mat::Zero(dim, dim));
    if (a[0].omega != cdouble(0.0, 0.0)) a0 += a[0].omega * Mat::Identity(dim, dim);
    prod = prod * a0;
    for (int i = 1; i <= degree; ++i) {
      if (!a[i].body) return 0.0;
      prod = prod * (*mats)[static_cast<size_t>(i)] * (*a[i].body);
    }
    return mat_trace(prod);
  };
  return c;
}

inline std::vector<Unital<Mat>> random_tuple(Rng& rng, int arity, int dim) {
  std::vector<Unital<Mat>> t;
  t.reserve(static_cast<size_t>(arity));
  for (int i = 0; i < arity; ++i) {
    Unital<Mat> u;
    u.body = rng.cmatrix(dim, dim);
    u.omega = rng.cgauss();
    t.push_back(std::move(u));
  }
  return t;
}

inline double cochain_scale(const CyclicCochain<Mat>& c, Rng& rng, int dim, int samples = 6) {
  double s = 1.0;
  for (int i = 0; i < samples; ++i) {
    auto t = random_tuple(rng, c.degree + 1, dim);
    s = std::max(s, std::abs(c(std::span<const Unital<Mat>>(t))));
  }
  return s;
}

// Integer-coefficient multilinear group cochain on a free abelian group:
// every evaluation below the tested radius stays inside exact double range.
inline GroupCochain integer_multilinear_cochain(Rng& rng,
                                                std::shared_ptr<const GroupSpec> spec,
                                                int degree) {
  auto w = std::make_shared<std::vector<std::vector<double>>>();
  for (int i = 0; i < degree; ++i) {
    std::vector<double> row(static_cast<size_t>(spec->rank));
    for (auto& x : row) x = static_cast<double>(rng.integer(-3, 3));
    w->push_back(std::move(row));
  }
  GroupCochain c;
  c.spec = spec;
  c.degree = degree;
  c.eval = [w](std::span<const GElem> g) -> cdouble {
    double prod = 1.0;
    for (size_t i = 0; i < w->size(); ++i) {
      double s = 0.0;
      for (size_t r = 0; r < (*w)[i].size(); ++r) s += (*w)[i][r] * double(g[i][r]);
      prod *= s;
    }
    return prod;
  };
  return c;
}

inline std::vector<GElem> random_gtuple(const GroupSpec& gs, Rng& rng, int arity, int radius) {
  std::vector<GElem> t(static_cast<size_t>(arity));
  for (auto& g : t) g = gs.random_element(rng, radius);
  return t;
}

// --- material for the regularized-trace checks -----------------------------

inline FourierKernel random_kernel(Rng& rng, int dim, int reach, double scale = 1.0) {
  FourierKernel k = FourierKernel::zero(dim);
  for (int n = -reach; n <= reach; ++n) k.hop[n] = scale * rng.cmatrix(dim, dim);
  return k;
}

inline Mat random_interior_residual(Rng& rng, const Window& w, int lo) {
  Mat r = Mat::Zero(w.rows(), w.rows());
  for (int s = lo; s <= w.t_hi; ++s)
    for (int t = lo; t <= w.t_hi; ++t)
      r.block(w.row(s, 0), w.row(t, 0), w.nb, w.nb) = rng.cmatrix(w.nb, w.nb);
  return r;
}

inline cdouble plain_trusted_trace(const BKernel& p) {
  const Window& w = *p.win;
  Mat dense = p.dense();
  CKahanSum acc;
  for (int t = w.eval_lo; t <= w.t_hi; ++t)
    acc.add(mat_trace(dense.block(w.row(t, 0), w.row(t, 0), w.nb, w.nb)));
  return acc.value();
}

// --- material for the idempotent-calculus checks ---------------------------

inline Mat random_gapped_dplus(Rng& rng, int nm, int np, double smin, double smax) {
  Mat qu = rng.unitary(nm);
  Mat qv = rng.unitary(np);
  int k = std::min(nm, np);
  RVec s(k);
  for (int i = 0; i < k; ++i) s(i) = smin * std::pow(smax / smin, rng.uniform());
  std::sort(s.data(), s.data() + k, std::greater<double>());
  return qu.leftCols(k) * s.asDiagonal() * qv.leftCols(k).adjoint();
}

inline double umat_dist(const UMat2<Mat>& a, const UMat2<Mat>& b) {
  return umat_norm(umat_sub(a, b));
}

}  // namespace suite_detail

// ---------------------------------------------------------------------------
// check registries
// ---------------------------------------------------------------------------

inline std::vector<CheckSpec> algebra_checks() {
  using namespace suite_detail;
  std::vector<CheckSpec> out;

  out.push_back({"hochschild-square-zero", 1e-12, [](Rng& rng) {
                   double worst = 0.0;
                   for (int degree = 0; degree <= 3; ++degree)
                     for (int trial = 0; trial < 4; ++trial) {
                       int dim = rng.integer(2, 6);
                       auto phi = random_normalized_cochain(rng, degree, dim);
                       auto bb = hochschild_b(hochschild_b(phi));
                       double scale = cochain_scale(phi, rng, dim);
                       for (int rep = 0; rep < 4; ++rep) {
                         auto args = random_tuple(rng, degree + 3, dim);
                         worst = std::max(
                             worst, std::abs(bb(std::span<const Unital<Mat>>(args))) / scale);
                       }
                     }
                   return worst;
                 }});

  out.push_back({"cyclic-boundary-square-zero", 1e-12, [](Rng& rng) {
                   double worst = 0.0;
                   for (int degree = 2; degree <= 4; ++degree)
                     for (int trial = 0; trial < 4; ++trial) {
                       int dim = rng.integer(2, 6);
                       auto phi = random_normalized_cochain(rng, degree, dim);
                       auto BB = connes_B(connes_B(phi));
                       double scale = cochain_scale(phi, rng, dim);
                       for (int rep = 0; rep < 4; ++rep) {
                         auto args = random_tuple(rng, degree - 1, dim);
                         worst = std::max(
                             worst, std::abs(BB(std::span<const Unital<Mat>>(args))) / scale);
                       }
                     }
                   return worst;
                 }});

  out.push_back({"boundaries-anticommute", 1e-12, [](Rng& rng) {
                   double worst = 0.0;
                   for (int degree = 1; degree <= 4; ++degree)
                     for (int trial = 0; trial < 4; ++trial) {
                       int dim = rng.integer(2, 6);
                       auto phi = random_normalized_cochain(rng, degree, dim);
                       auto lhs = hochschild_b(connes_B(phi));
                       auto rhs = connes_B(hochschild_b(phi));
                       double scale = cochain_scale(phi, rng, dim);
                       for (int rep = 0; rep < 4; ++rep) {
                         auto args = random_tuple(rng, degree + 1, dim);
                         cdouble v = lhs(std::span<const Unital<Mat>>(args)) +
                                     rhs(std::span<const Unital<Mat>>(args));
                         worst = std::max(worst, std::abs(v) / scale);
                       }
                     }
                   return worst;
                 }});

  out.push_back({"total-differential-square-zero", 1e-11, [](Rng& rng) {
                   int dim = 5;
                   CochainFamily<Mat> f;
                   for (int degree = 0; degree <= 3; ++degree)
                     f.add(random_normalized_cochain(rng, degree, dim));
                   auto dd = total_differential(total_differential(f));
                   double worst = 0.0;
                   for (auto& [degree, part] : dd.parts) {
                     (void)part;
                     for (int rep = 0; rep < 6; ++rep) {
                       auto args = random_tuple(rng, degree + 1, dim);
                       worst = std::max(
                           worst,
                           std::abs(dd.eval_degree(std::span<const Unital<Mat>>(args))));
                     }
                   }
                   return worst;
                 }});

  return out;
}

inline std::vector<CheckSpec> cocycle_checks() {
  using namespace suite_detail;
  std::vector<CheckSpec> out;

  out.push_back({"group-coboundary-square-zero", 1e-12, [](Rng& rng) {
                   auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
                   double worst = 0.0;
                   for (int degree = 1; degree <= 3; ++degree)
                     for (int trial = 0; trial < 4; ++trial) {
                       auto c = integer_multilinear_cochain(rng, z2, degree);
                       auto dd = nhom_delta(nhom_delta(c));
                       auto phi = hom_delta(hom_delta(to_homogeneous(c)));
                       for (int rep = 0; rep < 8; ++rep) {
                         auto a = random_gtuple(*z2, rng, degree + 2, 6);
                         worst = std::max(worst, std::abs(dd(std::span<const GElem>(a))));
                         auto b = random_gtuple(*z2, rng, degree + 3, 6);
                         worst = std::max(worst, std::abs(phi(std::span<const GElem>(b))));
                       }
                     }
                   return worst;
                 }});

  out.push_back({"transfer-round-trip", 1e-13, [](Rng& rng) {
                   auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
                   double worst = 0.0;
                   for (int degree = 1; degree <= 3; ++degree)
                     for (int trial = 0; trial < 4; ++trial) {
                       auto c = integer_multilinear_cochain(rng, z2, degree);
                       auto back = from_homogeneous(to_homogeneous(c));
                       auto phi = to_homogeneous(c);
                       auto phi_back = to_homogeneous(from_homogeneous(phi));
                       for (int rep = 0; rep < 8; ++rep) {
                         auto a = random_gtuple(*z2, rng, degree, 6);
                         worst = std::max(worst, std::abs(back(std::span<const GElem>(a)) -
                                                          c(std::span<const GElem>(a))));
                         auto b = random_gtuple(*z2, rng, degree + 1, 6);
                         worst = std::max(worst, std::abs(phi_back(std::span<const GElem>(b)) -
                                                          phi(std::span<const GElem>(b))));
                       }
                     }
                   return worst;
                 }});

  out.push_back({"builtin-cocycle-laws", 1e-12, [](Rng& rng) {
                   auto z1 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
                   auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
                   auto z4 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(4));
                   std::vector<GroupCochain> cocycles;
                   cocycles.push_back(builtin_cocycle(z2, "trivial-degree-0"));
                   cocycles.push_back(builtin_cocycle(z1, "linear-on-Zk", {1.0}));
                   cocycles.push_back(builtin_cocycle(z2, "linear-on-Zk", {2.0, -1.0}));
                   cocycles.push_back(builtin_cocycle(z2, "area-on-Z2"));
                   cocycles.push_back(builtin_cocycle(z4, "volume-on-Z2p"));
                   double worst = 0.0;
                   for (const auto& c : cocycles) {
                     worst = std::max(worst, check_normalized(c, rng, 100, 6));
                     worst = std::max(worst, check_antisym_image(c, rng, 100, 6));
                     worst = std::max(worst, std::max(0.0, check_growth(c, rng, 100, 6)));
                   }
                   return worst;
                 }});

  out.push_back({"builtin-cocycles-closed", 1e-12, [](Rng& rng) {
                   auto z1 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(1));
                   auto z2 = std::make_shared<const GroupSpec>(GroupSpec::free_abelian(2));
                   std::vector<GroupCochain> cocycles;
                   cocycles.push_back(builtin_cocycle(z1, "linear-on-Zk", {1.0}));
                   cocycles.push_back(builtin_cocycle(z2, "linear-on-Zk", {2.0, -1.0}));
                   cocycles.push_back(builtin_cocycle(z2, "area-on-Z2"));
                   double worst = 0.0;
                   for (const auto& c : cocycles) {
                     auto dc = nhom_delta(c);
                     for (int rep = 0; rep < 50; ++rep) {
                       auto a = random_gtuple(*c.spec, rng, dc.degree, 5);
                       worst = std::max(worst, std::abs(dc(std::span<const GElem>(a))));
                     }
                   }
                   return worst;
                 }});

  return out;
}

inline std::vector<CheckSpec> btrace_checks() {
  using namespace suite_detail;
  std::vector<CheckSpec> out;

  out.push_back({"residual-trace-agreement", 1e-12, [](Rng& rng) {
                   auto w = make_window(-30, 25, 2, 8);
                   RegularizationData reg{5};
                   double worst = 0.0;
                   for (int trial = 0; trial < 6; ++trial) {
                     Mat r = random_interior_residual(rng, *w, w->eval_lo + 4);
                     BKernel p = BKernel::residual(w, r);
                     cdouble bt = b_trace(p, reg);
                     worst = std::max(worst, std::abs(bt - plain_trusted_trace(p)));
                   }
                   return worst;
                 }});

  out.push_back({"invariant-wall-height", 1e-10, [](Rng& rng) {
                   auto w = make_window(-30, 25, 2, 8);
                   double worst = 0.0;
                   for (int trial = 0; trial < 6; ++trial) {
                     FourierKernel k = random_kernel(rng, 2, 2);
                     BKernel p = BKernel::invariant(w, k);
                     cdouble expect = static_cast<double>(w->t_hi) * mat_trace(k.hop.at(0));
                     for (int junction : {w->eval_lo + 2, 0, w->t_hi - 1})
                       worst = std::max(
                           worst, std::abs(b_trace(p, RegularizationData{-junction}) - expect));
                   }
                   return worst;
                 }});

  out.push_back({"junction-independence", 1e-10, [](Rng& rng) {
                   auto w = make_window(-40, 30, 2, 10);
                   double worst = 0.0;
                   for (int trial = 0; trial < 6; ++trial) {
                     BKernel a = BKernel::invariant(w, random_kernel(rng, 2, 2));
                     BKernel b = BKernel::invariant(w, random_kernel(rng, 2, 2));
                     BKernel p = bk_mul(a, b);
                     std::vector<cdouble> vals;
                     for (int junction : {w->eval_lo + 2, -5, 0, 7, w->t_hi - 1})
                       vals.push_back(b_trace(p, RegularizationData{-junction}));
                     for (const auto& v : vals) worst = std::max(worst, std::abs(v - vals[0]));
                   }
                   return worst;
                 }});

  out.push_back({"commutator-defect-circle", 1e-8, [](Rng& rng) {
                   auto w = make_window(-40, 30, 2, 10);
                   RegularizationData reg{3};
                   double worst = 0.0;
                   for (int trial = 0; trial < 20; ++trial) {
                     int ra = rng.integer(1, 2);
                     int rb = rng.integer(1, 2);
                     BKernel a = BKernel::invariant(w, random_kernel(rng, 2, ra));
                     BKernel b = BKernel::invariant(w, random_kernel(rng, 2, rb));
                     DefectPair d = commutator_defect(a, b, reg);
                     worst = std::max(worst, d.gap() / std::max(1.0, std::abs(d.rhs)));
                   }
                   return worst;
                 }});

  return out;
}

inline std::vector<CheckSpec> projector_checks() {
  using namespace suite_detail;
  std::vector<CheckSpec> out;

  out.push_back({"heat-idempotent-residual", 1e-10, [](Rng& rng) {
                   double worst = 0.0;
                   for (auto [nm, np] : {std::pair{16, 16}, std::pair{18, 16}}) {
                     Mat dp = random_gapped_dplus(rng, nm, np, 0.6, 2.5);
                     DiracSvd svd = DiracSvd::make(dp);
                     ChiralPair eig = ChiralPair::make(dp);
                     for (double u : {0.5, 2.0}) {
                       worst = std::max(worst, umat_idempotency_residual(cm_idempotent(svd, u)));
                       worst = std::max(worst, umat_idempotency_residual(cm_idempotent(eig, u)));
                       worst = std::max(worst,
                                        umat_dist(cm_idempotent(svd, u), cm_idempotent(eig, u)));
                     }
                   }
                   return worst;
                 }});

  out.push_back({"exponent-homotopy-endpoints", 1e-12, [](Rng& rng) {
                   Mat dp = random_gapped_dplus(rng, 16, 16, 0.6, 2.5);
                   DiracSvd svd = DiracSvd::make(dp);
                   double worst = 0.0;
                   for (double u : {0.7, 1.5}) {
                     UMat2<Mat> heat = cm_idempotent(svd, u);
                     worst = std::max(worst, umat_dist(homotopy_idempotent(svd, u, 0.5), heat));
                     worst = std::max(
                         worst, umat_dist(homotopy_idempotent(svd, u, -0.5), umat_adjoint(heat)));
                     worst = std::max(
                         worst, umat_idempotency_residual(homotopy_idempotent(svd, u, 0.2)));
                   }
                   return worst;
                 }});

  out.push_back({"parametrix-route-match", 1e-12, [](Rng& rng) {
                   Mat dp = random_gapped_dplus(rng, 16, 17, 0.6, 2.5);
                   DiracSvd svd = DiracSvd::make(dp);
                   double worst = 0.0;
                   worst = std::max(
                       worst, umat_idempotency_residual(connes_skandalis(q_resolvent(svd), dp)));
                   for (double u : {0.8, 1.6}) {
                     worst = std::max(
                         worst, umat_idempotency_residual(connes_skandalis(q_heat(svd, u), dp)));
                     worst = std::max(worst, umat_dist(connes_skandalis(q_heat(svd, 1.0), dp),
                                                       cm_idempotent(svd, 1.0)));
                   }
                   return worst;
                 }});

  out.push_back({"flow-path-endpoints", 1e-10, [](Rng& rng) {
                   Mat dp = random_gapped_dplus(rng, 14, 14, 0.7, 2.0);
                   DiracSvd svd = DiracSvd::make(dp);
                   double u = 1.1;
                   double worst =
                       umat_dist(flow_idempotent_at(svd, u, 1.0), cm_idempotent(svd, u));
                   double smin = svd.min_singular();
                   double horizon = std::sqrt(std::log(1e26) / (u * smin * smin));
                   worst = std::max(worst, umat_dist(flow_idempotent_at(svd, u, horizon),
                                                     UMat2<Mat>::corner_unit()));
                   return worst;
                 }});

  return out;
}

// ---------------------------------------------------------------------------
// suite lookup and deterministic parallel execution
// ---------------------------------------------------------------------------

inline std::vector<std::string> suite_names() {
  return {"algebra", "cocycles", "btrace", "projectors"};
}

inline std::vector<CheckSpec> suite_checks(const std::string& suite) {
  if (suite == "algebra") return algebra_checks();
  if (suite == "cocycles") return cocycle_checks();
  if (suite == "btrace") return btrace_checks();
  if (suite == "projectors") return projector_checks();
  throw config_error("unknown verify suite: " + suite +
                     " (expected algebra, cocycles, btrace, projectors, or all)");
}

// splitmix64 step: decorrelates per-check streams from (seed, index)
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Run every check of a suite.  Each check draws from its own (seed, index)
// stream and lands in its own output slot, so the result is identical for
// any worker count.
inline SuiteReport run_suite(const std::string& suite, std::uint64_t seed, int jobs = 1) {
  std::vector<CheckSpec> specs = suite_checks(suite);
  SuiteReport report;
  report.suite = suite;
  report.checks.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) break;
      Rng rng(mix_seed(seed, i));
      double measured = specs[i].run(rng);
      report.checks[i] = {specs[i].name, measured, specs[i].threshold,
                          measured < specs[i].threshold};
    }
  };
  int n = std::max(1, std::min<int>(jobs, static_cast<int>(specs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return report;
}

}  // namespace bhi
