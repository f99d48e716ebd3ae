#pragma once

#include "bhi/group.hpp"

#include <optional>

namespace bhi {

struct GrowthBound {
  double degree = 0.0;  // per-argument polynomial degree d
  double C = 1.0;       // |c(g_1..g_k)| <= C * prod (1+|g_i|)^d
};

// nonhomogeneous group cochain: evaluator on Gamma^k
struct GroupCochain {
  std::shared_ptr<const GroupSpec> spec;
  int degree = 0;
  std::function<cdouble(std::span<const GElem>)> eval;
  bool normalized = false;
  bool antisym_image = false;
  std::optional<GrowthBound> growth;

  cdouble operator()(std::span<const GElem> args) const {
    if (int(args.size()) != degree) throw precondition_error("GroupCochain arity");
    return eval(args);
  }
  cdouble operator()(std::initializer_list<GElem> args) const {
    return (*this)(std::span<const GElem>(args.begin(), args.size()));
  }
};

// homogeneous (left-invariant) cochain: evaluator on Gamma^{k+1}
struct HomogeneousCochain {
  std::shared_ptr<const GroupSpec> spec;
  int degree = 0;
  std::function<cdouble(std::span<const GElem>)> eval;

  cdouble operator()(std::span<const GElem> args) const {
    if (int(args.size()) != degree + 1) throw precondition_error("HomogeneousCochain arity");
    return eval(args);
  }
  cdouble operator()(std::initializer_list<GElem> args) const {
    return (*this)(std::span<const GElem>(args.begin(), args.size()));
  }
};

// delta c (g_1..g_{k+1}) = c(g_2..g_{k+1})
//                        + sum_i (-1)^i c(g_1,..,g_i g_{i+1},..,g_{k+1})
//                        + (-1)^{k+1} c(g_1..g_k)
inline GroupCochain nhom_delta(const GroupCochain& c) {
  GroupCochain out;
  out.spec = c.spec;
  out.degree = c.degree + 1;
  auto spec = c.spec;
  auto base = c;
  out.eval = [spec, base](std::span<const GElem> g) -> cdouble {
    int k = base.degree;
    std::vector<GElem> t;
    t.reserve(k);
    cdouble acc = 0.0;
    t.assign(g.begin() + 1, g.end());
    acc += base.eval(t);
    for (int i = 1; i <= k; ++i) {
      t.clear();
      for (int j = 0; j < i - 1; ++j) t.push_back(g[j]);
      t.push_back(spec->mul(g[i - 1], g[i]));
      for (int j = i + 1; j <= k; ++j) t.push_back(g[j]);
      acc += ((i % 2) ? -1.0 : 1.0) * base.eval(t);
    }
    t.assign(g.begin(), g.begin() + k);
    acc += ((k + 1) % 2 ? -1.0 : 1.0) * base.eval(t);
    return acc;
  };
  return out;
}

// homogeneous differential: (d phi)(g_0..g_{k+1}) = sum_i (-1)^i phi(.. g_i omitted ..)
inline HomogeneousCochain hom_delta(const HomogeneousCochain& phi) {
  HomogeneousCochain out;
  out.spec = phi.spec;
  out.degree = phi.degree + 1;
  auto base = phi;
  out.eval = [base](std::span<const GElem> g) -> cdouble {
    cdouble acc = 0.0;
    std::vector<GElem> t;
    for (int i = 0; i < int(g.size()); ++i) {
      t.clear();
      for (int j = 0; j < int(g.size()); ++j)
        if (j != i) t.push_back(g[j]);
      acc += ((i % 2) ? -1.0 : 1.0) * base.eval(t);
    }
    return acc;
  };
  return out;
}

// I(c)(g_0..g_k) = c(g_0^{-1} g_1, g_1^{-1} g_2, ..., g_{k-1}^{-1} g_k)
inline HomogeneousCochain to_homogeneous(const GroupCochain& c) {
  HomogeneousCochain out;
  out.spec = c.spec;
  out.degree = c.degree;
  auto spec = c.spec;
  auto base = c;
  out.eval = [spec, base](std::span<const GElem> g) -> cdouble {
    std::vector<GElem> t;
    t.reserve(g.size() - 1);
    for (size_t i = 0; i + 1 < g.size(); ++i) t.push_back(spec->mul(spec->inv(g[i]), g[i + 1]));
    return base.eval(t);
  };
  return out;
}

// I^{-1}(phi)(g_1..g_k) = phi(1, g_1, g_1 g_2, ..., g_1...g_k)
inline GroupCochain from_homogeneous(const HomogeneousCochain& phi) {
  GroupCochain out;
  out.spec = phi.spec;
  out.degree = phi.degree;
  auto spec = phi.spec;
  auto base = phi;
  out.eval = [spec, base](std::span<const GElem> g) -> cdouble {
    std::vector<GElem> t;
    t.reserve(g.size() + 1);
    GElem acc = spec->identity();
    t.push_back(acc);
    for (auto& gi : g) {
      acc = spec->mul(acc, gi);
      t.push_back(acc);
    }
    return base.eval(t);
  };
  return out;
}

inline int perm_sign(const std::vector<int>& p) {
  int inv = 0;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return (inv % 2) ? -1 : 1;
}

// average of sgn(s) phi(g_{s(0)},...,g_{s(k)}) over the symmetric group
inline HomogeneousCochain antisymmetrize(const HomogeneousCochain& phi) {
  if (phi.degree > 6)
    throw precondition_error("antisymmetrize: degree above 6 refused (factorial cost)");
  HomogeneousCochain out;
  out.spec = phi.spec;
  out.degree = phi.degree;
  auto base = phi;
  out.eval = [base](std::span<const GElem> g) -> cdouble {
    int n = int(g.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    CKahanSum acc;
    double count = 0.0;
    std::vector<GElem> t(n);
    do {
      for (int i = 0; i < n; ++i) t[i] = g[perm[i]];
      acc.add(double(perm_sign(perm)) * base.eval(t));
      count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc.value() / count;
  };
  return out;
}

// ---------------------------------------------------------------------------
// builtin cocycles
// ---------------------------------------------------------------------------
inline GroupCochain builtin_cocycle(std::shared_ptr<const GroupSpec> spec,
                                    const std::string& name,
                                    const std::vector<double>& params = {}) {
  GroupCochain c;
  c.spec = spec;
  if (name == "trivial-degree-0") {
    c.degree = 0;
    c.normalized = true;
    c.antisym_image = true;
    c.growth = GrowthBound{0.0, 1.0};
    c.eval = [](std::span<const GElem>) -> cdouble { return 1.0; };
    return c;
  }
  if (name == "linear-on-Zk") {
    if (spec->kind != GroupKind::FreeAbelian)
      throw config_error("linear-on-Zk needs a free abelian group");
    std::vector<double> w(spec->rank, 1.0);
    for (size_t i = 0; i < params.size() && i < w.size(); ++i) w[i] = params[i];
    c.degree = 1;
    c.normalized = true;  // holds when the coefficient functional has trivial kernel on supports used
    c.antisym_image = true;
    c.growth = GrowthBound{1.0, std::accumulate(w.begin(), w.end(), 0.0, [](double a, double b) {
                             return a + std::abs(b);
                           })};
    c.eval = [w](std::span<const GElem> g) -> cdouble {
      double s = 0.0;
      for (size_t i = 0; i < w.size(); ++i) s += w[i] * double(g[0][i]);
      return s;
    };
    return c;
  }
  if (name == "area-on-Z2") {
    if (spec->kind != GroupKind::FreeAbelian || spec->rank != 2)
      throw config_error("area-on-Z2 needs Z^2");
    c.degree = 2;
    c.normalized = true;
    c.antisym_image = true;
    c.growth = GrowthBound{1.0, 1.0};
    c.eval = [](std::span<const GElem> g) -> cdouble {
      return double(g[0][0]) * double(g[1][1]) - double(g[0][1]) * double(g[1][0]);
    };
    return c;
  }
  if (name == "volume-on-Z2p") {
    if (spec->kind != GroupKind::FreeAbelian || spec->rank % 2 != 0)
      throw config_error("volume-on-Z2p needs Z^{2p}");
    int k = spec->rank;
    c.degree = k;
    c.normalized = true;
    c.antisym_image = true;
    c.growth = GrowthBound{1.0, 1.0};
    c.eval = [k](std::span<const GElem> g) -> cdouble {
      Eigen::MatrixXd m(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = double(g[i][j]);
      return m.determinant();
    };
    return c;
  }
  throw config_error("unknown builtin cocycle: " + name);
}

// ---------------------------------------------------------------------------
// structured covers and the Cech form omega_c
// ---------------------------------------------------------------------------
struct DiscreteForm {
  int degree = 0;       // 0: site values, 1: link values, 2: plaquette values
  Eigen::MatrixXd values;  // sites/links: 1 x N row; plaquettes: N1 x N2

  double total() const {
    KahanSum s;
    for (int i = 0; i < values.rows(); ++i)
      for (int j = 0; j < values.cols(); ++j) s.add(values(i, j));
    return s.value();
  }
};

// two-arc cover of the N-site circle lattice with its Z-cover data.
// Patch lifts l_i: U_i -> R with l_i == coordinate mod N; transition
// g_{ij} = l_i - l_j is locally constant on overlaps.
struct CircleCover {
  int n;
  explicit CircleCover(int n_) : n(n_) {
    if (n < 20) throw config_error("circle cover: lattice too small");
  }
  // chi_0 ramps up on [0, 0.1 n], is 1 on [0.1 n, 0.4 n], ramps down on [0.4 n, 0.6 n]
  double chi0(int x) const {
    double s = double(((x % n) + n) % n) / n;
    auto ramp = [](double t) { return std::clamp(t, 0.0, 1.0); };
    if (s < 0.4) return ramp(s / 0.1);
    return 1.0 - ramp((s - 0.4) / 0.2);
  }
  double chi(int i, int x) const { return i == 0 ? chi0(x) : 1.0 - chi0(x); }
  // lift difference l_0 - l_1 at site x (defined where both patches live)
  double g01(int x) const {
    double s = double(((x % n) + n) % n) / n;
    return (s < 0.25) ? -1.0 : 0.0;  // the wrap overlap sits at small s
  }
};

inline DiscreteForm cech_form_circle(const CircleCover& cover, const GroupCochain& c) {
  auto spec = c.spec;
  if (c.degree == 0) {
    DiscreteForm f;
    f.degree = 0;
    f.values.resize(1, cover.n);
    for (int x = 0; x < cover.n; ++x) f.values(0, x) = std::real(c({}));
    return f;
  }
  if (c.degree != 1 || spec->kind != GroupKind::FreeAbelian || spec->rank != 1)
    throw config_error("circle cover pairs with degree-1 cochains on Z");
  DiscreteForm f;
  f.degree = 1;
  f.values.setZero(1, cover.n);
  for (int x = 0; x < cover.n; ++x) {
    KahanSum w;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        if (i == j) continue;
        double dchij = cover.chi(j, x + 1) - cover.chi(j, x);
        if (dchij == 0.0) continue;
        double gij = (i == 0 ? cover.g01(x) : -cover.g01(x));
        GElem g{std::int32_t(gij)};
        w.add(cover.chi(i, x) * dchij * std::real(c.eval(std::span<const GElem>(&g, 1))));
      }
    f.values(0, x) = w.value();
  }
  return f;
}

// four-patch product cover of the N1 x N2 torus lattice with its Z^2-cover
struct TorusCover {
  CircleCover cx, cy;
  TorusCover(int n1, int n2) : cx(n1), cy(n2) {}
  int patches() const { return 4; }
  double chi(int p, int x, int y) const { return cx.chi(p & 1, x) * cy.chi(p >> 1, y); }
  // lift difference between patches p and q at (x, y), as a Z^2 element
  GElem g(int p, int q, int x, int y) const {
    double gx = 0.0, gy = 0.0;
    if ((p & 1) != (q & 1)) gx = ((p & 1) == 0 ? cx.g01(x) : -cx.g01(x));
    if ((p >> 1) != (q >> 1)) gy = ((p >> 1) == 0 ? cy.g01(y) : -cy.g01(y));
    return {std::int32_t(gx), std::int32_t(gy)};
  }
};

inline DiscreteForm cech_form_torus(const TorusCover& cover, const GroupCochain& c) {
  if (c.degree == 0) {
    DiscreteForm f;
    f.degree = 0;
    f.values.setOnes(cover.cx.n, cover.cy.n);
    f.values *= std::real(c({}));
    return f;
  }
  if (c.degree != 2 || c.spec->kind != GroupKind::FreeAbelian || c.spec->rank != 2)
    throw config_error("torus cover pairs with degree-2 cochains on Z^2");
  int n1 = cover.cx.n, n2 = cover.cy.n;
  DiscreteForm f;
  f.degree = 2;
  f.values.setZero(n1, n2);
  std::vector<GElem> args(2);
  for (int x = 0; x < n1; ++x)
    for (int y = 0; y < n2; ++y) {
      KahanSum w;
      for (int i = 0; i < 4; ++i) {
        double chi_i = cover.chi(i, x, y);
        if (chi_i == 0.0) continue;
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k) {
            // cup-product wedge: dx chi_j at (x,y) times dy chi_k at (x+1,y),
            // minus dy chi_j at (x,y) times dx chi_k at (x,y+1)
            double t1 = (cover.chi(j, x + 1, y) - cover.chi(j, x, y)) *
                        (cover.chi(k, x + 1, y + 1) - cover.chi(k, x + 1, y));
            double t2 = (cover.chi(j, x, y + 1) - cover.chi(j, x, y)) *
                        (cover.chi(k, x + 1, y + 1) - cover.chi(k, x, y + 1));
            if (t1 == 0.0 && t2 == 0.0) continue;
            args[0] = cover.g(i, j, x, y);
            args[1] = cover.g(j, k, x, y);
            w.add(chi_i * (t1 - t2) * std::real(c.eval(args)));
          }
      }
      f.values(x, y) = w.value();
    }
  return f;
}

// ---------------------------------------------------------------------------
// sampled structural checks (used by the verification suites)
// ---------------------------------------------------------------------------
inline double check_normalized(const GroupCochain& c, Rng& rng, int samples, int radius) {
  double worst = 0.0;
  const auto& gs = *c.spec;
  int k = c.degree;
  if (k == 0) return 0.0;
  std::vector<GElem> t(k);
  for (int s = 0; s < samples; ++s) {
    for (auto& g : t) g = gs.random_element(rng, radius);
    int slot = rng.integer(0, k - 1);
    GElem keep = t[slot];
    t[slot] = gs.identity();
    worst = std::max(worst, std::abs(c.eval(t)));
    t[slot] = keep;
    // force g_1...g_k = identity by solving for the last factor
    GElem prod = gs.identity();
    for (int i = 0; i + 1 < k; ++i) prod = gs.mul(prod, t[i]);
    t[k - 1] = gs.inv(prod);
    worst = std::max(worst, std::abs(c.eval(t)));
  }
  return worst;
}

inline double check_antisym_image(const GroupCochain& c, Rng& rng, int samples, int radius) {
  // if g_1 ... g_{k+1} = 1 then c(g_2..g_{k+1}) = (-1)^k c(g_1..g_k)
  double worst = 0.0;
  const auto& gs = *c.spec;
  int k = c.degree;
  if (k == 0) return 0.0;
  std::vector<GElem> g(k + 1);
  for (int s = 0; s < samples; ++s) {
    GElem prod = gs.identity();
    for (int i = 0; i < k; ++i) {
      g[i] = gs.random_element(rng, radius);
      prod = gs.mul(prod, g[i]);
    }
    g[k] = gs.inv(prod);
    std::vector<GElem> left(g.begin() + 1, g.end());
    std::vector<GElem> right(g.begin(), g.begin() + k);
    cdouble lhs = c.eval(left);
    cdouble rhs = double(k % 2 ? -1 : 1) * c.eval(right);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

inline double check_growth(const GroupCochain& c, Rng& rng, int samples, int radius) {
  if (!c.growth) return 0.0;
  double worst = 0.0;  // worst excess of |c| over the declared bound
  const auto& gs = *c.spec;
  std::vector<GElem> t(c.degree);
  for (int s = 0; s < samples; ++s) {
    double bound = c.growth->C;
    for (auto& g : t) {
      g = gs.random_element(rng, radius);
      bound *= std::pow(1.0 + gs.word_length(g), c.growth->degree);
    }
    worst = std::max(worst, std::abs(c.eval(t)) - bound);
  }
  return std::max(0.0, worst);
}

}  // namespace bhi
