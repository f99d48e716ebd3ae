#pragma once

#include "bhi/common.hpp"

#include <deque>
#include <memory>

namespace bhi {

// Group elements are flat integer vectors:
//   free abelian rank k : exponent vector, length k
//   finite (mult table) : single index {i}
//   free group rank r   : reduced word of letters +-1..+-r
using GElem = std::vector<std::int32_t>;

enum class GroupKind { FreeAbelian, Finite, Free };

struct GroupSpec {
  GroupKind kind;
  int rank = 0;                         // free abelian / free
  std::vector<std::vector<int>> table;  // finite: table[i][j] = i*j
  std::vector<int> inverse_table;       // finite
  std::vector<GElem> generators;        // declared generating set
  std::vector<int> cayley_dist;         // finite: word length from generators

  static GroupSpec free_abelian(int k) {
    GroupSpec s;
    s.kind = GroupKind::FreeAbelian;
    s.rank = k;
    for (int i = 0; i < k; ++i) {
      GElem g(k, 0);
      g[i] = 1;
      s.generators.push_back(g);
    }
    return s;
  }

  static GroupSpec free_group(int r) {
    GroupSpec s;
    s.kind = GroupKind::Free;
    s.rank = r;
    for (int i = 1; i <= r; ++i) s.generators.push_back({i});
    return s;
  }

  static GroupSpec finite(std::vector<std::vector<int>> mult, std::vector<int> gens) {
    GroupSpec s;
    s.kind = GroupKind::Finite;
    s.table = std::move(mult);
    int n = int(s.table.size());
    s.inverse_table.assign(n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (s.table[i][j] == 0) s.inverse_table[i] = j;
    for (int g : gens) s.generators.push_back({g});
    // Cayley-graph BFS from the identity over generators and their inverses
    s.cayley_dist.assign(n, -1);
    s.cayley_dist[0] = 0;
    std::deque<int> q{0};
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (int g : gens)
        for (int y : {s.table[g][x], s.table[s.inverse_table[g]][x]})
          if (s.cayley_dist[y] < 0) {
            s.cayley_dist[y] = s.cayley_dist[x] + 1;
            q.push_back(y);
          }
    }
    for (int i = 0; i < n; ++i)
      if (s.cayley_dist[i] < 0) throw config_error("finite group: generators do not generate");
    return s;
  }

  static GroupSpec cyclic(int n, int gen = 1) {
    std::vector<std::vector<int>> t(n, std::vector<int>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t[i][j] = (i + j) % n;
    return finite(std::move(t), {gen});
  }

  static GroupSpec trivial() {
    return finite({{0}}, {});
  }

  GElem identity() const {
    switch (kind) {
      case GroupKind::FreeAbelian: return GElem(rank, 0);
      case GroupKind::Finite: return {0};
      case GroupKind::Free: return {};
    }
    throw config_error("bad group kind");
  }

  bool is_identity(const GElem& g) const { return g == identity(); }

  GElem mul(const GElem& a, const GElem& b) const {
    switch (kind) {
      case GroupKind::FreeAbelian: {
        GElem c(rank);
        for (int i = 0; i < rank; ++i) c[i] = a[i] + b[i];
        return c;
      }
      case GroupKind::Finite:
        return {std::int32_t(table[a[0]][b[0]])};
      case GroupKind::Free: {
        GElem c = a;
        for (std::int32_t x : b) {
          if (!c.empty() && c.back() == -x)
            c.pop_back();
          else
            c.push_back(x);
        }
        return c;
      }
    }
    throw config_error("bad group kind");
  }

  GElem inv(const GElem& a) const {
    switch (kind) {
      case GroupKind::FreeAbelian: {
        GElem c(rank);
        for (int i = 0; i < rank; ++i) c[i] = -a[i];
        return c;
      }
      case GroupKind::Finite:
        return {std::int32_t(inverse_table[a[0]])};
      case GroupKind::Free: {
        GElem c(a.rbegin(), a.rend());
        for (auto& x : c) x = -x;
        return c;
      }
    }
    throw config_error("bad group kind");
  }

  int word_length(const GElem& g) const {
    switch (kind) {
      case GroupKind::FreeAbelian: {
        int s = 0;
        for (std::int32_t x : g) s += std::abs(x);
        return s;
      }
      case GroupKind::Finite:
        return cayley_dist[g[0]];
      case GroupKind::Free:
        return int(g.size());
    }
    throw config_error("bad group kind");
  }

  // all elements within word-ball of given radius (deterministic order)
  std::vector<GElem> ball(int radius) const {
    std::map<GElem, int> dist;
    GElem e = identity();
    dist[e] = 0;
    std::deque<GElem> q{e};
    std::vector<GElem> gens_full;
    for (const auto& g : generators) {
      gens_full.push_back(g);
      gens_full.push_back(inv(g));
    }
    while (!q.empty()) {
      GElem x = q.front();
      q.pop_front();
      int dx = dist[x];
      if (dx == radius) continue;
      for (const auto& g : gens_full) {
        GElem y = mul(g, x);
        if (!dist.count(y)) {
          dist[y] = dx + 1;
          q.push_back(y);
        }
      }
    }
    std::vector<GElem> out;
    out.reserve(dist.size());
    for (auto& [g, d] : dist) out.push_back(g);
    return out;
  }

  GElem random_element(Rng& rng, int radius) const {
    GElem g = identity();
    int steps = rng.integer(0, radius);
    for (int s = 0; s < steps; ++s) {
      if (generators.empty()) break;
      int i = rng.integer(0, int(generators.size()) - 1);
      GElem h = generators[i];
      if (rng.uniform() < 0.5) h = inv(h);
      g = mul(g, h);
    }
    return g;
  }
};

// ---------------------------------------------------------------------------
// finitely supported group-algebra elements with values in V
// (V = cdouble for the scalar algebra, V = Mat for operator-decorated forms)
// ---------------------------------------------------------------------------
template <class V>
struct VTraits;

template <>
struct VTraits<cdouble> {
  static double abs(const cdouble& v) { return std::abs(v); }
  static bool is_zero(const cdouble& v, double tol) { return std::abs(v) <= tol; }
};

template <>
struct VTraits<Mat> {
  static double abs(const Mat& v) { return v.norm(); }
  static bool is_zero(const Mat& v, double tol) { return v.norm() <= tol; }
};

inline constexpr double kDropTol = 1e-14;

template <class V>
struct GroupAlgebra {
  std::shared_ptr<const GroupSpec> spec;
  std::map<GElem, V> support;
  double drop_tol = kDropTol;

  GroupAlgebra() = default;
  explicit GroupAlgebra(std::shared_ptr<const GroupSpec> s, double tol = kDropTol)
      : spec(std::move(s)), drop_tol(tol) {}

  void set(const GElem& g, V v) {
    if (VTraits<V>::is_zero(v, drop_tol))
      support.erase(g);
    else
      support[g] = std::move(v);
  }
  void accumulate(const GElem& g, const V& v) {
    auto it = support.find(g);
    if (it == support.end())
      support[g] = v;
    else
      it->second += v;
  }
  void prune() {
    for (auto it = support.begin(); it != support.end();)
      if (VTraits<V>::is_zero(it->second, drop_tol))
        it = support.erase(it);
      else
        ++it;
  }
  double norm2() const {
    KahanSum s;
    for (auto& [g, v] : support) {
      double a = VTraits<V>::abs(v);
      s.add(a * a);
    }
    return std::sqrt(s.value());
  }
};

using ScalarGA = GroupAlgebra<cdouble>;

template <class V>
GroupAlgebra<V> convolve(const GroupAlgebra<V>& a, const GroupAlgebra<V>& b) {
  if (a.spec.get() != b.spec.get())
    throw config_error("convolve: mismatched GroupSpec");
  GroupAlgebra<V> out(a.spec, std::max(a.drop_tol, b.drop_tol));
  for (auto& [h, av] : a.support)
    for (auto& [k, bv] : b.support) out.accumulate(a.spec->mul(h, k), av * bv);
  out.prune();
  return out;
}

// nu_k(a) = ( sum_g (1+|g|)^{2k} |a(g)|^2 )^{1/2}
template <class V>
double nu_norm(const GroupAlgebra<V>& a, int k) {
  KahanSum s;
  for (auto& [g, v] : a.support) {
    double w = std::pow(1.0 + a.spec->word_length(g), 2 * k);
    double m = VTraits<V>::abs(v);
    s.add(w * m * m);
  }
  return std::sqrt(s.value());
}

// operator norm of left convolution by a on l2(word ball), via power
// iteration on L*L with a deterministic start vector
inline double conv_op_norm_on_ball(const ScalarGA& a, int radius) {
  const GroupSpec& gs = *a.spec;
  int diam = 0;
  for (auto& [g, v] : a.support) diam = std::max(diam, gs.word_length(g));
  if (radius < diam)
    throw precondition_error("rd_diagnostic: ball radius below support diameter");

  std::vector<GElem> ball = gs.ball(radius);
  std::map<GElem, int> index;
  for (int i = 0; i < int(ball.size()); ++i) index[ball[i]] = i;
  int n = int(ball.size());

  // sparse action of L_a restricted to the ball: (L x)(g) = sum_h a(h) x(h^{-1} g)
  struct Entry {
    int row, col;
    cdouble w;
  };
  std::vector<Entry> entries;
  for (auto& [h, v] : a.support)
    for (int j = 0; j < n; ++j) {
      GElem g = gs.mul(h, ball[j]);
      auto it = index.find(g);
      if (it != index.end()) entries.push_back({it->second, j, v});
    }

  auto apply = [&](const Vec& x) {
    Vec y = Vec::Zero(n);
    for (auto& e : entries) y(e.row) += e.w * x(e.col);
    return y;
  };
  auto apply_adj = [&](const Vec& x) {
    Vec y = Vec::Zero(n);
    for (auto& e : entries) y(e.col) += std::conj(e.w) * x(e.row);
    return y;
  };

  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = cdouble(std::cos(0.7 * i + 0.3), std::sin(1.3 * i));
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < 5000; ++it) {
    Vec y = apply_adj(apply(x));
    double nl = y.norm();
    if (nl == 0.0) return 0.0;
    y /= nl;
    if (std::abs(nl - lam) < 1e-12 * std::max(1.0, nl) && it > 8) {
      lam = nl;
      break;
    }
    lam = nl;
    x = y;
  }
  return std::sqrt(lam);
}

// rapid-decay diagnostic ||L_a|| / nu_k(a) on the given ball (not a proof)
inline double rd_diagnostic(const ScalarGA& a, int k, int ball_radius) {
  double nk = nu_norm(a, k);
  if (nk == 0.0) return 0.0;
  return conv_op_norm_on_ball(a, ball_radius) / nk;
}

}  // namespace bhi
