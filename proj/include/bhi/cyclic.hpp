#pragma once
// Cyclic-cohomology machinery over an arbitrary coefficient algebra:
// unitalized elements, Hochschild and Connes differentials, the mapping-cone
// differential for a pair (algebra, quotient algebra), amplified evaluation
// of trace-type cochains on 2x2 block idempotents, Chern-style pairings with
// their combinatorial constants, and the transgression integral for paths of
// idempotents.
//
// The coefficient algebra E is any type providing, via ADL:
//   E emul(const E&, const E&);        // product
//   E eadd(const E&, const E&);        // sum
//   E escale(cdouble, const E&);       // scalar multiple
//   double enorm(const E&);            // any submultiplicative-ish norm
// Overloads for Eigen complex matrices are supplied here.

#include "bhi/common.hpp"

#include <array>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bhi {

// ---------------------------------------------------------------------------
// Coefficient-algebra operations for dense complex matrices.
// ---------------------------------------------------------------------------

inline Mat emul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw precondition_error("emul: shape mismatch");
  return a * b;
}
inline Mat eadd(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw precondition_error("eadd: shape mismatch");
  return a + b;
}
inline Mat escale(cdouble z, const Mat& a) { return z * a; }
inline double enorm(const Mat& a) { return frob(a); }
inline Mat eadj(const Mat& a) { return a.adjoint(); }

// ---------------------------------------------------------------------------
// Unitalization: x = body + omega * 1.  An absent body means a pure scalar.
// ---------------------------------------------------------------------------

template <class E>
struct Unital {
  std::optional<E> body;
  cdouble omega{0.0};

  Unital() = default;
  explicit Unital(E b, cdouble w = 0.0) : body(std::move(b)), omega(w) {}

  static Unital unit() {
    Unital u;
    u.omega = 1.0;
    return u;
  }
  static Unital scalar(cdouble w) {
    Unital u;
    u.omega = w;
    return u;
  }
  bool pure_scalar() const { return !body.has_value(); }
};

template <class E>
void uacc(std::optional<E>& into, const E& piece) {
  if (into)
    into = eadd(*into, piece);
  else
    into = piece;
}

template <class E>
Unital<E> umul(const Unital<E>& x, const Unital<E>& y) {
  Unital<E> r;
  r.omega = x.omega * y.omega;
  if (x.body && y.body) uacc(r.body, emul(*x.body, *y.body));
  if (x.body && y.omega != 0.0) uacc(r.body, escale(y.omega, *x.body));
  if (y.body && x.omega != 0.0) uacc(r.body, escale(x.omega, *y.body));
  return r;
}

template <class E>
Unital<E> uadd(const Unital<E>& x, const Unital<E>& y) {
  Unital<E> r;
  r.omega = x.omega + y.omega;
  if (x.body) r.body = *x.body;
  if (y.body) uacc(r.body, *y.body);
  return r;
}

template <class E>
Unital<E> uscale(cdouble z, const Unital<E>& x) {
  Unital<E> r;
  r.omega = z * x.omega;
  if (x.body) r.body = escale(z, *x.body);
  return r;
}

template <class E>
Unital<E> usub(const Unital<E>& x, const Unital<E>& y) {
  return uadd(x, uscale<E>(-1.0, y));
}

template <class E>
double unorm(const Unital<E>& x) {
  double b = x.body ? enorm(*x.body) : 0.0;
  return b + std::abs(x.omega);
}

// ---------------------------------------------------------------------------
// Cochains.  A degree-k cochain consumes k+1 unitalized arguments.
// ---------------------------------------------------------------------------

template <class E>
struct CyclicCochain {
  int degree = 0;
  bool normalized = true;  // vanishes when a scalar sits in slots 1..k
  std::function<cdouble(std::span<const Unital<E>>)> eval;

  cdouble operator()(std::span<const Unital<E>> args) const {
    if (static_cast<int>(args.size()) != degree + 1)
      throw precondition_error("cochain arity mismatch");
    return eval(args);
  }
  cdouble operator()(std::initializer_list<Unital<E>> args) const {
    std::vector<Unital<E>> v(args);
    return (*this)(std::span<const Unital<E>>(v));
  }
};

// Hochschild differential: degree k -> k+1.
template <class E>
CyclicCochain<E> hochschild_b(const CyclicCochain<E>& phi) {
  CyclicCochain<E> out;
  out.degree = phi.degree + 1;
  out.normalized = phi.normalized;
  const int k = phi.degree;
  auto base = phi.eval;
  out.eval = [base, k](std::span<const Unital<E>> a) -> cdouble {
    CKahanSum acc;
    std::vector<Unital<E>> t(static_cast<size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) {
      for (int m = 0; m < i; ++m) t[static_cast<size_t>(m)] = a[static_cast<size_t>(m)];
      t[static_cast<size_t>(i)] = umul(a[static_cast<size_t>(i)], a[static_cast<size_t>(i) + 1]);
      for (int m = i + 1; m <= k; ++m) t[static_cast<size_t>(m)] = a[static_cast<size_t>(m) + 1];
      double sgn = (i % 2 == 0) ? 1.0 : -1.0;
      acc.add(sgn * base(std::span<const Unital<E>>(t)));
    }
    {
      t[0] = umul(a[static_cast<size_t>(k) + 1], a[0]);
      for (int m = 1; m <= k; ++m) t[static_cast<size_t>(m)] = a[static_cast<size_t>(m)];
      double sgn = ((k + 1) % 2 == 0) ? 1.0 : -1.0;
      acc.add(sgn * base(std::span<const Unital<E>>(t)));
    }
    return acc.value();
  };
  return out;
}

// Connes boundary on normalized cochains: degree k -> k-1.
template <class E>
CyclicCochain<E> connes_B(const CyclicCochain<E>& phi) {
  if (phi.degree == 0) {
    CyclicCochain<E> out;
    out.degree = -1;
    out.normalized = true;
    out.eval = [](std::span<const Unital<E>>) -> cdouble { return 0.0; };
    return out;
  }
  CyclicCochain<E> out;
  out.degree = phi.degree - 1;
  out.normalized = phi.normalized;
  const int k = phi.degree;
  auto base = phi.eval;
  out.eval = [base, k](std::span<const Unital<E>> a) -> cdouble {
    // a has k slots; insert the unit up front and cycle.
    CKahanSum acc;
    std::vector<Unital<E>> t(static_cast<size_t>(k) + 1);
    for (int j = 0; j < k; ++j) {
      t[0] = Unital<E>::unit();
      for (int m = 0; m < k; ++m)
        t[static_cast<size_t>(m) + 1] = a[static_cast<size_t>((j + m) % k)];
      double sgn = (((k - 1) * j) % 2 == 0) ? 1.0 : -1.0;
      acc.add(sgn * base(std::span<const Unital<E>>(t)));
    }
    return acc.value();
  };
  return out;
}

// ---------------------------------------------------------------------------
// Graded families of cochains, so that b + B acts honestly on the total
// complex (b raises degree, B lowers it).
// ---------------------------------------------------------------------------

template <class E>
struct CochainFamily {
  std::map<int, CyclicCochain<E>> parts;  // degree -> component

  void add(const CyclicCochain<E>& c) {
    auto it = parts.find(c.degree);
    if (it == parts.end()) {
      parts.emplace(c.degree, c);
      return;
    }
    CyclicCochain<E> merged;
    merged.degree = c.degree;
    merged.normalized = it->second.normalized && c.normalized;
    auto e1 = it->second.eval;
    auto e2 = c.eval;
    merged.eval = [e1, e2](std::span<const Unital<E>> a) { return e1(a) + e2(a); };
    it->second = merged;
  }
  static CochainFamily single(const CyclicCochain<E>& c) {
    CochainFamily f;
    f.add(c);
    return f;
  }
  CochainFamily scaled(cdouble z) const {
    CochainFamily f;
    for (auto& [d, c] : parts) {
      CyclicCochain<E> s;
      s.degree = c.degree;
      s.normalized = c.normalized;
      auto e = c.eval;
      s.eval = [e, z](std::span<const Unital<E>> a) { return z * e(a); };
      f.add(s);
    }
    return f;
  }
  // Evaluate the degree-(args-1) component; absent components are zero.
  cdouble eval_degree(std::span<const Unital<E>> args) const {
    int d = static_cast<int>(args.size()) - 1;
    auto it = parts.find(d);
    if (it == parts.end()) return 0.0;
    return it->second(args);
  }
};

template <class E>
CochainFamily<E> total_differential(const CochainFamily<E>& f) {
  CochainFamily<E> out;
  for (auto& [d, c] : f.parts) {
    out.add(hochschild_b(c));
    if (d >= 1) out.add(connes_B(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relative (mapping-cone) cochains for a unital algebra map hom : A -> G.
// A class-k relative cochain is a pair (tau in C^k(A), sigma in C^{k+1}(G));
// its differential is ((b+B)tau - hom^* sigma, -(b+B)sigma).
// ---------------------------------------------------------------------------

template <class EA, class EG>
struct RelativeCochain {
  CochainFamily<EA> tau;
  CochainFamily<EG> sigma;
  std::function<Unital<EG>(const Unital<EA>&)> hom;
};

template <class EA, class EG>
CochainFamily<EA> pullback(const CochainFamily<EG>& f,
                           const std::function<Unital<EG>(const Unital<EA>&)>& hom) {
  CochainFamily<EA> out;
  for (auto& [d, c] : f.parts) {
    CyclicCochain<EA> p;
    p.degree = c.degree;
    p.normalized = c.normalized;
    auto e = c.eval;
    p.eval = [e, hom](std::span<const Unital<EA>> a) -> cdouble {
      std::vector<Unital<EG>> t;
      t.reserve(a.size());
      for (auto& x : a) t.push_back(hom(x));
      return e(std::span<const Unital<EG>>(t));
    };
    out.add(p);
  }
  return out;
}

template <class EA, class EG>
RelativeCochain<EA, EG> relative_differential(const RelativeCochain<EA, EG>& rc) {
  RelativeCochain<EA, EG> out;
  out.hom = rc.hom;
  out.tau = total_differential(rc.tau);
  auto pulled = pullback<EA, EG>(rc.sigma, rc.hom).scaled(-1.0);
  for (auto& [d, c] : pulled.parts) out.tau.add(c);
  out.sigma = total_differential(rc.sigma).scaled(-1.0);
  return out;
}

// ---------------------------------------------------------------------------
// 2x2 block matrices over the unitalization, used for idempotents built from
// two half-spaces (graph projections, spectral sections, ...).
// Entry (i, j) = body[2i+j] + scal(i,j) * 1.
// ---------------------------------------------------------------------------

template <class E>
struct UMat2 {
  std::array<std::optional<E>, 4> body;
  Eigen::Matrix2cd scal = Eigen::Matrix2cd::Zero();

  Unital<E> entry(int i, int j) const {
    Unital<E> u;
    u.omega = scal(i, j);
    if (body[static_cast<size_t>(2 * i + j)]) u.body = *body[static_cast<size_t>(2 * i + j)];
    return u;
  }
  void set_entry(int i, int j, const Unital<E>& u) {
    scal(i, j) = u.omega;
    if (u.body)
      body[static_cast<size_t>(2 * i + j)] = *u.body;
    else
      body[static_cast<size_t>(2 * i + j)].reset();
  }

  static UMat2 scalar(const Eigen::Matrix2cd& s) {
    UMat2 m;
    m.scal = s;
    return m;
  }
  // Reference idempotent: unit in the lower-right corner.
  static UMat2 corner_unit() {
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    s(1, 1) = 1.0;
    return scalar(s);
  }
};

template <class E>
UMat2<E> umat_mul(const UMat2<E>& x, const UMat2<E>& y) {
  UMat2<E> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Unital<E> acc = umul(x.entry(i, 0), y.entry(0, j));
      acc = uadd(acc, umul(x.entry(i, 1), y.entry(1, j)));
      r.set_entry(i, j, acc);
    }
  return r;
}

template <class E>
UMat2<E> umat_add(const UMat2<E>& x, const UMat2<E>& y) {
  UMat2<E> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.set_entry(i, j, uadd(x.entry(i, j), y.entry(i, j)));
  return r;
}

template <class E>
UMat2<E> umat_scale(cdouble z, const UMat2<E>& x) {
  UMat2<E> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.set_entry(i, j, uscale(z, x.entry(i, j)));
  return r;
}

template <class E>
UMat2<E> umat_sub(const UMat2<E>& x, const UMat2<E>& y) {
  return umat_add(x, umat_scale<E>(-1.0, y));
}

template <class E>
double umat_norm(const UMat2<E>& x) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += unorm(x.entry(i, j));
  return s;
}

template <class E>
double umat_idempotency_residual(const UMat2<E>& x) {
  return umat_norm(umat_sub(umat_mul(x, x), x));
}

template <class E>
UMat2<E> umat_adjoint(const UMat2<E>& x) {
  UMat2<E> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Unital<E> u = x.entry(j, i);
      Unital<E> a;
      a.omega = std::conj(u.omega);
      if (u.body) a.body = eadj(*u.body);
      r.set_entry(i, j, a);
    }
  return r;
}

// Evaluate a trace-type cochain on 2x2 block arguments by summing over all
// block-index chains i_0 -> i_1 -> ... -> i_k -> i_0.
template <class E>
cdouble amplified_eval(const CyclicCochain<E>& tau, std::span<const UMat2<E>> args) {
  const int k = tau.degree;
  if (static_cast<int>(args.size()) != k + 1)
    throw precondition_error("amplified_eval arity mismatch");
  CKahanSum acc;
  const int chains = 1 << (k + 1);
  std::vector<Unital<E>> t(static_cast<size_t>(k) + 1);
  for (int mask = 0; mask < chains; ++mask) {
    bool dead = false;
    for (int m = 0; m <= k; ++m) {
      int im = (mask >> m) & 1;
      int in = (mask >> ((m + 1) % (k + 1))) & 1;
      t[static_cast<size_t>(m)] = args[static_cast<size_t>(m)].entry(im, in);
      if (t[static_cast<size_t>(m)].pure_scalar() && t[static_cast<size_t>(m)].omega == 0.0) {
        dead = true;
        break;
      }
    }
    if (dead) continue;
    acc.add(tau(std::span<const Unital<E>>(t)));
  }
  return acc.value();
}

// ---------------------------------------------------------------------------
// Pairing constants and the Chern-style pairing of an even cochain with a
// difference of idempotents.
// ---------------------------------------------------------------------------

inline double pairing_constant(int degree) {
  if (degree < 0 || degree % 2 != 0) throw precondition_error("pairing_constant: even degree required");
  int p = degree / 2;
  double c = (p % 2 == 0) ? 1.0 : -1.0;
  for (int m = p + 1; m <= 2 * p; ++m) c *= static_cast<double>(m);  // (2p)!/p!
  return c;
}

template <class E>
cdouble chern_pair(const UMat2<E>& P, const UMat2<E>& Q, const CyclicCochain<E>& tau) {
  const int k = tau.degree;
  if (k % 2 != 0) throw precondition_error("chern_pair: even cochain required");
  if (k == 0) {
    std::array<UMat2<E>, 1> d{umat_sub(P, Q)};
    return amplified_eval(tau, std::span<const UMat2<E>>(d));
  }
  auto weighted = [&](const UMat2<E>& X) -> cdouble {
    UMat2<E> X0 = X;
    X0.scal -= 0.5 * Eigen::Matrix2cd::Identity();
    std::vector<UMat2<E>> slots(static_cast<size_t>(k) + 1, X);
    slots[0] = X0;
    return amplified_eval(tau, std::span<const UMat2<E>>(slots));
  };
  return pairing_constant(k) * (weighted(P) - weighted(Q));
}

// ---------------------------------------------------------------------------
// Transgression along a path of idempotents, against an odd cochain sigma of
// degree 2p+1: sum over insertion slots of integral dt
//   sigma(p_t, ..., [pdot_t, p_t] at slot i, ..., p_t),  i = 0..2p,
// with p_t in every other slot (2p+2 slots total).
// ---------------------------------------------------------------------------

struct PathQuadrature {
  int n0 = 16;          // initial panel count (doubling from here)
  double tol = 1e-9;    // absolute doubling tolerance
  int max_nodes = 4097; // cap on Simpson nodes
};

template <class E>
struct IdempotentPath {
  std::function<UMat2<E>(double)> point;
  std::function<UMat2<E>(double)> velocity;
  double s0 = 0.0;
  double s1 = 1.0;
};

template <class E>
cdouble transgression_integrand(const CyclicCochain<E>& sigma, const UMat2<E>& p,
                                const UMat2<E>& pdot) {
  const int deg = sigma.degree;
  if (deg % 2 != 1) throw precondition_error("transgression: odd cochain required");
  const int slots = deg + 1;
  UMat2<E> comm = umat_sub(umat_mul(pdot, p), umat_mul(p, pdot));
  CKahanSum acc;
  std::vector<UMat2<E>> args(static_cast<size_t>(slots), p);
  for (int i = 0; i + 1 < slots; ++i) {
    args[static_cast<size_t>(i)] = comm;
    acc.add(amplified_eval(sigma, std::span<const UMat2<E>>(args)));
    args[static_cast<size_t>(i)] = p;
  }
  return acc.value();
}

template <class E>
QuadResult transgression_pair(const IdempotentPath<E>& path, const CyclicCochain<E>& sigma,
                              const PathQuadrature& qp = {}) {
  auto f = [&](double s) {
    return transgression_integrand(sigma, path.point(s), path.velocity(s));
  };
  return simpson_doubling(f, path.s0, path.s1, qp.n0, qp.tol, qp.max_nodes);
}

// ---------------------------------------------------------------------------
// Relative pairing: endpoint evaluations plus the transgression, scaled by
// the even pairing constant.  The endpoints enter with repeated slots; for
// cochains that kill scalar slots this agrees with the weighted Chern form.
// The sign of the transgression term is fixed by degenerate classes: when the
// path lives in the same algebra and sigma is the coboundary of tau, the
// integral telescopes to tau(Q) - tau(P), so only the plus sign kills the
// pairing of (P, Q, path from P to Q).
// ---------------------------------------------------------------------------

template <class E>
struct RelativePairing {
  cdouble value{0.0};
  cdouble endpoint_p{0.0};
  cdouble endpoint_q{0.0};
  QuadResult transgression;
};

template <class E>
cdouble repeated_slots_eval(const CyclicCochain<E>& tau, const UMat2<E>& X) {
  std::vector<UMat2<E>> slots(static_cast<size_t>(tau.degree) + 1, X);
  return amplified_eval(tau, std::span<const UMat2<E>>(slots));
}

template <class E>
RelativePairing<E> relative_pair(const UMat2<E>& P, const UMat2<E>& Q,
                                 const IdempotentPath<E>& path,
                                 const CyclicCochain<E>& tau,
                                 const CyclicCochain<E>& sigma,
                                 const PathQuadrature& qp = {}) {
  if (tau.degree % 2 != 0 || sigma.degree != tau.degree + 1)
    throw precondition_error("relative_pair: need degrees (2p, 2p+1)");
  RelativePairing<E> out;
  out.endpoint_p = repeated_slots_eval(tau, P);
  out.endpoint_q = repeated_slots_eval(tau, Q);
  out.transgression = transgression_pair(path, sigma, qp);
  out.value = pairing_constant(tau.degree) *
              (out.endpoint_p - out.endpoint_q + out.transgression.cvalue());
  return out;
}

// Two-algebra version: the endpoints live in one algebra (paired against tau)
// while the connecting path lives in a second algebra (paired against sigma),
// the two being related by the map that sent the endpoints there.
template <class EA, class EG>
RelativePairing<EG> relative_pair_cone(const UMat2<EA>& P, const UMat2<EA>& Q,
                                       const IdempotentPath<EG>& path,
                                       const CyclicCochain<EA>& tau,
                                       const CyclicCochain<EG>& sigma,
                                       const PathQuadrature& qp = {}) {
  if (tau.degree % 2 != 0 || sigma.degree != tau.degree + 1)
    throw precondition_error("relative_pair_cone: need degrees (2p, 2p+1)");
  RelativePairing<EG> out;
  out.endpoint_p = repeated_slots_eval(tau, P);
  out.endpoint_q = repeated_slots_eval(tau, Q);
  out.transgression = transgression_pair(path, sigma, qp);
  out.value = pairing_constant(tau.degree) *
              (out.endpoint_p - out.endpoint_q + out.transgression.cvalue());
  return out;
}

}  // namespace bhi
