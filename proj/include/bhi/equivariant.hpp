#pragma once
// Group-decorated operator algebras over a lattice cover and the cocycle-
// twisted trace currents on them. A decorated operator is a finitely
// supported family g -> local operator; multiplication is convolution over
// the group with operator products in the fibers. The twisted current pairs
// the regularized trace of operator chains against a group cocycle; its
// Hochschild coboundary concentrates in the trace defect, which is the
// dual-circle current of the invariant parts. That pair is the relative
// cocycle the pairing machinery consumes.

#include "bhi/group_cohomology.hpp"
#include "bhi/projectors.hpp"

namespace bhi {

// ---------------------------------------------------------------------------
// Decorated operators.
// ---------------------------------------------------------------------------

template <class E>
struct GammaOp {
  std::shared_ptr<const GroupSpec> spec;
  std::map<GElem, E> coef;

  GammaOp() = default;
  explicit GammaOp(std::shared_ptr<const GroupSpec> s) : spec(std::move(s)) {}

  void set(const GElem& g, E v) { coef.insert_or_assign(g, std::move(v)); }
  void accumulate(const GElem& g, const E& v) {
    auto it = coef.find(g);
    if (it == coef.end())
      coef.emplace(g, v);
    else
      it->second = eadd(it->second, v);
  }
  const E* find(const GElem& g) const {
    auto it = coef.find(g);
    return it == coef.end() ? nullptr : &it->second;
  }
};

template <class E>
void gamma_check_spec(const GammaOp<E>& a, const GammaOp<E>& b) {
  if (a.spec.get() != b.spec.get()) throw precondition_error("GammaOp: group mismatch");
}

template <class E>
GammaOp<E> emul(const GammaOp<E>& a, const GammaOp<E>& b) {
  gamma_check_spec(a, b);
  GammaOp<E> out(a.spec);
  for (auto& [h, av] : a.coef)
    for (auto& [k, bv] : b.coef) out.accumulate(a.spec->mul(h, k), emul(av, bv));
  return out;
}

template <class E>
GammaOp<E> eadd(const GammaOp<E>& a, const GammaOp<E>& b) {
  gamma_check_spec(a, b);
  GammaOp<E> out = a;
  for (auto& [g, v] : b.coef) out.accumulate(g, v);
  return out;
}

template <class E>
GammaOp<E> escale(cdouble z, const GammaOp<E>& a) {
  GammaOp<E> out(a.spec);
  for (auto& [g, v] : a.coef) out.set(g, escale(z, v));
  return out;
}

template <class E>
GammaOp<E> esub(const GammaOp<E>& a, const GammaOp<E>& b) {
  return eadd(a, escale(cdouble(-1.0, 0.0), b));
}

template <class E>
double enorm(const GammaOp<E>& a) {
  KahanSum s;
  for (auto& [g, v] : a.coef) s.add(enorm(v));
  return s.value();
}

template <class E>
GammaOp<E> eadj(const GammaOp<E>& a) {
  GammaOp<E> out(a.spec);
  for (auto& [g, v] : a.coef) out.set(a.spec->inv(g), eadj(v));
  return out;
}

template <class E>
GammaOp<E> gamma_unit(std::shared_ptr<const GroupSpec> spec, const E& local_unit) {
  GammaOp<E> o(std::move(spec));
  o.set(o.spec->identity(), local_unit);
  return o;
}

// body + omega * unit as a concrete decorated operator
template <class E>
GammaOp<E> materialize(const Unital<GammaOp<E>>& u, const GammaOp<E>& unit) {
  GammaOp<E> out = u.body ? *u.body : GammaOp<E>(unit.spec);
  if (!out.spec) out.spec = unit.spec;
  if (u.omega != cdouble(0.0, 0.0)) out = eadd(out, escale(u.omega, unit));
  return out;
}

// ---------------------------------------------------------------------------
// Indicial map on decorated window operators: keep the invariant fiber
// family of every coefficient. This is a unital algebra map.
// ---------------------------------------------------------------------------

inline GammaOp<FourierKernel> indicial_family(const GammaOp<BKernel>& a) {
  GammaOp<FourierKernel> out(a.spec);
  for (auto& [g, b] : a.coef) out.set(g, b.inv);
  return out;
}

inline Unital<GammaOp<FourierKernel>> indicial_hom(const Unital<GammaOp<BKernel>>& u) {
  Unital<GammaOp<FourierKernel>> out;
  out.omega = u.omega;
  if (u.body) out.body = indicial_family(*u.body);
  return out;
}

// ---------------------------------------------------------------------------
// The twisted trace current
//   tau_c(A_0, ..., A_k) = sum_{g_0 ... g_k = e}
//       local_trace( A_0(g_0) ... A_k(g_k) ) * c(g_1, ..., g_k).
// ---------------------------------------------------------------------------

template <class E>
CyclicCochain<GammaOp<E>> gamma_trace_current(const GroupCochain& c,
                                              std::function<cdouble(const E&)> local_trace,
                                              GammaOp<E> unit) {
  if (!unit.spec || unit.spec.get() != c.spec.get())
    throw precondition_error("gamma_trace_current: cocycle and unit group mismatch");
  CyclicCochain<GammaOp<E>> out;
  out.degree = c.degree;
  out.normalized = c.normalized;
  out.eval = [c, local_trace, unit](std::span<const Unital<GammaOp<E>>> args) -> cdouble {
    const int k = static_cast<int>(args.size()) - 1;
    const GroupSpec& gs = *unit.spec;
    std::vector<GammaOp<E>> a;
    a.reserve(args.size());
    for (auto& x : args) a.push_back(materialize(x, unit));
    CKahanSum acc;
    std::vector<GElem> tail(static_cast<size_t>(std::max(k, 0)));
    // depth-first over coefficient supports; the last group element is
    // forced by the product-one constraint
    std::function<void(int, const GElem&, const E&)> rec = [&](int depth, const GElem& prefix,
                                                               const E& prod) {
      if (depth == k) {
        GElem last = gs.inv(prefix);
        const E* v = a[static_cast<size_t>(k)].find(last);
        if (!v) return;
        if (k > 0) tail[static_cast<size_t>(k - 1)] = last;
        cdouble w = (k == 0) ? c.eval(std::span<const GElem>{})
                             : c.eval(std::span<const GElem>(tail));
        if (w == cdouble(0.0, 0.0)) return;
        acc.add(w * local_trace(emul(prod, *v)));
        return;
      }
      for (auto& [g, v] : a[static_cast<size_t>(depth)].coef) {
        if (depth > 0) tail[static_cast<size_t>(depth - 1)] = g;
        rec(depth + 1, gs.mul(prefix, g), emul(prod, v));
      }
    };
    // peel slot 0 to seed the running operator product
    for (auto& [g0, v0] : a[0].coef) rec(1, g0, v0);
    return acc.value();
  };
  // degree 0 has no slots to enumerate after the constraint; handle directly
  if (c.degree == 0) {
    auto base_unit = unit;
    out.eval = [c, local_trace, base_unit](std::span<const Unital<GammaOp<E>>> args) -> cdouble {
      GammaOp<E> a0 = materialize(args[0], base_unit);
      const E* v = a0.find(base_unit.spec->identity());
      if (!v) return 0.0;
      return c.eval(std::span<const GElem>{}) * local_trace(*v);
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// The dual-circle defect current on invariant decorated families:
//   sigma_c(B_0, ..., B_{k+1}) = (-1)^k * (i / 2pi) * contour_integral
//     sum_{g_0 ... g_{k+1} = e}
//       tr( fiber B_{k+1}(g_{k+1}) * d/dlam [ fiber B_0(g_0) ... B_k(g_k) ] )
//       * c(g_1, ..., g_k)  dlam.
// Its pullback along the indicial map is the Hochschild coboundary of the
// twisted trace current.
// ---------------------------------------------------------------------------

inline CyclicCochain<GammaOp<FourierKernel>> sigma_defect_current(
    const GroupCochain& c, GammaOp<FourierKernel> unit) {
  if (!unit.spec || unit.spec.get() != c.spec.get())
    throw precondition_error("sigma_defect_current: cocycle and unit group mismatch");
  CyclicCochain<GammaOp<FourierKernel>> out;
  out.degree = c.degree + 1;
  out.normalized = c.normalized;
  out.eval = [c, unit](std::span<const Unital<GammaOp<FourierKernel>>> args) -> cdouble {
    const int k = static_cast<int>(args.size()) - 2;  // degree of c
    if (k < 0) throw precondition_error("sigma_defect_current: arity too small");
    const GroupSpec& gs = *unit.spec;
    std::vector<GammaOp<FourierKernel>> a;
    a.reserve(args.size());
    for (auto& x : args) a.push_back(materialize(x, unit));
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    CKahanSum acc;
    std::vector<GElem> tuple(args.size());
    std::vector<const FourierKernel*> pick(args.size());
    // enumerate supports of slots 0..k, then force the last group element
    std::function<void(int, const GElem&)> rec = [&](int depth, const GElem& prefix) {
      if (depth == k + 1) {
        GElem last = gs.inv(prefix);
        const FourierKernel* v = a[static_cast<size_t>(k + 1)].find(last);
        if (!v) return;
        tuple[static_cast<size_t>(k + 1)] = last;
        pick[static_cast<size_t>(k + 1)] = v;
        cdouble w =
            (k == 0) ? c.eval(std::span<const GElem>{})
                     : c.eval(std::span<const GElem>(tuple.data() + 1, static_cast<size_t>(k)));
        if (w == cdouble(0.0, 0.0)) return;
        int reach_sum = 0;
        for (auto* p : pick) reach_sum += p->reach();
        int nodes = 2 * reach_sum + 8;
        cdouble integral = circle_mean(
            [&](double lam) -> cdouble {
              // product of fibers 0..k with the derivative placed at each
              // slot in turn (Leibniz), traced against the last fiber
              std::vector<Mat> f(static_cast<size_t>(k + 1));
              std::vector<Mat> df(static_cast<size_t>(k + 1));
              for (int i = 0; i <= k; ++i) {
                f[static_cast<size_t>(i)] = pick[static_cast<size_t>(i)]->fiber(lam);
                df[static_cast<size_t>(i)] = pick[static_cast<size_t>(i)]->dfiber(lam);
              }
              Mat last_f = pick[static_cast<size_t>(k + 1)]->fiber(lam);
              CKahanSum inner;
              for (int j = 0; j <= k; ++j) {
                Mat prod = last_f;
                for (int i = 0; i <= k; ++i)
                  prod = prod * (i == j ? df[static_cast<size_t>(i)] : f[static_cast<size_t>(i)]);
                inner.add(mat_trace(prod));
              }
              return inner.value();
            },
            nodes);
        acc.add(sign * cdouble(0.0, 1.0) * w * integral);
        return;
      }
      for (auto& [g, v] : a[static_cast<size_t>(depth)].coef) {
        tuple[static_cast<size_t>(depth)] = g;
        pick[static_cast<size_t>(depth)] = &v;
        rec(depth + 1, gs.mul(prefix, g));
      }
    };
    rec(0, gs.identity());
    return acc.value();
  };
  return out;
}

// ---------------------------------------------------------------------------
// The relative pair (twisted current on window operators, defect current on
// invariant families) along the indicial map.
// ---------------------------------------------------------------------------

inline RelativeCochain<GammaOp<BKernel>, GammaOp<FourierKernel>> relative_trace_pair(
    const GroupCochain& c, const RegularizationData& reg, const GammaOp<BKernel>& window_unit,
    const GammaOp<FourierKernel>& fiber_unit) {
  RelativeCochain<GammaOp<BKernel>, GammaOp<FourierKernel>> rc;
  std::function<cdouble(const BKernel&)> lt = [reg](const BKernel& b) { return b_trace(b, reg); };
  rc.tau = CochainFamily<GammaOp<BKernel>>::single(gamma_trace_current<BKernel>(c, lt, window_unit));
  rc.sigma =
      CochainFamily<GammaOp<FourierKernel>>::single(sigma_defect_current(c, fiber_unit));
  rc.hom = indicial_hom;
  return rc;
}

// ---------------------------------------------------------------------------
// Weighted norms on decorated window operators and the decay diagnostic for
// weighted fiber families of shifted inverses.
// ---------------------------------------------------------------------------

template <class E>
double word_weighted_norm(const GammaOp<E>& a, int k,
                          const std::function<double(const E&)>& local_norm) {
  KahanSum s;
  for (auto& [g, v] : a.coef) {
    double w = std::pow(1.0 + a.spec->word_length(g), 2 * k);
    double n = local_norm(v);
    s.add(w * n * n);
  }
  return std::sqrt(s.value());
}

inline double triple_norm_weighted(const GammaOp<BKernel>& a, int k,
                                   const RegularizationData& reg) {
  return word_weighted_norm<BKernel>(
      a, k, [&reg](const BKernel& b) { return triple_norm(b, reg); });
}

// nu-style weighted size of an axis kernel: sum_n |hop(n)| (1+|n|)^{2m}
inline double nu_weighted_kernel(const FourierKernel& f, int m) {
  KahanSum s;
  for (auto& [n, h] : f.hop) s.add(op_norm(h) * std::pow(1.0 + std::abs(n), 2 * m));
  return s.value();
}

struct WeightedResolventFit {
  std::vector<double> shifts;   // spectral shifts x
  std::vector<double> weights;  // nu_m of the kernel of (H + x^2)^{-1}
  double fitted_c = 0.0;        // max over shifts of weight * (1 + x^2)
};

inline WeightedResolventFit resolvent_decay_fit(const FourierKernel& dplus, int m,
                                                const std::vector<double>& shifts,
                                                int nlam = 256) {
  WeightedResolventFit fit;
  fit.shifts = shifts;
  for (double x : shifts) {
    auto f = [&dplus, x](double lam) -> Mat {
      Mat d = dplus.fiber(lam);
      Mat h = d.adjoint() * d;
      Mat shifted = h + (x * x) * Mat::Identity(h.rows(), h.cols());
      return shifted.inverse();
    };
    FourierKernel kern = kernel_from_fiber(f, dplus.dim, nlam, 1e-14);
    double w = nu_weighted_kernel(kern, m);
    fit.weights.push_back(w);
    fit.fitted_c = std::max(fit.fitted_c, w * (1.0 + x * x));
  }
  return fit;
}

}  // namespace bhi
