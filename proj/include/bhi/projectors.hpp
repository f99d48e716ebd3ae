#pragma once
// Idempotents attached to a gapped chiral operator. The heat-flow idempotent,
// its one-parameter exponent deformation, and the graph projection are all
// expressed through one functional calculus of the two chiral Laplacians, so
// the algebraic relations between them survive at rounding accuracy. The same
// constructions are provided on half-infinite window models, where every
// object carries its invariant fiber family alongside the windowed matrix.

#include "bhi/btrace.hpp"
#include "bhi/cyclic.hpp"

namespace bhi {

// ---------------------------------------------------------------------------
// Functional calculus through one singular value decomposition:
//   dplus = U S V*  (dplus maps the + chirality into the - chirality),
//   f(H+) = V f(S*S) V*,            f(H-) = U f(S S*) U*,
//   f(H+) dminus = V [f(s^2) s] U*, f(H-) dplus = U [f(s^2) s] V*.
// Identities that mix these blocks hold entrywise to the ulp because every
// entry is a function of the same singular data.
// ---------------------------------------------------------------------------

struct DiracSvd {
  Mat u;   // left singular vectors,  nm x nm
  Mat v;   // right singular vectors, np x np
  RVec s;  // singular values, length min(np, nm)
  int np = 0, nm = 0;

  static DiracSvd make(const Mat& dplus) {
    DiracSvd d;
    d.nm = static_cast<int>(dplus.rows());
    d.np = static_cast<int>(dplus.cols());
    Eigen::BDCSVD<Mat> svd(dplus, Eigen::ComputeFullU | Eigen::ComputeFullV);
    d.u = svd.matrixU();
    d.v = svd.matrixV();
    d.s = svd.singularValues();
    return d;
  }

  int nsv() const { return static_cast<int>(s.size()); }
  double min_singular() const { return nsv() ? s(nsv() - 1) : 0.0; }

  template <class F>
  Mat f_plus(F f) const {
    Vec fd(np);
    for (int i = 0; i < np; ++i) fd(i) = f(i < nsv() ? s(i) * s(i) : 0.0);
    return v * fd.asDiagonal() * v.adjoint();
  }
  template <class F>
  Mat f_minus(F f) const {
    Vec fd(nm);
    for (int i = 0; i < nm; ++i) fd(i) = f(i < nsv() ? s(i) * s(i) : 0.0);
    return u * fd.asDiagonal() * u.adjoint();
  }
  template <class F>
  Mat f_plus_dminus(F f) const {  // f(H+) dminus, shape np x nm
    Vec fd(nsv());
    for (int i = 0; i < nsv(); ++i) fd(i) = f(s(i) * s(i)) * s(i);
    return v.leftCols(nsv()) * fd.asDiagonal() * u.leftCols(nsv()).adjoint();
  }
  template <class F>
  Mat f_minus_dplus(F f) const {  // f(H-) dplus, shape nm x np
    Vec fd(nsv());
    for (int i = 0; i < nsv(); ++i) fd(i) = f(s(i) * s(i)) * s(i);
    return u.leftCols(nsv()) * fd.asDiagonal() * v.leftCols(nsv()).adjoint();
  }
};

// Eigensolver-based calculus over a dense window (cheaper than a full SVD on
// large windows; identities then hold to solver accuracy, not the ulp).
struct ChiralPair {
  Mat dplus, dminus;
  HermEig ep, em;

  static ChiralPair make(const Mat& dp) {
    ChiralPair c;
    c.dplus = dp;
    c.dminus = dp.adjoint();
    c.ep = herm_eig(c.dminus * c.dplus);
    c.em = herm_eig(c.dplus * c.dminus);
    return c;
  }
  template <class F>
  Mat f_plus(F f) const {
    return apply_spectral(ep, f);
  }
  template <class F>
  Mat f_minus(F f) const {
    return apply_spectral(em, f);
  }
  template <class F>
  Mat f_plus_dminus(F f) const {
    return apply_spectral(ep, f) * dminus;
  }
  template <class F>
  Mat f_minus_dplus(F f) const {
    return apply_spectral(em, f) * dplus;
  }
};

// ---------------------------------------------------------------------------
// Idempotent families. Scale u > 0 multiplies the Laplacian in the exponent;
// the family at scale u coincides with the family of sqrt(u) * D at scale 1.
// ---------------------------------------------------------------------------

// Heat-flow idempotent:
//   [ e^{-u H+}                      e^{-u H+/2} r(u H+) sqrt(u) D-  ]
//   [ e^{-u H-/2} sqrt(u) D+         1 - e^{-u H-}                   ]
// with r(y) = (1 - e^{-y})/y.
template <class Calc>
UMat2<Mat> cm_idempotent(const Calc& c, double u) {
  double ru = std::sqrt(u);
  UMat2<Mat> m = UMat2<Mat>::corner_unit();
  m.body[0] = c.f_plus([u](double x) { return std::exp(-u * x); });
  m.body[1] = c.f_plus_dminus(
      [u, ru](double x) { return ru * std::exp(-u * x / 2.0) * f1_ratio(u * x); });
  m.body[2] = c.f_minus_dplus([u, ru](double x) { return ru * std::exp(-u * x / 2.0); });
  m.body[3] = -c.f_minus([u](double x) { return std::exp(-u * x); });
  return m;
}

// Exponent deformation: the ratio r(u H) is distributed over the two corners
// with exponents 1/2 + s and 1/2 - s. The endpoints s = 1/2 and s = -1/2 are
// the heat-flow idempotent and its adjoint; s = 0 is the self-adjoint member.
template <class Calc>
UMat2<Mat> homotopy_idempotent(const Calc& c, double u, double s) {
  double ru = std::sqrt(u);
  UMat2<Mat> m = UMat2<Mat>::corner_unit();
  m.body[0] = c.f_plus([u](double x) { return std::exp(-u * x); });
  m.body[1] = c.f_plus_dminus([u, ru, s](double x) {
    return ru * std::exp(-u * x / 2.0) * std::pow(f1_ratio(u * x), 0.5 + s);
  });
  m.body[2] = c.f_minus_dplus([u, ru, s](double x) {
    return ru * std::exp(-u * x / 2.0) * std::pow(f1_ratio(u * x), 0.5 - s);
  });
  m.body[3] = -c.f_minus([u](double x) { return std::exp(-u * x); });
  return m;
}

// d/ds of homotopy_idempotent at fixed (u, s); supported on the corners,
// so the diagonal bodies stay absent (zero).
template <class Calc>
UMat2<Mat> homotopy_velocity(const Calc& c, double u, double s) {
  double ru = std::sqrt(u);
  UMat2<Mat> m;
  m.body[1] = c.f_plus_dminus([u, ru, s](double x) {
    double r = f1_ratio(u * x);
    return ru * std::exp(-u * x / 2.0) * std::pow(r, 0.5 + s) * std::log(r);
  });
  m.body[2] = c.f_minus_dplus([u, ru, s](double x) {
    double r = f1_ratio(u * x);
    return -ru * std::exp(-u * x / 2.0) * std::pow(r, 0.5 - s) * std::log(r);
  });
  return m;
}

// Self-adjoint member of the deformation.
template <class Calc>
UMat2<Mat> wassermann(const Calc& c, double u) {
  return homotopy_idempotent(c, u, 0.0);
}

// Graph projection of dplus (self-adjoint):
//   [ (1+H+)^{-1}          (1+H+)^{-1} D-      ]
//   [ D+ (1+H+)^{-1}       D+ (1+H+)^{-1} D-   ]
template <class Calc>
UMat2<Mat> graph_projection(const Calc& c) {
  auto f = [](double x) { return 1.0 / (1.0 + x); };
  UMat2<Mat> m = UMat2<Mat>::corner_unit();
  m.body[0] = c.f_plus(f);
  m.body[1] = c.f_plus_dminus(f);
  m.body[2] = c.f_minus_dplus(f);
  m.body[3] = -c.f_minus(f);
  return m;
}

// ---------------------------------------------------------------------------
// Flow path t -> idempotent of (t sqrt(u)) * D, t in [1, infinity); the limit
// is the corner unit. Point and velocity in closed form.
// ---------------------------------------------------------------------------

template <class Calc>
UMat2<Mat> flow_idempotent_at(const Calc& c, double u, double t) {
  return cm_idempotent(c, t * t * u);
}

template <class Calc>
UMat2<Mat> flow_velocity(const Calc& c, double u, double t) {
  double w = t * t * u;
  double dw = 2.0 * t * u;  // dw/dt
  double ru = std::sqrt(u);
  UMat2<Mat> m;
  m.body[0] = c.f_plus([w, dw](double x) { return -dw * x * std::exp(-w * x); });
  // corner derivatives written in a form that stays finite at t = 0
  m.body[1] = c.f_plus_dminus([w, ru](double x) {
    double e = w * x;
    return ru * std::exp(-e / 2.0) *
           (f1_ratio(e) * (1.0 - e) + 2.0 * e * f1_ratio_prime(e));
  });
  m.body[2] = c.f_minus_dplus([w, ru](double x) {
    double e = w * x;
    return ru * std::exp(-e / 2.0) * (1.0 - e);
  });
  m.body[3] = c.f_minus([w, dw](double x) { return dw * x * std::exp(-w * x); });
  return m;
}

// ---------------------------------------------------------------------------
// Parametrices: right inverses of dplus up to controlled remainders.
// ---------------------------------------------------------------------------

// Resolvent parametrix: Q = (1+H+)^{-1} D-, remainders (1+H)^{-1}.
template <class Calc>
Mat q_resolvent(const Calc& c) {
  return c.f_plus_dminus([](double x) { return 1.0 / (1.0 + x); });
}

// Heat parametrix: Q = [(1 - e^{-u H+/2}) / H+] D-, remainders e^{-u H/2}.
template <class Calc>
Mat q_heat(const Calc& c, double u) {
  return c.f_plus_dminus([u](double x) { return 0.5 * u * f1_ratio(0.5 * u * x); });
}

// The idempotent a parametrix generates. With S+ = 1 - q dplus and
// S- = 1 - dplus q:
//   [ S+^2               S+ (1 + S+) q ]
//   [ S- dplus           1 - S-^2      ]
// Returned with the unit split off: bodies are the non-scalar parts and the
// scalar part is the corner unit.
inline UMat2<Mat> connes_skandalis(const Mat& q, const Mat& dplus) {
  int np = static_cast<int>(dplus.cols());
  int nm = static_cast<int>(dplus.rows());
  Mat sp = Mat::Identity(np, np) - q * dplus;
  Mat sm = Mat::Identity(nm, nm) - dplus * q;
  UMat2<Mat> m = UMat2<Mat>::corner_unit();
  m.body[0] = sp * sp;
  m.body[1] = (sp + sp * sp) * q;
  m.body[2] = sm * dplus;
  m.body[3] = -(sm * sm);
  return m;
}

// ---------------------------------------------------------------------------
// Window-model constructions. Each block is a window-split kernel whose
// invariant fiber family is assembled per boundary mode (the boundary
// operator is diagonalized once; every cylinder fiber is scalar per mode).
// ---------------------------------------------------------------------------

inline BKernel bk_identity(std::shared_ptr<const Window> w) {
  BKernel b;
  b.inv = FourierKernel::identity(w->nb);
  b.res = Mat::Zero(w->rows(), w->rows());
  b.win = std::move(w);
  return b;
}

// lambda -> boundary-basis matrix assembled from a scalar symbol s(lam, mu).
template <class S>
auto mode_fiber(const CylinderModel& cyl, S symbol) {
  return [&cyl, symbol](double lam) -> Mat {
    int n = cyl.nb();
    Vec d(n);
    for (int j = 0; j < n; ++j) d(j) = symbol(lam, cyl.bnd.eig.d(j));
    return cyl.bnd.eig.u * d.asDiagonal() * cyl.bnd.eig.u.adjoint();
  };
}

template <class S>
FourierKernel mode_fiber_kernel(const CylinderModel& cyl, S symbol, int nlam = 256,
                                double drop_tol = 1e-14) {
  return kernel_from_fiber(mode_fiber(cyl, symbol), cyl.nb(), nlam, drop_tol);
}

// Heat-flow idempotent of a half-infinite slab: windowed matrices via the
// spectral calculus of the windowed Laplacians, invariant parts via the
// per-mode cylinder symbols.
inline UMat2<BKernel> slab_flow_idempotent(const SlabModel& slab, const ChiralPair& c, double u,
                                           int nlam = 256) {
  UMat2<Mat> dense = cm_idempotent(c, u);
  const CylinderModel& cyl = slab.cyl;
  double ru = std::sqrt(u);
  FourierKernel k11 = mode_fiber_kernel(
      cyl,
      [&cyl, u](double lam, double mu) {
        return cdouble(std::exp(-u * cyl.hsym(lam, mu)), 0.0);
      },
      nlam);
  FourierKernel k12 = mode_fiber_kernel(
      cyl,
      [&cyl, u, ru](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        return ru * std::exp(-u * h / 2.0) * f1_ratio(u * h) * std::conj(cyl.dsym(lam, mu));
      },
      nlam);
  FourierKernel k21 = mode_fiber_kernel(
      cyl,
      [&cyl, u, ru](double lam, double mu) {
        return ru * std::exp(-u * cyl.hsym(lam, mu) / 2.0) * cyl.dsym(lam, mu);
      },
      nlam);
  UMat2<BKernel> out;
  out.scal = Eigen::Matrix2cd::Zero();
  out.scal(1, 1) = 1.0;
  out.body[0] = BKernel::from_dense(slab.win, *dense.body[0], k11);
  out.body[1] = BKernel::from_dense(slab.win, *dense.body[1], k12);
  out.body[2] = BKernel::from_dense(slab.win, *dense.body[2], k21);
  out.body[3] = BKernel::from_dense(slab.win, *dense.body[3], kscale(-1.0, k11));
  return out;
}

inline UMat2<BKernel> slab_flow_idempotent(const SlabModel& slab, double u, int nlam = 256) {
  return slab_flow_idempotent(slab, ChiralPair::make(slab.dplus.dense()), u, nlam);
}

// Parametrix of the slab operator whose indicial family is the exact inverse
// fiber family: the heat parametrix of the windowed operator plus the
// invariant correction  (fiber of D+)^{-1} e^{-u (fiber of H-)/2}.  Both
// remainders 1 - q dplus and 1 - dplus q then have (numerically) vanishing
// invariant part, so the generated idempotent differs from the corner unit
// by a residual-class matrix.
inline BKernel true_parametrix(const SlabModel& slab, const ChiralPair& c, double u,
                               int nlam = 512) {
  const CylinderModel& cyl = slab.cyl;
  Mat qdense = q_heat(c, u);
  InverseIndicialResult ii = inverse_indicial(cyl.dplus, nlam);
  FourierKernel qv_fiber = mode_fiber_kernel(
      cyl,
      [&cyl, u](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        return 0.5 * u * f1_ratio(0.5 * u * h) * std::conj(cyl.dsym(lam, mu));
      },
      nlam);
  Mat dense = qdense + toeplitz_window(ksub(ii.kernel, qv_fiber), *slab.win);
  return BKernel::from_dense(slab.win, dense, ii.kernel);
}

inline BKernel true_parametrix(const SlabModel& slab, double u, int nlam = 512) {
  return true_parametrix(slab, ChiralPair::make(slab.dplus.dense()), u, nlam);
}

// Remainders of a window parametrix: (1 - q dplus, 1 - dplus q).
inline std::pair<BKernel, BKernel> parametrix_remainders(const BKernel& q,
                                                         const SlabModel& slab) {
  BKernel id = bk_identity(slab.win);
  return {bk_sub(id, bk_mul(q, slab.dplus)), bk_sub(id, bk_mul(slab.dplus, q))};
}

// Window version of the generated idempotent, with the unit split off.
inline UMat2<BKernel> connes_skandalis(const BKernel& q, const SlabModel& slab) {
  auto [sp, sm] = parametrix_remainders(q, slab);
  UMat2<BKernel> m;
  m.scal = Eigen::Matrix2cd::Zero();
  m.scal(1, 1) = 1.0;
  m.body[0] = bk_mul(sp, sp);
  m.body[1] = bk_mul(bk_add(sp, bk_mul(sp, sp)), q);
  m.body[2] = bk_mul(sm, slab.dplus);
  m.body[3] = bk_scale(-1.0, bk_mul(sm, sm));
  return m;
}

}  // namespace bhi
