#pragma once
// End-to-end index pipelines: heat-flow pairings on closed chains, absolute
// (parametrix) and relative (cone) pairings on half-infinite slabs, the
// boundary spectral-asymmetry form, and the decomposition that ties the
// interior heat term to the boundary term.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bhi/btrace.hpp"
#include "bhi/equivariant.hpp"
#include "bhi/projectors.hpp"

namespace bhi {

// ---------------------------------------------------------------------------
// Closed (finite-dimensional) models
// ---------------------------------------------------------------------------

struct ClosedIndexReport {
  int dim_ker_plus = 0;
  int dim_ker_minus = 0;
  int index = 0;
  double spectral_gap = 0.0;  // smallest singular value above the zero cut
};

inline ClosedIndexReport closed_index_svd(const DiracSvd& d, double tol_zero = 1e-8) {
  ClosedIndexReport r;
  int rank = 0;
  double gap = 0.0;
  for (int i = 0; i < d.nsv(); ++i)
    if (d.s(i) > tol_zero) {
      ++rank;
      gap = (gap == 0.0) ? d.s(i) : std::min(gap, d.s(i));
    }
  r.dim_ker_plus = d.np - rank;
  r.dim_ker_minus = d.nm - rank;
  r.index = r.dim_ker_plus - r.dim_ker_minus;
  r.spectral_gap = gap;
  return r;
}

// Trace of the heat-flow idempotent relative to the corner unit: the scalar
// parts cancel, the two diagonal bodies carry the whole value.
inline cdouble closed_flow_pairing(const DiracSvd& d, double u) {
  UMat2<Mat> v = cm_idempotent(d, u);
  cdouble s = 0.0;
  if (v.body[0]) s += mat_trace(*v.body[0]);
  if (v.body[3]) s += mat_trace(*v.body[3]);
  return s;
}

// Degree-2p matrix-trace current on a closed model of fixed dimension; the
// unit is the identity matrix of that dimension.
inline CyclicCochain<Mat> matrix_trace_current(int dim, int degree = 0) {
  CyclicCochain<Mat> c;
  c.degree = degree;
  c.normalized = true;
  c.eval = [dim](std::span<const Unital<Mat>> args) -> cdouble {
    Mat unit = Mat::Identity(dim, dim);
    Mat prod;
    bool first = true;
    for (const auto& a : args) {
      Mat m = a.body ? *a.body : Mat(Mat::Zero(dim, dim));
      if (a.omega != cdouble(0.0, 0.0)) m += a.omega * unit;
      prod = first ? m : Mat(prod * m);
      first = false;
    }
    return mat_trace(prod);
  };
  return c;
}

// ---------------------------------------------------------------------------
// Slab, absolute route: square the parametrix remainders and take the
// regularized supertrace. Both remainders have (numerically) vanishing
// invariant part, so the regularized trace agrees with a plain trace.
// ---------------------------------------------------------------------------

struct AbsoluteReport {
  cdouble pairing;                  // tr(S+^2) - tr(S-^2), regularized
  double remainder_invariant = 0;   // residuality certificate for S+/S-
  double tail_bound = 0;            // decay bound on the discarded far tail
};

inline AbsoluteReport absolute_degree0(const SlabModel& slab, const ChiralPair& c, double u,
                                       const RegularizationData& reg, int nlam = 512) {
  BKernel q = true_parametrix(slab, c, u, nlam);
  auto [sp, sm] = parametrix_remainders(q, slab);
  AbsoluteReport r;
  r.remainder_invariant = sp.inv.norm1() + sm.inv.norm1();
  BKernel sp2 = bk_mul(sp, sp);
  BKernel sm2 = bk_mul(sm, sm);
  r.pairing = b_trace(sp2, reg) - b_trace(sm2, reg);
  r.tail_bound = b_trace_tail_bound(sp2) + b_trace_tail_bound(sm2);
  return r;
}

inline AbsoluteReport absolute_degree0(const SlabModel& slab, double u,
                                       const RegularizationData& reg, int nlam = 512) {
  return absolute_degree0(slab, ChiralPair::make(slab.dplus.dense()), u, reg, nlam);
}

// Winding-number oracle for the slab index. The cap perturbation is finite
// rank, so the index is that of the pure truncated cylinder, which is read
// off the invariant chiral fiber.
inline int slab_index_winding(const SlabModel& slab, int nlam = 2048) {
  return -winding_number_of_fiber(slab.cyl.dplus, nlam);
}

// Index of a single boundary mode's half-infinite chiral operator.
inline int cylinder_mode_index(DiffScheme scheme, double mu, int nlam = 2048) {
  FourierKernel k = kernel_from_fiber(
      [scheme, mu](double lam) {
        Mat m(1, 1);
        m(0, 0) = mode_dplus_fiber(scheme, lam, mu);
        return m;
      },
      1, nlam, 1e-14);
  return -winding_number_of_fiber(k, nlam);
}

// ---------------------------------------------------------------------------
// Slab, relative route: pair the heat-flow idempotent against the cone of
// the symbol map. Endpoints live in the window algebra (paired against the
// regularized trace current); the connecting path lives in the invariant
// fiber algebra (paired against the defect current).
// ---------------------------------------------------------------------------

// Embed a 2x2 super-matrix over a local algebra into the same shape over the
// associated crossed-product coefficients, supported at the identity.
template <class E>
UMat2<GammaOp<E>> gamma_embed(const UMat2<E>& m, std::shared_ptr<const GroupSpec> spec) {
  UMat2<GammaOp<E>> out;
  out.scal = m.scal;
  for (size_t i = 0; i < 4; ++i)
    if (m.body[i]) out.body[i] = gamma_unit(spec, *m.body[i]);
  return out;
}

// Per-mode cylinder heat-flow idempotent at path parameter t (operator scale
// t^2 u), assembled as invariant fiber kernels. Limit t -> infinity is the
// corner unit.
inline UMat2<FourierKernel> cyl_flow_point(const CylinderModel& cyl, double u, double t,
                                           int nlam = 256, double drop_tol = 1e-14) {
  const double w = t * t * u;
  const double rw = t * std::sqrt(u);
  UMat2<FourierKernel> m;
  m.scal = Eigen::Matrix2cd::Zero();
  m.scal(1, 1) = 1.0;
  m.body[0] = mode_fiber_kernel(
      cyl, [&cyl, w](double lam, double mu) { return cdouble(std::exp(-w * cyl.hsym(lam, mu)), 0.0); },
      nlam, drop_tol);
  m.body[1] = mode_fiber_kernel(
      cyl,
      [&cyl, w, rw](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        return rw * std::exp(-0.5 * w * h) * f1_ratio(w * h) * std::conj(cyl.dsym(lam, mu));
      },
      nlam, drop_tol);
  m.body[2] = mode_fiber_kernel(
      cyl,
      [&cyl, w, rw](double lam, double mu) {
        return rw * std::exp(-0.5 * w * cyl.hsym(lam, mu)) * cyl.dsym(lam, mu);
      },
      nlam, drop_tol);
  m.body[3] = mode_fiber_kernel(
      cyl, [&cyl, w](double lam, double mu) { return cdouble(-std::exp(-w * cyl.hsym(lam, mu)), 0.0); },
      nlam, drop_tol);
  return m;
}

// d/dt of cyl_flow_point, written so every entry is finite at t = 0.
inline UMat2<FourierKernel> cyl_flow_velocity(const CylinderModel& cyl, double u, double t,
                                              int nlam = 256, double drop_tol = 1e-14) {
  const double ru = std::sqrt(u);
  UMat2<FourierKernel> m;
  m.scal = Eigen::Matrix2cd::Zero();
  m.body[0] = mode_fiber_kernel(
      cyl,
      [&cyl, u, t](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        return cdouble(-2.0 * t * u * h * std::exp(-t * t * u * h), 0.0);
      },
      nlam, drop_tol);
  m.body[1] = mode_fiber_kernel(
      cyl,
      [&cyl, u, t, ru](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        double e = t * t * u * h;
        double scal = ru * std::exp(-0.5 * e) * (f1_ratio(e) * (1.0 - e) + 2.0 * e * f1_ratio_prime(e));
        return scal * std::conj(cyl.dsym(lam, mu));
      },
      nlam, drop_tol);
  m.body[2] = mode_fiber_kernel(
      cyl,
      [&cyl, u, t, ru](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        double e = t * t * u * h;
        return ru * std::exp(-0.5 * e) * (1.0 - e) * cyl.dsym(lam, mu);
      },
      nlam, drop_tol);
  m.body[3] = mode_fiber_kernel(
      cyl,
      [&cyl, u, t](double lam, double mu) {
        double h = cyl.hsym(lam, mu);
        return cdouble(2.0 * t * u * h * std::exp(-t * t * u * h), 0.0);
      },
      nlam, drop_tol);
  return m;
}

// Path horizon: e^{-t^2 u gap^2} <= tol for t >= flow_horizon(gap, u, tol).
inline double flow_horizon(double gap, double u, double tol = 1e-12) {
  double denom = std::max(u * gap * gap, 1e-300);
  return std::sqrt(std::log(1.0 / tol) / denom);
}

struct RelativeReport {
  cdouble value;          // cone pairing
  cdouble endpoint_p;     // regularized trace at the slab idempotent
  cdouble endpoint_q;     // regularized trace at the corner unit
  cdouble transgression;  // path integral against the defect current
  double transgression_err = 0;
  int path_nodes = 0;
  double endpoint_path_gap = 0;  // || path end - fiber corner unit ||
};

inline RelativeReport relative_degree0(const SlabModel& slab, const ChiralPair& c, double u,
                                       const RegularizationData& reg, double t_max,
                                       const PathQuadrature& qp = {}, int nlam = 256) {
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::trivial());
  GroupCochain c0 = builtin_cocycle(spec, "trivial-degree-0");
  GammaOp<BKernel> unit_a = gamma_unit(spec, bk_identity(slab.win));

  auto tau = gamma_trace_current<BKernel>(
      c0, [reg](const BKernel& b) { return b_trace(b, reg); }, unit_a);

  UMat2<GammaOp<BKernel>> P = gamma_embed(slab_flow_idempotent(slab, c, u, nlam), spec);
  UMat2<GammaOp<BKernel>> Q = UMat2<GammaOp<BKernel>>::corner_unit();

  RelativeReport r;
  r.endpoint_p = repeated_slots_eval(tau, P);
  r.endpoint_q = repeated_slots_eval(tau, Q);

  // The invariant fiber algebra is simultaneously diagonalized by the
  // (constant) boundary eigenbasis, and the defect current is invariant under
  // that rotation, so the connecting path integrates mode by mode. Each mode
  // runs the same flow formulas on its own one-dimensional cylinder.
  GammaOp<FourierKernel> unit_g = gamma_unit(spec, FourierKernel::identity(1));
  auto sigma = sigma_defect_current(c0, unit_g);
  CKahanSum trans;
  // the path kernels only feed the defect integral, whose cost grows with the
  // hop reach squared; a shorter tail is far below the quadrature tolerance
  const int mode_nlam = std::min(nlam, 128);
  constexpr double mode_drop = 1e-12;
  for (int j = 0; j < slab.nb(); ++j) {
    Mat bmu(1, 1);
    bmu(0, 0) = slab.cyl.bnd.eig.d(j);
    auto mode_cyl =
        std::make_shared<CylinderModel>(build_cylinder_dirac(bmu, slab.cyl.scheme));
    IdempotentPath<GammaOp<FourierKernel>> path;
    path.s0 = 1.0;
    path.s1 = t_max;
    path.point = [mode_cyl, spec, u, mode_nlam](double t) {
      return gamma_embed(cyl_flow_point(*mode_cyl, u, t, mode_nlam, mode_drop), spec);
    };
    path.velocity = [mode_cyl, spec, u, mode_nlam](double t) {
      return gamma_embed(cyl_flow_velocity(*mode_cyl, u, t, mode_nlam, mode_drop), spec);
    };
    QuadResult q = transgression_pair(path, sigma, qp);
    trans.add(q.cvalue());
    r.transgression_err += q.err_est;
    r.path_nodes += q.nodes;
    r.endpoint_path_gap += umat_norm(
        umat_sub(path.point(t_max), UMat2<GammaOp<FourierKernel>>::corner_unit()));
  }
  r.transgression = trans.value();
  r.value =
      pairing_constant(0) * (r.endpoint_p - r.endpoint_q + r.transgression);
  return r;
}

inline RelativeReport relative_degree0(const SlabModel& slab, double u,
                                       const RegularizationData& reg, double t_max,
                                       const PathQuadrature& qp = {}, int nlam = 256) {
  return relative_degree0(slab, ChiralPair::make(slab.dplus.dense()), u, reg, t_max, qp, nlam);
}

// Pointwise samples of the quantity the relative route integrates: the
// boundary-mode-summed defect-current integrand of the connecting flow path
// at scale u.  Intended for plot tables of the transgression profile.
inline std::vector<cdouble> relative_integrand_samples(const SlabModel& slab, double u,
                                                       std::span<const double> ts,
                                                       int nlam = 128) {
  auto spec = std::make_shared<const GroupSpec>(GroupSpec::trivial());
  GroupCochain c0 = builtin_cocycle(spec, "trivial-degree-0");
  GammaOp<FourierKernel> unit_g = gamma_unit(spec, FourierKernel::identity(1));
  auto sigma = sigma_defect_current(c0, unit_g);
  const int mode_nlam = std::min(nlam, 128);
  constexpr double mode_drop = 1e-12;
  std::vector<cdouble> out(ts.size(), cdouble(0.0, 0.0));
  for (int j = 0; j < slab.nb(); ++j) {
    Mat bmu(1, 1);
    bmu(0, 0) = slab.cyl.bnd.eig.d(j);
    auto mode_cyl =
        std::make_shared<CylinderModel>(build_cylinder_dirac(bmu, slab.cyl.scheme));
    for (std::size_t i = 0; i < ts.size(); ++i) {
      auto p = gamma_embed(cyl_flow_point(*mode_cyl, u, ts[i], mode_nlam, mode_drop), spec);
      auto v = gamma_embed(cyl_flow_velocity(*mode_cyl, u, ts[i], mode_nlam, mode_drop), spec);
      out[i] += transgression_integrand(sigma, p, v);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary spectral-asymmetry form: per boundary mode, integrate the defect
// current along the full flow t in [0, T], which joins the two corner units.
// The rescaling t -> a t only reparametrizes the path, so the per-mode value
// is independent of the operator scale u.
// ---------------------------------------------------------------------------

inline Eigen::Matrix2cd mode_flow_point(DiffScheme scheme, double mu, double u, double t,
                                        double lam) {
  cdouble d = mode_dplus_fiber(scheme, lam, mu);
  double h = std::norm(d);
  double e = t * t * u * h;
  double rw = t * std::sqrt(u);
  Eigen::Matrix2cd p;
  p(0, 0) = std::exp(-e);
  p(0, 1) = rw * std::exp(-0.5 * e) * f1_ratio(e) * std::conj(d);
  p(1, 0) = rw * std::exp(-0.5 * e) * d;
  p(1, 1) = 1.0 - std::exp(-e);
  return p;
}

inline Eigen::Matrix2cd mode_flow_velocity(DiffScheme scheme, double mu, double u, double t,
                                           double lam) {
  cdouble d = mode_dplus_fiber(scheme, lam, mu);
  double h = std::norm(d);
  double e = t * t * u * h;
  double ru = std::sqrt(u);
  Eigen::Matrix2cd v;
  v(0, 0) = -2.0 * t * u * h * std::exp(-e);
  v(0, 1) = ru * std::exp(-0.5 * e) * (f1_ratio(e) * (1.0 - e) + 2.0 * e * f1_ratio_prime(e)) *
            std::conj(d);
  v(1, 0) = ru * std::exp(-0.5 * e) * (1.0 - e) * d;
  v(1, 1) = 2.0 * t * u * h * std::exp(-e);
  return v;
}

inline Eigen::Matrix2cd mode_flow_dlam(DiffScheme scheme, double mu, double u, double t,
                                       double lam) {
  cdouble d = mode_dplus_fiber(scheme, lam, mu);
  cdouble dd = mode_dplus_fiber_dlam(scheme, lam, mu);
  double h = std::norm(d);
  double dh = 2.0 * std::real(std::conj(d) * dd);
  double w = t * t * u;
  double e = w * h;
  double rw = t * std::sqrt(u);
  Eigen::Matrix2cd g;
  g(0, 0) = -w * dh * std::exp(-e);
  g(0, 1) = rw * (std::exp(-0.5 * e) *
                      (w * dh * (f1_ratio_prime(e) - 0.5 * f1_ratio(e))) * std::conj(d) +
                  std::exp(-0.5 * e) * f1_ratio(e) * std::conj(dd));
  g(1, 0) = rw * (-0.5 * w * dh * std::exp(-0.5 * e) * d + std::exp(-0.5 * e) * dd);
  g(1, 1) = w * dh * std::exp(-e);
  return g;
}

struct EtaTerm {
  double mu = 0.0;
  cdouble raw;  // defect-current transgression along the full flow
  int t_nodes = 0;
  double t_err = 0.0;
};

// Smallest fiber energy over the dual circle for one boundary mode.
inline double mode_min_energy(DiffScheme scheme, double mu, int scan = 512) {
  double hmin = mode_h_fiber(scheme, -pi, mu);
  for (int j = 1; j < scan; ++j)
    hmin = std::min(hmin, mode_h_fiber(scheme, -pi + 2.0 * pi * j / scan, mu));
  return hmin;
}

inline EtaTerm mode_eta_raw(DiffScheme scheme, double mu, double u, double tol = 1e-9,
                            int nlam0 = 64, double horizon_tol = 1e-12) {
  double hmin = mode_min_energy(scheme, mu);
  if (hmin <= 0.0) throw infeasible_error("mode_eta_raw: gapless boundary mode");
  double t_max = flow_horizon(std::sqrt(hmin), u, horizon_tol);
  auto integrand = [scheme, mu, u, nlam0, tol](double t) -> cdouble {
    QuadResult q = circle_mean_doubling(
        [scheme, mu, u, t](double lam) -> cdouble {
          Eigen::Matrix2cd p = mode_flow_point(scheme, mu, u, t, lam);
          Eigen::Matrix2cd v = mode_flow_velocity(scheme, mu, u, t, lam);
          Eigen::Matrix2cd g = mode_flow_dlam(scheme, mu, u, t, lam);
          Eigen::Matrix2cd comm = v * p - p * v;
          return (g * comm).trace();
        },
        nlam0, tol * 1e-2, 16384);
    return cdouble(0.0, -1.0) * q.cvalue();
  };
  QuadResult q = simpson_doubling(integrand, 0.0, t_max, 32, tol, 32769);
  EtaTerm e;
  e.mu = mu;
  e.raw = q.cvalue();
  e.t_nodes = q.nodes;
  e.t_err = q.err_est;
  return e;
}

struct EtaReport {
  double raw_sum = 0.0;        // sum of per-mode transgressions (real part)
  double raw_imag = 0.0;       // imaginary residue, diagnostic
  double eta = 0.0;            // raw_sum / kappa_unit
  double spectral_asym = 0.0;  // sum of sign(mu)
  std::vector<EtaTerm> terms;
};

inline EtaReport eta_form(const BoundaryOperator& bnd, DiffScheme scheme, double u,
                          double kappa_unit, double tol = 1e-9) {
  EtaReport r;
  KahanSum re, im, sgn;
  for (int j = 0; j < bnd.dim(); ++j) {
    double mu = bnd.eig.d(j);
    EtaTerm e = mode_eta_raw(scheme, mu, u, tol);
    re.add(e.raw.real());
    im.add(e.raw.imag());
    sgn.add(mu > 0.0 ? 1.0 : (mu < 0.0 ? -1.0 : 0.0));
    r.terms.push_back(std::move(e));
  }
  r.raw_sum = re.value();
  r.raw_imag = im.value();
  r.spectral_asym = sgn.value();
  if (kappa_unit == 0.0) throw precondition_error("eta_form: zero calibration constant");
  r.eta = r.raw_sum / kappa_unit;
  return r;
}

// ---------------------------------------------------------------------------
// One-time calibration: the per-mode transgression equals c0 * sign(mu) for
// a scheme-dependent constant c0 (measured, with a universality certificate),
// and the pure-cylinder mode index equals eps * sign(mu) with eps = +-1.
// kappa_unit converts raw transgression sums into index units so that the
// pure cylinder satisfies index = -eta/2 exactly; kappa_freeze is the eta
// carried by one unit of spectral asymmetry.
// ---------------------------------------------------------------------------

struct KappaCalibration {
  double c0 = 0.0;
  int eps = 0;
  double kappa_unit = 0.0;
  double kappa_freeze = 0.0;
  double spread = 0.0;  // max deviation of raw/sign(mu) from c0 across the grid
};

inline KappaCalibration calibrate_kappa(DiffScheme scheme, std::span<const double> mus,
                                        std::span<const double> us, double tol = 1e-9) {
  if (mus.empty() || us.empty()) throw precondition_error("calibrate_kappa: empty grid");
  std::vector<double> ratios;
  for (double mu : mus) {
    if (mu == 0.0) throw precondition_error("calibrate_kappa: mu must be nonzero");
    for (double u : us) {
      EtaTerm e = mode_eta_raw(scheme, mu, u, tol);
      ratios.push_back(e.raw.real() / (mu > 0.0 ? 1.0 : -1.0));
    }
  }
  KahanSum acc;
  for (double r : ratios) acc.add(r);
  KappaCalibration k;
  k.c0 = acc.value() / static_cast<double>(ratios.size());
  for (double r : ratios) k.spread = std::max(k.spread, std::abs(r - k.c0));

  int i0 = cylinder_mode_index(scheme, mus[0]);
  int s0 = mus[0] > 0.0 ? 1 : -1;
  if (i0 * s0 != 1 && i0 * s0 != -1)
    throw infeasible_error("calibrate_kappa: mode index is not a unit per sign");
  k.eps = i0 * s0;
  for (double mu : mus) {
    int s = mu > 0.0 ? 1 : -1;
    if (cylinder_mode_index(scheme, mu) != k.eps * s)
      throw infeasible_error("calibrate_kappa: mode index orientation is not uniform");
  }
  k.kappa_unit = -k.c0 / (2.0 * k.eps);
  k.kappa_freeze = -2.0 * k.eps;
  return k;
}

// ---------------------------------------------------------------------------
// Interior heat term and the full decomposition
// ---------------------------------------------------------------------------

// Regularized supertrace of the flow idempotent's diagonal relative to the
// corner unit.
inline cdouble flow_corner_btrace(const UMat2<BKernel>& v, const RegularizationData& reg) {
  cdouble s = 0.0;
  if (v.body[0]) s += b_trace(*v.body[0], reg);
  if (v.body[3]) s += b_trace(*v.body[3], reg);
  return s;
}

// Pure truncated cylinder with the same boundary data and window as a slab.
inline SlabModel pure_slab_like(const SlabModel& s) {
  int margin = s.win->eval_lo - s.win->t_lo;
  Mat zero = Mat::Zero(s.win->rows(), s.win->rows());
  return make_slab_model(s.cyl.bnd.op, s.cyl.scheme, s.win->t_lo, s.win->t_hi, margin, zero);
}

// Cap-localized heat term: the difference of regularized heat supertraces
// between the capped slab and the pure truncated cylinder.
inline cdouble as_term_degree0(const SlabModel& slab, const SlabModel& pure, double u,
                               const RegularizationData& reg, int nlam = 256) {
  return flow_corner_btrace(slab_flow_idempotent(slab, u, nlam), reg) -
         flow_corner_btrace(slab_flow_idempotent(pure, u, nlam), reg);
}

struct ApsReport {
  double ind = 0.0;        // absolute pairing of the capped slab
  int ind_oracle = 0;      // winding integer
  double as = 0.0;         // cap-localized heat term
  double eta = 0.0;        // normalized boundary spectral-asymmetry form
  double spectral_asym = 0.0;
  double decomposition_gap = 0.0;  // |ind - (as - eta/2)|
  double eta_vs_frozen = 0.0;      // |eta - kappa_freeze * spectral_asym|
  AbsoluteReport absolute;
  EtaReport boundary;
};

inline ApsReport aps_degree0(const SlabModel& slab, const SlabModel& pure, double u,
                             const RegularizationData& reg, double kappa_unit,
                             double kappa_freeze, double eta_tol = 1e-9, int nlam = 512) {
  ApsReport r;
  r.absolute = absolute_degree0(slab, u, reg, nlam);
  r.ind = r.absolute.pairing.real();
  r.ind_oracle = slab_index_winding(slab);
  r.as = as_term_degree0(slab, pure, u, reg, std::min(nlam, 256)).real();
  r.boundary = eta_form(slab.cyl.bnd, slab.cyl.scheme, u, kappa_unit, eta_tol);
  r.eta = r.boundary.eta;
  r.spectral_asym = r.boundary.spectral_asym;
  r.decomposition_gap = std::abs(r.ind - (r.as - 0.5 * r.eta));
  r.eta_vs_frozen = std::abs(r.eta - kappa_freeze * r.spectral_asym);
  return r;
}

// ---------------------------------------------------------------------------
// Scale sweeps (shared spectral data across scales)
// ---------------------------------------------------------------------------

struct SweepRow {
  double u = 0.0;
  cdouble absolute;
  cdouble relative;
};

inline std::vector<SweepRow> pairing_u_sweep(const SlabModel& slab, std::span<const double> us,
                                             const RegularizationData& reg, bool with_relative,
                                             const PathQuadrature& qp = {}, int nlam = 512,
                                             double horizon_tol = 1e-12) {
  ChiralPair c = ChiralPair::make(slab.dplus.dense());
  std::vector<SweepRow> rows;
  for (double u : us) {
    SweepRow row;
    row.u = u;
    row.absolute = absolute_degree0(slab, c, u, reg, nlam).pairing;
    if (with_relative) {
      double t_max = flow_horizon(slab.cyl.bnd.gap, u, horizon_tol);
      row.relative =
          relative_degree0(slab, c, u, reg, t_max, qp, std::min(nlam, 256)).value;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bhi
