#pragma once
// Regularized trace on half-infinite lattice models: the weighted-commutator
// evaluation, its exact invariant/residual closed form, the commutator-defect
// identity against the dual-circle integral, and the weighted norms that
// dominate the regularized trace of products.

#include "bhi/lattice.hpp"

namespace bhi {

// ---------------------------------------------------------------------------
// Regulator: phi(t) = min(t, -offset) (axis coordinate deep in the cylinder,
// constant past the junction), V(phi) its backward shift-difference, and
// chi = 1 - V(phi) supported on the interior side.
// ---------------------------------------------------------------------------

struct RegularizationData {
  int offset = 0;  // junction at t = -offset

  double phi(int t) const { return static_cast<double>(std::min(t, -offset)); }
  double vphi(int t) const { return phi(t) - phi(t - 1); }  // 1 deep in the cylinder
  double chi(int t) const { return 1.0 - vphi(t); }         // 1 on the interior side
};

inline void validate_regulator(const RegularizationData& reg, const Window& w) {
  int junction = -reg.offset;
  if (junction < w.eval_lo + 2 || junction > w.t_hi - 1)
    throw precondition_error("regulator junction outside the trusted window");
}

// Shift-derivative of a window operator: (T* P T)(s,t) = P(s+1, t+1) with the
// shift killed above the top wall; exact there, garbage only at the bottom
// (fake) wall, which callers exclude via the trusted region.
inline Mat shift_derivative(const Mat& p, const Window& w) {
  Mat out = -p;
  int nbr = w.nb;
  for (int s = w.t_lo; s < w.t_hi; ++s)
    for (int t = w.t_lo; t < w.t_hi; ++t)
      out.block(w.row(s, 0), w.row(t, 0), nbr, nbr) +=
          p.block(w.row(s + 1, 0), w.row(t + 1, 0), nbr, nbr);
  return out;
}

// ---------------------------------------------------------------------------
// The regularized trace.
// ---------------------------------------------------------------------------

// Weighted-commutator evaluation on the trusted window:
//   -sum_{t >= eval_lo} phi(t) tr( (T*PT - P)(t,t) ) + sum_t chi(t) tr P(t,t).
inline cdouble b_trace(const BKernel& p, const RegularizationData& reg) {
  const Window& w = *p.win;
  validate_regulator(reg, w);
  Mat dense = p.dense();
  Mat grad = shift_derivative(dense, w);
  CKahanSum acc;
  for (int t = w.eval_lo; t <= w.t_hi; ++t) {
    cdouble gd = mat_trace(grad.block(w.row(t, 0), w.row(t, 0), w.nb, w.nb));
    acc.add(-reg.phi(t) * gd);
    double c = reg.chi(t);
    if (c != 0.0) acc.add(c * mat_trace(dense.block(w.row(t, 0), w.row(t, 0), w.nb, w.nb)));
  }
  return acc.value();
}

// Exact closed form: invariant part contributes t_hi * tr(hop(0)); the
// residual contributes its plain trace over the trusted diagonal.
inline cdouble b_trace_closed_form(const BKernel& p) {
  const Window& w = *p.win;
  CKahanSum acc;
  acc.add(static_cast<double>(w.t_hi) * mat_trace(p.inv.at(0)));
  for (int t = w.eval_lo; t <= w.t_hi; ++t)
    acc.add(mat_trace(p.res.block(w.row(t, 0), w.row(t, 0), w.nb, w.nb)));
  return acc.value();
}

// Bound on the residual-diagonal mass dropped below the trusted region,
// extrapolated from the fitted decay of the residual shells.
inline double b_trace_tail_bound(const BKernel& p) {
  DecayFit f = p.res_decay();
  if (!f.ok || f.eps <= 0.0) return 0.0;
  const Window& w = *p.win;
  int depth = w.t_hi - w.eval_lo + 1;
  double edge = f.C * std::exp(-f.eps * depth) * w.nb;
  return edge / std::max(1.0 - std::exp(-f.eps), 1e-3);
}

// ---------------------------------------------------------------------------
// Commutator defect: the regularized trace of [A, B] against the dual-circle
// integral (i/2pi) contour_integral Tr( fiber_B * d/dlam fiber_A ) dlam.
// For finite-support hoppings the integrand is a trigonometric polynomial,
// so the trapezoid rule below is exact.
// ---------------------------------------------------------------------------

struct DefectPair {
  cdouble lhs{0.0};  // b_trace([A, B])
  cdouble rhs{0.0};  // dual-circle integral
  double gap() const { return std::abs(lhs - rhs); }
};

inline cdouble defect_integral(const FourierKernel& a, const FourierKernel& b) {
  int n = 2 * (a.reach() + b.reach()) + 8;
  cdouble mean = circle_mean(
      [&](double lam) { return trace_prod(b.fiber(lam), a.dfiber(lam)); }, n);
  return cdouble(0.0, 1.0) * mean;
}

inline DefectPair commutator_defect(const BKernel& a, const BKernel& b,
                                    const RegularizationData& reg) {
  DefectPair d;
  d.lhs = b_trace(bk_sub(bk_mul(a, b), bk_mul(b, a)), reg);
  d.rhs = defect_integral(a.inv, b.inv);
  return d;
}

// ---------------------------------------------------------------------------
// The five-term weighted norm (trace norms of the regulated pieces plus
// operator norms), evaluated on the trusted sub-window.
// ---------------------------------------------------------------------------

inline Mat trusted_block(const Mat& m, const Window& w) {
  int lo = w.row(w.eval_lo, 0);
  int n = w.rows() - lo;
  return m.block(lo, lo, n, n);
}

inline double triple_norm(const BKernel& p, const RegularizationData& reg) {
  const Window& w = *p.win;
  validate_regulator(reg, w);
  Mat dense = p.dense();
  Mat grad = shift_derivative(dense, w);
  int n = w.rows();
  Eigen::VectorXd phiv(n), chiv(n);
  for (int t = w.t_lo; t <= w.t_hi; ++t)
    for (int j = 0; j < w.nb; ++j) {
      phiv(w.row(t, j)) = reg.phi(t);
      chiv(w.row(t, j)) = reg.chi(t);
    }
  Mat chi_p = chiv.asDiagonal() * dense;
  Mat phi_grad = phiv.asDiagonal() * grad;
  Mat phi_comm = phiv.asDiagonal() * dense - dense * phiv.asDiagonal();
  double s = 0.0;
  s += std::pow(trace_norm(trusted_block(chi_p, w)), 2);
  s += std::pow(trace_norm(trusted_block(phi_grad, w)), 2);
  s += std::pow(trace_norm(trusted_block(grad, w)), 2);
  s += std::pow(op_norm(trusted_block(phi_comm, w)), 2);
  s += std::pow(op_norm(trusted_block(dense, w)), 2);
  return std::sqrt(s);
}

}  // namespace bhi
