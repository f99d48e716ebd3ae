#pragma once
// Lattice models with cylindrical ends: translation-invariant kernels on the
// integer axis with matrix hoppings over a boundary cross-section, their
// indicial (Fourier) families over the dual circle, finite observation
// windows with a certified trust region, and the invariant + residual split
// of operators on the half-infinite model.

#include "bhi/common.hpp"

#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace bhi {

// ---------------------------------------------------------------------------
// Translation-invariant kernels: K(s, t) = hop(s - t), finite support in n.
// ---------------------------------------------------------------------------

struct FourierKernel {
  int dim = 0;
  std::map<int, Mat> hop;

  static FourierKernel zero(int dim) {
    FourierKernel k;
    k.dim = dim;
    return k;
  }
  static FourierKernel identity(int dim) {
    FourierKernel k;
    k.dim = dim;
    k.hop[0] = Mat::Identity(dim, dim);
    return k;
  }

  bool empty() const { return hop.empty(); }

  void accumulate(int n, const Mat& m) {
    auto it = hop.find(n);
    if (it == hop.end())
      hop[n] = m;
    else
      it->second += m;
  }
  void prune(double tol) {
    for (auto it = hop.begin(); it != hop.end();) {
      if (it->second.cwiseAbs().maxCoeff() < tol)
        it = hop.erase(it);
      else
        ++it;
    }
  }
  Mat at(int n) const {
    auto it = hop.find(n);
    if (it == hop.end()) return Mat::Zero(dim, dim);
    return it->second;
  }
  int reach() const {
    int r = 0;
    for (auto& [n, m] : hop) r = std::max(r, std::abs(n));
    return r;
  }
  FourierKernel adjoint() const {
    FourierKernel k;
    k.dim = dim;
    for (auto& [n, m] : hop) k.hop[-n] = m.adjoint();
    return k;
  }
  // Fiber over the dual circle and its analytic lambda-derivative.
  Mat fiber(double lam) const {
    Mat f = Mat::Zero(dim, dim);
    for (auto& [n, m] : hop) f += std::exp(cdouble(0.0, -lam * n)) * m;
    return f;
  }
  Mat dfiber(double lam) const {
    Mat f = Mat::Zero(dim, dim);
    for (auto& [n, m] : hop) f += cdouble(0.0, -double(n)) * std::exp(cdouble(0.0, -lam * n)) * m;
    return f;
  }
  double norm1() const {  // sum of hop operator norms; submultiplicative bound
    double s = 0.0;
    for (auto& [n, m] : hop) s += op_norm(m);
    return s;
  }
  std::vector<double> shell_norms() const {
    std::vector<double> sh(static_cast<size_t>(reach()) + 1, 0.0);
    for (auto& [n, m] : hop) {
      size_t d = static_cast<size_t>(std::abs(n));
      sh[d] = std::max(sh[d], m.cwiseAbs().maxCoeff());
    }
    return sh;
  }
  DecayFit decay() const { return fit_exp_decay(shell_norms()); }
};

inline FourierKernel kadd(const FourierKernel& a, const FourierKernel& b) {
  if (a.dim != b.dim) throw precondition_error("kadd: dim mismatch");
  FourierKernel r = a;
  for (auto& [n, m] : b.hop) r.accumulate(n, m);
  return r;
}
inline FourierKernel kscale(cdouble z, const FourierKernel& a) {
  FourierKernel r = a;
  for (auto& [n, m] : r.hop) m *= z;
  return r;
}
inline FourierKernel ksub(const FourierKernel& a, const FourierKernel& b) {
  return kadd(a, kscale(-1.0, b));
}
// Exact composition: (a b)(n) = sum_m a(m) b(n - m).
inline FourierKernel kmul(const FourierKernel& a, const FourierKernel& b) {
  if (a.dim != b.dim) throw precondition_error("kmul: dim mismatch");
  FourierKernel r = FourierKernel::zero(a.dim);
  for (auto& [m1, x] : a.hop)
    for (auto& [m2, y] : b.hop) r.accumulate(m1 + m2, x * y);
  return r;
}
inline double kernel_distance(const FourierKernel& a, const FourierKernel& b) {
  return ksub(a, b).norm1();
}

// Minimal singular value of the fiber over a refined lambda-grid.
inline double fiber_gap(const FourierKernel& k, int nlam = 256) {
  double best = std::numeric_limits<double>::infinity();
  double best_lam = 0.0;
  for (int j = 0; j < nlam; ++j) {
    double lam = -pi + 2.0 * pi * j / nlam;
    double s = Eigen::JacobiSVD<Mat>(k.fiber(lam)).singularValues().minCoeff();
    if (s < best) {
      best = s;
      best_lam = lam;
    }
  }
  // local refinement around the coarse minimum
  double h = 2.0 * pi / nlam;
  for (int pass = 0; pass < 20; ++pass) {
    h *= 0.5;
    for (double lam : {best_lam - h, best_lam + h}) {
      double s = Eigen::JacobiSVD<Mat>(k.fiber(lam)).singularValues().minCoeff();
      if (s < best) {
        best = s;
        best_lam = lam;
      }
    }
  }
  return best;
}

// Inverse Fourier series of a smooth matrix fiber, truncated at drop_tol.
inline FourierKernel kernel_from_fiber(const std::function<Mat(double)>& f, int dim, int nlam,
                                       double drop_tol = 1e-14) {
  std::vector<Mat> samples(static_cast<size_t>(nlam));
  for (int j = 0; j < nlam; ++j) samples[static_cast<size_t>(j)] = f(-pi + 2.0 * pi * j / nlam);
  FourierKernel k = FourierKernel::zero(dim);
  int half = nlam / 2;
  for (int n = -half + 1; n < half; ++n) {
    Mat c = Mat::Zero(dim, dim);
    for (int j = 0; j < nlam; ++j) {
      double lam = -pi + 2.0 * pi * j / nlam;
      c += std::exp(cdouble(0.0, lam * n)) * samples[static_cast<size_t>(j)];
    }
    c /= double(nlam);
    if (c.cwiseAbs().maxCoeff() >= drop_tol) k.hop[n] = c;
  }
  return k;
}

struct InverseIndicialResult {
  FourierKernel kernel;
  double alias_error = 0.0;  // change under doubling the lambda-grid
  DecayFit decay;
  double min_singular = 0.0;
};

// Fiberwise inverse of an invariant kernel, as an invariant kernel.
inline InverseIndicialResult inverse_indicial(const FourierKernel& k, int nlam = 256,
                                              double drop_tol = 1e-14) {
  double gap = fiber_gap(k, nlam);
  if (!(gap > 0.0) || gap < 1e-10)
    throw infeasible_error("inverse_indicial: fiber not invertible on the dual circle");
  auto invf = [&](double lam) -> Mat { return k.fiber(lam).inverse(); };
  FourierKernel a = kernel_from_fiber(invf, k.dim, nlam, drop_tol);
  FourierKernel b = kernel_from_fiber(invf, k.dim, 2 * nlam, drop_tol);
  InverseIndicialResult r;
  r.alias_error = kernel_distance(a, b);
  r.kernel = std::move(b);
  r.decay = r.kernel.decay();
  r.min_singular = gap;
  return r;
}

// ---------------------------------------------------------------------------
// Difference schemes for the axis derivative in the two chiral blocks.
//   forward : D+ fiber per boundary mode mu is (1 - e^{-i lam}) + mu
//   balanced: D+ fiber per boundary mode mu is  i sin(lam) + mu cos(lam)
// Both are doubling-free for gapped boundary operators.
// ---------------------------------------------------------------------------

enum class DiffScheme { forward, balanced };

inline cdouble mode_dplus_fiber(DiffScheme s, double lam, double mu) {
  if (s == DiffScheme::forward) return cdouble(1.0, 0.0) - std::exp(cdouble(0.0, -lam)) + mu;
  return cdouble(0.0, std::sin(lam)) + mu * std::cos(lam);
}
inline cdouble mode_dplus_fiber_dlam(DiffScheme s, double lam, double mu) {
  if (s == DiffScheme::forward) return cdouble(0.0, 1.0) * std::exp(cdouble(0.0, -lam));
  return cdouble(0.0, std::cos(lam)) - mu * std::sin(lam);
}
inline double mode_h_fiber(DiffScheme s, double lam, double mu) {
  return std::norm(mode_dplus_fiber(s, lam, mu));
}

// ---------------------------------------------------------------------------
// Boundary operator: Hermitian, gapped, with cached eigendecomposition.
// ---------------------------------------------------------------------------

struct BoundaryOperator {
  Mat op;
  HermEig eig;
  double gap = 0.0;

  int dim() const { return static_cast<int>(op.rows()); }

  static BoundaryOperator make(const Mat& m, double herm_tol = 1e-13) {
    if (m.rows() != m.cols()) throw precondition_error("boundary operator must be square");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
      throw precondition_error("boundary operator must be self-adjoint");
    BoundaryOperator b;
    b.op = 0.5 * (m + Mat(m.adjoint()));
    b.eig = herm_eig(b.op);
    b.gap = b.eig.d.cwiseAbs().minCoeff();
    return b;
  }
};

struct GapReport {
  double declared = 0.0;
  double measured = 0.0;
  bool pass = false;
};

inline GapReport verify_gap(const BoundaryOperator& b, double delta) {
  GapReport g;
  g.declared = delta;
  g.measured = b.gap;
  g.pass = b.gap > delta - 1e-12;
  return g;
}

struct FiberInvertibilityReport {
  double min_singular = 0.0;
  bool pass = false;
};

inline FiberInvertibilityReport verify_indicial_invertibility(const FourierKernel& k,
                                                              int nlam = 256) {
  FiberInvertibilityReport r;
  r.min_singular = fiber_gap(k, nlam);
  r.pass = r.min_singular > 1e-10;
  return r;
}

// ---------------------------------------------------------------------------
// The invariant cylinder model: off-diagonal blocks of the graded axis
// operator over a boundary cross-section.
// ---------------------------------------------------------------------------

struct CylinderModel {
  DiffScheme scheme = DiffScheme::forward;
  BoundaryOperator bnd;
  FourierKernel dplus;   // lower-left block
  FourierKernel dminus;  // upper-right block = adjoint of dplus

  int nb() const { return bnd.dim(); }

  // scalar fibers in the boundary eigenbasis
  cdouble dsym(double lam, double mu) const { return mode_dplus_fiber(scheme, lam, mu); }
  double hsym(double lam, double mu) const { return mode_h_fiber(scheme, lam, mu); }
};

inline CylinderModel build_cylinder_dirac(const Mat& boundary_op,
                                          DiffScheme scheme = DiffScheme::forward) {
  CylinderModel c;
  c.scheme = scheme;
  c.bnd = BoundaryOperator::make(boundary_op);
  int d = c.bnd.dim();
  Mat id = Mat::Identity(d, d);
  c.dplus = FourierKernel::zero(d);
  if (scheme == DiffScheme::forward) {
    // D+ = -(forward difference)^* + D_bnd : hop(+1) = -1, hop(0) = 1 + D_bnd
    c.dplus.hop[1] = -id;
    c.dplus.hop[0] = id + c.bnd.op;
  } else {
    // D+ = symmetric difference + averaged D_bnd
    c.dplus.hop[-1] = 0.5 * (id + c.bnd.op);
    c.dplus.hop[1] = 0.5 * (c.bnd.op - id);
  }
  c.dminus = c.dplus.adjoint();
  return c;
}

// ---------------------------------------------------------------------------
// Observation window on the half-infinite model (-inf, t_hi]:
// the axis is truncated at t_lo for computation; entries are trusted only
// where both axis indices are >= eval_lo = t_lo + margin.
// ---------------------------------------------------------------------------

struct Window {
  int t_lo = 0;
  int t_hi = 0;
  int nb = 1;
  int eval_lo = 0;

  int nt() const { return t_hi - t_lo + 1; }
  int rows() const { return nt() * nb; }
  int row(int t, int j) const { return (t - t_lo) * nb + j; }
  bool trusted(int t) const { return t >= eval_lo; }
};

inline std::shared_ptr<const Window> make_window(int t_lo, int t_hi, int nb, int margin) {
  if (t_lo + margin >= t_hi) throw precondition_error("window: margin leaves no trusted region");
  auto w = std::make_shared<Window>();
  w->t_lo = t_lo;
  w->t_hi = t_hi;
  w->nb = nb;
  w->eval_lo = t_lo + margin;
  return w;
}

// Dense window matrix of an invariant kernel (sharp truncation at both ends).
inline Mat toeplitz_window(const FourierKernel& k, const Window& w) {
  if (k.dim != w.nb) throw precondition_error("toeplitz_window: block dim mismatch");
  Mat m = Mat::Zero(w.rows(), w.rows());
  for (auto& [n, h] : k.hop) {
    for (int t = w.t_lo; t <= w.t_hi; ++t) {
      int s = t + n;  // K(s, t) = hop(s - t)
      if (s < w.t_lo || s > w.t_hi) continue;
      m.block(w.row(s, 0), w.row(t, 0), w.nb, w.nb) = h;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// BKernel: operator on the half-infinite model, stored as an invariant part
// plus a windowed residual correction.  res = (window matrix) - (invariant
// window matrix); its entries are trusted where both axis indices are
// >= eval_lo, and certified to decay toward the cylindrical end.
// ---------------------------------------------------------------------------

struct BKernel {
  std::shared_ptr<const Window> win;
  FourierKernel inv;
  Mat res;

  int rows() const { return win->rows(); }
  Mat dense() const { return toeplitz_window(inv, *win) + res; }

  static BKernel invariant(std::shared_ptr<const Window> w, FourierKernel k) {
    if (k.dim != w->nb) throw precondition_error("BKernel: block dim mismatch");
    BKernel b;
    b.win = std::move(w);
    b.inv = std::move(k);
    b.res = Mat::Zero(b.win->rows(), b.win->rows());
    return b;
  }
  static BKernel residual(std::shared_ptr<const Window> w, Mat r) {
    if (r.rows() != w->rows() || r.cols() != w->rows())
      throw precondition_error("BKernel: residual shape mismatch");
    BKernel b;
    b.win = std::move(w);
    b.inv = FourierKernel::zero(b.win->nb);
    b.res = std::move(r);
    return b;
  }
  static BKernel from_dense(std::shared_ptr<const Window> w, const Mat& full,
                            FourierKernel invariant_part) {
    BKernel b;
    b.win = std::move(w);
    b.inv = std::move(invariant_part);
    b.res = full - toeplitz_window(b.inv, *b.win);
    return b;
  }

  // Residual decay toward the end, by shells of distance from the top wall;
  // only trusted entries participate.
  std::vector<double> res_shell_norms() const {
    const Window& w = *win;
    int nshell = w.t_hi - w.eval_lo + 1;
    std::vector<double> sh(static_cast<size_t>(std::max(nshell, 1)), 0.0);
    for (int s = w.eval_lo; s <= w.t_hi; ++s)
      for (int t = w.eval_lo; t <= w.t_hi; ++t) {
        int d = std::max(w.t_hi - s, w.t_hi - t);
        double v = res.block(w.row(s, 0), w.row(t, 0), w.nb, w.nb).cwiseAbs().maxCoeff();
        sh[static_cast<size_t>(d)] = std::max(sh[static_cast<size_t>(d)], v);
      }
    return sh;
  }
  DecayFit res_decay() const { return fit_exp_decay(res_shell_norms()); }
};

inline void bk_check_same_window(const BKernel& a, const BKernel& b) {
  if (a.win.get() != b.win.get()) throw precondition_error("BKernel: window mismatch");
}
inline BKernel bk_add(const BKernel& a, const BKernel& b) {
  bk_check_same_window(a, b);
  BKernel r;
  r.win = a.win;
  r.inv = kadd(a.inv, b.inv);
  r.res = a.res + b.res;
  return r;
}
inline BKernel bk_scale(cdouble z, const BKernel& a) {
  BKernel r = a;
  r.inv = kscale(z, r.inv);
  r.res = z * r.res;
  return r;
}
inline BKernel bk_sub(const BKernel& a, const BKernel& b) { return bk_add(a, bk_scale(-1.0, b)); }
inline BKernel bk_mul(const BKernel& a, const BKernel& b) {
  bk_check_same_window(a, b);
  BKernel r;
  r.win = a.win;
  r.inv = kmul(a.inv, b.inv);
  r.res = a.dense() * b.dense() - toeplitz_window(r.inv, *r.win);
  return r;
}
inline BKernel bk_adjoint(const BKernel& a) {
  BKernel r;
  r.win = a.win;
  r.inv = a.inv.adjoint();
  r.res = a.res.adjoint();
  return r;
}
inline double bk_norm(const BKernel& a) { return a.inv.norm1() + op_norm(a.res); }

// The indicial map: invariant part as an invariant kernel (zero on residuals).
inline const FourierKernel& indicial_family(const BKernel& a) { return a.inv; }

// Reconstruction defect of the split, measured on the trusted region only.
inline double split_reconstruction_error(const BKernel& a, const Mat& reference_dense) {
  const Window& w = *a.win;
  Mat d = a.dense() - reference_dense;
  double worst = 0.0;
  for (int s = w.eval_lo; s <= w.t_hi; ++s)
    for (int t = w.eval_lo; t <= w.t_hi; ++t)
      worst = std::max(worst, d.block(w.row(s, 0), w.row(t, 0), w.nb, w.nb).cwiseAbs().maxCoeff());
  return worst;
}

// ---------------------------------------------------------------------------
// Half-infinite slab model: invariant cylinder data plus a cap perturbation
// of the chiral block supported near the top wall.
// ---------------------------------------------------------------------------

struct SlabModel {
  CylinderModel cyl;
  std::shared_ptr<const Window> win;
  BKernel dplus;   // cylinder hoppings truncated to the window + cap term
  BKernel dminus;  // adjoint

  int nb() const { return cyl.nb(); }
};

// cap_perturbation: dense matrix on the window, supported on rows/columns
// with t >= cap_lo (pass a zero matrix for the pure truncated cylinder).
inline SlabModel make_slab_model(const Mat& boundary_op, DiffScheme scheme, int t_lo, int t_hi,
                                 int margin, const Mat& cap_perturbation) {
  SlabModel s;
  s.cyl = build_cylinder_dirac(boundary_op, scheme);
  s.win = make_window(t_lo, t_hi, s.cyl.nb(), margin);
  if (cap_perturbation.rows() != s.win->rows() || cap_perturbation.cols() != s.win->rows())
    throw precondition_error("make_slab_model: cap perturbation shape mismatch");
  s.dplus = BKernel::from_dense(s.win, toeplitz_window(s.cyl.dplus, *s.win) + cap_perturbation,
                                s.cyl.dplus);
  s.dminus = bk_adjoint(s.dplus);
  return s;
}

// Random cap perturbation supported on t in [t_hi - depth + 1, t_hi].
inline Mat random_cap_perturbation(Rng& rng, const Window& w, int depth, double amplitude) {
  Mat m = Mat::Zero(w.rows(), w.rows());
  int lo = w.t_hi - depth + 1;
  int span = depth * w.nb;
  Mat block = amplitude * rng.cmatrix(span, span);
  m.block(w.row(lo, 0), w.row(lo, 0), span, span) = block;
  return m;
}

// ---------------------------------------------------------------------------
// Winding-number index oracle: the integer winding of det(fiber) over the
// dual circle, tracked by continuous phase accumulation.
// ---------------------------------------------------------------------------

// Uniform element-algebra spellings so generic 2x2 super-matrix code works
// over invariant kernels and window-split kernels alike.
inline FourierKernel emul(const FourierKernel& a, const FourierKernel& b) { return kmul(a, b); }
inline FourierKernel eadd(const FourierKernel& a, const FourierKernel& b) { return kadd(a, b); }
inline FourierKernel escale(cdouble z, const FourierKernel& a) { return kscale(z, a); }
inline FourierKernel esub(const FourierKernel& a, const FourierKernel& b) { return ksub(a, b); }
inline double enorm(const FourierKernel& a) { return a.norm1(); }
inline FourierKernel eadj(const FourierKernel& a) { return a.adjoint(); }

inline BKernel emul(const BKernel& a, const BKernel& b) { return bk_mul(a, b); }
inline BKernel eadd(const BKernel& a, const BKernel& b) { return bk_add(a, b); }
inline BKernel escale(cdouble z, const BKernel& a) { return bk_scale(z, a); }
inline BKernel esub(const BKernel& a, const BKernel& b) { return bk_sub(a, b); }
inline double enorm(const BKernel& a) { return bk_norm(a); }
inline BKernel eadj(const BKernel& a) { return bk_adjoint(a); }

inline int winding_number_of_fiber(const FourierKernel& k, int nlam = 2048) {
  double total = 0.0;
  cdouble prev = Eigen::FullPivLU<Mat>(k.fiber(-pi)).determinant();
  if (std::abs(prev) < 1e-14) throw infeasible_error("winding: singular fiber");
  for (int j = 1; j <= nlam; ++j) {
    double lam = -pi + 2.0 * pi * j / nlam;
    cdouble cur = Eigen::FullPivLU<Mat>(k.fiber(lam)).determinant();
    if (std::abs(cur) < 1e-14) throw infeasible_error("winding: singular fiber");
    total += std::arg(cur / prev);
    prev = cur;
  }
  double w = total / (2.0 * pi);
  int wi = static_cast<int>(std::lround(w));
  if (std::abs(w - wi) > 1e-6) throw numeric_error("winding: non-integer result");
  return wi;
}

}  // namespace bhi
