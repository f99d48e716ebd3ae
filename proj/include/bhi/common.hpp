#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bhi {

using cdouble = std::complex<double>;
using Mat     = Eigen::MatrixXcd;
using Vec     = Eigen::VectorXcd;
using RVec    = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846264338327950288;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// deterministic random sources
//
// All randomness flows through Rng so that a (seed, call-order) pair fixes
// every generated number independent of platform or thread count.
// ---------------------------------------------------------------------------
struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed ^ 0x9e3779b97f4a7c15ull) {}

  // uniform in [0,1) with 53 random bits; avoids distribution objects whose
  // output differs between standard library implementations
  double uniform() { return double(eng() >> 11) * 0x1.0p-53; }
  double sym() { return 2.0 * uniform() - 1.0; }
  int integer(int lo, int hi) {  // inclusive bounds
    return lo + int(eng() % std::uint64_t(hi - lo + 1));
  }
  double gauss() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }
  cdouble cgauss() { return {gauss(), gauss()}; }

  Mat cmatrix(int r, int c) {
    Mat a(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = cdouble(sym(), sym());
    return a;
  }
  Mat hermitian(int n) {
    Mat a = cmatrix(n, n);
    return 0.5 * (a + a.adjoint());
  }
  // hermitian with |spectrum| >= gap
  Mat gapped_hermitian(int n, double gap, double spread = 1.5) {
    Mat u = unitary(n);
    Vec d(n);
    for (int i = 0; i < n; ++i) {
      double s = (uniform() < 0.5) ? -1.0 : 1.0;
      d(i) = s * (gap + spread * uniform());
    }
    return u * d.asDiagonal() * u.adjoint();
  }
  Mat unitary(int n) {
    Eigen::HouseholderQR<Mat> qr(cmatrix(n, n));
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
      cdouble rii = r(i, i);
      q.col(i) *= (std::abs(rii) > 0) ? rii / std::abs(rii) : 1.0;
    }
    return q;
  }
};

// ---------------------------------------------------------------------------
// fixed-order compensated summation (Neumaier): deterministic reductions
// ---------------------------------------------------------------------------
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct CKahanSum {
  KahanSum re, im;
  void add(cdouble z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cdouble value() const { return {re.value(), im.value()}; }
};

template <class It, class F>
cdouble sum_ordered(It begin, It end, F f) {
  CKahanSum acc;
  for (It it = begin; it != end; ++it) acc.add(f(*it));
  return acc.value();
}

// ---------------------------------------------------------------------------
// slot-based parallel map: results land in preallocated slots by index, so
// the reduction order (and hence the bytes of any downstream report) does
// not depend on the number of worker threads.
// ---------------------------------------------------------------------------
inline int& job_count() {
  static int jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  return jobs;
}

template <class F>
void parallel_for(int n, F body) {
  int jobs = std::min(job_count(), n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

// (1/2pi) * integral over the circle [-pi,pi) by the N-point trapezoid rule;
// spectrally accurate for smooth periodic integrands
template <class F>
cdouble circle_mean(F f, int n) {
  CKahanSum acc;
  for (int j = 0; j < n; ++j) acc.add(f(-pi + 2.0 * pi * j / n));
  return acc.value() / double(n);
}

struct QuadResult {
  cdouble value{};
  double err_est = 0.0;
  int nodes = 0;
  bool converged = false;

  cdouble cvalue() const { return value; }
  double real() const { return value.real(); }
};

template <class F>
QuadResult circle_mean_doubling(F f, int n0, double tol, int cap) {
  QuadResult q;
  cdouble prev = circle_mean(f, n0);
  int n = n0;
  while (n < cap) {
    n *= 2;
    cdouble cur = circle_mean(f, n);
    q.err_est = std::abs(cur - prev);
    prev = cur;
    if (q.err_est < tol) {
      q.converged = true;
      break;
    }
  }
  q.value = prev;
  q.nodes = n;
  return q;
}

// composite Simpson on [a,b] with n subintervals (n even)
template <class F>
cdouble simpson(F f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  CKahanSum acc;
  acc.add(f(a));
  acc.add(f(b));
  for (int i = 1; i < n; ++i) acc.add(f(a + i * h) * cdouble(i % 2 ? 4.0 : 2.0));
  return acc.value() * (h / 3.0);
}

template <class F>
QuadResult simpson_doubling(F f, double a, double b, int n0, double tol, int cap) {
  QuadResult q;
  cdouble prev = simpson(f, a, b, n0);
  int n = n0;
  while (n < cap) {
    n *= 2;
    cdouble cur = simpson(f, a, b, n);
    q.err_est = std::abs(cur - prev);
    prev = cur;
    if (q.err_est < tol) {
      q.converged = true;
      break;
    }
  }
  q.value = prev;
  q.nodes = n;
  return q;
}

// least-squares polynomial extrapolation to x = 0 on a small grid.
// Returns the fitted constant term; *residual on request.
inline double extrapolate_poly0(const std::vector<double>& x, const std::vector<double>& y,
                                int degree, double* residual = nullptr) {
  int m = int(x.size());
  if (m < degree + 1) throw precondition_error("extrapolate_poly0: grid too small");
  Eigen::MatrixXd v(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      v(i, j) = p;
      p *= x[i];
    }
    rhs(i) = y[i];
  }
  Eigen::VectorXd coef = v.colPivHouseholderQr().solve(rhs);
  if (residual) *residual = (v * coef - rhs).norm();
  return coef(0);
}

// ---------------------------------------------------------------------------
// exponential decay fit: given per-shell maxima m_d > 0, fit
// log m_d ~ log C - eps * d on the shells above a floor.
// ---------------------------------------------------------------------------
struct DecayFit {
  double C = 0.0;
  double eps = 0.0;
  int shells = 0;
  bool ok = false;
};

inline DecayFit fit_exp_decay(const std::vector<double>& shell_max, double floor = 1e-15) {
  std::vector<double> xs, ys;
  for (int d = 0; d < int(shell_max.size()); ++d)
    if (shell_max[d] > floor) {
      xs.push_back(double(d));
      ys.push_back(std::log(shell_max[d]));
    }
  DecayFit f;
  f.shells = int(xs.size());
  if (f.shells < 3) return f;
  double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-12) return f;
  double slope = (n * sxy - sx * sy) / det;
  double icept = (sy * sxx - sx * sxy) / det;
  f.eps = -slope;
  f.C = std::exp(icept);
  f.ok = true;
  return f;
}

// ---------------------------------------------------------------------------
// dense hermitian matrix calculus
// ---------------------------------------------------------------------------
struct HermEig {
  Mat u;    // eigenvectors (columns)
  RVec d;   // eigenvalues ascending
};

inline HermEig herm_eig(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw numeric_error("herm_eig failed");
  return {es.eigenvectors(), es.eigenvalues()};
}

template <class F>
Mat apply_spectral(const HermEig& e, F f) {
  Vec fd(e.d.size());
  for (int i = 0; i < e.d.size(); ++i) fd(i) = f(e.d(i));
  return e.u * fd.asDiagonal() * e.u.adjoint();
}

template <class F>
Mat func_of_hermitian(const Mat& h, F f) {
  return apply_spectral(herm_eig(h), f);
}

// (1 - e^{-x}) / x, entire after the removable singularity f(0) = 1
inline double f1_ratio(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x / 2.0 + x * x / 6.0;
  return -std::expm1(-x) / x;
}

// d/dx of f1_ratio, with the same removable singularity handled by series
inline double f1_ratio_prime(double x) {
  if (std::abs(x) < 1e-3) return -0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0;
  return (std::expm1(-x) + x * std::exp(-x)) / (x * x);
}

inline RVec singular_values(const Mat& a) {
  if (a.rows() > 32 || a.cols() > 32) return Eigen::BDCSVD<Mat>(a).singularValues();
  return a.jacobiSvd().singularValues();
}

inline double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

inline double frob(const Mat& a) { return a.norm(); }

inline double trace_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a).sum();
}

inline cdouble mat_trace(const Mat& a) {
  CKahanSum acc;
  for (int i = 0; i < std::min(a.rows(), a.cols()); ++i) acc.add(a(i, i));
  return acc.value();
}

// trace of a product without forming it
inline cdouble trace_prod(const Mat& a, const Mat& b) {
  CKahanSum acc;
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) acc.add(a(i, k) * b(k, i));
  return acc.value();
}

// ---------------------------------------------------------------------------
// 2x2 super-block matrices [[a,b],[c,d]] over Mat
// ---------------------------------------------------------------------------
struct Super {
  Mat a, b, c, d;  // a: +to+, b: -to+, c: +to-, d: -to-

  static Super zero(int np, int nm) {
    return {Mat::Zero(np, np), Mat::Zero(np, nm), Mat::Zero(nm, np), Mat::Zero(nm, nm)};
  }
  static Super e1(int np, int nm) {  // [[0,0],[0,I]]
    Super s = zero(np, nm);
    s.d = Mat::Identity(nm, nm);
    return s;
  }
  static Super id(int np, int nm) {
    Super s = zero(np, nm);
    s.a = Mat::Identity(np, np);
    s.d = Mat::Identity(nm, nm);
    return s;
  }
  int rows_plus() const { return int(a.rows()); }
  int rows_minus() const { return int(d.rows()); }

  Super operator*(const Super& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Super operator+(const Super& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Super operator-(const Super& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Super operator*(cdouble z) const { return {z * a, z * b, z * c, z * d}; }
  Super adjoint() const { return {a.adjoint(), c.adjoint(), b.adjoint(), d.adjoint()}; }
  cdouble trace() const { return mat_trace(a) + mat_trace(d); }
  double norm() const { return std::sqrt(a.squaredNorm() + b.squaredNorm() + c.squaredNorm() + d.squaredNorm()); }
  Mat dense() const {
    int np = rows_plus(), nm = rows_minus();
    Mat m(np + nm, np + nm);
    m.topLeftCorner(np, np) = a;
    m.topRightCorner(np, nm) = b;
    m.bottomLeftCorner(nm, np) = c;
    m.bottomRightCorner(nm, nm) = d;
    return m;
  }
};

inline double idempotency_residual(const Super& p) { return (p * p - p).norm(); }

}  // namespace bhi
