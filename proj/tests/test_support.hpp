#pragma once
// Shared generators for the test suites: random multilinear cochains
// (normalized: they vanish when a pure scalar occupies any slot past the
// first), random unitalized tuples, and dense realizations of 2x2 block
// arguments for cross-checks.

#include <memory>
#include <vector>

#include "bhi/cyclic.hpp"

namespace bhit {

using namespace bhi;

// Multilinear functional  phi(a0..ak) = tr(M0 t(a0) M1 p(a1) ... Mk p(ak))
// with t(a) = body + omega * 1 and p(a) = body (scalars killed).
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

// Honest matrix trace as a degree-k cochain (not normalized: scalars are
// represented by multiples of the identity).
inline CyclicCochain<Mat> dense_trace_cochain(int dim, int degree) {
  CyclicCochain<Mat> c;
  c.degree = degree;
  c.normalized = false;
  c.eval = [dim](std::span<const Unital<Mat>> a) -> cdouble {
    Mat prod;
    bool first = true;
    for (const auto& x : a) {
      Mat m = x.body ? *x.body : Mat(Mat::Zero(dim, dim));
      if (x.omega != cdouble(0.0, 0.0)) m += x.omega * Mat::Identity(dim, dim);
      prod = first ? m : Mat(prod * m);
      first = false;
    }
    return mat_trace(prod);
  };
  return c;
}

inline Unital<Mat> random_unital(Rng& rng, int dim) {
  Unital<Mat> u;
  u.body = rng.cmatrix(dim, dim);
  u.omega = rng.cgauss();
  return u;
}

inline std::vector<Unital<Mat>> random_tuple(Rng& rng, int arity, int dim) {
  std::vector<Unital<Mat>> t;
  t.reserve(static_cast<size_t>(arity));
  for (int i = 0; i < arity; ++i) t.push_back(random_unital(rng, dim));
  return t;
}

inline UMat2<Mat> random_umat(Rng& rng, int dim) {
  UMat2<Mat> m;
  for (size_t i = 0; i < 4; ++i) m.body[i] = rng.cmatrix(dim, dim);
  m.scal << rng.cgauss(), rng.cgauss(), rng.cgauss(), rng.cgauss();
  return m;
}

// Dense 2dim x 2dim realization of a 2x2 block argument.
inline Mat umat_dense(const UMat2<Mat>& m, int dim) {
  Mat d = Mat::Zero(2 * dim, 2 * dim);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat blk = Mat::Zero(dim, dim);
      if (m.body[static_cast<size_t>(2 * i + j)]) blk = *m.body[static_cast<size_t>(2 * i + j)];
      if (m.scal(i, j) != cdouble(0.0, 0.0)) blk += m.scal(i, j) * Mat::Identity(dim, dim);
      d.block(i * dim, j * dim, dim, dim) = blk;
    }
  return d;
}

// Largest magnitude a cochain reaches on a batch of random tuples; used to
// turn absolute residuals into relative ones.
inline double cochain_scale(const CyclicCochain<Mat>& c, Rng& rng, int dim, int samples = 8) {
  double s = 1.0;
  for (int i = 0; i < samples; ++i) {
    auto t = random_tuple(rng, c.degree + 1, dim);
    s = std::max(s, std::abs(c(std::span<const Unital<Mat>>(t))));
  }
  return s;
}

}  // namespace bhit
