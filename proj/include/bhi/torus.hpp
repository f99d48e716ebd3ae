#pragma once

// Magnetic lattice models on the two-torus cover: Landau-gauge flux fibers,
// band/gap scans, Fermi projectors, FFT-based hopping extraction with decay
// certificates, the area-cocycle pairing in both fiber (Parseval) and group
// (convolution) form, and the plaquette-field Chern oracle.

#include "bhi/common.hpp"
#include "bhi/equivariant.hpp"
#include "bhi/group.hpp"
#include "bhi/projectors.hpp"

#include <array>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

namespace bhi {

// ---------------------------------------------------------------------------
// Landau-gauge magnetic hopping model with flux 2*pi*p/q per plaquette.
// The magnetic unit cell is 1 x q sites; the fiber over the dual torus is a
// q x q matrix.  Nearest-neighbour hopping t1, diagonal hopping t2 (breaks
// the spectral +/- symmetry so the widest gap is unique), and an optional
// staggered onsite term for flux-free reference models.
// ---------------------------------------------------------------------------

struct FluxTorusModel {
  int p = 1;  // flux quanta per magnetic cell
  int q = 8;  // cell height (flux denominator)
  double t1 = 1.0;
  double t2 = 0.2;
  double stagger = 0.0;

  double flux() const { return 2.0 * pi * static_cast<double>(p) / static_cast<double>(q); }
  int dim() const { return q; }

  // Hopping matrices indexed by the cell translation (gx, gy).  Only the
  // "positive" translations are stored; the fiber adds their adjoints.
  std::map<std::array<int, 2>, Mat> positive_hops() const {
    if (q < 1) throw config_error("flux model: cell height must be positive");
    const double phi = flux();
    std::map<std::array<int, 2>, Mat> h;
    auto at = [&](int gx, int gy) -> Mat& {
      auto it = h.find({gx, gy});
      if (it == h.end()) it = h.emplace(std::array<int, 2>{gx, gy}, Mat::Zero(q, q)).first;
      return it->second;
    };
    // onsite block: staggered potential plus in-cell vertical hops, kept
    // Hermitian because the fiber only adjoints nonzero translations
    Mat& a00 = at(0, 0);
    for (int y = 0; y < q; ++y) a00(y, y) += stagger * ((y % 2 == 0) ? 1.0 : -1.0);
    for (int y = 0; y + 1 < q; ++y) {
      a00(y + 1, y) += -t1;
      a00(y, y + 1) += -t1;
    }
    // vertical wrap of the top row into the next cell upward
    at(0, 1)(0, q - 1) += -t1;
    for (int y = 0; y < q; ++y) {
      const cdouble peierls = std::exp(cdouble(0.0, phi * static_cast<double>(y)));
      // horizontal hop at height y
      at(1, 0)(y, y) += -t1 * peierls;
      // diagonal hops routed as x-then-y, so they carry the horizontal phase
      if (t2 != 0.0) {
        const int cu = (y + 1 == q) ? 1 : 0;
        at(1, cu)((y + 1) % q, y) += -t2 * peierls;
        const int cd = (y == 0) ? -1 : 0;
        at(1, cd)((y - 1 + q) % q, y) += -t2 * peierls;
      }
    }
    return h;
  }

  // Hermitian fiber at dual-torus point (tx, ty).
  Mat fiber(double tx, double ty) const {
    auto hops = positive_hops();
    Mat f = Mat::Zero(q, q);
    for (auto& [g, m] : hops) {
      if (g[0] == 0 && g[1] == 0) {
        f += m;
        continue;
      }
      const cdouble ph = std::exp(cdouble(0.0, tx * g[0] + ty * g[1]));
      f += ph * m;
      f += std::conj(ph) * m.adjoint().eval();
    }
    return f;
  }
};

// ---------------------------------------------------------------------------
// Band ranges and spectral gaps over a dual-torus grid.
// ---------------------------------------------------------------------------

struct BandGap {
  int bands_below = 0;  // rank of the spectral projector under this gap
  double lo = 0.0;      // top of the band below
  double hi = 0.0;      // bottom of the band above
  double width() const { return hi - lo; }
  double fermi() const { return 0.5 * (lo + hi); }
};

struct BandScan {
  std::vector<double> band_lo, band_hi;
  std::vector<BandGap> gaps;  // only positive-width gaps, ordered by bands_below
  int widest = -1;            // index into gaps; ties resolved to the lowest filling

  const BandGap& chosen() const {
    if (widest < 0) throw infeasible_error("band scan: no positive spectral gap");
    return gaps[static_cast<size_t>(widest)];
  }
};

inline BandScan scan_bands(const FluxTorusModel& model, int grid) {
  if (grid < 4) throw precondition_error("band scan: grid too small");
  const int d = model.dim();
  BandScan s;
  s.band_lo.assign(static_cast<size_t>(d), std::numeric_limits<double>::infinity());
  s.band_hi.assign(static_cast<size_t>(d), -std::numeric_limits<double>::infinity());
  for (int jx = 0; jx < grid; ++jx)
    for (int jy = 0; jy < grid; ++jy) {
      const double tx = 2.0 * pi * jx / grid, ty = 2.0 * pi * jy / grid;
      Eigen::SelfAdjointEigenSolver<Mat> es(model.fiber(tx, ty));
      if (es.info() != Eigen::Success) throw infeasible_error("band scan: eigensolver failed");
      for (int b = 0; b < d; ++b) {
        const double ev = es.eigenvalues()(b);
        s.band_lo[static_cast<size_t>(b)] = std::min(s.band_lo[static_cast<size_t>(b)], ev);
        s.band_hi[static_cast<size_t>(b)] = std::max(s.band_hi[static_cast<size_t>(b)], ev);
      }
    }
  for (int b = 0; b + 1 < d; ++b) {
    BandGap g;
    g.bands_below = b + 1;
    g.lo = s.band_hi[static_cast<size_t>(b)];
    g.hi = s.band_lo[static_cast<size_t>(b) + 1];
    if (g.width() > 0.0) s.gaps.push_back(g);
  }
  double best = 0.0;
  for (size_t i = 0; i < s.gaps.size(); ++i)
    if (s.gaps[i].width() > best * (1.0 + 1e-9)) {
      best = s.gaps[i].width();
      s.widest = static_cast<int>(i);
    }
  return s;
}

// ---------------------------------------------------------------------------
// Families of matrix fibers sampled on an N x N dual-torus grid.
// ---------------------------------------------------------------------------

struct FiberFamily {
  int grid = 0;
  int dim = 0;
  std::vector<Mat> fiber;  // row-major: index jx * grid + jy

  const Mat& at(int jx, int jy) const {
    return fiber[static_cast<size_t>(jx) * static_cast<size_t>(grid) + static_cast<size_t>(jy)];
  }
};

// Spectral projector below the given level; the fiber rank must be constant
// across the grid, otherwise the gap assumption is violated.
inline FiberFamily fermi_projector_family(const FluxTorusModel& model, int grid, double fermi) {
  FiberFamily fam;
  fam.grid = grid;
  fam.dim = model.dim();
  fam.fiber.reserve(static_cast<size_t>(grid) * static_cast<size_t>(grid));
  int rank = -1;
  for (int jx = 0; jx < grid; ++jx)
    for (int jy = 0; jy < grid; ++jy) {
      const double tx = 2.0 * pi * jx / grid, ty = 2.0 * pi * jy / grid;
      Eigen::SelfAdjointEigenSolver<Mat> es(model.fiber(tx, ty));
      if (es.info() != Eigen::Success) throw infeasible_error("projector: eigensolver failed");
      int below = 0;
      while (below < fam.dim && es.eigenvalues()(below) < fermi) ++below;
      if (rank < 0) rank = below;
      if (below != rank)
        throw infeasible_error("projector: band count jumps across the grid (gap violated)");
      Mat p = Mat::Zero(fam.dim, fam.dim);
      for (int b = 0; b < rank; ++b) {
        auto v = es.eigenvectors().col(b);
        p += v * v.adjoint();
      }
      fam.fiber.push_back(std::move(p));
    }
  return fam;
}

// Heat-kernel idempotent fibers of the chiral pair built from the spectrally
// shifted fiber Hamiltonian; a closed-model family whose class is trivial.
inline FiberFamily cm_fiber_family(const FluxTorusModel& model, double fermi, double u,
                                   int grid) {
  FiberFamily fam;
  fam.grid = grid;
  fam.dim = 2 * model.dim();
  fam.fiber.reserve(static_cast<size_t>(grid) * static_cast<size_t>(grid));
  const int d = model.dim();
  for (int jx = 0; jx < grid; ++jx)
    for (int jy = 0; jy < grid; ++jy) {
      const double tx = 2.0 * pi * jx / grid, ty = 2.0 * pi * jy / grid;
      Mat t = model.fiber(tx, ty);
      for (int i = 0; i < d; ++i) t(i, i) -= fermi;
      ChiralPair c = ChiralPair::make(t);
      UMat2<Mat> v = cm_idempotent(c, u);
      Mat dense = Mat::Zero(2 * d, 2 * d);
      for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj) {
          Unital<Mat> e = v.entry(bi, bj);
          Mat blk = Mat::Zero(d, d);
          if (e.body) blk = *e.body;
          blk += e.omega * Mat::Identity(d, d);
          dense.block(bi * d, bj * d, d, d) = blk;
        }
      fam.fiber.push_back(std::move(dense));
    }
  return fam;
}

// ---------------------------------------------------------------------------
// Radix-2 FFT.  Unnormalized; inverse flips the twiddle sign only.
// ---------------------------------------------------------------------------

inline void fft_pow2(std::vector<cdouble>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw precondition_error("fft: length must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
    const cdouble wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        cdouble x = a[i + k];
        cdouble y = a[i + k + len / 2] * w;
        a[i + k] = x + y;
        a[i + k + len / 2] = x - y;
        w *= wl;
      }
    }
  }
}

// In-place 2-D transform of an n x n row-major scalar grid.
inline void fft2_pow2(std::vector<cdouble>& grid, int n, bool inverse) {
  if (static_cast<size_t>(n) * static_cast<size_t>(n) != grid.size())
    throw precondition_error("fft2: shape mismatch");
  std::vector<cdouble> line(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    std::copy_n(grid.begin() + static_cast<size_t>(r) * n, n, line.begin());
    fft_pow2(line, inverse);
    std::copy_n(line.begin(), n, grid.begin() + static_cast<size_t>(r) * n);
  }
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) line[static_cast<size_t>(r)] = grid[static_cast<size_t>(r) * n + c];
    fft_pow2(line, inverse);
    for (int r = 0; r < n; ++r) grid[static_cast<size_t>(r) * n + c] = line[static_cast<size_t>(r)];
  }
}

// ---------------------------------------------------------------------------
// Hopping extraction: inverse Fourier series of a fiber family, wrapped to
// the symmetric translation range, with a fitted decay certificate.
// ---------------------------------------------------------------------------

struct TorusHoppings {
  int grid = 0;
  int dim = 0;
  std::map<std::array<int, 2>, Mat> coef;
  DecayFit fit;               // shell maxima by Chebyshev distance
  double drop_tol = 0.0;
  double dropped_mass = 0.0;  // total norm of discarded coefficients
};

inline TorusHoppings torus_hoppings(const FiberFamily& fam, double drop_tol = 1e-12) {
  const int n = fam.grid, d = fam.dim;
  if (n < 2) throw precondition_error("hoppings: empty fiber family");
  TorusHoppings out;
  out.grid = n;
  out.dim = d;
  out.drop_tol = drop_tol;
  // transform each matrix entry across the grid
  std::vector<std::vector<cdouble>> planes(static_cast<size_t>(d) * d);
  std::vector<cdouble> work(static_cast<size_t>(n) * n);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      for (int jx = 0; jx < n; ++jx)
        for (int jy = 0; jy < n; ++jy)
          work[static_cast<size_t>(jx) * n + jy] = fam.at(jx, jy)(a, b);
      fft2_pow2(work, n, false);
      planes[static_cast<size_t>(a) * d + b] = work;
    }
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> shell_max(static_cast<size_t>(n / 2) + 1, 0.0);
  KahanSum dropped;
  for (int gx = -n / 2; gx < n / 2; ++gx)
    for (int gy = -n / 2; gy < n / 2; ++gy) {
      const int ix = (gx + n) % n, iy = (gy + n) % n;
      Mat m(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          m(a, b) = scale * planes[static_cast<size_t>(a) * d + b][static_cast<size_t>(ix) * n + iy];
      const double nm = frob(m);
      const int shell = std::max(std::abs(gx), std::abs(gy));
      shell_max[static_cast<size_t>(shell)] = std::max(shell_max[static_cast<size_t>(shell)], nm);
      if (nm <= drop_tol) {
        dropped.add(nm);
        continue;
      }
      out.coef.emplace(std::array<int, 2>{gx, gy}, std::move(m));
    }
  out.dropped_mass = dropped.value();
  out.fit = fit_exp_decay(shell_max);
  return out;
}

inline GammaOp<Mat> torus_gamma_op(const TorusHoppings& h,
                                   std::shared_ptr<const GroupSpec> z2) {
  if (!z2 || z2->kind != GroupKind::FreeAbelian || z2->rank != 2)
    throw precondition_error("torus operator: rank-2 free abelian group required");
  GammaOp<Mat> op(std::move(z2));
  for (auto& [g, m] : h.coef) op.set(GElem{g[0], g[1]}, m);
  return op;
}

// ---------------------------------------------------------------------------
// Area-cocycle pairing of a single idempotent family, evaluated through the
// translation-weighted Parseval identity on a doubled (zero-padded) grid so
// the trilinear convolution never wraps.  Returns the degree-2 pairing value
// (pairing constant included); agrees with the group-convolution evaluation
// on the same hopping set to rounding accuracy.
// ---------------------------------------------------------------------------

inline cdouble torus_area_pairing(const TorusHoppings& h) {
  const int n = h.grid, d = h.dim;
  const int m = 2 * n;
  // scatter the weighted hopping families onto padded entry planes
  const size_t plane_sz = static_cast<size_t>(m) * m;
  std::vector<std::vector<cdouble>> pf(static_cast<size_t>(d) * d),
      px(static_cast<size_t>(d) * d), py(static_cast<size_t>(d) * d);
  for (auto& v : pf) v.assign(plane_sz, cdouble(0.0));
  for (auto& v : px) v.assign(plane_sz, cdouble(0.0));
  for (auto& v : py) v.assign(plane_sz, cdouble(0.0));
  for (auto& [g, mat] : h.coef) {
    const int ix = (g[0] + m) % m, iy = (g[1] + m) % m;
    const size_t at = static_cast<size_t>(ix) * m + iy;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const cdouble z = mat(a, b);
        pf[static_cast<size_t>(a) * d + b][at] += z;
        px[static_cast<size_t>(a) * d + b][at] += static_cast<double>(g[0]) * z;
        py[static_cast<size_t>(a) * d + b][at] += static_cast<double>(g[1]) * z;
      }
  }
  // evaluate the three trigonometric interpolants on the doubled grid
  for (auto& v : pf) fft2_pow2(v, m, true);
  for (auto& v : px) fft2_pow2(v, m, true);
  for (auto& v : py) fft2_pow2(v, m, true);
  // tau(P, P, P) with area weights = mean over nodes of tr(f qx qy - f qy qx)
  CKahanSum acc;
  Mat f(d, d), qx(d, d), qy(d, d);
  for (size_t at = 0; at < plane_sz; ++at) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const size_t e = static_cast<size_t>(a) * d + b;
        f(a, b) = pf[e][at];
        qx(a, b) = px[e][at];
        qy(a, b) = py[e][at];
      }
    acc.add(trace_prod(f * qx, qy) - trace_prod(f * qy, qx));
  }
  const cdouble tau = acc.value() / (static_cast<double>(plane_sz));
  return pairing_constant(2) * tau;
}

// ---------------------------------------------------------------------------
// Plaquette-field Chern oracle: link determinants of the Fermi frames on the
// dual-torus grid; the summed plaquette field is 2*pi times an integer.
// ---------------------------------------------------------------------------

inline int fhs_chern(const FluxTorusModel& model, int grid, double fermi) {
  if (grid < 4) throw precondition_error("chern oracle: grid too small");
  const int d = model.dim();
  std::vector<Mat> frames(static_cast<size_t>(grid) * grid);
  int rank = -1;
  for (int jx = 0; jx < grid; ++jx)
    for (int jy = 0; jy < grid; ++jy) {
      const double tx = 2.0 * pi * jx / grid, ty = 2.0 * pi * jy / grid;
      Eigen::SelfAdjointEigenSolver<Mat> es(model.fiber(tx, ty));
      if (es.info() != Eigen::Success) throw infeasible_error("chern oracle: eigensolver failed");
      int below = 0;
      while (below < d && es.eigenvalues()(below) < fermi) ++below;
      if (rank < 0) rank = below;
      if (below != rank)
        throw infeasible_error("chern oracle: band count jumps across the grid");
      frames[static_cast<size_t>(jx) * grid + jy] = es.eigenvectors().leftCols(below);
    }
  if (rank == 0) return 0;
  auto frame = [&](int jx, int jy) -> const Mat& {
    return frames[static_cast<size_t>((jx % grid + grid) % grid) * grid +
                  static_cast<size_t>((jy % grid + grid) % grid)];
  };
  auto link = [&](int jx, int jy, int dx, int dy) -> cdouble {
    const cdouble det = (frame(jx, jy).adjoint() * frame(jx + dx, jy + dy)).determinant();
    const double mag = std::abs(det);
    if (mag < 1e-6) throw infeasible_error("chern oracle: degenerate link determinant");
    return det / mag;
  };
  CKahanSum field;
  for (int jx = 0; jx < grid; ++jx)
    for (int jy = 0; jy < grid; ++jy) {
      const cdouble hol = link(jx, jy, 1, 0) * link(jx + 1, jy, 0, 1) /
                          (link(jx, jy + 1, 1, 0) * link(jx, jy, 0, 1));
      field.add(std::log(hol));  // principal branch: plaquette field in (-pi, pi]
    }
  const double total = field.value().imag() / (2.0 * pi);
  const long c = std::lround(total);
  if (std::abs(total - static_cast<double>(c)) > 1e-6)
    throw infeasible_error("chern oracle: plaquette field does not sum to an integer");
  return static_cast<int>(c);
}

// Filling-to-Chern arithmetic for flux p/q at a gap with the given number of
// bands below, reduced to coprime flux; unique when the folded solution is
// interior to the symmetric range.
inline int diophantine_chern(int p, int q, int bands_below) {
  if (p <= 0 || q <= 0) throw precondition_error("filling arithmetic: positive flux required");
  const int g = std::gcd(p, q);
  const int pr = p / g, qr = q / g;
  if (bands_below % g != 0)
    throw infeasible_error("filling arithmetic: gap absent in the reduced spectrum");
  const int r = bands_below / g;
  if (qr == 1) return 0;
  // solve pr * t = r (mod qr) by scanning the folded range
  int sol = 0, count = 0;
  for (int t = -(qr - 1) / 2; t <= qr / 2; ++t)
    if (((pr * t - r) % qr + qr) % qr == 0) {
      sol = t;
      ++count;
    }
  if (count != 1 || 2 * std::abs(sol) == qr)
    throw infeasible_error("filling arithmetic: ambiguous folded solution");
  return sol;
}

}  // namespace bhi
