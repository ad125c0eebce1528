#pragma once

// Random instances and independent reference computations shared by the
// test binaries. Nothing here calls into the decision logic under test.

#include <cmath>
#include <functional>
#include <random>

#include "gausschan/channel.hpp"
#include "gausschan/semigroup.hpp"

namespace testsupport {

using gausschan::ComplexMatrix;
using gausschan::RealMatrix;

using Rng = std::mt19937_64;

inline RealMatrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = dist(rng);
  }
  return m;
}

inline RealMatrix random_symmetric(Rng& rng, Eigen::Index d, double scale = 1.0) {
  const RealMatrix g = gaussian_matrix(rng, d, d, scale);
  return (g + g.transpose()) / 2.0;
}

inline RealMatrix random_antisymmetric(Rng& rng, Eigen::Index d, double scale = 1.0) {
  const RealMatrix g = gaussian_matrix(rng, d, d, scale);
  return (g - g.transpose()) / 2.0;
}

inline RealMatrix random_psd(Rng& rng, Eigen::Index d, double scale = 1.0) {
  const RealMatrix g = gaussian_matrix(rng, d, d, scale);
  return g * g.transpose();
}

// Plain Taylor series with scaling and squaring; independent of Eigen's
// Padé-based exponential.
inline RealMatrix taylor_expm(const RealMatrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  const RealMatrix a = m / std::ldexp(1.0, squarings);
  RealMatrix term = RealMatrix::Identity(m.rows(), m.cols());
  RealMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// exp(σ H) with H symmetric is symplectic; products of two of them reach
// non-normal, non-positive symplectic matrices.
inline RealMatrix random_symplectic(Rng& rng, int modes, double scale = 0.4) {
  const auto d = 2 * modes;
  const RealMatrix sigma = gausschan::symplectic_form(modes);
  const RealMatrix s1 = taylor_expm(sigma * random_symmetric(rng, d, scale));
  const RealMatrix s2 = taylor_expm(sigma * random_symmetric(rng, d, scale));
  return s1 * s2;
}

// |i(σ − XσXᵀ)| is the smallest noise the CP condition allows along each
// eigendirection; adding a random PSD part gives a generic valid channel.
inline RealMatrix minimal_noise(const RealMatrix& x) {
  const int modes = static_cast<int>(x.rows() / 2);
  const RealMatrix sigma = gausschan::symplectic_form(modes);
  const RealMatrix a = sigma - x * sigma * x.transpose();
  const Eigen::SelfAdjointEigenSolver<RealMatrix> eig(a.transpose() * a);
  const RealMatrix root = eig.eigenvectors() *
                          eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          eig.eigenvectors().transpose();
  return (root + root.transpose()) / 2.0;
}

inline gausschan::GaussianChannel random_channel(Rng& rng, int modes, double extra = 0.5) {
  const auto d = 2 * modes;
  const RealMatrix x = gaussian_matrix(rng, d, d, 0.7);
  const RealMatrix y = minimal_noise(x) + random_psd(rng, d, extra) / static_cast<double>(d);
  return {x, (y + y.transpose()) / 2.0, gausschan::Tolerance::uniform(1e-8)};
}

inline gausschan::GaussianChannel random_singular_channel(Rng& rng, int modes) {
  const auto d = 2 * modes;
  RealMatrix x = gaussian_matrix(rng, d, d, 0.7);
  std::uniform_int_distribution<Eigen::Index> drop(1, d - 1);
  const Eigen::Index rank = drop(rng);
  const RealMatrix basis = gaussian_matrix(rng, d, rank);
  x = x * basis * (basis.transpose() * basis).inverse() * basis.transpose();
  const RealMatrix y = minimal_noise(x) + random_psd(rng, d, 0.5) / static_cast<double>(d);
  return {x, (y + y.transpose()) / 2.0, gausschan::Tolerance::uniform(1e-8)};
}

inline gausschan::Generator random_generator(Rng& rng, int modes, double scale = 0.5) {
  const auto d = 2 * modes;
  const RealMatrix a = random_antisymmetric(rng, d, scale);
  // ‖A‖ ≤ Frobenius norm, so this B dominates iA.
  const RealMatrix b = a.norm() * RealMatrix::Identity(d, d) + random_psd(rng, d, scale) / static_cast<double>(d);
  const RealMatrix h = random_symmetric(rng, d, scale);
  return {a, (b + b.transpose()) / 2.0, h};
}

inline double max_abs(const RealMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double rel_diff(const RealMatrix& a, const RealMatrix& b) {
  const double scale = std::max({1.0, max_abs(a), max_abs(b)});
  return max_abs(a - b) / scale;
}

// ---- oracles ----------------------------------------------------------

// Hermitian m is PSD iff every elementary symmetric function of its
// eigenvalues is ≥ 0, i.e. every sum of k×k principal minors is ≥ 0.
inline bool psd_by_principal_minors(const ComplexMatrix& m) {
  const auto n = static_cast<int>(m.rows());
  for (int k = 1; k <= n; ++k) {
    double sum = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      ComplexMatrix sub(k, k);
      int r = 0;
      for (int i = 0; i < n; ++i) {
        if (!(mask & (1u << i))) continue;
        int c = 0;
        for (int j = 0; j < n; ++j) {
          if (mask & (1u << j)) sub(r, c++) = m(i, j);
        }
        ++r;
      }
      sum += sub.determinant().real();
    }
    if (sum < 0.0) return false;
  }
  return true;
}

// Adaptive Simpson quadrature of a matrix-valued integrand.
inline RealMatrix adaptive_simpson(const std::function<RealMatrix(double)>& f, double a, double b,
                                   double eps, int depth = 0) {
  const double c = (a + b) / 2.0;
  const RealMatrix fa = f(a), fb = f(b), fc = f(c);
  const RealMatrix whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  const RealMatrix left = (c - a) / 6.0 * (fa + 4.0 * f((a + c) / 2.0) + fc);
  const RealMatrix right = (b - c) / 6.0 * (fc + 4.0 * f((c + b) / 2.0) + fb);
  if (depth > 18 || max_abs(left + right - whole) <= 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, c, eps / 2.0, depth + 1) + adaptive_simpson(f, c, b, eps / 2.0, depth + 1);
}

// ∫₀ᵗ exp(s fᵀ) c exp(s f) ds by quadrature.
inline RealMatrix noise_integral_oracle(const RealMatrix& f, const RealMatrix& c, double t) {
  if (t == 0.0) return RealMatrix::Zero(c.rows(), c.cols());
  return adaptive_simpson([&](double s) {
    const RealMatrix e = taylor_expm(s * f);
    return RealMatrix(e.transpose() * c * e);
  }, 0.0, t, 1e-10);
}

}  // namespace testsupport
