#include "gausschan/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "detail.hpp"

namespace gausschan {

using detail::cat;

void validate(const Tolerance& tol) {
  if (!std::isfinite(tol.abs_eps) || !std::isfinite(tol.rel_eps) ||
      tol.abs_eps < 0.0 || tol.rel_eps < 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                cat("tolerance must be finite and non-negative, got abs=",
                    tol.abs_eps, " rel=", tol.rel_eps));
  }
}

RealMatrix symplectic_form(int modes) {
  RealMatrix sigma = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    sigma(2 * j, 2 * j + 1) = 1.0;
    sigma(2 * j + 1, 2 * j) = -1.0;
  }
  return sigma;
}

double symplectic_residual(const RealMatrix& s) {
  const RealMatrix sigma = symplectic_form(static_cast<int>(s.rows() / 2));
  return linalg::spectral_norm(s * sigma * s.transpose() - sigma);
}

int modes_of(const RealMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch,
                cat(what, " must be 2n x 2n with n >= 1, got ", m.rows(), "x",
                    m.cols()));
  }
  return static_cast<int>(m.rows() / 2);
}

namespace linalg {

RealMatrix right_solve(const RealMatrix& a, const RealMatrix& b) {
  return b.transpose().partialPivLu().solve(a.transpose()).transpose();
}

RealMatrix symmetric_part(const RealMatrix& m) {
  return 0.5 * (m + m.transpose());
}

RealMatrix antisymmetric_part(const RealMatrix& m) {
  return 0.5 * (m - m.transpose());
}

int numerical_rank(const RealMatrix& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  const Eigen::VectorXd s = Eigen::JacobiSVD<RealMatrix>(m).singularValues();
  const double threshold = tol.bound(s(0));
  return static_cast<int>((s.array() > threshold).count());
}

RealMatrix null_space(const RealMatrix& m, const Tolerance& tol) {
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double threshold = s.size() > 0 ? tol.bound(s(0)) : 0.0;
  const auto rank = static_cast<Eigen::Index>((s.array() > threshold).count());
  return svd.matrixV().rightCols(m.cols() - rank);
}

RealMatrix range_basis(const RealMatrix& m, const Tolerance& tol) {
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double threshold = s.size() > 0 ? tol.bound(s(0)) : 0.0;
  const auto rank = static_cast<Eigen::Index>((s.array() > threshold).count());
  return svd.matrixU().leftCols(rank);
}

namespace {

Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  detail::require_square_finite(m, "matrix");
  if (m.size() == 0) return Eigen::VectorXd();
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double min_eig_hermitian(const ComplexMatrix& m) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev(0);
}

bool psd_check(const ComplexMatrix& m, const Tolerance& tol) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(m);
  if (ev.size() == 0) return true;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol.bound(norm);
}

bool psd_check(const RealMatrix& m, const Tolerance& tol) {
  return psd_check(ComplexMatrix(m.cast<Complex>()), tol);
}

RealMatrix expm(const RealMatrix& m) {
  detail::require_square_finite(m, "exponent");
  RealMatrix result = m.exp();
  if (!result.allFinite()) {
    throw Error(ErrorKind::Overflow,
                cat("matrix exponential overflows (||m|| = ", spectral_norm(m), ")"));
  }
  return result;
}

bool JordanNegativeReport::paired() const {
  std::map<int, int> counts;
  for (int size : block_sizes) ++counts[size];
  return std::all_of(counts.begin(), counts.end(),
                     [](const auto& kv) { return kv.second % 2 == 0; });
}

namespace {

struct EigenCluster {
  Complex center;
  int size = 0;
};

// Single-linkage clustering of the spectrum. Defective eigenvalues split into
// rings of radius ~eps^(1/k); the radius below keeps blocks up to size 3
// together at the default tolerance.
std::vector<EigenCluster> cluster_spectrum(const RealMatrix& x, double norm,
                                           const Tolerance& tol, double& radius) {
  const Eigen::VectorXcd ev = Eigen::EigenSolver<RealMatrix>(x, false).eigenvalues();
  const auto n = static_cast<int>(ev.size());
  radius = std::sqrt(tol.bound(norm) * std::max(norm, 1.0));

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) <= radius) parent[find(i)] = find(j);
    }
  }
  std::map<int, EigenCluster> clusters;
  for (int i = 0; i < n; ++i) {
    auto& c = clusters[find(i)];
    c.center += ev(i);
    ++c.size;
  }
  std::vector<EigenCluster> out;
  for (auto& [root, c] : clusters) {
    c.center /= static_cast<double>(c.size);
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.center.real() < b.center.real();
  });
  return out;
}

// Rank of m with an ambiguity band between the zero threshold and
// sqrt(threshold * sigma_max); values inside the band are not decided.
int decisive_rank(const RealMatrix& m, const Tolerance& tol, double eigenvalue) {
  const Eigen::VectorXd s = Eigen::JacobiSVD<RealMatrix>(m).singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double zero = tol.bound(s(0));
  const double ambiguous = std::sqrt(zero * s(0));
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > ambiguous) {
      ++rank;
    } else if (s(i) > zero) {
      throw Error(ErrorKind::IllConditioned,
                  cat("rank decision for eigenvalue ", eigenvalue,
                      " is ambiguous: singular value ", s(i),
                      " lies between ", zero, " and ", ambiguous));
    }
  }
  return rank;
}

JordanNegativeReport jordan_structure(const RealMatrix& x, double lambda,
                                      int multiplicity, const Tolerance& tol) {
  const auto n = x.rows();
  const RealMatrix shifted = x - lambda * RealMatrix::Identity(n, n);
  std::vector<int> rank(multiplicity + 2);
  rank[0] = static_cast<int>(n);
  RealMatrix power = RealMatrix::Identity(n, n);
  for (int k = 1; k <= multiplicity + 1; ++k) {
    power = power * shifted;
    rank[k] = decisive_rank(power, tol, lambda);
  }
  const int algebraic = rank[0] - rank[multiplicity];
  if (algebraic != multiplicity || rank[multiplicity] != rank[multiplicity + 1]) {
    throw Error(ErrorKind::IllConditioned,
                cat("Jordan structure at ", lambda, " is inconsistent: cluster of ",
                    multiplicity, " eigenvalues but rank deficiency ", algebraic));
  }
  JordanNegativeReport report;
  report.eigenvalue = lambda;
  // at_least[k] = number of blocks of size >= k
  auto at_least = [&](int k) { return rank[k - 1] - rank[k]; };
  for (int k = multiplicity; k >= 1; --k) {
    const int exact = at_least(k) - at_least(k + 1);
    for (int b = 0; b < exact; ++b) report.block_sizes.push_back(k);
  }
  return report;
}

std::vector<EigenCluster> negative_clusters(const RealMatrix& x, double norm,
                                            const Tolerance& tol) {
  double radius = 0.0;
  std::vector<EigenCluster> out;
  for (const auto& c : cluster_spectrum(x, norm, tol, radius)) {
    if (c.center.real() < 0.0 && std::abs(c.center.imag()) <= radius) {
      out.push_back(c);
    }
  }
  return out;
}

RealMatrix principal_log(const RealMatrix& x) {
  if (x.size() == 0) return x;
  RealMatrix log = x.log();
  if (!log.allFinite()) {
    throw Error(ErrorKind::IllConditioned, "principal logarithm is not finite");
  }
  return log;
}

}  // namespace

RealLogAnalysis real_log_exists(const RealMatrix& x, const Tolerance& tol) {
  detail::require_square_finite(x, "x");
  RealLogAnalysis out;
  if (x.size() == 0) {
    out.exists = true;
    return out;
  }
  const Eigen::VectorXd s = Eigen::JacobiSVD<RealMatrix>(x).singularValues();
  if (s(s.size() - 1) <= tol.bound(s(0))) {
    out.singular = true;
    return out;
  }
  for (const auto& c : negative_clusters(x, s(0), tol)) {
    out.negative.push_back(jordan_structure(x, c.center.real(), c.size, tol));
  }
  out.exists = std::all_of(out.negative.begin(), out.negative.end(),
                           [](const auto& r) { return r.paired(); });
  return out;
}

RealMatrix real_log(const RealMatrix& x, const Tolerance& tol) {
  const RealLogAnalysis analysis = real_log_exists(x, tol);
  if (!analysis.exists) {
    if (analysis.singular) throw Error(ErrorKind::NoRealLog, "x is singular");
    std::string detail_text;
    for (const auto& r : analysis.negative) {
      detail_text += cat(" lambda=", r.eigenvalue, " blocks=[");
      for (int b : r.block_sizes) detail_text += cat(b, ",");
      detail_text += "]";
    }
    throw Error(ErrorKind::NoRealLog,
                "negative eigenvalue with unpaired Jordan blocks:" + detail_text);
  }

  const auto n = x.rows();
  RealMatrix log;
  if (analysis.negative.empty()) {
    log = principal_log(x);
  } else {
    // Split R^n into the negative eigenspaces and the complementary invariant
    // subspace, then take logs blockwise.
    const RealMatrix identity = RealMatrix::Identity(n, n);
    std::vector<RealMatrix> eigenspaces;
    RealMatrix annihilator = identity;
    Eigen::Index negative_dim = 0;
    for (const auto& r : analysis.negative) {
      if (r.block_sizes.front() > 1) {
        throw Error(ErrorKind::IllConditioned,
                    cat("negative eigenvalue ", r.eigenvalue,
                        " is defective; only semisimple pairs are supported"));
      }
      const RealMatrix shifted = x - r.eigenvalue * identity;
      RealMatrix basis = null_space(shifted, tol);
      if (basis.cols() != static_cast<Eigen::Index>(r.block_sizes.size())) {
        throw Error(ErrorKind::IllConditioned,
                    cat("eigenspace of ", r.eigenvalue, " has dimension ",
                        basis.cols(), ", expected ", r.block_sizes.size()));
      }
      negative_dim += basis.cols();
      eigenspaces.push_back(std::move(basis));
      annihilator = annihilator * shifted;
    }
    const RealMatrix rest = range_basis(annihilator, tol);
    if (rest.cols() != n - negative_dim) {
      throw Error(ErrorKind::IllConditioned,
                  "complementary invariant subspace has the wrong dimension");
    }
    RealMatrix change(n, n);
    Eigen::Index col = 0;
    for (const auto& basis : eigenspaces) {
      change.middleCols(col, basis.cols()) = basis;
      col += basis.cols();
    }
    change.rightCols(rest.cols()) = rest;
    const Eigen::VectorXd cs = Eigen::JacobiSVD<RealMatrix>(change).singularValues();
    if (cs(cs.size() - 1) <= tol.bound(cs(0))) {
      throw Error(ErrorKind::IllConditioned, "invariant subspaces are not complementary");
    }
    const Eigen::PartialPivLU<RealMatrix> lu(change);
    const RealMatrix inverse = lu.inverse();
    const RealMatrix block_form = inverse * x * change;

    RealMatrix block_log = RealMatrix::Zero(n, n);
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < eigenspaces.size(); ++k) {
      const Eigen::Index m = eigenspaces[k].cols();
      const double magnitude = std::log(-analysis.negative[k].eigenvalue);
      for (Eigen::Index j = 0; j < m; j += 2) {
        block_log(offset + j, offset + j) = magnitude;
        block_log(offset + j + 1, offset + j + 1) = magnitude;
        block_log(offset + j, offset + j + 1) = std::numbers::pi;
        block_log(offset + j + 1, offset + j) = -std::numbers::pi;
      }
      offset += m;
    }
    if (offset < n) {
      block_log.bottomRightCorner(n - offset, n - offset) =
          principal_log(block_form.bottomRightCorner(n - offset, n - offset));
    }
    log = change * block_log * inverse;
  }

  const double gap = spectral_norm(expm(log) - x);
  if (gap > 1e-6 * std::max(1.0, spectral_norm(x))) {
    throw Error(ErrorKind::IllConditioned,
                cat("logarithm round trip misses by ", gap));
  }
  return log;
}

AntisymmetricCanonical antisym_canonical(const RealMatrix& m, const Tolerance& tol) {
  detail::require_square_finite(m, "m");
  const auto n = m.rows();
  if (n % 2 != 0) {
    throw Error(ErrorKind::DimensionMismatch, cat("dimension must be even, got ", n));
  }
  const double norm = spectral_norm(m);
  if (spectral_norm(m + m.transpose()) > tol.bound(norm)) {
    throw Error(ErrorKind::NotAntisymmetric,
                cat("||m + m^T|| = ", spectral_norm(m + m.transpose())));
  }
  AntisymmetricCanonical out;
  if (n == 0) return out;

  const RealMatrix a = antisymmetric_part(m);
  Eigen::RealSchur<RealMatrix> schur(a);
  const RealMatrix& t = schur.matrixT();
  const RealMatrix& q = schur.matrixU();

  struct Block {
    double b;
    Eigen::Index first, second;
  };
  std::vector<Block> blocks;
  std::vector<Eigen::Index> zeros;
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      blocks.push_back({0.5 * (t(i, i + 1) - t(i + 1, i)), i, i + 1});
      i += 2;
    } else {
      zeros.push_back(i);
      i += 1;
    }
  }
  for (std::size_t k = 0; k + 1 < zeros.size(); k += 2) {
    blocks.push_back({0.0, zeros[k], zeros[k + 1]});
  }
  for (auto& blk : blocks) {
    if (blk.b < 0.0) {
      std::swap(blk.first, blk.second);
      blk.b = -blk.b;
    }
  }
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const Block& l, const Block& r) { return l.b > r.b; });

  out.basis.resize(n, n);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    out.basis.col(2 * k) = q.col(blocks[k].first);
    out.basis.col(2 * k + 1) = q.col(blocks[k].second);
    out.b.push_back(blocks[k].b);
  }
  return out;
}

RealMatrix antisym_factor(const RealMatrix& m, const RealMatrix& sigma,
                          const Tolerance& tol) {
  detail::require_square_finite(m, "m");
  if (sigma.rows() != m.rows() || sigma.cols() != m.cols() || m.rows() % 2 != 0 ||
      sigma != symplectic_form(static_cast<int>(m.rows() / 2))) {
    throw Error(ErrorKind::DimensionMismatch,
                "sigma must be the interleaved symplectic form matching m");
  }
  const AntisymmetricCanonical canon = antisym_canonical(m, tol);
  RealMatrix factor = canon.basis;
  for (std::size_t k = 0; k < canon.b.size(); ++k) {
    factor.middleCols(2 * static_cast<Eigen::Index>(k), 2) *= std::sqrt(canon.b[k]);
  }
  const double gap = spectral_norm(factor * sigma * factor.transpose() - m);
  if (gap > 1e-8 * std::max(1.0, spectral_norm(m))) {
    throw Error(ErrorKind::NumericalFailure,
                cat("antisymmetric factorisation residual ", gap));
  }
  return factor;
}

PolarFactors polar(const RealMatrix& s, const Tolerance& tol) {
  detail::require_square_finite(s, "s");
  Eigen::JacobiSVD<RealMatrix> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= tol.bound(sv(0))) {
    throw Error(ErrorKind::Singular, "polar decomposition needs a nonsingular matrix");
  }
  const RealMatrix& u = svd.matrixU();
  PolarFactors out;
  out.positive = symmetric_part(u * sv.asDiagonal() * u.transpose());
  out.orthogonal = u * svd.matrixV().transpose();
  return out;
}

WilliamsonForm williamson(const RealMatrix& m, const Tolerance& tol) {
  const int modes = modes_of(m, "m");
  detail::require_finite(m, "m");
  const double norm = spectral_norm(m);
  if (spectral_norm(m - m.transpose()) > tol.bound(norm)) {
    throw Error(ErrorKind::NotSymmetric, "Williamson form needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetric_part(m));
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev(0) <= tol.bound(ev(ev.size() - 1))) {
    throw Error(ErrorKind::NotPositiveDefinite,
                cat("smallest eigenvalue ", ev(0), " is not positive"));
  }
  const RealMatrix& v = es.eigenvectors();
  const RealMatrix inv_sqrt = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  const RealMatrix sigma = symplectic_form(modes);
  const AntisymmetricCanonical canon =
      antisym_canonical(antisymmetric_part(inv_sqrt * sigma * inv_sqrt), tol);

  WilliamsonForm out;
  Eigen::VectorXd scale(2 * modes);
  for (int j = 0; j < modes; ++j) {
    const double y = 1.0 / canon.b[j];
    out.symplectic_eigenvalues.push_back(y);
    scale(2 * j) = scale(2 * j + 1) = std::sqrt(y);
  }
  out.symplectic = scale.asDiagonal() * canon.basis.transpose() * inv_sqrt;

  RealMatrix target = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    target(2 * j, 2 * j) = target(2 * j + 1, 2 * j + 1) = out.symplectic_eigenvalues[j];
  }
  const double gap = spectral_norm(out.symplectic * m * out.symplectic.transpose() - target);
  if (gap > 1e-7 * std::max(1.0, norm) ||
      symplectic_residual(out.symplectic) > 1e-7 * std::max(1.0, spectral_norm(out.symplectic))) {
    throw Error(ErrorKind::NumericalFailure, cat("Williamson residual ", gap));
  }
  return out;
}

namespace {

Eigen::VectorXd vec_rows(const RealMatrix& m) {
  Eigen::VectorXd v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  }
  return v;
}

RealMatrix unvec_rows(const Eigen::VectorXd& v, Eigen::Index d) {
  RealMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  }
  return m;
}

double min_pair_sum(const RealMatrix& a) {
  const Eigen::VectorXcd ev = Eigen::EigenSolver<RealMatrix>(a, false).eigenvalues();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    for (Eigen::Index j = i; j < ev.size(); ++j) best = std::min(best, std::abs(ev(i) + ev(j)));
  }
  return best;
}

}  // namespace

RealMatrix kron_sum_solve(const RealMatrix& a, const RealMatrix& rhs,
                          const Tolerance& tol) {
  detail::require_square_finite(a, "a");
  detail::require_square_finite(rhs, "rhs");
  if (a.rows() != rhs.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "a and rhs must have the same size");
  }
  const Eigen::Index d = a.rows();
  if (d == 0) return rhs;
  const RealMatrix identity = RealMatrix::Identity(d, d);
  // Row-major vec: vec(aZ) = (a ⊗ 1) vec Z and vec(Z aᵀ) = (1 ⊗ a) vec Z.
  RealMatrix kron_sum = RealMatrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      kron_sum.block(i * d, k * d, d, d) += a(i, k) * identity;
      kron_sum.block(i * d, k * d, d, d) += identity(i, k) * a;
    }
  }
  const Eigen::VectorXd b = vec_rows(rhs);
  Eigen::JacobiSVD<RealMatrix> svd(kron_sum, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double threshold = tol.bound(s(0));
  const auto rank = static_cast<Eigen::Index>((s.array() > threshold).count());

  Eigen::VectorXd z = Eigen::VectorXd::Zero(d * d);
  for (Eigen::Index i = 0; i < rank; ++i) {
    z += (svd.matrixU().col(i).dot(b) / s(i)) * svd.matrixV().col(i);
  }
  if (rank < d * d) {
    const double residual = (kron_sum * z - b).norm();
    if (residual > tol.bound(b.norm())) {
      throw Error(ErrorKind::SingularKroneckerSum,
                  cat("a has an eigenvalue pair with |lambda_i + lambda_j| = ",
                      min_pair_sum(a), "; rhs is outside the range (residual ",
                      residual, ")"));
    }
  }
  RealMatrix solution = unvec_rows(z, d);
  if (spectral_norm(rhs - rhs.transpose()) <= tol.bound(spectral_norm(rhs))) {
    solution = symmetric_part(solution);
  }
  return solution;
}

RealMatrix vanloan_noise_integral(const RealMatrix& f, const RealMatrix& c, double t) {
  detail::require_square_finite(f, "f");
  detail::require_square_finite(c, "c");
  if (f.rows() != c.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "f and c must have the same size");
  }
  if (!std::isfinite(t) || t < 0.0) {
    throw Error(ErrorKind::InvalidArgument, cat("time must be finite and >= 0, got ", t));
  }
  const Eigen::Index d = f.rows();
  RealMatrix block = RealMatrix::Zero(2 * d, 2 * d);
  block.topLeftCorner(d, d) = -f.transpose();
  block.topRightCorner(d, d) = c;
  block.bottomRightCorner(d, d) = f;
  const RealMatrix e = expm(t * block);
  RealMatrix integral = e.bottomRightCorner(d, d).transpose() * e.topRightCorner(d, d);
  if (c == c.transpose()) integral = symmetric_part(integral);
  return integral;
}

}  // namespace linalg
}  // namespace gausschan
