#include "gausschan/channel.hpp"

#include <cassert>
#include <cmath>

#include "detail.hpp"

namespace gausschan {

using detail::cat;
using linalg::spectral_norm;

namespace {

ComplexMatrix cp_matrix(const RealMatrix& x, const RealMatrix& y) {
  const RealMatrix sigma = symplectic_form(static_cast<int>(x.rows() / 2));
  const RealMatrix im = x * sigma * x.transpose() - sigma;
  ComplexMatrix p(x.rows(), x.cols());
  p.real() = y;
  p.imag() = im;
  return p;
}

void check_pair_shape(const RealMatrix& x, const RealMatrix& y, const Tolerance& tol) {
  modes_of(x, "x");
  if (y.rows() != x.rows() || y.cols() != x.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                cat("y must be ", x.rows(), "x", x.cols(), ", got ", y.rows(), "x", y.cols()));
  }
  detail::require_finite(x, "x");
  detail::require_finite(y, "y");
  const double asym = spectral_norm(y - y.transpose());
  if (asym > tol.bound(spectral_norm(y))) {
    throw Error(ErrorKind::NotSymmetric, cat("||y - y^T|| = ", asym));
  }
}

}  // namespace

GaussianChannel::GaussianChannel(RealMatrix x, RealMatrix y, const Tolerance& tol) {
  check_pair_shape(x, y, tol);
  if (!linalg::psd_check(cp_matrix(x, y), tol)) {
    throw Error(ErrorKind::NotCP,
                cat("Y + i(X sigma X^T - sigma) has eigenvalue ", cp_margin(x, y)));
  }
  modes_ = static_cast<int>(x.rows() / 2);
  x_ = std::move(x);
  y_ = std::move(y);
}

GaussianChannel::GaussianChannel(Unchecked, RealMatrix x, RealMatrix y)
    : modes_(static_cast<int>(x.rows() / 2)), x_(std::move(x)), y_(std::move(y)) {}

GaussianChannel GaussianChannel::identity(int modes) {
  const auto d = 2 * modes;
  return {RealMatrix::Identity(d, d), RealMatrix::Zero(d, d)};
}

GaussianChannel GaussianChannel::beam_splitter(int modes, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::InvalidArgument, cat("eta must be finite and >= 0, got ", eta));
  }
  const auto d = 2 * modes;
  return {std::sqrt(eta) * RealMatrix::Identity(d, d),
          std::abs(1.0 - eta) * RealMatrix::Identity(d, d)};
}

GaussianState::GaussianState(RealVector mean, RealMatrix cov, const Tolerance& tol) {
  const int modes = modes_of(cov, "cov");
  if (mean.size() != cov.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                cat("mean must have length ", cov.rows(), ", got ", mean.size()));
  }
  detail::require_finite(mean, "mean");
  detail::require_finite(cov, "cov");
  if (spectral_norm(cov - cov.transpose()) > tol.bound(spectral_norm(cov))) {
    throw Error(ErrorKind::NotSymmetric, "covariance matrix must be symmetric");
  }
  ComplexMatrix test(cov.rows(), cov.cols());
  test.real() = cov;
  test.imag() = symplectic_form(modes);
  if (!linalg::psd_check(test, tol)) {
    throw Error(ErrorKind::NotPSD,
                cat("cov + i sigma has eigenvalue ", linalg::min_eig_hermitian(test)));
  }
  modes_ = modes;
  mean_ = std::move(mean);
  cov_ = std::move(cov);
}

GaussianState GaussianState::vacuum(int modes) {
  return {RealVector::Zero(2 * modes), RealMatrix::Identity(2 * modes, 2 * modes)};
}

PositiveClassRep::PositiveClassRep(ComplexMatrix p, const Tolerance& tol) {
  if (p.rows() != p.cols() || p.rows() % 2 != 0 || p.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch,
                cat("p must be 2n x 2n, got ", p.rows(), "x", p.cols()));
  }
  detail::require_finite(p, "p");
  const double norm = spectral_norm(p);
  if (spectral_norm(ComplexMatrix(p - p.adjoint())) > tol.bound(norm)) {
    throw Error(ErrorKind::NotPSD, "p is not Hermitian");
  }
  if (!linalg::psd_check(p, tol)) {
    throw Error(ErrorKind::NotPSD, cat("p has eigenvalue ", linalg::min_eig_hermitian(p)));
  }
  p_ = std::move(p);
}

double cp_margin(const RealMatrix& x, const RealMatrix& y) {
  return linalg::min_eig_hermitian(cp_matrix(x, y));
}

bool cp_check(const RealMatrix& x, const RealMatrix& y, const Tolerance& tol) {
  check_pair_shape(x, y, tol);
  return linalg::psd_check(cp_matrix(x, y), tol);
}

GaussianChannel compose(const GaussianChannel& first, const GaussianChannel& second) {
  if (first.modes() != second.modes()) {
    throw Error(ErrorKind::DimensionMismatch,
                cat("cannot compose channels on ", first.modes(), " and ",
                    second.modes(), " modes"));
  }
  RealMatrix x = first.x() * second.x();
  RealMatrix y = first.y() + first.x() * second.y() * first.x().transpose();
  assert(cp_check(x, y, Tolerance::uniform(1e-7)));
  return {GaussianChannel::Unchecked{}, std::move(x), std::move(y)};
}

GaussianChannel conjugate(const RealMatrix& s, const GaussianChannel& c) {
  if (s.rows() != c.x().rows() || s.cols() != c.x().cols()) {
    throw Error(ErrorKind::DimensionMismatch, "conjugating matrix has the wrong size");
  }
  const double norm = spectral_norm(s);
  if (symplectic_residual(s) > Tolerance{}.bound(std::max(1.0, norm * norm))) {
    throw Error(ErrorKind::NotSymplectic,
                cat("||S sigma S^T - sigma|| = ", symplectic_residual(s)));
  }
  RealMatrix x = linalg::right_solve(s * c.x(), s);
  RealMatrix y = linalg::symmetric_part(s * c.y() * s.transpose());
  return {GaussianChannel::Unchecked{}, std::move(x), std::move(y)};
}

GaussianState apply_to_state(const GaussianChannel& c, const GaussianState& s) {
  if (c.modes() != s.modes()) {
    throw Error(ErrorKind::DimensionMismatch, "channel and state mode counts differ");
  }
  RealMatrix cov = linalg::symmetric_part(c.x() * s.cov() * c.x().transpose() + c.y());
  return {c.x() * s.mean(), std::move(cov), Tolerance::uniform(1e-8)};
}

RealMatrix embed_pi(const GaussianChannel& c) {
  const Eigen::Index d = c.x().rows();
  const Eigen::Index dd = d * d;
  RealMatrix pi = RealMatrix::Zero(dd + 1 + d, dd + 1 + d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      pi.block(i * d, k * d, d, d) = c.x()(i, k) * c.x();
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) pi(i * d + j, dd) = c.y()(i, j);
  }
  pi(dd, dd) = 1.0;
  pi.bottomRightCorner(d, d) = c.x();
  return pi;
}

ReversibilityCertificate reversibility_certificate(const GaussianChannel& c) {
  return {symplectic_residual(c.x()), spectral_norm(c.y())};
}

bool is_reversible(const GaussianChannel& c, const Tolerance& tol) {
  const auto cert = reversibility_certificate(c);
  const double norm = spectral_norm(c.x());
  const double scale = std::max(1.0, norm * norm);
  return cert.symplectic_residual <= tol.bound(scale) && cert.noise_norm <= tol.bound(scale);
}

PositiveClassRep p_map(const GaussianChannel& c) {
  return PositiveClassRep(cp_matrix(c.x(), c.y()), Tolerance::uniform(1e-7));
}

GaussianChannel channel_from_positive(const PositiveClassRep& p, const Tolerance& tol) {
  const int modes = p.modes();
  const RealMatrix sigma = symplectic_form(modes);
  RealMatrix y = linalg::symmetric_part(p.p().real());
  const RealMatrix target = linalg::antisymmetric_part(p.p().imag()) + sigma;
  RealMatrix x = linalg::antisym_factor(target, sigma, tol);
  GaussianChannel out(std::move(x), std::move(y), tol);
  const double gap = spectral_norm(ComplexMatrix(cp_matrix(out.x(), out.y()) - p.p()));
  if (gap > 1e-8 * std::max(1.0, spectral_norm(p.p()))) {
    throw Error(ErrorKind::NumericalFailure, cat("p-map round trip misses by ", gap));
  }
  return out;
}

namespace {

double composition_residual(const GaussianChannel& left, const GaussianChannel& right,
                            const GaussianChannel& target) {
  const GaussianChannel product = compose(left, right);
  const double scale = std::max({1.0, spectral_norm(target.x()), spectral_norm(target.y())});
  return std::max(spectral_norm(product.x() - target.x()),
                  spectral_norm(product.y() - target.y())) / scale;
}

bool nonsingular(const RealMatrix& m, const Tolerance& tol) {
  const Eigen::VectorXd s = Eigen::JacobiSVD<RealMatrix>(m).singularValues();
  return s(s.size() - 1) > tol.bound(s(0));
}

}  // namespace

Division divide(const GaussianChannel& c, const Tolerance& tol, std::optional<double> epsilon) {
  if (is_reversible(c, tol)) {
    throw Error(ErrorKind::Reversible, "a reversible channel has no non-trivial division");
  }
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, cat("epsilon must lie in (0, 1), got ", *epsilon));
  }
  const Eigen::Index d = c.x().rows();
  const RealMatrix identity = RealMatrix::Identity(d, d);

  std::optional<Division> result;
  if (!nonsingular(c.x(), tol)) {
    const RealMatrix kernel = linalg::null_space(c.x(), tol);
    GaussianChannel right(identity, kernel * kernel.transpose(), tol);
    result = Division{c, std::move(right), Division::Branch::KernelProjector, 0.0, 0.0};
  } else {
    const ComplexMatrix p = p_map(c).p();
    std::vector<double> schedule;
    if (epsilon) {
      schedule.push_back(*epsilon);
    } else {
      for (int k = 1; k <= 20; ++k) schedule.push_back(std::ldexp(1.0, -k));
    }
    for (double eps : schedule) {
      GaussianChannel left = channel_from_positive(PositiveClassRep(eps * p, tol), tol);
      if (!nonsingular(left.x(), tol)) continue;
      const Eigen::PartialPivLU<RealMatrix> lu(left.x());
      // P₂ = (1−ε) X₁⁻¹ P X₁⁻ᵀ. Its real part is the right noise; the right
      // X is X₂S⁻¹ with S = X⁻¹X₁X₂ symplectic, which reduces to X₁⁻¹X.
      const RealMatrix inv_y = lu.solve(c.y());
      const RealMatrix right_y =
          linalg::symmetric_part((1.0 - eps) * lu.solve(RealMatrix(inv_y.transpose())));
      GaussianChannel right(lu.solve(c.x()), right_y, tol);
      result = Division{std::move(left), std::move(right), Division::Branch::PositiveSplit, eps, 0.0};
      break;
    }
    if (!result) {
      throw Error(ErrorKind::NumericalFailure,
                  "no epsilon in the search schedule gives a nonsingular left factor");
    }
  }

  result->residual = composition_residual(result->left, result->right, c);
  if (result->residual > 1e-8) {
    throw Error(ErrorKind::NumericalFailure,
                cat("division residual ", result->residual, " exceeds 1e-8"));
  }
  if (is_reversible(result->left, tol) || is_reversible(result->right, tol)) {
    throw Error(ErrorKind::NumericalFailure, "a factor of the division came out reversible");
  }
  return *result;
}

bool is_idempotent(const GaussianChannel& c, const Tolerance& tol) {
  const RealMatrix& x = c.x();
  const double x_gap = spectral_norm(x * x - x);
  const double y_gap = spectral_norm(x * c.y());
  return x_gap <= tol.bound(std::max(1.0, spectral_norm(x))) &&
         y_gap <= tol.bound(std::max(1.0, spectral_norm(c.y())));
}

namespace {

// Columns C spanning the same subspace as the orthonormal `basis` with
// Cᵀ σ C = σ_k; the restricted form must be nondegenerate.
RealMatrix symplectic_basis(const RealMatrix& basis, const Tolerance& tol) {
  if (basis.cols() == 0) return basis;
  const RealMatrix sigma = symplectic_form(static_cast<int>(basis.rows() / 2));
  const RealMatrix gram = linalg::antisymmetric_part(basis.transpose() * sigma * basis);
  const auto canon = linalg::antisym_canonical(gram, tol);
  RealMatrix out = basis * canon.basis;
  for (std::size_t j = 0; j < canon.b.size(); ++j) {
    if (canon.b[j] <= tol.bound(1.0)) {
      throw Error(ErrorKind::NumericalFailure,
                  "idempotent splitting produced a degenerate symplectic subspace");
    }
    out.middleCols(2 * static_cast<Eigen::Index>(j), 2) /= std::sqrt(canon.b[j]);
  }
  return out;
}

}  // namespace

IdempotentNormalForm idempotent_normal_form(const GaussianChannel& c, const Tolerance& tol) {
  if (!is_idempotent(c, tol)) {
    throw Error(ErrorKind::NotIdempotent, "X^2 = X and XY = 0 do not both hold");
  }
  const RealMatrix& x = c.x();
  const Eigen::Index d = x.rows();
  Eigen::JacobiSVD<RealMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const auto rank = static_cast<Eigen::Index>((s.array() > tol.bound(s(0))).count());
  if (rank % 2 != 0) {
    throw Error(ErrorKind::NumericalFailure, cat("idempotent X has odd rank ", rank));
  }

  // Xᵀ projects onto range(Xᵀ) along ker(Xᵀ); both are symplectic subspaces
  // and mutually σ-orthogonal for a CP idempotent.
  RealMatrix frame(d, d);
  frame.leftCols(rank) = symplectic_basis(svd.matrixV().leftCols(rank), tol);
  frame.rightCols(d - rank) = symplectic_basis(svd.matrixU().rightCols(d - rank), tol);
  RealMatrix symplectic = frame.transpose();

  IdempotentNormalForm out;
  out.k = static_cast<int>(rank / 2);
  const Eigen::Index rest = d - rank;
  if (rest > 0) {
    const RealMatrix noise = linalg::symmetric_part(symplectic * c.y() * symplectic.transpose());
    linalg::WilliamsonForm w;
    try {
      w = linalg::williamson(noise.bottomRightCorner(rest, rest), tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
      throw Error(ErrorKind::DegenerateNoise,
                  cat("noise on the complement of range(X) is not positive definite: ", e.what()));
    }
    RealMatrix lift = RealMatrix::Identity(d, d);
    lift.bottomRightCorner(rest, rest) = w.symplectic;
    symplectic = lift * symplectic;
    out.noise = w.symplectic_eigenvalues;
    for (double y : out.noise) {
      if (y < 1.0 - tol.bound(1.0)) {
        throw Error(ErrorKind::NotCP, cat("symplectic eigenvalue ", y, " is below 1"));
      }
    }
  }
  out.symplectic = symplectic;

  RealMatrix x_target = RealMatrix::Zero(d, d);
  x_target.topLeftCorner(rank, rank).setIdentity();
  RealMatrix y_target = RealMatrix::Zero(d, d);
  for (std::size_t j = 0; j < out.noise.size(); ++j) {
    const auto i = rank + 2 * static_cast<Eigen::Index>(j);
    y_target(i, i) = y_target(i + 1, i + 1) = out.noise[j];
  }
  const RealMatrix x_form = linalg::right_solve(symplectic * x, symplectic);
  const RealMatrix y_form = symplectic * c.y() * symplectic.transpose();
  const double scale = std::max({1.0, spectral_norm(c.y()), spectral_norm(y_target)});
  out.residual = std::max(spectral_norm(x_form - x_target), spectral_norm(y_form - y_target) / scale);
  if (out.residual > 1e-7) {
    throw Error(ErrorKind::NumericalFailure,
                cat("idempotent normal form residual ", out.residual));
  }
  return out;
}

}  // namespace gausschan
