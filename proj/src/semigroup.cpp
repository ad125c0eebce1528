#include "gausschan/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "gausschan/gauge.hpp"

namespace gausschan {

using detail::cat;
using linalg::spectral_norm;

Generator::Generator(RealMatrix a, RealMatrix b, RealMatrix h, const Tolerance& tol) {
  const int modes = modes_of(a, "a");
  if (b.rows() != a.rows() || b.cols() != a.cols() || h.rows() != a.rows() ||
      h.cols() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "a, b and h must have the same shape");
  }
  detail::require_finite(a, "a");
  detail::require_finite(b, "b");
  detail::require_finite(h, "h");
  if (spectral_norm(a + a.transpose()) > tol.bound(spectral_norm(a))) {
    throw Error(ErrorKind::NotAntisymmetric, cat("||a + a^T|| = ", spectral_norm(a + a.transpose())));
  }
  if (spectral_norm(b - b.transpose()) > tol.bound(spectral_norm(b))) {
    throw Error(ErrorKind::NotSymmetric, "b is not symmetric");
  }
  if (spectral_norm(h - h.transpose()) > tol.bound(spectral_norm(h))) {
    throw Error(ErrorKind::NotSymmetric, "h is not symmetric");
  }
  ComplexMatrix m(a.rows(), a.cols());
  m.real() = b;
  m.imag() = a;
  if (!linalg::psd_check(m, tol)) {
    throw Error(ErrorKind::NotPSD, cat("b + ia has eigenvalue ", linalg::min_eig_hermitian(m)));
  }
  modes_ = modes;
  a_ = std::move(a);
  b_ = std::move(b);
  h_ = std::move(h);
}

RealMatrix Generator::drift() const { return (a_ - h_) * symplectic_form(modes_); }

GaussianChannel evolve(const Generator& g, double t, const Tolerance& tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, cat("t must be finite and >= 0, got ", t));
  }
  const RealMatrix f = g.drift();
  RealMatrix x = linalg::expm(t * f);
  RealMatrix y = linalg::vanloan_noise_integral(f.transpose(), 2.0 * g.b(), t);
  if (!y.allFinite()) throw Error(ErrorKind::Overflow, cat("noise integral overflows at t = ", t));
  return {std::move(x), std::move(y), tol};
}

bool semigroup_law_check(const Generator& g, double t, double s, const Tolerance& tol) {
  const GaussianChannel lhs = compose(evolve(g, t), evolve(g, s));
  const GaussianChannel rhs = evolve(g, t + s);
  return spectral_norm(lhs.x() - rhs.x()) <= tol.bound(spectral_norm(rhs.x())) &&
         spectral_norm(lhs.y() - rhs.y()) <= tol.bound(spectral_norm(rhs.y()));
}

LindbladData lindblad_export(const Generator& g, const Tolerance& tol) {
  ComplexMatrix m(g.a().rows(), g.a().cols());
  m.real() = g.b();
  m.imag() = g.a();
  m = ComplexMatrix((m + m.adjoint()) / 2.0);
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = tol.bound(lambda.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < -cutoff) {
      throw Error(ErrorKind::NotPSD, cat("b + ia has eigenvalue ", lambda(k)));
    }
    if (lambda(k) > cutoff) kept.push_back(k);
  }
  ComplexMatrix l(static_cast<Eigen::Index>(kept.size()), m.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto k = kept[r];
    l.row(static_cast<Eigen::Index>(r)) = std::sqrt(lambda(k)) * eig.eigenvectors().col(k).adjoint();
  }
  const double gap = spectral_norm(ComplexMatrix(l.adjoint() * l - m));
  if (gap > 1e-9 * std::max(1.0, spectral_norm(m))) {
    throw Error(ErrorKind::NumericalFailure, cat("L*L misses b + ia by ", gap));
  }
  return {g.h(), std::move(l)};
}

SimpleForm simple_form(const Generator& g, const Tolerance& tol) {
  const RealMatrix f = g.drift();
  RealMatrix anchor = linalg::kron_sum_solve(-f, 2.0 * g.b(), tol);

  for (double t : {0.5, 1.0, 2.0}) {
    const GaussianChannel c = evolve(g, t);
    const RealMatrix rebuilt = anchor - c.x() * anchor * c.x().transpose();
    if (detail::relative_gap(rebuilt, c.y()) > 1e-6) {
      throw Error(ErrorKind::NumericalFailure,
                  cat("simple form disagrees with the flow at t = ", t, " by ",
                      detail::relative_gap(rebuilt, c.y())));
    }
  }
  for (double t : {0.1, 1.0, 10.0}) {
    const RealMatrix x = linalg::expm(t * f);
    const RealMatrix rebuilt = linalg::symmetric_part(anchor - x * anchor * x.transpose());
    if (!linalg::psd_check(rebuilt, Tolerance::uniform(1e-7))) {
      throw Error(ErrorKind::NumericalFailure,
                  cat("simple-form noise at t = ", t, " is not PSD"));
    }
  }
  return {f, std::move(anchor)};
}

BoundedNoise bounded_noise_check(const Generator& g, const Tolerance& tol) {
  SimpleForm sf = [&] {
    try {
      return simple_form(g, tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularKroneckerSum) throw;
      throw Error(ErrorKind::Indeterminate,
                  cat("no simple form, boundedness not decided: ", e.what()));
    }
  }();
  if (linalg::psd_check(sf.anchor, tol)) return {true, std::move(sf.anchor)};
  return {false, std::nullopt};
}

std::optional<GaussianState> invariant_state(const SimpleForm& sf, const Tolerance& tol) {
  const int modes = modes_of(sf.anchor, "anchor");
  ComplexMatrix m(sf.anchor.rows(), sf.anchor.cols());
  m.real() = sf.anchor;
  m.imag() = symplectic_form(modes);
  if (!linalg::psd_check(m, tol)) return std::nullopt;
  return GaussianState(RealVector::Zero(sf.anchor.rows()), sf.anchor, tol);
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

namespace {

// Generator with drift L and no Hamiltonian restriction: Lσᵀ = A − H,
// B = ‖A‖∞·1 dominates iA.
Generator generic_witness(const RealMatrix& l) {
  const int modes = static_cast<int>(l.rows() / 2);
  const RealMatrix m = l * symplectic_form(modes).transpose();
  RealMatrix a = linalg::antisymmetric_part(m);
  RealMatrix h = -linalg::symmetric_part(m);
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  const auto d = l.rows();
  return {std::move(a), norm * RealMatrix::Identity(d, d), std::move(h)};
}

// Hamiltonian generator for L ∈ 𝔰𝔭: A = B = 0, H = Lσ.
Generator hamiltonian_witness(const RealMatrix& l) {
  const auto d = l.rows();
  const RealMatrix h = linalg::symmetric_part(l * symplectic_form(static_cast<int>(d / 2)));
  return {RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), h};
}

bool in_sp_algebra(const RealMatrix& l, double bound) {
  const RealMatrix sigma = symplectic_form(static_cast<int>(l.rows() / 2));
  return spectral_norm(l * sigma + sigma * l.transpose()) <= bound;
}

void require_symplectic(const RealMatrix& s, const Tolerance& tol) {
  modes_of(s, "s");
  detail::require_finite(s, "s");
  const double norm = spectral_norm(s);
  const double residual = symplectic_residual(s);
  if (residual > tol.bound(std::max(1.0, norm * norm))) {
    throw Error(ErrorKind::NotSymplectic, cat("||S sigma S^T - sigma|| = ", residual));
  }
}

}  // namespace

EmbeddabilityVerdict embeddable_x(const RealMatrix& x, const Tolerance& tol) {
  modes_of(x, "x");
  detail::require_finite(x, "x");
  EmbeddabilityVerdict out;
  linalg::RealLogAnalysis analysis;
  try {
    analysis = linalg::real_log_exists(x, tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    out.note = e.what();
    return out;
  }
  out.jordan = analysis.negative;
  if (analysis.singular) {
    out.status = Verdict::No;
    out.note = "X is singular";
    return out;
  }
  if (!analysis.exists) {
    out.status = Verdict::No;
    out.note = "a negative eigenvalue has a Jordan block size occurring an odd number of times";
    return out;
  }
  try {
    out.witness = generic_witness(linalg::real_log(x, tol));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    out.note = e.what();
    return out;
  }
  out.status = Verdict::Yes;
  return out;
}

EmbeddabilityVerdict in_exp_sp(const RealMatrix& s, const Tolerance& tol) {
  require_symplectic(s, tol);
  const double norm = spectral_norm(s);
  const double radius = std::sqrt(tol.bound(norm) * std::max(norm, 1.0));
  const Eigen::VectorXcd ev = Eigen::EigenSolver<RealMatrix>(s, false).eigenvalues();
  EmbeddabilityVerdict out;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i) + 1.0) <= radius) {
      out.note = "-1 is an eigenvalue; the criterion does not apply";
      return out;
    }
  }
  out = embeddable_x(s, tol);
  if (out.status != Verdict::Yes) return out;

  const RealMatrix l = linalg::real_log(s, tol);
  const double bound = 1e-8 * std::max(1.0, spectral_norm(l));
  if (in_sp_algebra(l, bound)) {
    out.witness = hamiltonian_witness(l);
    return out;
  }
  // σLᵀσ is another real log of S; when it commutes with L the average is one in 𝔰𝔭.
  const RealMatrix sigma = symplectic_form(static_cast<int>(s.rows() / 2));
  const RealMatrix mirrored = sigma * l.transpose() * sigma;
  if (spectral_norm(l * mirrored - mirrored * l) <= bound * std::max(1.0, spectral_norm(l))) {
    const RealMatrix averaged = (l + mirrored) / 2.0;
    if (detail::relative_gap(linalg::expm(averaged), s) <= 1e-6) {
      out.witness = hamiltonian_witness(averaged);
      return out;
    }
  }
  out.note = "real logarithm found outside sp; witness is a generic noisy generator";
  return out;
}

SymplecticSplit split_exp_sp(const RealMatrix& s, const Tolerance& tol) {
  require_symplectic(s, tol);
  const linalg::PolarFactors pf = linalg::polar(s, tol);
  SymplecticSplit out;
  out.positive = pf.positive;
  out.orthogonal = pf.orthogonal;

  const Eigen::SelfAdjointEigenSolver<RealMatrix> eig(linalg::symmetric_part(pf.positive));
  out.positive_log = eig.eigenvectors() * eig.eigenvalues().array().log().matrix().asDiagonal() *
                     eig.eigenvectors().transpose();

  // The orthogonal symplectic factor is unitary under the hat map; its log
  // comes from the complex Schur form, where an eigenvalue −1 is just angle π.
  const ComplexMatrix u = hat_matrix(pf.orthogonal);
  const Eigen::ComplexSchur<ComplexMatrix> schur(u);
  const ComplexMatrix& t = schur.matrixT();
  Eigen::VectorXcd log_diag(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) log_diag(i) = Complex(0.0, std::arg(t(i, i)));
  ComplexMatrix log_u = schur.matrixU() * log_diag.asDiagonal() * schur.matrixU().adjoint();
  log_u = ComplexMatrix((log_u - log_u.adjoint()) / 2.0);
  out.orthogonal_log = unhat_matrix(log_u);

  const double scale = std::max(1.0, spectral_norm(s));
  if (detail::relative_gap(linalg::expm(out.positive_log), out.positive) > 1e-8 ||
      detail::relative_gap(linalg::expm(out.orthogonal_log), out.orthogonal) > 1e-8 ||
      spectral_norm(out.positive * out.orthogonal - s) > 1e-8 * scale) {
    throw Error(ErrorKind::NumericalFailure, "polar factors of S do not reproduce S");
  }
  return out;
}

bool infdiv_necessary(const GaussianChannel& c, const Tolerance& tol) {
  return c.x().determinant() >= -tol.abs_eps;
}

InfdivConstruction infdiv_construct(const RealMatrix& x, const Tolerance& tol) {
  modes_of(x, "x");
  detail::require_finite(x, "x");
  const auto d = x.rows();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<RealMatrix>(x).singularValues();
  if (sv(d - 1) <= tol.bound(sv(0))) {
    throw Error(ErrorKind::Indeterminate, "det X = 0: no factorisation into semigroup elements is attempted");
  }
  if (x.determinant() < 0.0) {
    throw Error(ErrorKind::NonPositiveDeterminant, cat("det X = ", x.determinant()));
  }

  const linalg::RealLogAnalysis analysis = linalg::real_log_exists(x, tol);
  const RealMatrix identity = RealMatrix::Identity(d, d);
  RealMatrix x1 = identity;
  if (!analysis.negative.empty()) {
    // Generalized eigenspace of the negative spectrum = ker ∏ (X − λ)^m,
    // its invariant complement = range of the same product.
    RealMatrix annihilator = identity;
    Eigen::Index negative_dim = 0;
    for (const auto& r : analysis.negative) {
      int multiplicity = 0;
      for (int b : r.block_sizes) multiplicity += b;
      negative_dim += multiplicity;
      const RealMatrix shifted = x - r.eigenvalue * identity;
      for (int k = 0; k < multiplicity; ++k) annihilator = annihilator * shifted;
    }
    Eigen::JacobiSVD<RealMatrix> svd(annihilator, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    const Eigen::Index keep = d - negative_dim;
    if (keep > 0 && s(keep - 1) <= std::sqrt(tol.bound(s(0)) * s(0))) {
      throw Error(ErrorKind::IllConditioned, "negative and positive spectral subspaces are not separated");
    }
    RealMatrix basis(d, d);
    basis.leftCols(negative_dim) = svd.matrixV().rightCols(negative_dim);
    basis.rightCols(keep) = svd.matrixU().leftCols(keep);
    Eigen::VectorXd signs = Eigen::VectorXd::Ones(d);
    signs.head(negative_dim).setConstant(-1.0);
    x1 = linalg::right_solve(basis * signs.asDiagonal(), basis);
  }
  RealMatrix x2 = x1 * x;

  auto witness = [&](const RealMatrix& factor, const char* which) {
    EmbeddabilityVerdict v = embeddable_x(factor, tol);
    if (v.status != Verdict::Yes) {
      throw Error(ErrorKind::IllConditioned,
                  cat("factor ", which, " has no semigroup witness: ", v.note));
    }
    return *v.witness;
  };
  Generator left = witness(x1, "X1");
  Generator right = witness(x2, "X2");
  GaussianChannel channel = compose(evolve(left, 1.0), evolve(right, 1.0));
  if (detail::relative_gap(channel.x(), x) > 1e-8) {
    throw Error(ErrorKind::NumericalFailure,
                cat("factorised X misses the input by ", detail::relative_gap(channel.x(), x)));
  }
  return {std::move(channel), std::move(x1), std::move(x2), std::move(left), std::move(right)};
}

bool infdiv_monotone(const GaussianChannel& c, const RealMatrix& y_new, const Tolerance& tol) {
  if (y_new.rows() != c.y().rows() || y_new.cols() != c.y().cols()) {
    throw Error(ErrorKind::DimensionMismatch, "y_new has the wrong shape");
  }
  detail::require_finite(y_new, "y_new");
  const RealMatrix extra = y_new - c.y();
  if (spectral_norm(extra - extra.transpose()) > tol.bound(spectral_norm(y_new))) {
    throw Error(ErrorKind::NotSymmetric, "y_new is not symmetric");
  }
  if (!linalg::psd_check(extra, tol)) {
    throw Error(ErrorKind::NotGreaterNoise,
                cat("y_new - y has eigenvalue ", linalg::min_eig_hermitian(extra.cast<Complex>())));
  }
  return true;
}

double distance_from_identity(const GaussianChannel& c) {
  const auto d = c.x().rows();
  return std::max(spectral_norm(c.x() - RealMatrix::Identity(d, d)), spectral_norm(c.y()));
}

}  // namespace gausschan
