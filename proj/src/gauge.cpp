#include "gausschan/gauge.hpp"

#include <cmath>

#include "detail.hpp"

namespace gausschan {

using detail::cat;
using linalg::spectral_norm;

namespace {

Eigen::Index interleaved_index(Eigen::Index i, Eigen::Index n) {
  return i < n ? 2 * i : 2 * (i - n) + 1;
}

double hermitian_gap(const ComplexMatrix& m) { return spectral_norm(ComplexMatrix(m - m.adjoint())); }

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

bool psd(const ComplexMatrix& m, const Tolerance& tol) { return linalg::psd_check(m, tol); }

}  // namespace

RealMatrix to_block_order(const RealMatrix& m) {
  const auto n = static_cast<Eigen::Index>(modes_of(m, "m"));
  RealMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
      out(i, j) = m(interleaved_index(i, n), interleaved_index(j, n));
    }
  }
  return out;
}

RealMatrix from_block_order(const RealMatrix& m) {
  const auto n = static_cast<Eigen::Index>(modes_of(m, "m"));
  RealMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
      out(interleaved_index(i, n), interleaved_index(j, n)) = m(i, j);
    }
  }
  return out;
}

ComplexMatrix hat_matrix(const RealMatrix& m) {
  const RealMatrix b = to_block_order(m);
  const auto n = b.rows() / 2;
  ComplexMatrix out(n, n);
  out.real() = (b.topLeftCorner(n, n) + b.bottomRightCorner(n, n)) / 2.0;
  out.imag() = (b.topRightCorner(n, n) - b.bottomLeftCorner(n, n)) / 2.0;
  return out;
}

RealMatrix unhat_matrix(const ComplexMatrix& m) {
  const auto n = m.rows();
  RealMatrix b(2 * n, 2 * n);
  b.topLeftCorner(n, n) = m.real();
  b.bottomRightCorner(n, n) = m.real();
  b.topRightCorner(n, n) = m.imag();
  b.bottomLeftCorner(n, n) = -m.imag();
  return from_block_order(b);
}

GaugeChannel::GaugeChannel(ComplexMatrix x_hat, ComplexMatrix y_hat, const Tolerance& tol) {
  detail::require_square_finite(x_hat, "x_hat");
  detail::require_square_finite(y_hat, "y_hat");
  if (x_hat.rows() == 0 || y_hat.rows() != x_hat.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "x_hat and y_hat must be n x n with n >= 1");
  }
  if (hermitian_gap(y_hat) > tol.bound(spectral_norm(y_hat))) {
    throw Error(ErrorKind::NotSymmetric, "y_hat is not Hermitian");
  }
  const auto n = x_hat.rows();
  const ComplexMatrix defect = ComplexMatrix::Identity(n, n) - x_hat * x_hat.adjoint();
  if (!psd(ComplexMatrix(y_hat - defect), tol) || !psd(ComplexMatrix(y_hat + defect), tol)) {
    throw Error(ErrorKind::NotCP,
                cat("y_hat >= +-(1 - x x*) fails; eigenvalues ",
                    linalg::min_eig_hermitian(y_hat - defect), ", ",
                    linalg::min_eig_hermitian(y_hat + defect)));
  }
  x_hat_ = std::move(x_hat);
  y_hat_ = std::move(y_hat);
}

bool is_gauge_covariant(const GaussianChannel& c, const Tolerance& tol) {
  const RealMatrix sigma = symplectic_form(c.modes());
  const double x_gap = spectral_norm(c.x() * sigma - sigma * c.x());
  const double y_gap = spectral_norm(c.y() * sigma - sigma * c.y());
  return x_gap <= tol.bound(spectral_norm(c.x())) &&
         y_gap <= tol.bound(std::max(1.0, spectral_norm(c.y())));
}

GaugeChannel hat(const GaussianChannel& c, const Tolerance& tol) {
  if (!is_gauge_covariant(c, tol)) {
    throw Error(ErrorKind::NotGaugeCovariant, "X or Y does not commute with sigma");
  }
  return {hat_matrix(c.x()), hermitian_part(hat_matrix(c.y())), tol};
}

GaussianChannel unhat(const GaugeChannel& g, const Tolerance& tol) {
  return {unhat_matrix(g.x_hat()), linalg::symmetric_part(unhat_matrix(g.y_hat())), tol};
}

GaugeChannel compose(const GaugeChannel& first, const GaugeChannel& second) {
  if (first.modes() != second.modes()) {
    throw Error(ErrorKind::DimensionMismatch, "gauge channels act on different mode counts");
  }
  const ComplexMatrix& x1 = first.x_hat();
  ComplexMatrix y = hermitian_part(first.y_hat() + x1 * second.y_hat() * x1.adjoint());
  return {x1 * second.x_hat(), std::move(y), Tolerance::uniform(1e-7)};
}

GaugePolarSplit polar_split(const GaugeChannel& g) {
  const auto n = g.x_hat().rows();
  const Eigen::JacobiSVD<ComplexMatrix> svd(g.x_hat(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexMatrix& w = svd.matrixU();
  const ComplexMatrix& v = svd.matrixV();
  const ComplexMatrix k = hermitian_part(w * svd.singularValues().cast<Complex>().asDiagonal() * w.adjoint());
  const ComplexMatrix unitary = v * w.adjoint();

  const Tolerance loose = Tolerance::uniform(1e-7);
  GaugePolarSplit out{GaugeChannel(unitary.adjoint(), ComplexMatrix::Zero(n, n), loose),
                      GaugeChannel(k, g.y_hat(), loose), unitary};
  const GaugeChannel back = compose(out.positive, out.reversible);
  const double gap = spectral_norm(ComplexMatrix(back.x_hat() - g.x_hat()));
  if (gap > 1e-9 * std::max(1.0, spectral_norm(g.x_hat()))) {
    throw Error(ErrorKind::NumericalFailure, cat("polar split misses x_hat by ", gap));
  }
  return out;
}

std::string_view to_string(GaugeCase c) noexcept {
  switch (c) {
    case GaugeCase::StatePreparation: return "state-preparation";
    case GaugeCase::ContractiveWithInvariant: return "contractive-with-invariant-state";
    case GaugeCase::AdditiveNoise: return "additive-noise";
    case GaugeCase::Amplifying: return "amplifying";
    case GaugeCase::Mixed: return "mixed";
  }
  return "unknown";
}

namespace {

int band_of(double k, double tau) {
  if (k <= tau) return 0;
  if (k < 1.0 - tau) return 1;
  if (k <= 1.0 + tau) return 2;
  return 3;
}

constexpr GaugeCase kBandCase[] = {GaugeCase::StatePreparation, GaugeCase::ContractiveWithInvariant,
                                   GaugeCase::AdditiveNoise, GaugeCase::Amplifying};

// 𝒴̂ − K̂𝒴̂K̂ = Ŷ solved entrywise in the eigenbasis of K̂.
ComplexMatrix schur_anchor(const Eigen::VectorXd& k, const ComplexMatrix& y) {
  ComplexMatrix nu(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) nu(i, j) = y(i, j) / (1.0 - k(i) * k(j));
  }
  return hermitian_part(nu);
}

// Classification of (diag k, y) for a single band; y and the anchor are in
// the eigenbasis of K̂.
GaugeClassification classify_band(int band, const Eigen::VectorXd& k, const ComplexMatrix& y) {
  const auto n = k.size();
  const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
  const Tolerance check = Tolerance::uniform(1e-7);
  GaugeClassification out;
  out.gauge_case = kBandCase[band];
  out.unitary_factor = identity;
  out.k_hat = k.cast<Complex>().asDiagonal();
  out.k_spectrum.assign(k.data(), k.data() + n);
  switch (out.gauge_case) {
    case GaugeCase::StatePreparation:
      if (!psd(ComplexMatrix(y - identity), check)) {
        throw Error(ErrorKind::NotCP, "state preparation needs y_hat >= 1");
      }
      out.invariant_cov = y;
      break;
    case GaugeCase::ContractiveWithInvariant: {
      ComplexMatrix anchor = schur_anchor(k, y);
      if (!psd(ComplexMatrix(anchor - identity), check)) {
        throw Error(ErrorKind::NotCP, cat("contractive anchor has eigenvalue ",
                                          linalg::min_eig_hermitian(anchor), " below 1"));
      }
      out.invariant_cov = anchor;
      out.anchor = std::move(anchor);
      break;
    }
    case GaugeCase::AdditiveNoise:
      if (!psd(y, check)) throw Error(ErrorKind::NotCP, "additive noise must be PSD");
      break;
    case GaugeCase::Amplifying: {
      ComplexMatrix anchor = schur_anchor(k, y);
      if (!psd(ComplexMatrix(-identity - anchor), check)) {
        throw Error(ErrorKind::NotCP, "amplifying anchor is not <= -1");
      }
      out.anchor = std::move(anchor);
      break;
    }
    case GaugeCase::Mixed:
      break;
  }
  return out;
}

}  // namespace

GaugeClassification classify(const GaugeChannel& g, const Tolerance& tol) {
  const GaugePolarSplit split = polar_split(g);
  const ComplexMatrix& k_hat = split.positive.x_hat();
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(k_hat);
  const Eigen::VectorXd& k = eig.eigenvalues();
  const ComplexMatrix& q = eig.eigenvectors();
  const ComplexMatrix y = q.adjoint() * g.y_hat() * q;
  const double tau = tol.bound(1.0);

  std::vector<std::vector<Eigen::Index>> bands(4);
  for (Eigen::Index i = 0; i < k.size(); ++i) bands[band_of(k(i), tau)].push_back(i);
  int present = 0;
  int only = 0;
  for (int b = 0; b < 4; ++b) {
    if (!bands[b].empty()) {
      ++present;
      only = b;
    }
  }

  GaugeClassification out;
  if (present == 1) {
    out = classify_band(only, k, y);
    if (out.invariant_cov) out.invariant_cov = hermitian_part(q * *out.invariant_cov * q.adjoint());
    if (out.anchor) out.anchor = hermitian_part(q * *out.anchor * q.adjoint());
  } else {
    out.gauge_case = GaugeCase::Mixed;
    out.k_spectrum.assign(k.data(), k.data() + k.size());
    const double commutator = spectral_norm(ComplexMatrix(k_hat * g.y_hat() - g.y_hat() * k_hat));
    out.commuting = commutator <= tol.bound(std::max(1.0, spectral_norm(k_hat) * spectral_norm(g.y_hat())));
    if (out.commuting) {
      for (int b = 0; b < 4; ++b) {
        const auto& idx = bands[b];
        if (idx.empty()) continue;
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::VectorXd kb(m);
        ComplexMatrix yb(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
          kb(i) = k(idx[i]);
          for (Eigen::Index j = 0; j < m; ++j) yb(i, j) = y(idx[i], idx[j]);
        }
        out.components.push_back(classify_band(b, kb, yb));
      }
    }
  }
  out.unitary_factor = split.unitary;
  out.k_hat = k_hat;
  return out;
}

EmbeddabilityVerdict gauge_semigroup_membership(const GaugeChannel& g, const Tolerance& tol) {
  const GaugeClassification cls = classify(g, tol);
  const auto n = g.x_hat().rows();
  const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
  if (spectral_norm(ComplexMatrix(cls.unitary_factor - identity)) > tol.bound(1.0)) {
    EmbeddabilityVerdict v = embeddable_x(unhat_matrix(g.x_hat()), tol);
    v.note = "nontrivial unitary factor; decided on X alone" +
             (v.note.empty() ? std::string() : "; " + v.note);
    return v;
  }

  EmbeddabilityVerdict out;
  if (cls.gauge_case == GaugeCase::StatePreparation) {
    out.status = Verdict::No;
    out.note = "K = 0 has no logarithm";
    return out;
  }
  if (cls.gauge_case == GaugeCase::Mixed) {
    out.note = "mixed spectrum of K";
    return out;
  }

  const auto d = 2 * n;
  const RealMatrix sigma = symplectic_form(static_cast<int>(n));
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(cls.k_hat);
  const ComplexMatrix& q = eig.eigenvectors();
  const Eigen::VectorXd& k = eig.eigenvalues();
  auto k_power = [&](double t) -> ComplexMatrix {
    return q * k.array().pow(t).matrix().cast<Complex>().asDiagonal() * q.adjoint();
  };

  std::optional<Generator> witness;
  try {
    if (cls.gauge_case == GaugeCase::AdditiveNoise) {
      const RealMatrix y = linalg::symmetric_part(unhat_matrix(g.y_hat()));
      witness.emplace(RealMatrix::Zero(d, d), y / 2.0, RealMatrix::Zero(d, d), tol);
    } else {
      const ComplexMatrix log_k = q * k.array().log().matrix().cast<Complex>().asDiagonal() * q.adjoint();
      const RealMatrix f = unhat_matrix(hermitian_part(log_k));
      const RealMatrix anchor = linalg::symmetric_part(unhat_matrix(*cls.anchor));
      const RealMatrix b = -linalg::symmetric_part(f * anchor + anchor * f.transpose()) / 2.0;
      const RealMatrix m = f * sigma.transpose();
      witness.emplace(linalg::antisymmetric_part(m), b, -linalg::symmetric_part(m), tol);
    }
  } catch (const Error& e) {
    out.note = cat("semigroup data fails the generator constraint: ", e.what());
    return out;
  }

  for (double t : {0.5, 1.0}) {
    const GaussianChannel c = evolve(*witness, t, Tolerance::uniform(1e-7));
    ComplexMatrix x_t = identity;
    ComplexMatrix y_t = t * g.y_hat();
    if (cls.gauge_case != GaugeCase::AdditiveNoise) {
      x_t = k_power(t);
      y_t = *cls.anchor - x_t * *cls.anchor * x_t.adjoint();
    }
    const double gap = std::max(detail::relative_gap(c.x(), unhat_matrix(x_t)),
                                detail::relative_gap(c.y(), unhat_matrix(y_t)));
    if (gap > 1e-6) {
      out.note = cat("generator flow misses the explicit semigroup at t = ", t, " by ", gap);
      return out;
    }
  }
  out.status = Verdict::Yes;
  out.witness = std::move(witness);
  if (cls.gauge_case == GaugeCase::Amplifying) {
    out.note = "unbounded noise; no invariant state";
  }
  return out;
}

}  // namespace gausschan
