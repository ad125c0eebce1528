#pragma once

// Gaussian channels as pairs (X, Y) acting on phase-space moments in the
// interleaved ordering (q₁,p₁,…,q_n,p_n):  d ↦ X d,  Γ ↦ X Γ Xᵀ + Y.

#include <optional>
#include <vector>

#include "gausschan/linalg.hpp"

namespace gausschan {

/// A completely positive pair (X, Y). Construction validates shape, symmetry
/// of Y and the CP condition Y + i(XσXᵀ − σ) ≥ 0; instances are immutable.
class GaussianChannel {
 public:
  GaussianChannel(RealMatrix x, RealMatrix y, const Tolerance& tol = {});

  static GaussianChannel identity(int modes);
  /// X = √η·1, Y = |1 − η|·1: attenuation for η < 1, amplification for η > 1.
  static GaussianChannel beam_splitter(int modes, double eta);

  int modes() const noexcept { return modes_; }
  const RealMatrix& x() const noexcept { return x_; }
  const RealMatrix& y() const noexcept { return y_; }

 private:
  struct Unchecked {};
  GaussianChannel(Unchecked, RealMatrix x, RealMatrix y);

  friend GaussianChannel compose(const GaussianChannel&, const GaussianChannel&);
  friend GaussianChannel conjugate(const RealMatrix&, const GaussianChannel&);

  int modes_;
  RealMatrix x_;
  RealMatrix y_;
};

/// First moments and covariance matrix of a Gaussian state; requires
/// cov + iσ ≥ 0.
class GaussianState {
 public:
  GaussianState(RealVector mean, RealMatrix cov, const Tolerance& tol = {});

  static GaussianState vacuum(int modes);

  int modes() const noexcept { return modes_; }
  const RealVector& mean() const noexcept { return mean_; }
  const RealMatrix& cov() const noexcept { return cov_; }

 private:
  int modes_;
  RealVector mean_;
  RealMatrix cov_;
};

/// Hermitian PSD representative p(X, Y) = i(XσXᵀ − σ) + Y of a channel class.
class PositiveClassRep {
 public:
  explicit PositiveClassRep(ComplexMatrix p, const Tolerance& tol = {});

  int modes() const noexcept { return static_cast<int>(p_.rows() / 2); }
  const ComplexMatrix& p() const noexcept { return p_; }

 private:
  ComplexMatrix p_;
};

/// Smallest eigenvalue of Y + i(XσXᵀ − σ); the CP certificate.
double cp_margin(const RealMatrix& x, const RealMatrix& y);

bool cp_check(const RealMatrix& x, const RealMatrix& y, const Tolerance& tol = {});

/// Heisenberg-picture product (X₁X₂, Y₁ + X₁Y₂X₁ᵀ): the signal passes through
/// `second` first.
GaussianChannel compose(const GaussianChannel& first, const GaussianChannel& second);

/// (S,0)·c·(S⁻¹,0) = (S X S⁻¹, S Y Sᵀ) for symplectic S.
GaussianChannel conjugate(const RealMatrix& s, const GaussianChannel& c);

GaussianState apply_to_state(const GaussianChannel& c, const GaussianState& s);

/// Matrix representation [[X⊗X, vec Y, 0], [0, 1, 0], [0, 0, X]] of size
/// 4n² + 2n + 1, with vec Y indexed row-major.
RealMatrix embed_pi(const GaussianChannel& c);

/// ‖XσXᵀ − σ‖ and ‖Y‖, the two numbers behind is_reversible.
struct ReversibilityCertificate {
  double symplectic_residual = 0.0;
  double noise_norm = 0.0;
};
ReversibilityCertificate reversibility_certificate(const GaussianChannel& c);

bool is_reversible(const GaussianChannel& c, const Tolerance& tol = {});

PositiveClassRep p_map(const GaussianChannel& c);

/// A channel with p_map(result) = p: Y = Re p, X from XσXᵀ = Im p + σ.
/// X is only determined up to a right symplectic factor.
GaussianChannel channel_from_positive(const PositiveClassRep& p, const Tolerance& tol = {});

/// Two non-reversible factors with compose(left, right) = source.
struct Division {
  enum class Branch { KernelProjector, PositiveSplit };

  GaussianChannel left;
  GaussianChannel right;
  Branch branch;
  double epsilon = 0.0;   // share of p(X,Y) carried by `left` (PositiveSplit only)
  double residual = 0.0;  // relative composition error
};

/// Splits any non-reversible channel. `epsilon` overrides the downward search
/// 1/2, 1/4, …, 2⁻²⁰ for a nonsingular left factor.
Division divide(const GaussianChannel& c, const Tolerance& tol = {},
                std::optional<double> epsilon = std::nullopt);

bool is_idempotent(const GaussianChannel& c, const Tolerance& tol = {});

/// S X S⁻¹ = diag(1…1, 0…0) with 2k ones and S Y Sᵀ = diag(0…0, y₁,y₁,…).
struct IdempotentNormalForm {
  RealMatrix symplectic;
  int k = 0;
  std::vector<double> noise;  // y_j ≥ 1, ascending
  double residual = 0.0;
};
IdempotentNormalForm idempotent_normal_form(const GaussianChannel& c,
                                            const Tolerance& tol = {});

}  // namespace gausschan
