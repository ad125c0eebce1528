#pragma once

// Gauge-covariant channels ([X,σ] = [Y,σ] = 0) and the hat map to n×n
// complex matrices. In block ordering (q₁..q_n, p₁..p_n) such a matrix is
// [[A, B], [−B, A]] and its hat is A + iB.

#include <optional>
#include <vector>

#include "gausschan/channel.hpp"
#include "gausschan/semigroup.hpp"

namespace gausschan {

/// Interleaved → block reordering: out(i, j) = m(idx(i), idx(j)).
RealMatrix to_block_order(const RealMatrix& m);
RealMatrix from_block_order(const RealMatrix& m);

/// A + iB of an interleaved-order matrix; the part anticommuting with σ is
/// discarded. unhat_matrix returns interleaved order.
ComplexMatrix hat_matrix(const RealMatrix& m);
RealMatrix unhat_matrix(const ComplexMatrix& m);

class GaugeChannel {
 public:
  /// Validates Ŷ = Ŷ* and Ŷ ≥ ±(1 − X̂X̂*).
  GaugeChannel(ComplexMatrix x_hat, ComplexMatrix y_hat, const Tolerance& tol = {});

  int modes() const noexcept { return static_cast<int>(x_hat_.rows()); }
  const ComplexMatrix& x_hat() const noexcept { return x_hat_; }
  const ComplexMatrix& y_hat() const noexcept { return y_hat_; }

 private:
  ComplexMatrix x_hat_;
  ComplexMatrix y_hat_;
};

bool is_gauge_covariant(const GaussianChannel& c, const Tolerance& tol = {});

GaugeChannel hat(const GaussianChannel& c, const Tolerance& tol = {});
GaussianChannel unhat(const GaugeChannel& g, const Tolerance& tol = {});

GaugeChannel compose(const GaugeChannel& first, const GaugeChannel& second);

/// X̂* = ÛK̂. g = compose(positive, reversible) with positive = (K̂, Ŷ) and
/// reversible = (Û*, 0).
struct GaugePolarSplit {
  GaugeChannel reversible;
  GaugeChannel positive;
  ComplexMatrix unitary;
};
GaugePolarSplit polar_split(const GaugeChannel& g);

enum class GaugeCase { StatePreparation, ContractiveWithInvariant, AdditiveNoise, Amplifying, Mixed };
std::string_view to_string(GaugeCase c) noexcept;

struct GaugeClassification {
  GaugeCase gauge_case = GaugeCase::Mixed;
  ComplexMatrix unitary_factor;
  ComplexMatrix k_hat;
  std::vector<double> k_spectrum;  // ascending
  std::optional<ComplexMatrix> invariant_cov;
  std::optional<ComplexMatrix> anchor;
  /// Mixed only: per-band pieces when [K̂, Ŷ] ≈ 0, in the eigenbasis of K̂.
  bool commuting = false;
  std::vector<GaugeClassification> components;
};
GaugeClassification classify(const GaugeChannel& g, const Tolerance& tol = {});

EmbeddabilityVerdict gauge_semigroup_membership(const GaugeChannel& g, const Tolerance& tol = {});

}  // namespace gausschan
