#pragma once

// One-parameter semigroups t ↦ (X_t, Y_t) generated by (A, B, H):
//   X_t = exp(t f),  f = (A − H)σ,
//   Y_t = 2 ∫₀ᵗ X_s B X_sᵀ ds,
// with A antisymmetric, B and H symmetric and B + iA ≥ 0.

#include <optional>
#include <string>
#include <vector>

#include "gausschan/channel.hpp"

namespace gausschan {

class Generator {
 public:
  Generator(RealMatrix a, RealMatrix b, RealMatrix h, const Tolerance& tol = {});

  int modes() const noexcept { return modes_; }
  const RealMatrix& a() const noexcept { return a_; }
  const RealMatrix& b() const noexcept { return b_; }
  const RealMatrix& h() const noexcept { return h_; }

  /// f = (A − H)σ
  RealMatrix drift() const;

 private:
  int modes_;
  RealMatrix a_;
  RealMatrix b_;
  RealMatrix h_;
};

GaussianChannel evolve(const Generator& g, double t, const Tolerance& tol = {});

/// evolve(t)·evolve(s) against evolve(t + s), relative to the norms of the latter.
bool semigroup_law_check(const Generator& g, double t, double s, const Tolerance& tol = {});

struct LindbladData {
  RealMatrix hamiltonian;  // H
  ComplexMatrix lindblad;  // rows are Lindblad vectors; L*L = B + iA
};
LindbladData lindblad_export(const Generator& g, const Tolerance& tol = {});

/// Y_t = 𝒴 − X_t 𝒴 X_tᵀ with the anchor 𝒴 solving f𝒴 + 𝒴fᵀ = −2B.
struct SimpleForm {
  RealMatrix drift;
  RealMatrix anchor;
};
SimpleForm simple_form(const Generator& g, const Tolerance& tol = {});

struct BoundedNoise {
  bool bounded = false;
  std::optional<RealMatrix> anchor;
};
/// Throws Indeterminate when the drift has a ±λ pair and no simple form.
BoundedNoise bounded_noise_check(const Generator& g, const Tolerance& tol = {});

std::optional<GaussianState> invariant_state(const SimpleForm& sf, const Tolerance& tol = {});

enum class Verdict { Yes, No, Indeterminate };
std::string_view to_string(Verdict v) noexcept;

struct EmbeddabilityVerdict {
  Verdict status = Verdict::Indeterminate;
  std::optional<Generator> witness;
  std::vector<linalg::JordanNegativeReport> jordan;
  std::string note;
};

/// Is X the X-part of some one-parameter semigroup at t = 1?
EmbeddabilityVerdict embeddable_x(const RealMatrix& x, const Tolerance& tol = {});

/// Does the symplectic S lie in exp(𝔰𝔭)? Yes carries a Hamiltonian witness
/// (A = B = 0). Indeterminate when −1 is in the spectrum.
EmbeddabilityVerdict in_exp_sp(const RealMatrix& s, const Tolerance& tol = {});

/// S = positive · orthogonal, both symplectic, with logarithms in 𝔰𝔭.
struct SymplecticSplit {
  RealMatrix positive;
  RealMatrix orthogonal;
  RealMatrix positive_log;
  RealMatrix orthogonal_log;
};
SymplecticSplit split_exp_sp(const RealMatrix& s, const Tolerance& tol = {});

/// det X ≥ 0; false certifies the channel is not infinitesimal divisible.
bool infdiv_necessary(const GaussianChannel& c, const Tolerance& tol = {});

/// X = X₁X₂ with X₁ = M((−1)⊕1)M⁻¹ flipping the negative spectrum, each factor
/// realised by a semigroup at t = 1; `channel` is the composed product.
struct InfdivConstruction {
  GaussianChannel channel;
  RealMatrix x1;
  RealMatrix x2;
  Generator left;
  Generator right;
};
InfdivConstruction infdiv_construct(const RealMatrix& x, const Tolerance& tol = {});

/// Adding noise keeps an infinitesimal divisible channel so; throws
/// NotGreaterNoise unless y_new − Y ≥ 0.
bool infdiv_monotone(const GaussianChannel& c, const RealMatrix& y_new,
                     const Tolerance& tol = {});

/// max(‖X − 1‖, ‖Y‖), reported only.
double distance_from_identity(const GaussianChannel& c);

}  // namespace gausschan
