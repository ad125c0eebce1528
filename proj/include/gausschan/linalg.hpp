#pragma once

// Matrix-analysis kernel: spectral tests, decompositions and linear solvers
// used by the channel algebra. All functions are pure.

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "gausschan/error.hpp"
#include "gausschan/tolerance.hpp"

namespace gausschan {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Throws InvalidArgument unless both components are finite and non-negative.
void validate(const Tolerance& tol);

namespace linalg {

/// Largest singular value.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Plain>(m.eval()).singularValues()(0);
}

/// a · b⁻¹ for nonsingular b.
RealMatrix right_solve(const RealMatrix& a, const RealMatrix& b);

RealMatrix symmetric_part(const RealMatrix& m);
RealMatrix antisymmetric_part(const RealMatrix& m);

/// Numerical rank: singular values at or below tol.bound(sigma_max) count as zero.
int numerical_rank(const RealMatrix& m, const Tolerance& tol = {});

/// Orthonormal basis of the kernel, using the same rank rule.
RealMatrix null_space(const RealMatrix& m, const Tolerance& tol = {});

/// Orthonormal basis of the column space, using the same rank rule.
RealMatrix range_basis(const RealMatrix& m, const Tolerance& tol = {});

/// Smallest eigenvalue of the Hermitian part (m + m*)/2.
double min_eig_hermitian(const ComplexMatrix& m);

/// True iff the Hermitian part of `m` has no eigenvalue below
/// -(abs_eps + rel_eps * ||m||).
bool psd_check(const ComplexMatrix& m, const Tolerance& tol = {});
bool psd_check(const RealMatrix& m, const Tolerance& tol = {});

/// Scaling-and-squaring Padé exponential. Throws Overflow when the result is
/// not representable.
RealMatrix expm(const RealMatrix& m);

struct JordanNegativeReport {
  double eigenvalue = 0.0;
  /// Sizes of the Jordan blocks belonging to `eigenvalue`, descending.
  std::vector<int> block_sizes;

  /// True when every distinct block size occurs an even number of times.
  bool paired() const;
};

struct RealLogAnalysis {
  bool exists = false;
  bool singular = false;
  std::vector<JordanNegativeReport> negative;
};

/// Decides existence of a real logarithm from the Jordan structure of the
/// negative real spectrum (rank differences of powers of x - lambda I).
/// Throws IllConditioned when a rank decision falls inside the ambiguity band.
RealLogAnalysis real_log_exists(const RealMatrix& x, const Tolerance& tol = {});

/// Real L with expm(L) = x. Principal branch away from the negative axis;
/// paired negative eigenvalues get a rotation by pi inside each eigenspace.
/// Only semisimple negative eigenvalues are supported (IllConditioned otherwise).
RealMatrix real_log(const RealMatrix& x, const Tolerance& tol = {});

/// Orthogonal canonical form of an antisymmetric matrix:
/// basisᵀ m basis = ⊕ b_j σ₁ with b_j >= 0 sorted descending.
struct AntisymmetricCanonical {
  RealMatrix basis;
  std::vector<double> b;
};
AntisymmetricCanonical antisym_canonical(const RealMatrix& m,
                                         const Tolerance& tol = {});

/// N with N sigma Nᵀ = m for antisymmetric m (sigma must be the interleaved
/// symplectic form of matching size).
RealMatrix antisym_factor(const RealMatrix& m, const RealMatrix& sigma,
                          const Tolerance& tol = {});

struct PolarFactors {
  RealMatrix positive;    // (s sᵀ)^{1/2}
  RealMatrix orthogonal;  // positive⁻¹ s
};
PolarFactors polar(const RealMatrix& s, const Tolerance& tol = {});

struct WilliamsonForm {
  RealMatrix symplectic;                       // S with S m Sᵀ = ⊕ y_j I₂
  std::vector<double> symplectic_eigenvalues;  // ascending
};
WilliamsonForm williamson(const RealMatrix& m, const Tolerance& tol = {});

/// Solves a Z + Z aᵀ = rhs through the Kronecker-sum system on the row-major
/// vectorisation of Z. A singular Kronecker sum is accepted only when rhs lies
/// in its range (the minimum-norm solution is returned); otherwise throws
/// SingularKroneckerSum.
RealMatrix kron_sum_solve(const RealMatrix& a, const RealMatrix& rhs,
                          const Tolerance& tol = {});

/// ∫₀ᵗ exp(s fᵀ) c exp(s f) ds from one exponential of the block matrix
/// [[-fᵀ, c], [0, f]].
RealMatrix vanloan_noise_integral(const RealMatrix& f, const RealMatrix& c,
                                  double t);

}  // namespace linalg

/// Interleaved symplectic form ⊕σ₁ on (q₁,p₁,…,q_n,p_n), σ₁ = [[0,1],[-1,0]].
RealMatrix symplectic_form(int modes);

/// ‖s σ sᵀ − σ‖.
double symplectic_residual(const RealMatrix& s);

/// Mode count of a 2n×2n matrix; throws DimensionMismatch for odd or
/// non-square shapes.
int modes_of(const RealMatrix& m, const char* what);

}  // namespace gausschan
