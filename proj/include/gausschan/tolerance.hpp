#pragma once

namespace gausschan {

/// Single tolerance record threaded through every numerical decision
/// (PSD tests, rank decisions, singularity, equality checks).
struct Tolerance {
  double abs_eps = 1e-9;
  double rel_eps = 1e-9;

  /// Threshold for a quantity whose natural magnitude is `scale`.
  constexpr double bound(double scale) const noexcept {
    return abs_eps + rel_eps * scale;
  }

  static constexpr Tolerance uniform(double eps) noexcept { return {eps, eps}; }
};

}  // namespace gausschan
