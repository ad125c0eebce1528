#pragma once

#include <sstream>
#include <string>
#include <utility>

#include "gausschan/error.hpp"
#include "gausschan/linalg.hpp"

namespace gausschan::detail {

template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << std::forward<Args>(args));
  return os.str();
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::NonSquare,
                cat(what, " must be square, got ", m.rows(), "x", m.cols()));
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, cat(what, " has non-finite entries"));
  }
}

template <typename Derived>
void require_square_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  require_square(m, what);
  require_finite(m, what);
}

/// Relative distance used for every "equal within tolerance" comparison.
inline double relative_gap(const RealMatrix& a, const RealMatrix& b) {
  const double scale = std::max({1.0, linalg::spectral_norm(a), linalg::spectral_norm(b)});
  return linalg::spectral_norm(a - b) / scale;
}

}  // namespace gausschan::detail
