#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "errors.hpp"

namespace bh {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<cplx>;

// Zero-cluster detection on an ascending spectrum. An eigenvalue is zero when
// it is at most rel_zero * lambda_max, and the first nonzero one must exceed
// the largest zero by the factor `gap`.
struct GapCount {
  int dim = 0;
  double largest_zero = 0.0;
  double first_nonzero = 0.0;
  double lambda_max = 0.0;
  bool certified = false;

  double ratio() const {
    if (dim == 0 || largest_zero <= 0.0) return std::numeric_limits<double>::infinity();
    return first_nonzero / largest_zero;
  }
};

inline constexpr double kZeroThreshold = 1e-8;
inline constexpr double kGapRatio = 1e3;

inline GapCount count_zero_modes(const RVec& ascending, double rel_zero = kZeroThreshold,
                                 double gap = kGapRatio) {
  GapCount g;
  const Eigen::Index n = ascending.size();
  if (n == 0) {
    g.certified = true;
    return g;
  }
  g.lambda_max = ascending.cwiseAbs().maxCoeff();
  if (g.lambda_max == 0.0) {
    g.dim = static_cast<int>(n);
    g.certified = true;
    return g;
  }
  const double thr = rel_zero * g.lambda_max;
  int z = 0;
  while (z < n && ascending[z] <= thr) ++z;
  g.dim = z;
  g.largest_zero = z > 0 ? ascending[z - 1] : 0.0;
  g.first_nonzero = z < n ? ascending[z] : std::numeric_limits<double>::infinity();
  g.certified = z == n || g.first_nonzero >= gap * std::max(g.largest_zero, 0.0);
  return g;
}

inline void require_gap(const GapCount& g, const std::string& what) {
  if (!g.certified)
    throw Error(ErrorCode::GapTooSmall, what + ": zero cluster of size " + std::to_string(g.dim) +
                                            " not separated (largest zero " + std::to_string(g.largest_zero) +
                                            ", next " + std::to_string(g.first_nonzero) + ")");
}

// Spectrum of a symmetric matrix together with its gap-certified kernel.
struct SymmetricSpectrum {
  RVec values;
  RMat vectors;
  GapCount gap;

  RMat kernel() const { return vectors.leftCols(gap.dim); }
};

inline SymmetricSpectrum symmetric_spectrum(const RMat& m) {
  SymmetricSpectrum s;
  if (m.rows() == 0) {
    s.gap.certified = true;
    return s;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(m);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NaNDetected, "eigensolver failed");
  s.values = es.eigenvalues();
  s.vectors = es.eigenvectors();
  s.gap = count_zero_modes(s.values);
  return s;
}

inline double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace bh
