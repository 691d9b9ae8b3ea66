#pragma once

#include <cmath>
#include <utility>

#include "horen/types.hpp"

namespace horen {

/// Inner product with an explicit dimension check.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar dot(const Eigen::MatrixBase<DerivedA>& a,
                              const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatchError("dot: size " + std::to_string(a.size()) +
                                 " vs " + std::to_string(b.size()));
  }
  return a.dot(b);
}

/// Temperature-sharpened softmax, safe against overflow: the maximum entry is
/// subtracted before exponentiation, so the largest exponent is exactly 0.
/// Returns a probability vector (non-negative, sums to 1).
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar beta) {
  using S = typename Derived::Scalar;
  if (z.size() == 0) {
    throw EmptyInputError("softmax: empty input");
  }
  const S zmax = z.maxCoeff();
  Eigen::Matrix<S, Eigen::Dynamic, 1> p =
      ((z.array() - zmax) * beta).exp().matrix();
  p /= p.sum();
  return p;
}

/// Smoothed maximum (1/beta) * log(sum_i exp(beta * z_i)), evaluated in the
/// shifted form max(z) + (1/beta) * log(sum exp(beta (z_i - max))) so no
/// exponent exceeds 0.  Satisfies max(z) <= lse(z) <= max(z) + log(n)/beta.
template <class Derived>
typename Derived::Scalar lse(const Eigen::MatrixBase<Derived>& z,
                             typename Derived::Scalar beta) {
  using S = typename Derived::Scalar;
  if (z.size() == 0) {
    throw EmptyInputError("lse: empty input");
  }
  const S zmax = z.maxCoeff();
  const S sum = ((z.array() - zmax) * beta).exp().sum();
  return zmax + std::log(sum) / beta;
}

/// Unit-norm vector. The invariant | ||v|| - 1 | <= kUnitNormTolerance holds
/// for every constructed instance; build one via normalize() or from_unit().
class UnitVector {
 public:
  UnitVector() = default;

  /// Wraps a vector that is already unit-norm; throws otherwise.
  static UnitVector from_unit(VectorX v) {
    const Scalar n = v.norm();
    if (!(std::abs(n - Scalar(1)) <= kUnitNormTolerance)) {
      throw InvalidConfigError("from_unit: norm " + std::to_string(n) +
                               " is not 1 within tolerance");
    }
    return UnitVector(std::move(v));
  }

  const VectorX& vec() const noexcept { return v_; }
  Index size() const noexcept { return v_.size(); }
  Scalar operator[](Index i) const { return v_[i]; }

 private:
  explicit UnitVector(VectorX v) : v_(std::move(v)) {}
  friend UnitVector normalize(const VectorX&);

  VectorX v_;
};

/// Projects v onto the unit sphere. Throws ZeroNormError when the norm is
/// below kZeroNormThreshold (or not finite); such a vector has no direction.
inline UnitVector normalize(const VectorX& v) {
  const Scalar n = v.norm();
  if (!(n >= kZeroNormThreshold)) {
    throw ZeroNormError("normalize: norm " + std::to_string(n) +
                        " below threshold");
  }
  return UnitVector(v / n);
}

/// Cosine of the angle between two unit vectors, clamped to [-1, 1] so that
/// rounding can never push it outside the valid range of a cosine.
inline Scalar cosine(const UnitVector& a, const UnitVector& b) {
  const Scalar c = dot(a.vec(), b.vec());
  return std::min(Scalar(1), std::max(Scalar(-1), c));
}

}  // namespace horen
