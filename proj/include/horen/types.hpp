#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace horen {

using Scalar = double;
using Index = Eigen::Index;
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Keys are scanned row-wise; row-major storage keeps one key contiguous.
using RowMatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using EntryLabel = std::string;

// Norms below this are treated as zero (not normalizable).
inline constexpr Scalar kZeroNormThreshold = 1e-12;
// Slack allowed on the unit-norm invariant.
inline constexpr Scalar kUnitNormTolerance = 1e-9;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroNormError : Error {
  using Error::Error;
};

struct DimensionMismatchError : Error {
  using Error::Error;
};

struct EmptyInputError : Error {
  using Error::Error;
};

struct NonFiniteLossError : Error {
  using Error::Error;
};

struct InvalidConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct FormatError : Error {
  using Error::Error;
};

struct ResourceBudgetExceededError : Error {
  using Error::Error;
};

}  // namespace horen
