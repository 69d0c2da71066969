#pragma once

#include <stdexcept>
#include <string>

namespace bspc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptyBlockList : public Error {
 public:
  using Error::Error;
};

/// Incompatible matrix shapes; the message names the offending index and both shapes.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// SVD or power iteration exceeded its iteration cap; the message carries the count.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::size_t iterations)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t iterations_;
};

class UnsortedSpectrum : public Error {
 public:
  using Error::Error;
};

class ZeroK : public Error {
 public:
  using Error::Error;
};

class NonSquareGrid : public Error {
 public:
  using Error::Error;
};

class ZeroSigmaAtRank : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class NonpositiveTau : public Error {
 public:
  using Error::Error;
};

class NonpositiveSigma : public Error {
 public:
  using Error::Error;
};

class RankTooLarge : public Error {
 public:
  using Error::Error;
};

class RankDeficientReference : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class PlanMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

/// File system or parse failure; the message names the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bspc
