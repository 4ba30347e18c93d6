#pragma once

#include <stdexcept>
#include <string>

namespace oblmp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, long expected, long got)
      : Error("dimension mismatch: " + what + " (expected " + std::to_string(expected) +
              ", got " + std::to_string(got) + ")"),
        expected_(expected),
        got_(got) {}

  long expected() const noexcept { return expected_; }
  long got() const noexcept { return got_; }

 private:
  long expected_;
  long got_;
};

/// A zero (or numerically zero) vector where a nonzero atom is required.
class DegenerateAtom : public Error {
 public:
  using Error::Error;
};

/// The new atom lies (numerically) in the span of the atoms already selected.
class DependentAtom : public Error {
 public:
  DependentAtom(double residual_norm, double threshold)
      : Error("dependent atom: orthogonal residual " + std::to_string(residual_norm) +
              " <= threshold " + std::to_string(threshold)),
        residual_norm_(residual_norm) {}

  double residual_norm() const noexcept { return residual_norm_; }

 private:
  double residual_norm_;
};

/// Gram matrix rank-deficient at working precision. Carries the condition estimate.
class SingularGram : public Error {
 public:
  explicit SingularGram(double condition)
      : Error("singular Gram matrix (condition estimate " + std::to_string(condition) + ")"),
        condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A file could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyDictionary : public Error {
 public:
  EmptyDictionary() : Error("empty dictionary") {}
};

}  // namespace oblmp
