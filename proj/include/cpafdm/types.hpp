#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpafdm {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error types. Each maps onto one failure class of the public API so callers
// (and tests) can distinguish them.
class InvalidSize : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPath : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonOrthogonalChannel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SearchSpaceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

class CapacityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateMainlobe : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected length " +
                            std::to_string(want) + ", got " +
                            std::to_string(got));
  }
}

}  // namespace cpafdm
