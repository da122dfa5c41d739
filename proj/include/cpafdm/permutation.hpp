#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cpafdm/types.hpp"

namespace cpafdm {

using BigInt = boost::multiprecision::cpp_int;

/// Exact n! as an arbitrary-precision integer.
BigInt factorial(std::size_t n);

/// floor(log2(n!)), exact.
std::size_t floor_log2_factorial(std::size_t n);

/// Bijective index map on {0..N-1}. Applying it gathers:
/// out[n] = in[map[n]].
class Permutation {
 public:
  /// Validates that `map` is a bijection onto {0..map.size()-1}.
  explicit Permutation(std::vector<std::size_t> map);

  static Permutation identity(std::size_t n);

  /// Lehmer-code (factoradic) unranking in lexicographic order. Rank 0 is the
  /// identity, rank n!-1 the reversal.
  static Permutation from_rank(std::size_t n, const BigInt& rank);

  /// Uniform draw over all n! permutations. Each factoradic digit is drawn
  /// independently, so the rank is uniform without big-integer rejection.
  static Permutation random(std::size_t n, std::mt19937_64& rng);

  BigInt rank() const;
  Permutation inverse() const;
  /// (a.then(b)).apply(v) == b.apply(a.apply(v)).
  Permutation then(const Permutation& next) const;

  bool is_identity() const;
  std::size_t size() const { return map_.size(); }
  std::size_t operator[](std::size_t n) const { return map_[n]; }
  const std::vector<std::size_t>& map() const { return map_; }

  template <typename T>
  std::vector<T> apply(std::span<const T> v) const {
    require_size(v.size(), map_.size(), "Permutation::apply");
    std::vector<T> out(v.size());
    for (std::size_t n = 0; n < map_.size(); ++n) out[n] = v[map_[n]];
    return out;
  }
  template <typename T>
  std::vector<T> apply(const std::vector<T>& v) const {
    return apply(std::span<const T>(v));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

/// Uniform rank in [0, n!) drawn digit-by-digit in the factoradic base.
BigInt random_rank(std::size_t n, std::mt19937_64& rng);

}  // namespace cpafdm
