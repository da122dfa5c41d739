#include "cpafdm/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace cpafdm {

BigInt factorial(std::size_t n) {
  BigInt f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

std::size_t floor_log2_factorial(std::size_t n) {
  if (n < 2) return 0;
  return boost::multiprecision::msb(factorial(n));
}

Permutation::Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
  if (map_.empty()) throw InvalidSize("Permutation: size must be >= 1");
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t v : map_) {
    if (v >= map_.size() || seen[v]) {
      throw std::invalid_argument("Permutation: map is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  if (n == 0) throw InvalidSize("permutation_identity: n must be >= 1");
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

Permutation Permutation::from_rank(std::size_t n, const BigInt& rank) {
  if (n == 0) throw InvalidSize("permutation_from_rank: n must be >= 1");
  if (rank < 0 || rank >= factorial(n)) {
    throw OutOfRange("permutation_from_rank: rank must lie in [0, n!)");
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(n);
  BigInt rest = rank;
  BigInt radix = factorial(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto digit = static_cast<std::size_t>(rest / radix);
    rest %= radix;
    out.push_back(pool[digit]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit));
    if (i + 1 < n) radix /= (n - 1 - i);
  }
  return Permutation(std::move(out));
}

BigInt Permutation::rank() const {
  const std::size_t n = map_.size();
  BigInt r = 0;
  // Horner evaluation of the factoradic digits.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) smaller += map_[j] < map_[i];
    r = r * (n - i) + smaller;
  }
  return r;
}

BigInt random_rank(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw InvalidSize("random_rank: n must be >= 1");
  BigInt r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> digit(0, n - 1 - i);
    r = r * (n - i) + digit(rng);
  }
  return r;
}

Permutation Permutation::random(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw InvalidSize("Permutation::random: n must be >= 1");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> digit(0, n - 1 - i);
    const std::size_t d = digit(rng);
    out.push_back(pool[d]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return Permutation(std::move(out));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t n = 0; n < map_.size(); ++n) inv[map_[n]] = n;
  return Permutation(std::move(inv));
}

Permutation Permutation::then(const Permutation& next) const {
  require_size(next.size(), size(), "Permutation::then");
  // b.apply(a.apply(v))[n] = a.apply(v)[b[n]] = v[a[b[n]]]
  std::vector<std::size_t> m(map_.size());
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = map_[next.map_[n]];
  return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
  for (std::size_t n = 0; n < map_.size(); ++n) {
    if (map_[n] != n) return false;
  }
  return true;
}

}  // namespace cpafdm
