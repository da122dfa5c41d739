#pragma once

#include <Eigen/Dense>

#include <span>

#include "cpafdm/permutation.hpp"
#include "cpafdm/types.hpp"

namespace cpafdm {

/// lambda[k] = exp(-j 2 pi c k^2), k = 0..N-1.
class ChirpSequence {
 public:
  ChirpSequence(std::size_t n, double rate);

  double rate() const { return rate_; }
  std::size_t size() const { return values_.size(); }
  const CVec& values() const { return values_; }
  cd operator[](std::size_t k) const { return values_[k]; }

 private:
  double rate_;
  CVec values_;
};

ChirpSequence chirp_sequence(std::size_t n, double c);

/// exp(-j 2 pi phase) with the phase reduced mod 1 first, so large phases
/// (c * n^2 with n ~ 1e3) keep full double precision.
cd unit_phasor(double cycles);

/// frac(a * b) using the exact two-product, so chirp phases c * k^2 keep
/// full precision when the product is in the thousands of cycles.
double frac_product(double a, double b);

/// Parameters of a chirp-permuted DAFT: A = diag(P2 l_c2) F diag(P1 l_c1).
struct TransformConfig {
  std::size_t n;
  double c1;
  double c2;
  Permutation perm1;
  Permutation perm2;

  TransformConfig(std::size_t n, double c1, double c2);
  TransformConfig(std::size_t n, double c1, double c2, Permutation perm1,
                  Permutation perm2);

  /// perm1 identity: the effective-channel structure matches plain AFDM.
  bool one_sided() const { return perm1.is_identity(); }
  bool unpermuted() const { return perm1.is_identity() && perm2.is_identity(); }
};

enum class TransformMode { matrix, fast };

/// Immutable CP-DAFT operator. The fast mode applies
/// diag * FFT * diag in O(N log N); the matrix mode multiplies by the
/// explicitly built N x N matrix.
class CpDaft {
 public:
  explicit CpDaft(TransformConfig cfg, TransformMode mode = TransformMode::fast);

  const TransformConfig& config() const { return cfg_; }
  TransformMode mode() const { return mode_; }
  std::size_t size() const { return cfg_.n; }

  /// Permuted chirp diagonals: first[n] = lambda_c1[perm1[n]],
  /// second[m] = lambda_c2[perm2[m]].
  const CVec& first_diagonal() const { return d1_; }
  const CVec& second_diagonal() const { return d2_; }

  CVec forward(std::span<const cd> v) const;
  CVec inverse(std::span<const cd> v) const;

  /// Dense forward matrix A (built on demand).
  Eigen::MatrixXcd matrix() const;

  /// kappa_n(m) = exp(j 2 pi (c1 P1(n)^2 + c2 P2(m)^2 + nm/N)) / sqrt(N);
  /// s[n] = sum_m x[m] kappa_n(m) reproduces inverse(x)[n].
  cd kernel(std::size_t n, std::size_t m) const;

 private:
  TransformConfig cfg_;
  TransformMode mode_;
  CVec d1_;
  CVec d2_;
  Eigen::MatrixXcd dense_;  // populated in matrix mode only
};

CVec cpdaft_forward(const TransformConfig& cfg, std::span<const cd> v);
CVec cpdaft_inverse(const TransformConfig& cfg, std::span<const cd> v);
cd kernel_sample(const TransformConfig& cfg, std::size_t n, std::size_t m);

/// Unitary DFT matrix, F[k][n] = exp(-j 2 pi kn / N) / sqrt(N).
Eigen::MatrixXcd dft_matrix(std::size_t n);

}  // namespace cpafdm
