#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>
#include <utility>
#include <vector>

#include "cpafdm/transforms.hpp"
#include "cpafdm/types.hpp"

namespace cpafdm {

/// One delay-Doppler tap: complex gain, integer delay (samples) and
/// normalized digital Doppler (cycles per frame).
struct PathSpec {
  cd gain{1.0, 0.0};
  std::size_t delay = 0;
  double doppler = 0.0;
};

struct ChannelSpec {
  std::size_t n = 0;
  std::vector<PathSpec> paths;
  std::size_t lmax = 0;
  std::size_t fmax = 0;
  std::size_t guard = 0;

  /// Throws InvalidPath when a tap leaves the declared delay/Doppler box or
  /// the frame.
  void validate() const;

  /// 2(fmax + guard)(lmax + 1) + lmax <= N.
  bool orthogonal() const;
};

/// Left-hand side of the orthogonality condition, 2(fmax+guard)(lmax+1)+lmax.
std::size_t orthogonality_load(std::size_t lmax, std::size_t fmax,
                               std::size_t guard);

/// Phase continuation used by the prefix. The chirp-periodic prefix copies
/// s[n'] = s[N+n'] exp(-j 2 pi c1 (N^2 + 2 N n')) for n' < 0.
struct PrefixPhaseRule {
  enum class Kind { zero, chirp_periodic };
  Kind kind = Kind::zero;
  double c1 = 0.0;

  static PrefixPhaseRule zero() { return {}; }
  static PrefixPhaseRule chirp_periodic(double c1) {
    return {Kind::chirp_periodic, c1};
  }

  /// phi_cp(n') in cycles, for a prefix sample index n' < 0.
  double phase_cycles(long n_prime, std::size_t n) const;
};

/// Dense H = sum_p h_p Phi_p W^{f_p} L^{l_p}.
Eigen::MatrixXcd channel_matrix(const ChannelSpec& spec,
                                const PrefixPhaseRule& prefix);

/// H * s in O(N P) without building H.
CVec apply_channel(const ChannelSpec& spec, const PrefixPhaseRule& prefix,
                   std::span<const cd> s);

struct EffectiveChannel {
  Eigen::MatrixXcd matrix;
  std::vector<std::pair<std::size_t, std::size_t>> support;
  std::vector<std::size_t> locs;
  TransformConfig config;
};

/// Entries with |g| > rel * max|g|, in row-major order.
std::vector<std::pair<std::size_t, std::size_t>> support_of(
    const Eigen::MatrixXcd& g, double rel = 1e-9);

/// G = A H A^-1 with the chirp-periodic prefix matched to cfg.c1.
EffectiveChannel effective_channel(const ChannelSpec& spec,
                                   const TransformConfig& cfg);

/// Xi = F diag(P1 l_c1) H diag(P1 l_c1)^H F^H: the effective channel before
/// the second chirp is applied.
Eigen::MatrixXcd structure_matrix(const ChannelSpec& spec, double c1,
                                  const Permutation& perm1);

/// G[n][n'] = d[n] Xi[n][n'] conj(d[n']).
Eigen::MatrixXcd apply_second_chirp(const Eigen::MatrixXcd& xi,
                                    std::span<const cd> d2);

/// [f + 2 N c1 l] mod N, rounded to the nearest integer for fractional taps.
std::size_t location_index(const PathSpec& path, const ChannelSpec& spec,
                           double c1);

/// [f + l (1 + 2 (fmax + guard))] mod N. Equals location_index() only when
/// c1 is optimal_c1(fmax, guard, N).
std::size_t location_index_optimal(const PathSpec& path,
                                   const ChannelSpec& spec);

struct ExtractedPath {
  std::size_t delay;
  long doppler;
  cd gain;
  std::size_t loc;
};

/// Recovers every tap from row 0 of a one-sided (or unpermuted) effective
/// channel with integer Dopplers. Throws NonOrthogonalChannel when the
/// delay-Doppler box does not map one-to-one onto location indices.
std::vector<ExtractedPath> extract_paths(const EffectiveChannel& g,
                                         const ChannelSpec& spec);

struct C1Choice {
  double c1;
  bool orthogonal;
};

/// c1 = (2 (fmax + guard) + 1) / (2 N). `orthogonal` is false when the
/// orthogonality condition fails for the given lmax.
C1Choice optimal_c1(std::size_t fmax, std::size_t guard, std::size_t n,
                    std::size_t lmax = 0);

/// Randomization used by the Monte Carlo experiments: P taps with
/// complex Gaussian gains of unit total power, delays uniform in [0, lmax],
/// integer Dopplers uniform in [-fmax, fmax] (or continuous when
/// `fractional_doppler`), no two taps sharing a (delay, Doppler) pair.
struct ChannelFamily {
  std::size_t n = 64;
  std::size_t paths = 3;
  std::size_t lmax = 2;
  std::size_t fmax = 2;
  std::size_t guard = 0;
  bool fractional_doppler = false;

  ChannelSpec draw(std::mt19937_64& rng) const;
};

}  // namespace cpafdm
