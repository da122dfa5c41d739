#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpafdm/detection.hpp"
#include "cpafdm/permutation.hpp"

namespace cpafdm {

/// Secret second-chirp permutation shared by the legitimate link.
struct PermKey {
  std::size_t n = 0;
  BigInt rank;
  Permutation perm;

  static PermKey from_rank(std::size_t n, const BigInt& rank);
};

/// Uniform key over all n! permutations, a pure function of `seed`.
PermKey keygen(std::size_t n, std::uint64_t seed);

/// Shared setup of the eavesdropping experiment. The eavesdropper knows
/// N, c1, c2, the constellation and the channel perfectly; only the
/// permutation is secret.
struct EveSetup {
  ChannelFamily family;
  double c1 = 0.0;
  double c2 = 0.0;
  std::size_t constellation = 4;
  std::vector<double> snr_grid;
  std::uint64_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t wrong_keys = 20;
  std::size_t scatter_points = 4096;
};

/// Demodulation with a receiver permutation that differs from the
/// transmitter's, pooled over all receiver keys and trials.
struct MismatchReport {
  std::vector<BerRecord> ber;
  std::vector<double> evm_percent;
  /// 1 - |mean exp(j (arg x_hat - arg x))| of the equalized symbols.
  std::vector<double> phase_variance;
  /// Equalized symbols at the last SNR point (first receiver key first).
  CVec scatter;
};

/// Every receiver key sees the same per-trial draws (draw_trial with
/// setup.seed) as the matched link. OpenMP-parallel over (key, trial).
MismatchReport mismatched_link(const Permutation& tx, std::span<const Permutation> rx,
                               const EveSetup& setup);

struct EveReport {
  std::vector<double> snr_grid;
  std::vector<BerRecord> matched;
  MismatchReport mismatched;
  std::vector<PermKey> wrong_keys;
};

/// Wrong key j is keygen'd from derive_seed(seed, "wrong-key", j), redrawn
/// while it equals the true key. Throws std::invalid_argument for zero
/// wrong keys.
std::vector<PermKey> draw_wrong_keys(const PermKey& key, std::size_t count,
                                     std::uint64_t seed);

/// Matched curve: run_ber with the key's one-sided waveform (identical to
/// the plain CP-AFDM pipeline). Mismatched: pooled over the wrong keys.
EveReport eavesdrop_experiment(const PermKey& key, const EveSetup& setup);

struct KeyspaceReport {
  std::size_t n = 0;
  std::size_t factorial_bits = 0;  // floor(log2 n!)
  std::size_t bit_length = 0;      // bits needed to write n!
  double log2_keys = 0.0;
  std::string factorial;           // decimal n!
  std::string note;
};

KeyspaceReport keyspace_report(std::size_t n);

}  // namespace cpafdm
