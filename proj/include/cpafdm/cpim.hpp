#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cpafdm/channel.hpp"
#include "cpafdm/permutation.hpp"
#include "cpafdm/waveform.hpp"

namespace cpafdm {

/// floor(log2(n!)): the largest k with a 2^k-entry codebook. n >= 2.
std::size_t max_index_bits(std::size_t n);

/// Codebooks are materialized, so K is also capped by storage.
inline constexpr std::size_t kMaxCodebookBits = 20;

/// 2^k_bits distinct second-chirp permutations; entry 0 is the identity.
struct PermCodebook {
  std::size_t n = 0;
  std::size_t k_bits = 0;
  std::vector<Permutation> entries;

  std::size_t size() const { return entries.size(); }
};

/// Entry 0 is the identity; the rest are unranked from distinct uniform
/// ranks drawn from derive_seed(seed, "codebook", 0). Throws CapacityError
/// when k_bits is 0, exceeds max_index_bits(n) or kMaxCodebookBits.
PermCodebook build_codebook(std::size_t n, std::size_t k_bits, std::uint64_t seed);

struct CpimFrame {
  Bits index_bits;
  Bits symbol_bits;
  std::size_t chosen_index = 0;
  SymbolFrame symbols;
  double score = 0.0;  // detector residual; 0 at the transmitter

  Bits all_bits() const;
};

/// One-sided CP-AFDM whose second-chirp permutation carries k_bits extra
/// bits per frame. Frame bit layout: k_bits index bits (MSB first) followed
/// by N log2(M) symbol bits.
class CpimScheme {
 public:
  CpimScheme(PermCodebook codebook, double c1, double c2, QamConstellation m);

  const PermCodebook& codebook() const { return codebook_; }
  const QamConstellation& constellation() const { return m_; }
  std::size_t n() const { return codebook_.n; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  std::size_t bits_per_frame() const;
  const Waveform& waveform(std::size_t k) const { return waveforms_.at(k); }
  PrefixPhaseRule prefix() const { return PrefixPhaseRule::chirp_periodic(c1_); }

  std::pair<CpimFrame, TimeFrame> encode(std::span<const std::uint8_t> bits) const;

  /// Per candidate k: demodulate with A_k, MMSE-equalize with G_k, slice,
  /// score ||y_k - G_k x_k||^2. Returns the smallest score, ties to the
  /// smallest k.
  CpimFrame detect(const ReceivedFrame& r, const ChannelSpec& spec,
                   double noise_var) const;

  /// Scores of every candidate, in codebook order.
  std::vector<double> scores(const ReceivedFrame& r, const ChannelSpec& spec,
                             double noise_var) const;

 private:
  struct Candidate {
    CVec symbols;
    double score;
  };
  std::vector<Candidate> candidates(const ReceivedFrame& r, const ChannelSpec& spec,
                                    double noise_var) const;

  PermCodebook codebook_;
  double c1_;
  double c2_;
  QamConstellation m_;
  std::vector<Waveform> waveforms_;
};

std::pair<CpimFrame, TimeFrame> cpim_encode(std::span<const std::uint8_t> bits,
                                            const CpimScheme& scheme);
CpimFrame cpim_detect(const ReceivedFrame& r, const CpimScheme& scheme,
                      const ChannelSpec& spec, double noise_var);

struct SpectralEfficiency {
  std::size_t afdm_bits;
  std::size_t cpim_bits;
};

/// (N log2 M, N log2 M + log2 K). K must be a power of two >= 2.
SpectralEfficiency spectral_efficiency(std::size_t n, std::size_t m_order, std::uint64_t k);

struct CpimRecord {
  double snr_db = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t index_errors = 0;
  double index_error_rate = 0.0;
  double symbol_ber = 0.0;
  double total_ber = 0.0;
};

/// Monte Carlo over `trials` frames. Trial t draws channel, frame bits and
/// unit noise from derive_seed(seed, "cpim", t). OpenMP-parallel over
/// trials; output independent of the thread count.
std::vector<CpimRecord> run_cpim(const CpimScheme& scheme, const ChannelFamily& family,
                                 std::span<const double> snr_grid, std::uint64_t trials,
                                 std::uint64_t seed);

namespace serial {
std::vector<CpimRecord> run_cpim(const CpimScheme& scheme, const ChannelFamily& family,
                                 std::span<const double> snr_grid, std::uint64_t trials,
                                 std::uint64_t seed);
}  // namespace serial

}  // namespace cpafdm
