#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpafdm/channel.hpp"
#include "cpafdm/transforms.hpp"
#include "cpafdm/types.hpp"

namespace cpafdm {

using Bits = std::vector<std::uint8_t>;

/// Square Gray-labelled QAM with unit average energy.
///
/// Bit layout per symbol (MSB first): the first log2(M)/2 bits select the
/// in-phase level, the rest the quadrature level. Along each axis the level
/// with Gray label g sits at amplitude (L - 1 - 2 i) with g = i ^ (i >> 1),
/// so label 0 is the most positive level. Point index == label value.
/// 4-QAM: 00 -> (+1+j)/sqrt2, 01 -> (+1-j)/sqrt2, 10 -> (-1+j)/sqrt2,
/// 11 -> (-1-j)/sqrt2.
class QamConstellation {
 public:
  explicit QamConstellation(std::size_t order);

  std::size_t order() const { return points_.size(); }
  std::size_t bits_per_symbol() const { return bits_; }
  const CVec& points() const { return points_; }

  /// Nearest point, ties resolved toward the smaller index.
  std::size_t nearest(cd z) const;

 private:
  std::size_t bits_;
  CVec points_;
};

enum class Domain { symbol, time, received, demodulated };

/// A length-N complex vector tagged with the domain it lives in. Each stage
/// of the link only accepts the tag it expects, so illegal transitions do not
/// compile.
template <Domain D>
class Frame {
 public:
  Frame() = default;
  explicit Frame(CVec data) : data_(std::move(data)) {}

  static constexpr Domain domain = D;
  std::size_t size() const { return data_.size(); }
  const CVec& data() const& { return data_; }
  // moves out of temporaries, so `for (cd v : f().data())` does not dangle
  CVec data() && { return std::move(data_); }
  std::span<const cd> view() const { return data_; }
  cd operator[](std::size_t i) const { return data_[i]; }

 private:
  CVec data_;
};

using SymbolFrame = Frame<Domain::symbol>;
using TimeFrame = Frame<Domain::time>;
using ReceivedFrame = Frame<Domain::received>;
using DemodFrame = Frame<Domain::demodulated>;

SymbolFrame map_bits(std::span<const std::uint8_t> bits,
                     const QamConstellation& m);
Bits hard_demap(std::span<const cd> symbols, const QamConstellation& m);

enum class WaveformKind { ofdm, afdm, cpafdm_one_sided, cpafdm_two_sided };

std::string to_string(WaveformKind kind);
WaveformKind waveform_kind_from_string(const std::string& s);

/// Default second chirp rate, 1 / (2 N pi): irrational and well below 1/(2N).
double default_c2(std::size_t n);

/// A modulator/demodulator pair. The kind constrains the transform:
/// ofdm has c1 = c2 = 0 and no permutation, afdm no permutation,
/// one-sided CP-AFDM an identity first permutation.
class Waveform {
 public:
  Waveform(WaveformKind kind, TransformConfig cfg);

  static Waveform ofdm(std::size_t n);
  static Waveform afdm(std::size_t n, double c1, double c2);
  static Waveform cpafdm_one_sided(std::size_t n, double c1, double c2,
                                   Permutation perm2);
  static Waveform cpafdm_two_sided(std::size_t n, double c1, double c2,
                                   Permutation perm1, Permutation perm2);

  WaveformKind kind() const { return kind_; }
  const TransformConfig& config() const { return transform_.config(); }
  const CpDaft& transform() const { return transform_; }
  std::size_t size() const { return transform_.size(); }

  /// Zero prefix phase for OFDM, chirp-periodic with c1 otherwise.
  PrefixPhaseRule prefix() const;

 private:
  WaveformKind kind_;
  CpDaft transform_;
};

TimeFrame modulate(const Waveform& w, const SymbolFrame& x);
DemodFrame demodulate(const Waveform& w, const ReceivedFrame& r);

/// Noise-free snr_db.
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// Per-sample noise variance for unit-energy symbols: 10^(-snr_db/10).
double noise_variance(double snr_db);

/// r = H s + w, w ~ CN(0, 10^(-snr_db/10) I). The noise stream is a pure
/// function of `seed`.
ReceivedFrame transmit(const TimeFrame& s, const ChannelSpec& spec,
                       const PrefixPhaseRule& prefix, double snr_db,
                       std::uint64_t seed);

/// Same, with the prefix rule the waveform requires.
ReceivedFrame transmit(const Waveform& w, const TimeFrame& s,
                       const ChannelSpec& spec, double snr_db,
                       std::uint64_t seed);

/// Channel output plus pre-drawn unit-variance noise scaled to snr_db.
ReceivedFrame transmit_with_noise(const TimeFrame& s, const ChannelSpec& spec,
                                  const PrefixPhaseRule& prefix,
                                  std::span<const cd> unit_noise, double snr_db);

/// N i.i.d. CN(0, 1) samples.
CVec complex_gaussian(std::size_t n, std::mt19937_64& rng);

/// Uniform random bits.
Bits random_bits(std::size_t count, std::mt19937_64& rng);

/// RMS error vector magnitude of `symbols` against their nearest points,
/// as a percentage of the constellation RMS (1 for unit-energy QAM).
double evm_percent(std::span<const cd> symbols, const QamConstellation& m);

}  // namespace cpafdm
