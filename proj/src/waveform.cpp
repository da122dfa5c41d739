#include "cpafdm/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace cpafdm {
namespace {

std::size_t log2_exact(std::size_t v) {
  std::size_t b = 0;
  while ((std::size_t{1} << b) < v) ++b;
  return b;
}

}  // namespace

QamConstellation::QamConstellation(std::size_t order) {
  if (order != 4 && order != 16 && order != 64) {
    throw InvalidSize("QamConstellation: order must be 4, 16 or 64");
  }
  bits_ = log2_exact(order);
  const std::size_t half = bits_ / 2;
  const std::size_t levels = std::size_t{1} << half;
  // amplitude for each Gray label along one axis
  std::vector<double> amp(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    const std::size_t gray = i ^ (i >> 1);
    amp[gray] = static_cast<double>(levels - 1) - 2.0 * static_cast<double>(i);
  }
  const double scale =
      1.0 / std::sqrt(2.0 * (static_cast<double>(order) - 1.0) / 3.0);
  points_.resize(order);
  for (std::size_t label = 0; label < order; ++label) {
    const std::size_t li = label >> half;
    const std::size_t lq = label & (levels - 1);
    points_[label] = cd{amp[li], amp[lq]} * scale;
  }
}

std::size_t QamConstellation::nearest(cd z) const {
  std::size_t best = 0;
  double best_d = std::norm(z - points_[0]);
  for (std::size_t k = 1; k < points_.size(); ++k) {
    const double d = std::norm(z - points_[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

SymbolFrame map_bits(std::span<const std::uint8_t> bits,
                     const QamConstellation& m) {
  const std::size_t b = m.bits_per_symbol();
  if (bits.size() % b != 0) {
    throw DimensionMismatch("map_bits: bit count must be a multiple of log2(M)");
  }
  CVec out(bits.size() / b);
  for (std::size_t s = 0; s < out.size(); ++s) {
    std::size_t label = 0;
    for (std::size_t k = 0; k < b; ++k) label = (label << 1) | (bits[s * b + k] & 1u);
    out[s] = m.points()[label];
  }
  return SymbolFrame(std::move(out));
}

Bits hard_demap(std::span<const cd> symbols, const QamConstellation& m) {
  const std::size_t b = m.bits_per_symbol();
  Bits out(symbols.size() * b);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const std::size_t label = m.nearest(symbols[s]);
    for (std::size_t k = 0; k < b; ++k) {
      out[s * b + k] = static_cast<std::uint8_t>((label >> (b - 1 - k)) & 1u);
    }
  }
  return out;
}

std::string to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::ofdm: return "ofdm";
    case WaveformKind::afdm: return "afdm";
    case WaveformKind::cpafdm_one_sided: return "cpafdm-one-sided";
    case WaveformKind::cpafdm_two_sided: return "cpafdm-two-sided";
  }
  return "unknown";
}

WaveformKind waveform_kind_from_string(const std::string& s) {
  if (s == "ofdm") return WaveformKind::ofdm;
  if (s == "afdm") return WaveformKind::afdm;
  if (s == "cpafdm-one-sided" || s == "cpafdm") return WaveformKind::cpafdm_one_sided;
  if (s == "cpafdm-two-sided") return WaveformKind::cpafdm_two_sided;
  throw std::invalid_argument("unknown waveform kind '" + s + "'");
}

double default_c2(std::size_t n) {
  return 1.0 / (2.0 * static_cast<double>(n) * kPi);
}

Waveform::Waveform(WaveformKind kind, TransformConfig cfg)
    : kind_(kind), transform_(std::move(cfg)) {
  const TransformConfig& c = transform_.config();
  switch (kind_) {
    case WaveformKind::ofdm:
      if (c.c1 != 0.0 || c.c2 != 0.0 || !c.unpermuted()) {
        throw std::invalid_argument("ofdm: requires c1 = c2 = 0 and no permutation");
      }
      break;
    case WaveformKind::afdm:
      if (!c.unpermuted()) throw std::invalid_argument("afdm: permutations must be identity");
      break;
    case WaveformKind::cpafdm_one_sided:
      if (!c.perm1.is_identity()) {
        throw std::invalid_argument("cpafdm-one-sided: first permutation must be identity");
      }
      break;
    case WaveformKind::cpafdm_two_sided:
      break;
  }
}

Waveform Waveform::ofdm(std::size_t n) {
  return {WaveformKind::ofdm, TransformConfig(n, 0.0, 0.0)};
}

Waveform Waveform::afdm(std::size_t n, double c1, double c2) {
  return {WaveformKind::afdm, TransformConfig(n, c1, c2)};
}

Waveform Waveform::cpafdm_one_sided(std::size_t n, double c1, double c2,
                                    Permutation perm2) {
  return {WaveformKind::cpafdm_one_sided,
          TransformConfig(n, c1, c2, Permutation::identity(n), std::move(perm2))};
}

Waveform Waveform::cpafdm_two_sided(std::size_t n, double c1, double c2,
                                    Permutation perm1, Permutation perm2) {
  return {WaveformKind::cpafdm_two_sided,
          TransformConfig(n, c1, c2, std::move(perm1), std::move(perm2))};
}

PrefixPhaseRule Waveform::prefix() const {
  if (kind_ == WaveformKind::ofdm) return PrefixPhaseRule::zero();
  return PrefixPhaseRule::chirp_periodic(config().c1);
}

TimeFrame modulate(const Waveform& w, const SymbolFrame& x) {
  return TimeFrame(w.transform().inverse(x.view()));
}

DemodFrame demodulate(const Waveform& w, const ReceivedFrame& r) {
  return DemodFrame(w.transform().forward(r.view()));
}

double noise_variance(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

CVec complex_gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CVec out(n);
  for (cd& v : out) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v = {re, im};
  }
  return out;
}

Bits random_bits(std::size_t count, std::mt19937_64& rng) {
  Bits out(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    out[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  return out;
}

ReceivedFrame transmit_with_noise(const TimeFrame& s, const ChannelSpec& spec,
                                  const PrefixPhaseRule& prefix,
                                  std::span<const cd> unit_noise, double snr_db) {
  CVec r = apply_channel(spec, prefix, s.view());
  const double sigma = std::sqrt(noise_variance(snr_db));
  if (sigma > 0.0) {
    require_size(unit_noise.size(), r.size(), "transmit: noise");
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += sigma * unit_noise[i];
  }
  return ReceivedFrame(std::move(r));
}

ReceivedFrame transmit(const TimeFrame& s, const ChannelSpec& spec,
                       const PrefixPhaseRule& prefix, double snr_db,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const CVec noise = complex_gaussian(s.size(), rng);
  return transmit_with_noise(s, spec, prefix, noise, snr_db);
}

ReceivedFrame transmit(const Waveform& w, const TimeFrame& s,
                       const ChannelSpec& spec, double snr_db,
                       std::uint64_t seed) {
  return transmit(s, spec, w.prefix(), snr_db, seed);
}

double evm_percent(std::span<const cd> symbols, const QamConstellation& m) {
  if (symbols.empty()) return 0.0;
  double err = 0.0;
  for (cd z : symbols) err += std::norm(z - m.points()[m.nearest(z)]);
  return 100.0 * std::sqrt(err / static_cast<double>(symbols.size()));
}

}  // namespace cpafdm
