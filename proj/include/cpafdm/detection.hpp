#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "cpafdm/channel.hpp"
#include "cpafdm/waveform.hpp"

namespace cpafdm {

struct DetectionResult {
  CVec symbols;
  Bits bits;
  double residual = 0.0;  // ||y - G x_hat||^2
};

/// Linear MMSE equalizer x = G^H (G G^H + s2 I)^-1 y. The Gram matrix is
/// formed once so several noise levels reuse it. A noise variance of zero
/// switches to a direct solve against G and throws RankDeficient when G is
/// singular.
class MmseEqualizer {
 public:
  explicit MmseEqualizer(Eigen::MatrixXcd g);

  const Eigen::MatrixXcd& channel() const { return g_; }
  CVec equalize(std::span<const cd> y, double noise_var) const;

 private:
  Eigen::MatrixXcd g_;
  Eigen::MatrixXcd gram_;
};

CVec mmse_equalize(const Eigen::MatrixXcd& g, std::span<const cd> y,
                   double noise_var);
CVec mmse_equalize(const EffectiveChannel& g, const DemodFrame& y,
                   double noise_var);

/// ||y - G x||^2.
double residual(const Eigen::MatrixXcd& g, std::span<const cd> y,
                std::span<const cd> x);

/// Largest M^N the exhaustive detector accepts.
inline constexpr std::uint64_t kMlSearchCap = std::uint64_t{1} << 20;

/// Exhaustive ML over all M^N symbol vectors; ties go to the
/// lexicographically smallest index vector (symbol 0 most significant).
DetectionResult ml_detect(const Eigen::MatrixXcd& g, std::span<const cd> y,
                          const QamConstellation& m);

struct BerRecord {
  double snr_db = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t bit_errors = 0;
  double ber = 0.0;
  double ci95 = 0.0;  // normal-approximation half-width
};

BerRecord make_ber_record(double snr_db, std::uint64_t trials,
                          std::uint64_t bits_per_trial, std::uint64_t errors);

std::uint64_t count_bit_errors(std::span<const std::uint8_t> a,
                               std::span<const std::uint8_t> b);

/// One Monte Carlo draw shared by every waveform and SNR point of a run:
/// channel, information bits and unit-variance noise, in that order from the
/// trial's own stream.
struct TrialDraw {
  ChannelSpec channel;
  Bits bits;
  CVec unit_noise;
};

TrialDraw draw_trial(const ChannelFamily& family, const QamConstellation& m,
                     std::uint64_t master_seed, std::uint64_t trial);

/// Bit errors per SNR point for one trial with matched demodulation,
/// perfect effective-channel knowledge and MMSE detection.
std::vector<std::uint64_t> ber_trial(const Waveform& w, const TrialDraw& draw,
                                     const QamConstellation& m,
                                     std::span<const double> snr_grid);

/// BER curve over `trials` channel draws. OpenMP-parallel over trials;
/// results are identical for any thread count.
std::vector<BerRecord> run_ber(const Waveform& w, const ChannelFamily& family,
                               const QamConstellation& m,
                               std::span<const double> snr_grid,
                               std::uint64_t trials, std::uint64_t master_seed);

namespace serial {
std::vector<BerRecord> run_ber(const Waveform& w, const ChannelFamily& family,
                               const QamConstellation& m,
                               std::span<const double> snr_grid,
                               std::uint64_t trials, std::uint64_t master_seed);
}  // namespace serial

}  // namespace cpafdm
