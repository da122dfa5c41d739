#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "cpafdm/waveform.hpp"

namespace cpafdm {

// ---------------------------------------------------------------- PAPR ----

/// 10 log10(max |s|^2 / mean |s|^2). Throws UndefinedInput on a zero frame.
double papr_db(std::span<const cd> s);

/// P[PAPR > gamma] = 1 - (1 - exp(-gamma))^N for the max of N unit
/// exponentials. `gamma_linear` is a power ratio, not dB.
double papr_ccdf_analytic(std::size_t n, double gamma_linear);

/// Threshold (dB) at which the analytic CCDF equals `p`.
double papr_analytic_threshold_db(std::size_t n, double p);

/// Smallest sample threshold (dB) exceeded by at most a fraction `p` of the
/// samples.
double papr_empirical_threshold_db(std::span<const double> samples_db, double p);

struct PaprCcdf {
  std::vector<double> gammas_db;
  std::vector<double> empirical;
  std::vector<double> analytic;
};

PaprCcdf papr_ccdf(std::span<const double> samples_db,
                   std::span<const double> gammas_db, std::size_t n);

/// PAPR of `frames` random-data frames; frame f draws its bits from
/// derive_seed(seed, "papr", f). OpenMP-parallel over frames.
std::vector<double> papr_samples(const Waveform& w, const QamConstellation& m,
                                 std::size_t frames, std::uint64_t seed);

struct KsResult {
  double statistic;
  double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// sup |F_empirical - F_analytic| of PAPR samples (dB) against
/// (1 - exp(-gamma))^N.
double ks_distance_to_analytic(std::span<const double> samples_db, std::size_t n);

// ----------------------------------------------------- ambiguity function ----

/// Periodic discrete ambiguity magnitude
///   A[l, k] = |sum_n s[n] conj(s[(n - l) mod N]) exp(-j 2 pi k n / (Q N))|
/// over lags l in [-floor(N/2), ceil(N/2)) and Doppler bins
/// k in [-floor(QN/2), ceil(QN/2)), normalized so A[0, 0] = 1.
struct AFGrid {
  std::size_t n = 0;
  std::size_t q = 1;
  Eigen::MatrixXd values;  // row = lag - lag_min(), col = bin - bin_min()

  long lag_min() const { return -static_cast<long>(n / 2); }
  long bin_min() const { return -static_cast<long>((q * n) / 2); }
  std::size_t bins() const { return q * n; }
  double doppler_step() const { return 1.0 / static_cast<double>(q * n); }
  double at(long lag, long bin) const {
    return values(lag - lag_min(), bin - bin_min());
  }
};

AFGrid ambiguity(std::span<const cd> s, std::size_t q);

enum class CutKind { zero_delay, zero_doppler };

const char* to_string(CutKind kind);

/// One-dimensional slice through the origin. `axis` is in samples for the
/// zero-Doppler cut and cycles/sample for the zero-delay cut.
struct Cut {
  std::vector<double> axis;
  std::vector<double> amplitude;
  std::size_t origin = 0;
  double step = 1.0;
};

/// A(0, nu): Doppler axis.
Cut zero_delay_cut(const AFGrid& grid);
/// A(tau, 0): delay axis.
Cut zero_doppler_cut(const AFGrid& grid);
Cut extract_cut(const AFGrid& grid, CutKind kind);

inline constexpr double kMetricFloorDb = 300.0;

struct SidelobeMetrics {
  double pslr_db = 0.0;
  double islr_db = 0.0;
  double mainlobe_halfwidth = 0.0;  // axis units of the cut
  double peak_sidelobe_at = 0.0;    // axis position of the highest sidelobe
  CutKind cut = CutKind::zero_delay;
};

/// Mainlobe = samples within the -3 dB half-width (outward scan from the
/// origin to the first sample below peak/sqrt(2), linearly interpolated; the
/// wider of the two sides). PSLR and ISLR are taken over the remaining
/// samples. Throws DegenerateMainlobe when the cut never drops below -3 dB
/// or has no exterior. ISLR without sidelobe energy reports -300 dB.
SidelobeMetrics cut_metrics(const Cut& cut, CutKind kind);
SidelobeMetrics cut_metrics(const AFGrid& grid, CutKind kind);

/// Time-domain frame used for ambiguity plots: all-ones symbols through `w`.
TimeFrame all_ones_frame(const Waveform& w);

struct EnsembleSetup {
  std::size_t n = 64;
  double c1 = 0.0;
  double c2 = 0.0;
  std::size_t q = 8;
  bool random_symbols = false;  // all-ones otherwise
  std::size_t constellation = 4;
  std::uint64_t symbol_seed = 0;
};

struct EnsembleMember {
  Permutation perm;
  SidelobeMetrics doppler;  // zero-delay cut
  SidelobeMetrics delay;    // zero-Doppler cut
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

MetricStats stats_of(std::span<const double> v);

struct EnsembleReport {
  std::vector<EnsembleMember> members;
  MetricStats doppler_pslr, doppler_islr, doppler_halfwidth;
  MetricStats delay_pslr, delay_islr, delay_halfwidth;
};

/// Sidelobe metrics of one-sided CP-AFDM for each second-chirp permutation.
/// OpenMP-parallel over permutations.
EnsembleReport permutation_ensemble(const EnsembleSetup& setup,
                                    std::span<const Permutation> perms);

/// K independent uniform permutations drawn from derive_seed(seed, "perm", k).
std::vector<Permutation> random_permutations(std::size_t n, std::size_t k,
                                             std::uint64_t seed);

struct HistogramBin {
  double low;
  double high;
  std::uint64_t count;
};

/// Equal-width bins spanning [min, max] of the values.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

namespace serial {
std::vector<double> papr_samples(const Waveform& w, const QamConstellation& m,
                                 std::size_t frames, std::uint64_t seed);
AFGrid ambiguity(std::span<const cd> s, std::size_t q);
EnsembleReport permutation_ensemble(const EnsembleSetup& setup,
                                    std::span<const Permutation> perms);
}  // namespace serial

}  // namespace cpafdm
