#include "cpafdm/detection.hpp"

#include <cmath>
#include <limits>

#include "cpafdm/seeding.hpp"
#include "parallel.hpp"

namespace cpafdm {

MmseEqualizer::MmseEqualizer(Eigen::MatrixXcd g)
    : g_(std::move(g)), gram_(g_ * g_.adjoint()) {}

CVec MmseEqualizer::equalize(std::span<const cd> y, double noise_var) const {
  require_size(y.size(), static_cast<std::size_t>(g_.rows()), "mmse_equalize");
  Eigen::Map<const Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::VectorXcd x;
  if (noise_var <= 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(g_);
    if (!lu.isInvertible()) {
      throw RankDeficient("mmse_equalize: singular channel in noiseless mode");
    }
    x = lu.solve(yv);
  } else {
    Eigen::MatrixXcd a = gram_;
    a.diagonal().array() += noise_var;
    x = g_.adjoint() * a.llt().solve(yv);
  }
  return {x.data(), x.data() + x.size()};
}

CVec mmse_equalize(const Eigen::MatrixXcd& g, std::span<const cd> y,
                   double noise_var) {
  return MmseEqualizer(g).equalize(y, noise_var);
}

CVec mmse_equalize(const EffectiveChannel& g, const DemodFrame& y,
                   double noise_var) {
  return mmse_equalize(g.matrix, y.view(), noise_var);
}

double residual(const Eigen::MatrixXcd& g, std::span<const cd> y,
                std::span<const cd> x) {
  require_size(y.size(), static_cast<std::size_t>(g.rows()), "residual: y");
  require_size(x.size(), static_cast<std::size_t>(g.cols()), "residual: x");
  Eigen::Map<const Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::Map<const Eigen::VectorXcd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return (yv - g * xv).squaredNorm();
}

DetectionResult ml_detect(const Eigen::MatrixXcd& g, std::span<const cd> y,
                          const QamConstellation& m) {
  const auto n = static_cast<std::size_t>(g.cols());
  require_size(y.size(), static_cast<std::size_t>(g.rows()), "ml_detect");
  const std::uint64_t order = m.order();
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (space > kMlSearchCap / order) {
      throw SearchSpaceTooLarge("ml_detect: M^N exceeds the 2^20 search cap");
    }
    space *= order;
  }

  Eigen::Map<const Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> idx(n, 0);
  std::vector<std::size_t> best_idx(n, 0);
  Eigen::VectorXcd x(n);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t c = 0; c < space; ++c) {
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = m.points()[idx[i]];
    const double score = (yv - g * x).squaredNorm();
    if (score < best) {
      best = score;
      best_idx = idx;
    }
    // odometer, last symbol fastest
    for (std::size_t i = n; i-- > 0;) {
      if (++idx[i] < order) break;
      idx[i] = 0;
    }
  }
  DetectionResult out;
  out.symbols.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.symbols[i] = m.points()[best_idx[i]];
  out.bits = hard_demap(out.symbols, m);
  out.residual = best;
  return out;
}

BerRecord make_ber_record(double snr_db, std::uint64_t trials,
                          std::uint64_t bits_per_trial, std::uint64_t errors) {
  BerRecord r;
  r.snr_db = snr_db;
  r.trials = trials;
  r.bit_errors = errors;
  const double total = static_cast<double>(trials) * static_cast<double>(bits_per_trial);
  r.ber = total > 0 ? static_cast<double>(errors) / total : 0.0;
  r.ci95 = total > 0 ? 1.96 * std::sqrt(r.ber * (1.0 - r.ber) / total) : 0.0;
  return r;
}

std::uint64_t count_bit_errors(std::span<const std::uint8_t> a,
                               std::span<const std::uint8_t> b) {
  require_size(b.size(), a.size(), "count_bit_errors");
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] != b[i]);
  return e;
}

TrialDraw draw_trial(const ChannelFamily& family, const QamConstellation& m,
                     std::uint64_t master_seed, std::uint64_t trial) {
  std::mt19937_64 rng(derive_seed(master_seed, "trial", trial));
  TrialDraw d;
  d.channel = family.draw(rng);
  d.bits = random_bits(family.n * m.bits_per_symbol(), rng);
  d.unit_noise = complex_gaussian(family.n, rng);
  return d;
}

std::vector<std::uint64_t> ber_trial(const Waveform& w, const TrialDraw& draw,
                                     const QamConstellation& m,
                                     std::span<const double> snr_grid) {
  require_size(draw.channel.n, w.size(), "ber_trial: channel size");
  const MmseEqualizer eq(effective_channel(draw.channel, w.config()).matrix);
  const TimeFrame s = modulate(w, map_bits(draw.bits, m));
  std::vector<std::uint64_t> errors(snr_grid.size(), 0);
  for (std::size_t k = 0; k < snr_grid.size(); ++k) {
    const ReceivedFrame r =
        transmit_with_noise(s, draw.channel, w.prefix(), draw.unit_noise, snr_grid[k]);
    const DemodFrame y = demodulate(w, r);
    const CVec xhat = eq.equalize(y.view(), noise_variance(snr_grid[k]));
    errors[k] = count_bit_errors(hard_demap(xhat, m), draw.bits);
  }
  return errors;
}

namespace {

std::vector<BerRecord> summarize(const std::vector<std::vector<std::uint64_t>>& per_trial,
                                 std::span<const double> snr_grid,
                                 std::uint64_t bits_per_trial) {
  std::vector<BerRecord> out;
  for (std::size_t k = 0; k < snr_grid.size(); ++k) {
    std::uint64_t e = 0;
    for (const auto& t : per_trial) e += t[k];
    out.push_back(make_ber_record(snr_grid[k], per_trial.size(), bits_per_trial, e));
  }
  return out;
}

}  // namespace

std::vector<BerRecord> run_ber(const Waveform& w, const ChannelFamily& family,
                               const QamConstellation& m,
                               std::span<const double> snr_grid,
                               std::uint64_t trials, std::uint64_t master_seed) {
  if (trials == 0) throw std::invalid_argument("run_ber: trials must be >= 1");
  require_size(family.n, w.size(), "run_ber: channel size");
  std::vector<std::vector<std::uint64_t>> per_trial(trials);
  const auto count = static_cast<long long>(trials);
  detail::FirstError err;
#pragma omp parallel for schedule(dynamic, 4)
  for (long long t = 0; t < count; ++t) {
    err.run([&] {
      const TrialDraw d = draw_trial(family, m, master_seed, static_cast<std::uint64_t>(t));
      per_trial[static_cast<std::size_t>(t)] = ber_trial(w, d, m, snr_grid);
    });
  }
  err.rethrow();
  return summarize(per_trial, snr_grid, family.n * m.bits_per_symbol());
}

namespace serial {

std::vector<BerRecord> run_ber(const Waveform& w, const ChannelFamily& family,
                               const QamConstellation& m,
                               std::span<const double> snr_grid,
                               std::uint64_t trials, std::uint64_t master_seed) {
  if (trials == 0) throw std::invalid_argument("run_ber: trials must be >= 1");
  require_size(family.n, w.size(), "run_ber: channel size");
  std::vector<std::vector<std::uint64_t>> per_trial;
  per_trial.reserve(trials);
  for (std::uint64_t t = 0; t < trials; ++t) {
    per_trial.push_back(ber_trial(w, draw_trial(family, m, master_seed, t), m, snr_grid));
  }
  return summarize(per_trial, snr_grid, family.n * m.bits_per_symbol());
}

}  // namespace serial
}  // namespace cpafdm
