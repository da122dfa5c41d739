#include "cpafdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include "cpafdm/fft.hpp"
#include "cpafdm/seeding.hpp"
#include "parallel.hpp"

namespace cpafdm {

// ---------------------------------------------------------------- PAPR ----

double papr_db(std::span<const cd> s) {
  if (s.empty()) throw UndefinedInput("papr: empty frame");
  double peak = 0.0;
  double total = 0.0;
  for (cd v : s) {
    const double p = std::norm(v);
    peak = std::max(peak, p);
    total += p;
  }
  if (total == 0.0) throw UndefinedInput("papr: zero frame");
  return 10.0 * std::log10(peak / (total / static_cast<double>(s.size())));
}

double papr_ccdf_analytic(std::size_t n, double gamma_linear) {
  if (gamma_linear <= 0.0) return 1.0;
  // 1 - (1 - e^-g)^N, evaluated through log1p/expm1 to keep the tail exact.
  return -std::expm1(static_cast<double>(n) * std::log1p(-std::exp(-gamma_linear)));
}

double papr_analytic_threshold_db(std::size_t n, double p) {
  // (1 - e^-g)^N = 1 - p
  const double root = std::exp(std::log1p(-p) / static_cast<double>(n));
  return 10.0 * std::log10(-std::log1p(-root));
}

double papr_empirical_threshold_db(std::span<const double> samples_db, double p) {
  if (samples_db.empty()) throw UndefinedInput("papr threshold: no samples");
  std::vector<double> v(samples_db.begin(), samples_db.end());
  std::sort(v.begin(), v.end());
  const auto allowed = static_cast<std::size_t>(std::floor(p * static_cast<double>(v.size())));
  const std::size_t idx = v.size() - 1 - std::min(allowed, v.size() - 1);
  return v[idx];
}

PaprCcdf papr_ccdf(std::span<const double> samples_db,
                   std::span<const double> gammas_db, std::size_t n) {
  std::vector<double> sorted(samples_db.begin(), samples_db.end());
  std::sort(sorted.begin(), sorted.end());
  PaprCcdf out;
  for (double g : gammas_db) {
    const auto above = static_cast<double>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), g));
    out.gammas_db.push_back(g);
    out.empirical.push_back(sorted.empty() ? 0.0 : above / static_cast<double>(sorted.size()));
    out.analytic.push_back(papr_ccdf_analytic(n, std::pow(10.0, g / 10.0)));
  }
  return out;
}

namespace {

double papr_frame(const Waveform& w, const QamConstellation& m, std::uint64_t seed,
                  std::size_t frame) {
  std::mt19937_64 rng(derive_seed(seed, "papr", frame));
  const Bits bits = random_bits(w.size() * m.bits_per_symbol(), rng);
  return papr_db(modulate(w, map_bits(bits, m)).view());
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

std::vector<double> papr_samples(const Waveform& w, const QamConstellation& m,
                                 std::size_t frames, std::uint64_t seed) {
  std::vector<double> out(frames);
  const auto count = static_cast<long long>(frames);
  detail::FirstError err;
#pragma omp parallel for schedule(static)
  for (long long f = 0; f < count; ++f) {
    err.run([&] { out[static_cast<std::size_t>(f)] = papr_frame(w, m, seed, static_cast<std::size_t>(f)); });
  }
  err.rethrow();
  return out;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw UndefinedInput("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

double ks_distance_to_analytic(std::span<const double> samples_db, std::size_t n) {
  std::vector<double> v(samples_db.begin(), samples_db.end());
  std::sort(v.begin(), v.end());
  const auto count = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double cdf = 1.0 - papr_ccdf_analytic(n, std::pow(10.0, v[i] / 10.0));
    d = std::max({d, std::abs(static_cast<double>(i + 1) / count - cdf),
                  std::abs(static_cast<double>(i) / count - cdf)});
  }
  return d;
}

// ----------------------------------------------------- ambiguity function ----

namespace {

void check_af_input(std::span<const cd> s, std::size_t q) {
  if (q == 0) throw InvalidSize("ambiguity: oversampling factor must be >= 1");
  if (s.empty()) throw UndefinedInput("ambiguity: empty frame");
}

double frame_energy(std::span<const cd> s) {
  double e = 0.0;
  for (cd v : s) e += std::norm(v);
  if (e == 0.0) throw UndefinedInput("ambiguity: zero frame");
  return e;
}

// Fills the row of `grid` for lag row index `row` using `buf` as scratch.
void af_row(std::span<const cd> s, AFGrid& grid, long row, CVec& buf, double energy) {
  const std::size_t n = grid.n;
  const std::size_t bins = grid.bins();
  const long lag = row + grid.lag_min();
  const long nn = static_cast<long>(n);
  buf.assign(bins, cd{});
  for (std::size_t t = 0; t < n; ++t) {
    const long shifted = ((static_cast<long>(t) - lag) % nn + nn) % nn;
    buf[t] = s[t] * std::conj(s[static_cast<std::size_t>(shifted)]);
  }
  fft::forward_raw(buf);
  const long nb = static_cast<long>(bins);
  for (long col = 0; col < nb; ++col) {
    const long bin = col + grid.bin_min();
    grid.values(row, col) = std::abs(buf[static_cast<std::size_t>((bin % nb + nb) % nb)]) / energy;
  }
}

AFGrid make_grid(std::size_t n, std::size_t q) {
  AFGrid g;
  g.n = n;
  g.q = q;
  g.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(q * n));
  return g;
}

}  // namespace

AFGrid ambiguity(std::span<const cd> s, std::size_t q) {
  check_af_input(s, q);
  const double energy = frame_energy(s);
  AFGrid grid = make_grid(s.size(), q);
  const auto rows = static_cast<long>(s.size());
  detail::FirstError err;
#pragma omp parallel
  {
    CVec buf;
#pragma omp for schedule(static)
    for (long row = 0; row < rows; ++row) err.run([&] { af_row(s, grid, row, buf, energy); });
  }
  err.rethrow();
  return grid;
}

const char* to_string(CutKind kind) {
  return kind == CutKind::zero_delay ? "zero-delay" : "zero-doppler";
}

Cut zero_delay_cut(const AFGrid& grid) {
  Cut c;
  const long bins = static_cast<long>(grid.bins());
  const Eigen::Index row = -grid.lag_min();
  for (long col = 0; col < bins; ++col) {
    c.axis.push_back(static_cast<double>(col + grid.bin_min()) * grid.doppler_step());
    c.amplitude.push_back(grid.values(row, col));
  }
  c.origin = static_cast<std::size_t>(-grid.bin_min());
  c.step = grid.doppler_step();
  return c;
}

Cut zero_doppler_cut(const AFGrid& grid) {
  Cut c;
  const Eigen::Index col = -grid.bin_min();
  for (long row = 0; row < static_cast<long>(grid.n); ++row) {
    c.axis.push_back(static_cast<double>(row + grid.lag_min()));
    c.amplitude.push_back(grid.values(row, col));
  }
  c.origin = static_cast<std::size_t>(-grid.lag_min());
  c.step = 1.0;
  return c;
}

Cut extract_cut(const AFGrid& grid, CutKind kind) {
  return kind == CutKind::zero_delay ? zero_delay_cut(grid) : zero_doppler_cut(grid);
}

SidelobeMetrics cut_metrics(const Cut& cut, CutKind kind) {
  const auto& a = cut.amplitude;
  if (a.empty() || cut.origin >= a.size()) {
    throw std::invalid_argument("cut_metrics: origin outside the cut");
  }
  const double peak = a[cut.origin];
  if (peak <= 0.0) throw UndefinedInput("cut_metrics: zero mainlobe peak");
  const double thr = peak / std::sqrt(2.0);

  // Distance (in samples) from the origin to the -3 dB crossing on one side.
  auto crossing = [&](long dir) {
    long i = static_cast<long>(cut.origin);
    while (true) {
      const long j = i + dir;
      if (j < 0 || j >= static_cast<long>(a.size())) {
        throw DegenerateMainlobe("cut_metrics: cut never drops below -3 dB");
      }
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (a[uj] < thr) {
        const double t = (a[ui] - thr) / (a[ui] - a[uj]);
        return std::abs(static_cast<double>(i - static_cast<long>(cut.origin))) + t;
      }
      i = j;
    }
  };
  const double half = std::max(crossing(+1), crossing(-1));

  double inner = 0.0;
  double outer = 0.0;
  bool any_outer = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dist = std::abs(static_cast<double>(i) - static_cast<double>(cut.origin));
    if (dist <= half) {
      inner += a[i] * a[i];
    } else {
      outer += a[i] * a[i];
      any_outer = true;
    }
  }
  if (!any_outer) throw DegenerateMainlobe("cut_metrics: no samples outside the mainlobe");

  // Highest sidelobe, first occurrence scanning outward (right side first).
  double side_peak = -1.0;
  double side_at = 0.0;
  const long o = static_cast<long>(cut.origin);
  for (long d = 1; d < static_cast<long>(a.size()); ++d) {
    if (static_cast<double>(d) <= half) continue;
    for (long idx : {o + d, o - d}) {
      if (idx < 0 || idx >= static_cast<long>(a.size())) continue;
      const double v = a[static_cast<std::size_t>(idx)];
      if (v > side_peak) {
        side_peak = v;
        side_at = cut.axis.empty() ? static_cast<double>(idx - o) * cut.step
                                   : cut.axis[static_cast<std::size_t>(idx)];
      }
    }
  }

  SidelobeMetrics m;
  m.cut = kind;
  m.mainlobe_halfwidth = half * cut.step;
  m.peak_sidelobe_at = side_at;
  m.pslr_db = side_peak > 0.0 ? std::min(20.0 * std::log10(peak / side_peak), kMetricFloorDb)
                              : kMetricFloorDb;
  m.islr_db = outer > 0.0 ? std::max(10.0 * std::log10(outer / inner), -kMetricFloorDb)
                          : -kMetricFloorDb;
  return m;
}

SidelobeMetrics cut_metrics(const AFGrid& grid, CutKind kind) {
  return cut_metrics(extract_cut(grid, kind), kind);
}

TimeFrame all_ones_frame(const Waveform& w) {
  return modulate(w, SymbolFrame(CVec(w.size(), cd{1.0, 0.0})));
}

MetricStats stats_of(std::span<const double> v) {
  MetricStats s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

namespace {

EnsembleMember ensemble_member(const EnsembleSetup& setup, const Permutation& perm) {
  const Waveform w = Waveform::cpafdm_one_sided(setup.n, setup.c1, setup.c2, perm);
  TimeFrame s;
  if (setup.random_symbols) {
    const QamConstellation m(setup.constellation);
    std::mt19937_64 rng(derive_seed(setup.symbol_seed, "af-symbols", 0));
    s = modulate(w, map_bits(random_bits(setup.n * m.bits_per_symbol(), rng), m));
  } else {
    s = all_ones_frame(w);
  }
  const AFGrid grid = serial::ambiguity(s.view(), setup.q);
  return {perm, cut_metrics(grid, CutKind::zero_delay),
          cut_metrics(grid, CutKind::zero_doppler)};
}

EnsembleReport summarize(std::vector<EnsembleMember> members) {
  EnsembleReport r;
  auto collect = [&](auto field) {
    std::vector<double> v;
    v.reserve(members.size());
    for (const auto& m : members) v.push_back(field(m));
    return stats_of(v);
  };
  r.doppler_pslr = collect([](const EnsembleMember& m) { return m.doppler.pslr_db; });
  r.doppler_islr = collect([](const EnsembleMember& m) { return m.doppler.islr_db; });
  r.doppler_halfwidth =
      collect([](const EnsembleMember& m) { return m.doppler.mainlobe_halfwidth; });
  r.delay_pslr = collect([](const EnsembleMember& m) { return m.delay.pslr_db; });
  r.delay_islr = collect([](const EnsembleMember& m) { return m.delay.islr_db; });
  r.delay_halfwidth =
      collect([](const EnsembleMember& m) { return m.delay.mainlobe_halfwidth; });
  r.members = std::move(members);
  return r;
}

}  // namespace

EnsembleReport permutation_ensemble(const EnsembleSetup& setup,
                                    std::span<const Permutation> perms) {
  if (perms.empty()) throw std::invalid_argument("permutation_ensemble: K must be >= 1");
  std::vector<std::optional<EnsembleMember>> slots(perms.size());
  const auto count = static_cast<long long>(perms.size());
  detail::FirstError err;
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < count; ++k) {
    err.run([&] {
      slots[static_cast<std::size_t>(k)] = ensemble_member(setup, perms[static_cast<std::size_t>(k)]);
    });
  }
  err.rethrow();
  std::vector<EnsembleMember> members;
  members.reserve(slots.size());
  for (auto& s : slots) members.push_back(std::move(*s));
  return summarize(std::move(members));
}

std::vector<Permutation> random_permutations(std::size_t n, std::size_t k,
                                             std::uint64_t seed) {
  std::vector<Permutation> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::mt19937_64 rng(derive_seed(seed, "perm", i));
    out.push_back(Permutation::random(n, rng));
  }
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw InvalidSize("histogram: bins must be >= 1");
  if (values.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b] = {lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1), 0};
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

namespace serial {

std::vector<double> papr_samples(const Waveform& w, const QamConstellation& m,
                                 std::size_t frames, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) out.push_back(papr_frame(w, m, seed, f));
  return out;
}

AFGrid ambiguity(std::span<const cd> s, std::size_t q) {
  check_af_input(s, q);
  const double energy = frame_energy(s);
  AFGrid grid = make_grid(s.size(), q);
  CVec buf;
  for (long row = 0; row < static_cast<long>(s.size()); ++row) af_row(s, grid, row, buf, energy);
  return grid;
}

EnsembleReport permutation_ensemble(const EnsembleSetup& setup,
                                    std::span<const Permutation> perms) {
  if (perms.empty()) throw std::invalid_argument("permutation_ensemble: K must be >= 1");
  std::vector<EnsembleMember> members;
  members.reserve(perms.size());
  for (const Permutation& p : perms) members.push_back(ensemble_member(setup, p));
  return summarize(std::move(members));
}

}  // namespace serial
}  // namespace cpafdm
