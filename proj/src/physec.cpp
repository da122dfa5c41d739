#include "cpafdm/physec.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "cpafdm/seeding.hpp"
#include "parallel.hpp"

namespace cpafdm {

PermKey PermKey::from_rank(std::size_t n, const BigInt& rank) {
  return PermKey{n, rank, Permutation::from_rank(n, rank)};
}

PermKey keygen(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidSize("keygen: n must be >= 2");
  std::mt19937_64 rng(derive_seed(seed, "key", 0));
  return PermKey::from_rank(n, random_rank(n, rng));
}

namespace {

struct LinkOutcome {
  std::vector<std::uint64_t> errors;
  std::vector<double> sq_error;
  std::vector<cd> phasor;  // sum of exp(j phase error)
  CVec last;               // equalized symbols at the last SNR point
};

LinkOutcome mismatched_trial(const Waveform& tx, const Waveform& rx, const TrialDraw& d,
                             const QamConstellation& m, std::span<const double> grid) {
  const MmseEqualizer eq(effective_channel(d.channel, rx.config()).matrix);
  const SymbolFrame x = map_bits(d.bits, m);
  const TimeFrame s = modulate(tx, x);
  LinkOutcome o;
  for (double snr : grid) {
    const ReceivedFrame r = transmit_with_noise(s, d.channel, tx.prefix(), d.unit_noise, snr);
    CVec xhat = eq.equalize(demodulate(rx, r).view(), noise_variance(snr));
    o.errors.push_back(count_bit_errors(hard_demap(xhat, m), d.bits));
    double sq = 0.0;
    cd ph{};
    for (std::size_t i = 0; i < xhat.size(); ++i) {
      sq += std::norm(xhat[i] - m.points()[m.nearest(xhat[i])]);
      const cd ratio = xhat[i] * std::conj(x[i]);
      if (std::abs(ratio) > 0.0) ph += ratio / std::abs(ratio);
    }
    o.sq_error.push_back(sq);
    o.phasor.push_back(ph);
    o.last = std::move(xhat);
  }
  return o;
}

}  // namespace

MismatchReport mismatched_link(const Permutation& tx, std::span<const Permutation> rx,
                               const EveSetup& setup) {
  if (rx.empty()) throw std::invalid_argument("mismatched_link: no receiver keys");
  if (setup.trials == 0) throw std::invalid_argument("mismatched_link: trials must be >= 1");
  const std::size_t n = setup.family.n;
  const QamConstellation m(setup.constellation);
  const Waveform txw = Waveform::cpafdm_one_sided(n, setup.c1, setup.c2, tx);
  std::vector<Waveform> rxw;
  for (const Permutation& p : rx) rxw.push_back(Waveform::cpafdm_one_sided(n, setup.c1, setup.c2, p));

  const std::uint64_t trials = setup.trials;
  std::vector<LinkOutcome> out(rx.size() * trials);
  const auto jobs = static_cast<long long>(out.size());
  detail::FirstError err;
#pragma omp parallel for schedule(dynamic, 4)
  for (long long j = 0; j < jobs; ++j) {
    err.run([&] {
      const auto key = static_cast<std::size_t>(j) / trials;
      const auto t = static_cast<std::uint64_t>(j) % trials;
      const TrialDraw d = draw_trial(setup.family, m, setup.seed, t);
      out[static_cast<std::size_t>(j)] = mismatched_trial(txw, rxw[key], d, m, setup.snr_grid);
    });
  }
  err.rethrow();

  MismatchReport rep;
  const std::uint64_t frames = out.size();
  const auto symbols = static_cast<double>(frames * n);
  for (std::size_t k = 0; k < setup.snr_grid.size(); ++k) {
    std::uint64_t e = 0;
    double sq = 0.0;
    cd ph{};
    for (const auto& o : out) {
      e += o.errors[k];
      sq += o.sq_error[k];
      ph += o.phasor[k];
    }
    rep.ber.push_back(make_ber_record(setup.snr_grid[k], frames, n * m.bits_per_symbol(), e));
    rep.evm_percent.push_back(100.0 * std::sqrt(sq / symbols));
    rep.phase_variance.push_back(1.0 - std::abs(ph) / symbols);
  }
  for (const auto& o : out) {
    for (cd z : o.last) {
      if (rep.scatter.size() >= setup.scatter_points) break;
      rep.scatter.push_back(z);
    }
  }
  return rep;
}

std::vector<PermKey> draw_wrong_keys(const PermKey& key, std::size_t count,
                                     std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("eavesdrop: wrong_keys must be >= 1");
  std::vector<PermKey> keys;
  for (std::size_t j = 0; j < count; ++j) {
    std::uint64_t s = derive_seed(seed, "wrong-key", j);
    PermKey w = keygen(key.n, s);
    while (w.rank == key.rank) {
      s = splitmix64(s);
      w = keygen(key.n, s);
    }
    keys.push_back(std::move(w));
  }
  return keys;
}

EveReport eavesdrop_experiment(const PermKey& key, const EveSetup& setup) {
  require_size(key.n, setup.family.n, "eavesdrop: key size");
  EveReport rep;
  rep.snr_grid = setup.snr_grid;
  rep.wrong_keys = draw_wrong_keys(key, setup.wrong_keys, setup.seed);

  const QamConstellation m(setup.constellation);
  const Waveform w = Waveform::cpafdm_one_sided(key.n, setup.c1, setup.c2, key.perm);
  rep.matched = run_ber(w, setup.family, m, setup.snr_grid, setup.trials, setup.seed);

  std::vector<Permutation> rx;
  for (const auto& k : rep.wrong_keys) rx.push_back(k.perm);
  rep.mismatched = mismatched_link(key.perm, rx, setup);
  return rep;
}

KeyspaceReport keyspace_report(std::size_t n) {
  if (n < 2) throw InvalidSize("keyspace_report: n must be >= 2");
  KeyspaceReport r;
  r.n = n;
  const BigInt f = factorial(n);
  r.factorial = f.str();
  r.bit_length = boost::multiprecision::msb(f) + 1;
  r.factorial_bits = floor_log2_factorial(n);
  double l = 0.0;
  for (std::size_t k = 2; k <= n; ++k) l += std::log2(static_cast<double>(k));
  r.log2_keys = l;
  r.note = "exact: " + std::to_string(n) + "! has " + std::to_string(r.bit_length) +
           " bits, so a codebook or key index carries floor(log2 " + std::to_string(n) +
           "!) = " + std::to_string(r.factorial_bits) + " bits";
  if (n == 64) {
    r.note += "; the figure of 298 bits sometimes quoted for N = 64 overstates this by 3";
  }
  return r;
}

}  // namespace cpafdm
