#include "cpafdm/cpim.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "cpafdm/detection.hpp"
#include "cpafdm/fft.hpp"
#include "cpafdm/seeding.hpp"
#include "parallel.hpp"

namespace cpafdm {

std::size_t max_index_bits(std::size_t n) {
  if (n < 2) throw InvalidSize("max_index_bits: n must be >= 2");
  return floor_log2_factorial(n);
}

PermCodebook build_codebook(std::size_t n, std::size_t k_bits, std::uint64_t seed) {
  const std::size_t cap = max_index_bits(n);
  if (k_bits == 0) throw CapacityError("codebook: k_bits must be >= 1 (K >= 2)");
  if (k_bits > cap) {
    throw CapacityError("codebook: k_bits = " + std::to_string(k_bits) +
                        " exceeds floor(log2(" + std::to_string(n) + "!)) = " +
                        std::to_string(cap));
  }
  if (k_bits > kMaxCodebookBits) {
    throw CapacityError("codebook: k_bits = " + std::to_string(k_bits) +
                        " exceeds the storage limit of " + std::to_string(kMaxCodebookBits));
  }
  const std::size_t k = std::size_t{1} << k_bits;
  PermCodebook book;
  book.n = n;
  book.k_bits = k_bits;
  book.entries.reserve(k);
  book.entries.push_back(Permutation::identity(n));

  std::set<BigInt> used{BigInt(0)};
  std::mt19937_64 rng(derive_seed(seed, "codebook", 0));
  while (book.entries.size() < k) {
    BigInt r = random_rank(n, rng);
    if (!used.insert(r).second) continue;  // only bites when K is close to n!
    book.entries.push_back(Permutation::from_rank(n, r));
  }
  return book;
}

Bits CpimFrame::all_bits() const {
  Bits out = index_bits;
  out.insert(out.end(), symbol_bits.begin(), symbol_bits.end());
  return out;
}

CpimScheme::CpimScheme(PermCodebook codebook, double c1, double c2, QamConstellation m)
    : codebook_(std::move(codebook)), c1_(c1), c2_(c2), m_(std::move(m)) {
  if (codebook_.entries.size() < 2) throw CapacityError("cpim: codebook needs K >= 2");
  waveforms_.reserve(codebook_.entries.size());
  for (const Permutation& p : codebook_.entries) {
    waveforms_.push_back(Waveform::cpafdm_one_sided(codebook_.n, c1_, c2_, p));
  }
}

std::size_t CpimScheme::bits_per_frame() const {
  return codebook_.k_bits + codebook_.n * m_.bits_per_symbol();
}

std::pair<CpimFrame, TimeFrame> CpimScheme::encode(std::span<const std::uint8_t> bits) const {
  require_size(bits.size(), bits_per_frame(), "cpim_encode: bit count");
  CpimFrame f;
  f.index_bits.assign(bits.begin(), bits.begin() + static_cast<long>(codebook_.k_bits));
  f.symbol_bits.assign(bits.begin() + static_cast<long>(codebook_.k_bits), bits.end());
  for (std::uint8_t b : f.index_bits) f.chosen_index = (f.chosen_index << 1) | (b & 1u);
  f.symbols = map_bits(f.symbol_bits, m_);
  TimeFrame s = modulate(waveforms_[f.chosen_index], f.symbols);
  return {std::move(f), std::move(s)};
}

// With one-sided permutations every candidate shares the first chirp, so
//   y_k = D_k z,            z  = F diag(l_c1) r
//   G_k = D_k Xi D_k^H,     Xi = structure matrix
// and the MMSE estimate factors as x_k = D_k u with u = Xi^H (Xi Xi^H + s2)^-1 z.
// The residual reduces to ||z - Xi D_k^H slice(x_k)||^2.
std::vector<CpimScheme::Candidate> CpimScheme::candidates(const ReceivedFrame& r,
                                                          const ChannelSpec& spec,
                                                          double noise_var) const {
  const std::size_t n = codebook_.n;
  require_size(r.size(), n, "cpim_detect: frame");
  require_size(spec.n, n, "cpim_detect: channel");
  const Eigen::MatrixXcd xi = structure_matrix(spec, c1_, Permutation::identity(n));

  const CVec& d1 = waveforms_[0].transform().first_diagonal();
  CVec z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = d1[i] * r[i];
  fft::forward_unitary(z);

  const CVec u = MmseEqualizer(xi).equalize(z, noise_var);
  const Eigen::Map<const Eigen::VectorXcd> zv(z.data(), static_cast<Eigen::Index>(n));

  std::vector<Candidate> out;
  out.reserve(waveforms_.size());
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (const Waveform& w : waveforms_) {
    const CVec& d2 = w.transform().second_diagonal();
    Candidate c;
    c.symbols.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.symbols[i] = m_.points()[m_.nearest(d2[i] * u[i])];
      v(static_cast<Eigen::Index>(i)) = std::conj(d2[i]) * c.symbols[i];
    }
    c.score = (zv - xi * v).squaredNorm();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> CpimScheme::scores(const ReceivedFrame& r, const ChannelSpec& spec,
                                       double noise_var) const {
  std::vector<double> s;
  for (const auto& c : candidates(r, spec, noise_var)) s.push_back(c.score);
  return s;
}

CpimFrame CpimScheme::detect(const ReceivedFrame& r, const ChannelSpec& spec,
                             double noise_var) const {
  const auto cands = candidates(r, spec, noise_var);
  std::size_t best = 0;
  for (std::size_t k = 1; k < cands.size(); ++k) {
    if (cands[k].score < cands[best].score) best = k;
  }
  CpimFrame f;
  f.chosen_index = best;
  f.score = cands[best].score;
  for (std::size_t b = codebook_.k_bits; b-- > 0;) {
    f.index_bits.push_back(static_cast<std::uint8_t>((best >> b) & 1u));
  }
  f.symbol_bits = hard_demap(cands[best].symbols, m_);
  f.symbols = SymbolFrame(cands[best].symbols);
  return f;
}

std::pair<CpimFrame, TimeFrame> cpim_encode(std::span<const std::uint8_t> bits,
                                            const CpimScheme& scheme) {
  return scheme.encode(bits);
}

CpimFrame cpim_detect(const ReceivedFrame& r, const CpimScheme& scheme,
                      const ChannelSpec& spec, double noise_var) {
  return scheme.detect(r, spec, noise_var);
}

SpectralEfficiency spectral_efficiency(std::size_t n, std::size_t m_order, std::uint64_t k) {
  if (k < 2 || (k & (k - 1)) != 0) {
    throw CapacityError("spectral_efficiency: K must be a power of two >= 2");
  }
  const QamConstellation m(m_order);
  std::size_t log2k = 0;
  while ((std::uint64_t{1} << log2k) < k) ++log2k;
  const std::size_t base = n * m.bits_per_symbol();
  return {base, base + log2k};
}

namespace {

struct CpimTrialErrors {
  std::vector<std::uint64_t> index;
  std::vector<std::uint64_t> symbol_bits;
  std::vector<std::uint64_t> total_bits;
};

CpimTrialErrors cpim_trial(const CpimScheme& scheme, const ChannelFamily& family,
                           std::span<const double> snr_grid, std::uint64_t seed,
                           std::uint64_t trial) {
  std::mt19937_64 rng(derive_seed(seed, "cpim", trial));
  const ChannelSpec ch = family.draw(rng);
  const Bits bits = random_bits(scheme.bits_per_frame(), rng);
  const CVec noise = complex_gaussian(family.n, rng);

  const auto [tx, s] = scheme.encode(bits);
  CpimTrialErrors e;
  for (double snr : snr_grid) {
    const ReceivedFrame r = transmit_with_noise(s, ch, scheme.prefix(), noise, snr);
    const CpimFrame rx = scheme.detect(r, ch, noise_variance(snr));
    e.index.push_back(rx.chosen_index != tx.chosen_index);
    const std::uint64_t sym = count_bit_errors(rx.symbol_bits, tx.symbol_bits);
    e.symbol_bits.push_back(sym);
    e.total_bits.push_back(sym + count_bit_errors(rx.index_bits, tx.index_bits));
  }
  return e;
}

std::vector<CpimRecord> summarize(const CpimScheme& scheme,
                                  const std::vector<CpimTrialErrors>& per_trial,
                                  std::span<const double> snr_grid) {
  const auto trials = static_cast<double>(per_trial.size());
  const auto sym_bits = static_cast<double>(scheme.n() * scheme.constellation().bits_per_symbol());
  const auto all_bits = static_cast<double>(scheme.bits_per_frame());
  std::vector<CpimRecord> out;
  for (std::size_t k = 0; k < snr_grid.size(); ++k) {
    std::uint64_t idx = 0, sym = 0, tot = 0;
    for (const auto& t : per_trial) {
      idx += t.index[k];
      sym += t.symbol_bits[k];
      tot += t.total_bits[k];
    }
    CpimRecord r;
    r.snr_db = snr_grid[k];
    r.trials = per_trial.size();
    r.index_errors = idx;
    r.index_error_rate = static_cast<double>(idx) / trials;
    r.symbol_ber = static_cast<double>(sym) / (trials * sym_bits);
    r.total_ber = static_cast<double>(tot) / (trials * all_bits);
    out.push_back(r);
  }
  return out;
}

void check_run(const CpimScheme& scheme, const ChannelFamily& family, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("run_cpim: trials must be >= 1");
  require_size(family.n, scheme.n(), "run_cpim: channel size");
}

}  // namespace

std::vector<CpimRecord> run_cpim(const CpimScheme& scheme, const ChannelFamily& family,
                                 std::span<const double> snr_grid, std::uint64_t trials,
                                 std::uint64_t seed) {
  check_run(scheme, family, trials);
  std::vector<CpimTrialErrors> per_trial(trials);
  const auto count = static_cast<long long>(trials);
  detail::FirstError err;
#pragma omp parallel for schedule(dynamic, 4)
  for (long long t = 0; t < count; ++t) {
    err.run([&] {
      per_trial[static_cast<std::size_t>(t)] =
          cpim_trial(scheme, family, snr_grid, seed, static_cast<std::uint64_t>(t));
    });
  }
  err.rethrow();
  return summarize(scheme, per_trial, snr_grid);
}

namespace serial {

std::vector<CpimRecord> run_cpim(const CpimScheme& scheme, const ChannelFamily& family,
                                 std::span<const double> snr_grid, std::uint64_t trials,
                                 std::uint64_t seed) {
  check_run(scheme, family, trials);
  std::vector<CpimTrialErrors> per_trial;
  for (std::uint64_t t = 0; t < trials; ++t) {
    per_trial.push_back(cpim_trial(scheme, family, snr_grid, seed, t));
  }
  return summarize(scheme, per_trial, snr_grid);
}

}  // namespace serial
}  // namespace cpafdm
