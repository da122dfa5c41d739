#include "cpafdm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace cpafdm {
namespace {

long mod_n(long v, std::size_t n) {
  const long m = static_cast<long>(n);
  return ((v % m) + m) % m;
}

bool is_integer(double v, double tol = 1e-9) {
  return std::abs(v - std::round(v)) < tol;
}

// Diagonal entry n of Phi_p * W^{f_p} for a tap with delay l.
cd tap_phase(const PathSpec& p, const PrefixPhaseRule& prefix, std::size_t n,
             std::size_t len) {
  cd v = unit_phasor(p.doppler * static_cast<double>(n) /
                     static_cast<double>(len));
  if (n < p.delay) {
    v *= unit_phasor(prefix.phase_cycles(static_cast<long>(n) -
                                             static_cast<long>(p.delay),
                                         len));
  }
  return v;
}

}  // namespace

std::size_t orthogonality_load(std::size_t lmax, std::size_t fmax,
                               std::size_t guard) {
  return 2 * (fmax + guard) * (lmax + 1) + lmax;
}

void ChannelSpec::validate() const {
  if (n == 0) throw InvalidSize("ChannelSpec: n must be >= 1");
  if (lmax >= n) throw InvalidPath("ChannelSpec: lmax must be < N");
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const PathSpec& path = paths[p];
    if (path.delay >= n) {
      throw InvalidPath("path " + std::to_string(p) + ": delay must be < N");
    }
    if (path.delay > lmax) {
      throw InvalidPath("path " + std::to_string(p) + ": delay exceeds lmax");
    }
    if (std::abs(path.doppler) > static_cast<double>(fmax) + 1e-12) {
      throw InvalidPath("path " + std::to_string(p) + ": |doppler| exceeds fmax");
    }
  }
}

bool ChannelSpec::orthogonal() const {
  return orthogonality_load(lmax, fmax, guard) <= n;
}

double PrefixPhaseRule::phase_cycles(long n_prime, std::size_t n) const {
  if (kind == Kind::zero) return 0.0;
  const auto nn = static_cast<double>(n);
  return frac_product(c1, nn * nn + 2.0 * nn * static_cast<double>(n_prime));
}

Eigen::MatrixXcd channel_matrix(const ChannelSpec& spec,
                                const PrefixPhaseRule& prefix) {
  spec.validate();
  const std::size_t n = spec.n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const PathSpec& p : spec.paths) {
    for (std::size_t row = 0; row < n; ++row) {
      const auto col = static_cast<std::size_t>(
          mod_n(static_cast<long>(row) - static_cast<long>(p.delay), n));
      h(row, col) += p.gain * tap_phase(p, prefix, row, n);
    }
  }
  return h;
}

CVec apply_channel(const ChannelSpec& spec, const PrefixPhaseRule& prefix,
                   std::span<const cd> s) {
  spec.validate();
  require_size(s.size(), spec.n, "apply_channel");
  const std::size_t n = spec.n;
  CVec r(n, cd{});
  for (const PathSpec& p : spec.paths) {
    for (std::size_t row = 0; row < n; ++row) {
      const auto col = static_cast<std::size_t>(
          mod_n(static_cast<long>(row) - static_cast<long>(p.delay), n));
      r[row] += p.gain * tap_phase(p, prefix, row, n) * s[col];
    }
  }
  return r;
}

std::vector<std::pair<std::size_t, std::size_t>> support_of(
    const Eigen::MatrixXcd& g, double rel) {
  const double cut = rel * g.cwiseAbs().maxCoeff();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      if (std::abs(g(r, c)) > cut) {
        out.emplace_back(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      }
    }
  }
  return out;
}

EffectiveChannel effective_channel(const ChannelSpec& spec,
                                   const TransformConfig& cfg) {
  spec.validate();
  require_size(cfg.n, spec.n, "effective_channel");
  const std::size_t n = spec.n;
  const CpDaft a(cfg);
  const auto prefix = PrefixPhaseRule::chirp_periodic(cfg.c1);
  Eigen::MatrixXcd g(n, n);
  CVec e(n, cd{});
  for (std::size_t col = 0; col < n; ++col) {
    e.assign(n, cd{});
    e[col] = 1.0;
    const CVec y = a.forward(apply_channel(spec, prefix, a.inverse(e)));
    for (std::size_t row = 0; row < n; ++row) g(row, col) = y[row];
  }
  EffectiveChannel out{std::move(g), {}, {}, cfg};
  out.support = support_of(out.matrix);
  out.locs.reserve(spec.paths.size());
  for (const PathSpec& p : spec.paths) {
    out.locs.push_back(location_index(p, spec, cfg.c1));
  }
  return out;
}

Eigen::MatrixXcd structure_matrix(const ChannelSpec& spec, double c1,
                                  const Permutation& perm1) {
  const TransformConfig cfg(spec.n, c1, 0.0, perm1,
                            Permutation::identity(spec.n));
  return effective_channel(spec, cfg).matrix;
}

Eigen::MatrixXcd apply_second_chirp(const Eigen::MatrixXcd& xi,
                                    std::span<const cd> d2) {
  require_size(d2.size(), static_cast<std::size_t>(xi.rows()),
               "apply_second_chirp");
  Eigen::MatrixXcd g(xi.rows(), xi.cols());
  for (Eigen::Index r = 0; r < xi.rows(); ++r) {
    for (Eigen::Index c = 0; c < xi.cols(); ++c) {
      g(r, c) = d2[static_cast<std::size_t>(r)] * xi(r, c) *
                std::conj(d2[static_cast<std::size_t>(c)]);
    }
  }
  return g;
}

std::size_t location_index(const PathSpec& path, const ChannelSpec& spec,
                           double c1) {
  const auto n = static_cast<double>(spec.n);
  const double raw = path.doppler + 2.0 * n * c1 * static_cast<double>(path.delay);
  return static_cast<std::size_t>(mod_n(std::lround(raw), spec.n));
}

std::size_t location_index_optimal(const PathSpec& path,
                                   const ChannelSpec& spec) {
  const long step = 1 + 2 * static_cast<long>(spec.fmax + spec.guard);
  const long raw = std::lround(path.doppler) + static_cast<long>(path.delay) * step;
  return static_cast<std::size_t>(mod_n(raw, spec.n));
}

std::vector<ExtractedPath> extract_paths(const EffectiveChannel& g,
                                         const ChannelSpec& spec) {
  const TransformConfig& cfg = g.config;
  require_size(cfg.n, spec.n, "extract_paths");
  if (!cfg.perm1.is_identity()) {
    throw std::invalid_argument(
        "extract_paths: requires an unpermuted first chirp (one-sided)");
  }
  if (!spec.orthogonal()) {
    throw NonOrthogonalChannel(
        "extract_paths: orthogonality condition violated, taps are ambiguous");
  }
  const std::size_t n = spec.n;
  const auto nd = static_cast<double>(n);
  const double shift = 2.0 * nd * cfg.c1;
  if (!is_integer(shift)) {
    throw std::invalid_argument("extract_paths: 2 N c1 must be an integer");
  }
  const long step = std::lround(shift);
  const long fmax = static_cast<long>(spec.fmax);

  const double cut = 1e-9 * g.matrix.cwiseAbs().maxCoeff();
  const std::size_t p0 = cfg.perm2[0];
  std::vector<ExtractedPath> out;
  for (std::size_t q = 0; q < n; ++q) {
    const cd entry = g.matrix(0, static_cast<Eigen::Index>(q));
    if (std::abs(entry) <= cut) continue;
    std::vector<std::pair<std::size_t, long>> hits;
    for (std::size_t l = 0; l <= spec.lmax; ++l) {
      for (long f = -fmax; f <= fmax; ++f) {
        if (mod_n(f + step * static_cast<long>(l), n) == static_cast<long>(q)) {
          hits.emplace_back(l, f);
        }
      }
    }
    if (hits.size() != 1) {
      throw NonOrthogonalChannel("extract_paths: column " + std::to_string(q) +
                                 (hits.empty() ? " lies outside the delay-Doppler box"
                                               : " maps to several taps"));
    }
    const auto [l, f] = hits.front();
    const std::size_t pq = cfg.perm2[q];
    const cd second = unit_phasor(frac_product(
        cfg.c2, static_cast<double>(p0 * p0) - static_cast<double>(pq * pq)));
    const auto ld = static_cast<double>(l);
    const cd structural = std::conj(unit_phasor(
        frac_product(cfg.c1, ld * ld) - static_cast<double>((q * l) % n) / nd));
    out.push_back({l, f, entry / (second * structural), q});
  }
  return out;
}

C1Choice optimal_c1(std::size_t fmax, std::size_t guard, std::size_t n,
                    std::size_t lmax) {
  if (n == 0) throw InvalidSize("optimal_c1: n must be >= 1");
  const double c1 = (2.0 * static_cast<double>(fmax + guard) + 1.0) /
                    (2.0 * static_cast<double>(n));
  return {c1, orthogonality_load(lmax, fmax, guard) <= n};
}

ChannelSpec ChannelFamily::draw(std::mt19937_64& rng) const {
  const std::size_t boxes = (lmax + 1) * (2 * fmax + 1);
  if (!fractional_doppler && paths > boxes) {
    throw std::invalid_argument(
        "ChannelFamily: more taps than distinct (delay, Doppler) pairs");
  }
  ChannelSpec spec{n, {}, lmax, fmax, guard};
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> delay(0, lmax);
  std::uniform_int_distribution<long> dop(-static_cast<long>(fmax),
                                          static_cast<long>(fmax));
  std::uniform_real_distribution<double> frac(-static_cast<double>(fmax),
                                              static_cast<double>(fmax));
  std::set<std::pair<std::size_t, double>> used;
  const double scale = std::sqrt(0.5 / static_cast<double>(paths));
  for (std::size_t p = 0; p < paths; ++p) {
    PathSpec tap;
    do {
      tap.delay = delay(rng);
      tap.doppler = fractional_doppler ? frac(rng) : static_cast<double>(dop(rng));
    } while (!used.emplace(tap.delay, tap.doppler).second);
    const double re = gauss(rng);
    const double im = gauss(rng);
    tap.gain = cd{re, im} * scale;
    spec.paths.push_back(tap);
  }
  return spec;
}

}  // namespace cpafdm
