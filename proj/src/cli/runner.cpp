#include "cpafdm/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cpafdm/channel.hpp"
#include "cpafdm/cpim.hpp"
#include "cpafdm/detection.hpp"
#include "cpafdm/metrics.hpp"
#include "cpafdm/physec.hpp"
#include "cpafdm/seeding.hpp"

namespace cpafdm::cli {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (std::isnan(v)) return "nan";
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
          return q + "\"";
        } else {
          return std::to_string(v);
        }
      },
      c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
        }
        return v;
      },
      c);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

// ---------------------------------------------------------- waveforms ----

struct NamedWaveform {
  std::string name;
  Waveform w;
};

Permutation seeded_perm(std::size_t n, std::uint64_t seed, const char* tag) {
  std::mt19937_64 rng(derive_seed(seed, tag, 0));
  return Permutation::random(n, rng);
}

Waveform build_waveform(const ExperimentConfig& c, WaveformKind kind) {
  const double c1 = c.resolved_c1();
  const double c2 = c.resolved_c2();
  switch (kind) {
    case WaveformKind::ofdm:
      return Waveform::ofdm(c.n);
    case WaveformKind::afdm:
      return Waveform::afdm(c.n, c1, c2);
    case WaveformKind::cpafdm_one_sided:
      return Waveform::cpafdm_one_sided(c.n, c1, c2, seeded_perm(c.n, c.perm_seed, "perm2"));
    case WaveformKind::cpafdm_two_sided:
      return Waveform::cpafdm_two_sided(c.n, c1, c2, seeded_perm(c.n, c.perm_seed, "perm1"),
                                        seeded_perm(c.n, c.perm_seed, "perm2"));
  }
  throw std::logic_error("unreachable");
}

std::vector<NamedWaveform> waveforms(const ExperimentConfig& c) {
  std::vector<NamedWaveform> out;
  for (WaveformKind k : c.waveforms) out.push_back({to_string(k), build_waveform(c, k)});
  return out;
}

ChannelFamily family(const ExperimentConfig& c) {
  ChannelFamily f;
  f.n = c.n;
  f.paths = c.paths;
  f.lmax = c.lmax;
  f.fmax = c.fmax;
  f.guard = c.guard;
  f.fractional_doppler = c.fractional_doppler;
  return f;
}

// -------------------------------------------------------- experiments ----

std::vector<Table> ber_tables(const ExperimentConfig& c) {
  Table t{"ber", {"waveform", "snr_db", "trials", "bit_errors", "ber", "ci95"}, {}};
  const QamConstellation m(c.constellation);
  for (const auto& nw : waveforms(c)) {
    for (const BerRecord& r : run_ber(nw.w, family(c), m, c.snr_db, c.trials, c.seed)) {
      t.add({nw.name, r.snr_db, r.trials, r.bit_errors, r.ber, r.ci95});
    }
  }
  return {t};
}

std::vector<Table> papr_tables(const ExperimentConfig& c) {
  const QamConstellation m(c.constellation);
  Table ccdf{"papr_ccdf", {"waveform", "gamma_db", "p_empirical", "p_analytic"}, {}};
  Table summary{"papr_summary",
                {"waveform", "frames", "threshold_1e-2_db", "analytic_threshold_1e-2_db",
                 "ks_distance_analytic"},
                {}};
  Table ks{"papr_ks", {"waveform_a", "waveform_b", "statistic", "p_value"}, {}};
  std::vector<std::pair<std::string, std::vector<double>>> samples;
  for (const auto& nw : waveforms(c)) {
    auto s = papr_samples(nw.w, m, c.frames, c.seed);
    const PaprCcdf cc = papr_ccdf(s, c.gamma_db, c.n);
    for (std::size_t i = 0; i < cc.gammas_db.size(); ++i) {
      ccdf.add({nw.name, cc.gammas_db[i], cc.empirical[i], cc.analytic[i]});
    }
    summary.add({nw.name, c.frames, papr_empirical_threshold_db(s, 1e-2),
                 papr_analytic_threshold_db(c.n, 1e-2), ks_distance_to_analytic(s, c.n)});
    samples.emplace_back(nw.name, std::move(s));
  }
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const KsResult r = ks_two_sample(samples[a].second, samples[b].second);
      ks.add({samples[a].first, samples[b].first, r.statistic, r.p_value});
    }
  }
  return {ccdf, summary, ks};
}

// Amplitude in dB, clamped to the metric floor so exact zeros stay finite.
double db20(double a) {
  return a > 0.0 ? std::max(20.0 * std::log10(a), -kMetricFloorDb) : -kMetricFloorDb;
}

void add_metrics(Table& t, const std::string& name, const AFGrid& g, CutKind kind) {
  try {
    const SidelobeMetrics s = cut_metrics(g, kind);
    t.add({name, std::string(to_string(kind)), s.pslr_db, s.islr_db, s.mainlobe_halfwidth,
           s.peak_sidelobe_at});
  } catch (const DegenerateMainlobe&) {
    t.add({name, std::string(to_string(kind)), kNan, kNan, kNan, kNan});
  }
}

std::vector<Table> af_tables(const ExperimentConfig& c) {
  Table doppler{"af_cut_zero_delay", {"waveform", "doppler", "amplitude", "amplitude_db"}, {}};
  Table delay{"af_cut_zero_doppler", {"waveform", "delay", "amplitude", "amplitude_db"}, {}};
  Table metrics{"af_metrics",
                {"waveform", "cut", "pslr_db", "islr_db", "mainlobe_halfwidth",
                 "peak_sidelobe_at"},
                {}};
  const QamConstellation m(c.constellation);
  for (const auto& nw : waveforms(c)) {
    TimeFrame s;
    if (c.random_symbols) {
      std::mt19937_64 rng(derive_seed(c.seed, "af-symbols", 0));
      s = modulate(nw.w, map_bits(random_bits(c.n * m.bits_per_symbol(), rng), m));
    } else {
      s = all_ones_frame(nw.w);
    }
    const AFGrid g = ambiguity(s.view(), c.oversampling);
    const Cut zd = zero_delay_cut(g);
    for (std::size_t i = 0; i < zd.axis.size(); ++i) doppler.add({nw.name, zd.axis[i], zd.amplitude[i], db20(zd.amplitude[i])});
    const Cut zp = zero_doppler_cut(g);
    for (std::size_t i = 0; i < zp.axis.size(); ++i) delay.add({nw.name, zp.axis[i], zp.amplitude[i], db20(zp.amplitude[i])});
    add_metrics(metrics, nw.name, g, CutKind::zero_delay);
    add_metrics(metrics, nw.name, g, CutKind::zero_doppler);
  }

  EnsembleSetup setup;
  setup.n = c.n;
  setup.c1 = c.resolved_c1();
  setup.c2 = c.resolved_c2();
  setup.q = c.oversampling;
  setup.random_symbols = c.random_symbols;
  setup.constellation = c.constellation;
  setup.symbol_seed = c.seed;
  const auto perms = random_permutations(c.n, c.permutations, c.seed);
  const EnsembleReport rep = permutation_ensemble(setup, perms);
  Table ens{"af_ensemble",
            {"index", "rank", "doppler_pslr_db", "doppler_islr_db", "doppler_halfwidth",
             "delay_pslr_db", "delay_islr_db", "delay_halfwidth"},
            {}};
  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    const auto& e = rep.members[i];
    ens.add({static_cast<std::uint64_t>(i), e.perm.rank().str(), e.doppler.pslr_db,
             e.doppler.islr_db, e.doppler.mainlobe_halfwidth, e.delay.pslr_db, e.delay.islr_db,
             e.delay.mainlobe_halfwidth});
  }
  Table stats{"af_ensemble_stats", {"metric", "mean", "stddev", "min", "max"}, {}};
  auto row = [&](const char* name, const MetricStats& s) {
    stats.add({std::string(name), s.mean, s.stddev, s.min, s.max});
  };
  row("doppler_pslr_db", rep.doppler_pslr);
  row("doppler_islr_db", rep.doppler_islr);
  row("doppler_halfwidth", rep.doppler_halfwidth);
  row("delay_pslr_db", rep.delay_pslr);
  row("delay_islr_db", rep.delay_islr);
  row("delay_halfwidth", rep.delay_halfwidth);
  Table hist{"af_histogram", {"metric", "bin_low", "bin_high", "count"}, {}};
  auto add_hist = [&](const char* name, auto field) {
    std::vector<double> v;
    for (const auto& e : rep.members) v.push_back(field(e));
    for (const HistogramBin& b : histogram(v, 20)) hist.add({std::string(name), b.low, b.high, b.count});
  };
  add_hist("doppler_pslr_db", [](const EnsembleMember& e) { return e.doppler.pslr_db; });
  add_hist("doppler_islr_db", [](const EnsembleMember& e) { return e.doppler.islr_db; });
  add_hist("delay_pslr_db", [](const EnsembleMember& e) { return e.delay.pslr_db; });
  add_hist("delay_islr_db", [](const EnsembleMember& e) { return e.delay.islr_db; });
  return {doppler, delay, metrics, ens, stats, hist};
}

std::vector<Table> effchan_tables(const ExperimentConfig& c) {
  std::mt19937_64 rng(derive_seed(c.seed, "effchan", 0));
  const ChannelSpec spec = family(c).draw(rng);
  Table paths{"effchan_paths",
              {"path", "delay", "doppler", "gain_re", "gain_im", "loc"}, {}};
  const double c1 = c.resolved_c1();
  for (std::size_t p = 0; p < spec.paths.size(); ++p) {
    const auto& ps = spec.paths[p];
    paths.add({static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(ps.delay), ps.doppler,
               ps.gain.real(), ps.gain.imag(),
               static_cast<std::uint64_t>(location_index(ps, spec, c1))});
  }
  Table support{"effchan_support", {"waveform", "row", "col", "re", "im", "magnitude"}, {}};
  Table extracted{"effchan_extracted",
                  {"waveform", "delay", "doppler", "gain_re", "gain_im", "loc"}, {}};
  for (const auto& nw : waveforms(c)) {
    const EffectiveChannel g = effective_channel(spec, nw.w.config());
    for (const auto& [r, col] : g.support) {
      const cd v = g.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
      support.add({nw.name, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(col),
                   v.real(), v.imag(), std::abs(v)});
    }
    const bool structured =
        nw.w.kind() == WaveformKind::afdm || nw.w.kind() == WaveformKind::cpafdm_one_sided;
    if (structured && !c.fractional_doppler) {
      for (const ExtractedPath& e : extract_paths(g, spec)) {
        extracted.add({nw.name, static_cast<std::uint64_t>(e.delay),
                       static_cast<std::int64_t>(e.doppler), e.gain.real(), e.gain.imag(),
                       static_cast<std::uint64_t>(e.loc)});
      }
    }
  }
  return {paths, support, extracted};
}

std::vector<Table> cpim_tables(const ExperimentConfig& c) {
  const CpimScheme scheme(build_codebook(c.n, c.k_bits, c.codebook_seed), c.resolved_c1(),
                          c.resolved_c2(), QamConstellation(c.constellation));
  Table t{"cpim", {"snr_db", "index_error_rate", "symbol_ber", "total_ber"}, {}};
  for (const CpimRecord& r : run_cpim(scheme, family(c), c.snr_db, c.trials, c.seed)) {
    t.add({r.snr_db, r.index_error_rate, r.symbol_ber, r.total_ber});
  }
  const SpectralEfficiency se =
      spectral_efficiency(c.n, c.constellation, std::uint64_t{1} << c.k_bits);
  Table rate{"cpim_rate", {"n", "m", "k", "afdm_bits", "cpim_bits"}, {}};
  rate.add({static_cast<std::uint64_t>(c.n), static_cast<std::uint64_t>(c.constellation),
            std::uint64_t{1} << c.k_bits, static_cast<std::uint64_t>(se.afdm_bits),
            static_cast<std::uint64_t>(se.cpim_bits)});
  return {t, rate};
}

std::vector<Table> physec_tables(const ExperimentConfig& c) {
  EveSetup setup;
  setup.family = family(c);
  setup.c1 = c.resolved_c1();
  setup.c2 = c.resolved_c2();
  setup.constellation = c.constellation;
  setup.snr_grid = c.snr_db;
  setup.trials = c.trials;
  setup.seed = c.seed;
  setup.wrong_keys = c.wrong_keys;
  const PermKey key = keygen(c.n, c.key_seed);
  const EveReport rep = eavesdrop_experiment(key, setup);
  Table t{"physec",
          {"snr_db", "matched_ber", "mismatched_ber", "mismatched_evm",
           "mismatched_phase_variance"},
          {}};
  for (std::size_t k = 0; k < rep.snr_grid.size(); ++k) {
    t.add({rep.snr_grid[k], rep.matched[k].ber, rep.mismatched.ber[k].ber,
           rep.mismatched.evm_percent[k], rep.mismatched.phase_variance[k]});
  }
  Table scatter{"physec_scatter", {"re", "im"}, {}};
  for (cd z : rep.mismatched.scatter) scatter.add({z.real(), z.imag()});
  Table keys{"physec_keys", {"role", "rank"}, {}};
  keys.add({std::string("true"), key.rank.str()});
  for (const auto& w : rep.wrong_keys) keys.add({std::string("wrong"), w.rank.str()});
  return {t, scatter, keys};
}

std::vector<Table> keyspace_tables(const ExperimentConfig& c) {
  Table t{"keyspace", {"n", "factorial_bits", "bit_length", "log2_keys", "factorial", "note"}, {}};
  for (std::size_t n : c.keyspace_sizes) {
    const KeyspaceReport r = keyspace_report(n);
    t.add({static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r.factorial_bits),
           static_cast<std::uint64_t>(r.bit_length), r.log2_keys, r.factorial, r.note});
  }
  return {t};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (f) f << text;
  if (!f) {
    throw std::filesystem::filesystem_error("cannot write output", p,
                                            std::make_error_code(std::errc::io_error));
  }
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw DimensionMismatch("table " + name + ": row width " + std::to_string(row.size()) +
                            " != " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

std::string render_json(const Table& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = json_cell(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows.dump(1) + "\n";
}

std::vector<Table> run_tables(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::ber: return ber_tables(c);
    case Experiment::papr: return papr_tables(c);
    case Experiment::af: return af_tables(c);
    case Experiment::effchan: return effchan_tables(c);
    case Experiment::cpim: return cpim_tables(c);
    case Experiment::physec: return physec_tables(c);
    case Experiment::keyspace: return keyspace_tables(c);
  }
  throw std::logic_error("unreachable");
}

RunResult run(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunResult res;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  const char* ext = c.format == Format::csv ? ".csv" : ".json";
  for (const Table& t : run_tables(c)) {
    const std::string text = c.format == Format::csv ? render_csv(t) : render_json(t);
    const auto path = out_dir / (t.name + ext);
    write_file(path, text);
    res.files.push_back(path);
    files.push_back({{"name", t.name + ext}, {"fnv1a", hex64(fnv1a(text))}, {"rows", t.rows.size()}});
  }
  nlohmann::ordered_json manifest;
  manifest["tool"] = "cpafdm";
  manifest["version"] = kVersion;
  manifest["experiment"] = to_string(c.experiment);
  manifest["seed"] = c.seed;
  manifest["config_hash"] = hex64(config_hash(c));
  manifest["config"] = serialize(c);
  manifest["files"] = files;
  const auto mpath = out_dir / "manifest.json";
  write_file(mpath, manifest.dump(2) + "\n");
  res.files.push_back(mpath);
  return res;
}

}  // namespace cpafdm::cli
