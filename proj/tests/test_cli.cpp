#include <doctest.h>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpafdm/cli/config.hpp"
#include "cpafdm/cli/runner.hpp"

using namespace cpafdm;
using namespace cpafdm::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.seed = 3;
  c.n = 16;
  c.paths = 2;
  c.lmax = 1;
  c.fmax = 1;
  c.snr_db = {0, 10, 20};
  c.trials = 12;
  c.frames = 100;
  c.gamma_db = {4, 8};
  c.permutations = 4;
  c.wrong_keys = 2;
  c.keyspace_sizes = {2, 16};
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cpafdm-test-" + name);
  fs::remove_all(p);
  return p;
}

bool has_field(const std::vector<Diagnostic>& d, const std::string& field) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.field == field; });
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse, serialize, parse is the identity") {
  const std::string text = R"(seed = 42
experiment = physec  # trailing comment
; full-line comment
[waveform]
kinds = afdm, cpafdm-two-sided
n = 32
c1 = 0.046875
perm_seed = 9
constellation = 16
[channel]
fractional_doppler = yes
guard = 1
[sim]
snr_db = 0:2.5:10
[keyspace]
sizes = 4, 64
)";
  const ExperimentConfig c = parse_config(text);
  CHECK(c.seed == 42);
  CHECK(c.experiment == Experiment::physec);
  CHECK(c.waveforms == std::vector<WaveformKind>{WaveformKind::afdm, WaveformKind::cpafdm_two_sided});
  CHECK(c.c1 == 0.046875);
  CHECK(!c.c2);
  CHECK(c.fractional_doppler);
  CHECK(c.snr_db == std::vector<double>{0, 2.5, 5, 7.5, 10});
  CHECK(parse_config(serialize(c)) == c);
  CHECK(serialize(parse_config(serialize(c))) == serialize(c));
  const ExperimentConfig d{};
  CHECK(parse_config(serialize(d)) == d);
  CHECK(parse_config("") == d);

  ExperimentConfig odd;
  odd.c2 = 0.1 + 0.2;
  odd.snr_db = {1.0 / 3.0, -7.25};
  CHECK(parse_config(serialize(odd)) == odd);
}

TEST_CASE("JSON configs share the fields") {
  const ExperimentConfig j = parse_config_json(R"({
    "seed": 42, "experiment": "cpim",
    "waveform": {"n": 32, "kinds": ["afdm"], "c1": 0.046875},
    "sim": {"snr_db": [0, 10], "trials": 5},
    "channel": {"fractional_doppler": true}
  })");
  const ExperimentConfig t = parse_config(
      "seed = 42\nexperiment = cpim\n[waveform]\nn = 32\nkinds = afdm\nc1 = 0.046875\n"
      "[sim]\nsnr_db = 0, 10\ntrials = 5\n[channel]\nfractional_doppler = true\n");
  CHECK(j == t);
  CHECK_THROWS_AS(parse_config_json(R"({"waveform": {"m": 4}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"radar": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("[1]"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("{"), ConfigError);

  const fs::path dir = scratch("json");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "\n  {\"seed\": 8}";
  CHECK(load_config((dir / "c.json").string()).seed == 8);
  fs::remove_all(dir);
}

TEST_CASE("config hash tracks content only") {
  const ExperimentConfig a = small(Experiment::ber);
  ExperimentConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.trials += 1;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.c1 = a.resolved_c1();  // explicit value, different content
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(parse_config("seed=1\n")) == config_hash(parse_config("# note\nseed = 1\n\n")));
}

TEST_CASE("parse errors carry line and field") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::make_pair(e.line(), e.field());
    }
    return std::make_pair(std::size_t{0}, std::string("none"));
  };
  CHECK(line_of("seed = 1\n[waveform]\nn = abc\n") == std::make_pair(std::size_t{3}, std::string("waveform.n")));
  CHECK(line_of("[channel]\npaths = 2\npaths = 3\n") == std::make_pair(std::size_t{3}, std::string("channel.paths")));
  CHECK(line_of("\n[radar]\n") == std::make_pair(std::size_t{2}, std::string("radar")));
  CHECK(line_of("[sim]\nsnr = 3\n") == std::make_pair(std::size_t{2}, std::string("sim.snr")));
  CHECK(line_of("[sim]\ntrials =\n") == std::make_pair(std::size_t{2}, std::string("sim.trials")));
  CHECK(line_of("[sim]\nsnr_db = 5:1:0\n").first == 2);
  CHECK(line_of("[sim\n").first == 1);
  CHECK(line_of("seed\n").first == 1);
  CHECK(line_of("[waveform]\nkinds = afdm, otfs\n").second == "waveform.kinds");
  CHECK(line_of("[channel]\nfractional_doppler = maybe\n").second == "channel.fractional_doppler");
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), ConfigError);
}

TEST_CASE("validation diagnostics") {
  ExperimentConfig c;
  c.n = 8;
  c.lmax = 3;
  c.fmax = 2;
  c.paths = 3;
  auto d = validate(c);
  REQUIRE(d.size() == 1);
  CHECK(d[0].severity == Diagnostic::Severity::warning);
  CHECK(d[0].message.find("= 19 > N = 8") != std::string::npos);
  c.experiment = Experiment::effchan;
  CHECK(has_errors(validate(c)));

  CHECK(validate(ExperimentConfig{}).empty());
  CHECK(validate(small(Experiment::cpim)).empty());

  ExperimentConfig off;
  off.c1 = 0.05;
  d = validate(off);
  REQUIRE(d.size() == 1);
  CHECK(d[0].field == "waveform.c1");
  CHECK(!has_errors(d));

  ExperimentConfig cap = small(Experiment::cpim);
  cap.n = 4;
  cap.lmax = 0;
  cap.fmax = 0;
  cap.paths = 1;
  cap.k_bits = 5;
  d = validate(cap);
  CHECK(has_field(d, "cpim.k_bits"));
  CHECK(d.back().message.find("capacity") != std::string::npos);
  cap.k_bits = 4;
  CHECK(validate(cap).empty());

  ExperimentConfig bad;
  bad.constellation = 8;
  bad.trials = 0;
  CHECK(has_field(validate(bad), "waveform.constellation"));
  CHECK(has_field(validate(bad), "sim.trials"));
}

TEST_CASE("table rendering") {
  Table t{"demo", {"name", "count", "value"}, {}};
  t.add({std::string("a,b"), std::uint64_t{3}, 0.1});
  t.add({std::string("plain"), std::int64_t{-2}, std::numeric_limits<double>::quiet_NaN()});
  CHECK(render_csv(t) == "name,count,value\n\"a,b\",3,0.1\nplain,-2,nan\n");
  const std::string j = render_json(t);
  CHECK(j.find("\"value\": null") != std::string::npos);
  CHECK(j.find("\"name\": \"a,b\"") != std::string::npos);
  CHECK_THROWS(t.add({std::string("short")}));
}

TEST_CASE("every experiment runs and writes a manifest") {
  for (Experiment e : {Experiment::ber, Experiment::papr, Experiment::af, Experiment::effchan,
                       Experiment::cpim, Experiment::physec, Experiment::keyspace}) {
    CAPTURE(to_string(e));
    ExperimentConfig c = small(e);
    c.format = e == Experiment::af ? Format::json : Format::csv;
    const fs::path dir = scratch(to_string(e));
    const RunResult r = run(c, dir);
    REQUIRE(r.files.size() >= 2);
    CHECK(r.files.back().filename() == "manifest.json");
    const std::string m = slurp(r.files.back());
    CHECK(m.find("\"seed\": 3") != std::string::npos);
    CHECK(m.find(std::string("\"version\": \"") + kVersion + "\"") != std::string::npos);
    for (const auto& f : r.files) CHECK(fs::file_size(f) > 0);
    fs::remove_all(dir);
  }
}

TEST_CASE("reruns are byte-identical for any thread count") {
  for (Experiment e : {Experiment::ber, Experiment::papr, Experiment::af, Experiment::cpim,
                       Experiment::physec}) {
    CAPTURE(to_string(e));
    const ExperimentConfig c = small(e);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const RunResult a = run(c, scratch("one"));
    omp_set_num_threads(4);
    const RunResult b = run(c, scratch("four"));
    omp_set_num_threads(saved);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
      CHECK(a.files[i].filename() == b.files[i].filename());
      CHECK(slurp(a.files[i]) == slurp(b.files[i]));
    }
  }
  fs::remove_all(scratch("one"));
  fs::remove_all(scratch("four"));
}

TEST_CASE("unwritable output") {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  CHECK_THROWS_AS(run(small(Experiment::keyspace), blocker / "sub"), fs::filesystem_error);
  fs::remove(blocker);
}

}  // TEST_SUITE
