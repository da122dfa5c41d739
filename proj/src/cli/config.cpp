#include "cpafdm/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cpafdm/channel.hpp"
#include "cpafdm/cpim.hpp"
#include "cpafdm/seeding.hpp"

namespace cpafdm::cli {

namespace {

constexpr const char* kExperimentNames[] = {"ber",     "papr",   "af",      "effchan",
                                            "cpim",    "physec", "keyspace"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty list element");
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a finite number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + s + "'");
}

// "0, 5, 10" or "start:step:stop" (inclusive).
std::vector<double> parse_grid(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw std::invalid_argument("range must be start:step:stop");
    const double a = parse_double(parts[0]);
    const double step = parse_double(parts[1]);
    const double b = parse_double(parts[2]);
    if (step <= 0 || b < a) throw std::invalid_argument("range needs step > 0 and stop >= start");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + step * static_cast<double>(i));
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field uint_field(const char* section, const char* key, T ExperimentConfig::*member) {
  return {section, key,
          [member](ExperimentConfig& c, const std::string& v) {
            c.*member = static_cast<T>(parse_uint(v));
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field bool_field(const char* section, const char* key, bool ExperimentConfig::*member) {
  return {section, key,
          [member](ExperimentConfig& c, const std::string& v) { c.*member = parse_bool(v); },
          [member](const ExperimentConfig& c) { return bool_str(c.*member); }};
}

Field grid_field(const char* section, const char* key,
                 std::vector<double> ExperimentConfig::*member) {
  return {section, key,
          [member](ExperimentConfig& c, const std::string& v) { c.*member = parse_grid(v); },
          [member](const ExperimentConfig& c) { return join(c.*member, format_double); }};
}

Field optional_double_field(const char* section, const char* key, const char* unset,
                            std::optional<double> ExperimentConfig::*member) {
  return {section, key,
          [member, unset](ExperimentConfig& c, const std::string& v) {
            if (v == unset) {
              c.*member = std::nullopt;
            } else {
              c.*member = parse_double(v);
            }
          },
          [member, unset](const ExperimentConfig& c) {
            return (c.*member) ? format_double(*(c.*member)) : std::string(unset);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"", "experiment",
       [](ExperimentConfig& c, const std::string& v) { c.experiment = experiment_from_string(v); },
       [](const ExperimentConfig& c) { return to_string(c.experiment); }},
      uint_field("", "seed", &ExperimentConfig::seed),
      {"", "format",
       [](ExperimentConfig& c, const std::string& v) { c.format = format_from_string(v); },
       [](const ExperimentConfig& c) { return to_string(c.format); }},

      {"waveform", "kinds",
       [](ExperimentConfig& c, const std::string& v) {
         c.waveforms.clear();
         for (const auto& item : split_list(v)) c.waveforms.push_back(waveform_kind_from_string(item));
       },
       [](const ExperimentConfig& c) {
         return join(c.waveforms, [](WaveformKind k) { return to_string(k); });
       }},
      uint_field("waveform", "n", &ExperimentConfig::n),
      optional_double_field("waveform", "c1", "optimal", &ExperimentConfig::c1),
      optional_double_field("waveform", "c2", "default", &ExperimentConfig::c2),
      uint_field("waveform", "perm_seed", &ExperimentConfig::perm_seed),
      uint_field("waveform", "constellation", &ExperimentConfig::constellation),

      uint_field("channel", "paths", &ExperimentConfig::paths),
      uint_field("channel", "lmax", &ExperimentConfig::lmax),
      uint_field("channel", "fmax", &ExperimentConfig::fmax),
      uint_field("channel", "guard", &ExperimentConfig::guard),
      bool_field("channel", "fractional_doppler", &ExperimentConfig::fractional_doppler),

      grid_field("sim", "snr_db", &ExperimentConfig::snr_db),
      uint_field("sim", "trials", &ExperimentConfig::trials),

      uint_field("papr", "frames", &ExperimentConfig::frames),
      grid_field("papr", "gamma_db", &ExperimentConfig::gamma_db),

      uint_field("af", "oversampling", &ExperimentConfig::oversampling),
      uint_field("af", "permutations", &ExperimentConfig::permutations),
      bool_field("af", "random_symbols", &ExperimentConfig::random_symbols),

      uint_field("cpim", "k_bits", &ExperimentConfig::k_bits),
      uint_field("cpim", "codebook_seed", &ExperimentConfig::codebook_seed),

      uint_field("physec", "wrong_keys", &ExperimentConfig::wrong_keys),
      uint_field("physec", "key_seed", &ExperimentConfig::key_seed),

      {"keyspace", "sizes",
       [](ExperimentConfig& c, const std::string& v) {
         c.keyspace_sizes.clear();
         for (const auto& item : split_list(v)) c.keyspace_sizes.push_back(parse_uint(item));
       },
       [](const ExperimentConfig& c) {
         return join(c.keyspace_sizes, [](std::size_t s) { return std::to_string(s); });
       }},
  };
  return f;
}

std::string field_name(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace

ConfigError::ConfigError(std::size_t line, std::string field, const std::string& what)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : field + ": ") + what),
      line_(line),
      field_(std::move(field)) {}

std::string to_string(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

std::string to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

Experiment experiment_from_string(const std::string& s) {
  for (int i = 0; i < 7; ++i) {
    if (s == kExperimentNames[i]) return static_cast<Experiment>(i);
  }
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("format must be csv or json, got '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: overflow");
  return std::string(buf, p);
}

double ExperimentConfig::resolved_c1() const {
  return c1 ? *c1 : optimal_c1(fmax, guard, n, lmax).c1;
}

double ExperimentConfig::resolved_c2() const { return c2 ? *c2 : default_c2(n); }

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(fields().begin(), fields().end(),
                                     [&](const Field& f) { return section == f.section; });
      if (!known) throw ConfigError(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string name = field_name(section, key);
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) {
      return section == f.section && key == f.key;
    });
    if (it == fields().end()) throw ConfigError(line_no, name, "unknown key");
    if (!seen.insert(name).second) throw ConfigError(line_no, name, "duplicate key");
    if (value.empty()) throw ConfigError(line_no, name, "missing value");
    try {
      it->set(c, value);
    } catch (const std::exception& e) {
      throw ConfigError(line_no, name, e.what());
    }
  }
  return c;
}

namespace {

// JSON scalars and arrays are rendered to the text form the field setters
// parse, so both formats share one set of validation rules.
std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  throw std::invalid_argument("expected a string, number or boolean");
}

std::string json_value(const nlohmann::json& v) {
  if (!v.is_array()) return json_scalar(v);
  std::vector<std::string> items;
  for (const auto& x : v) items.push_back(json_scalar(x));
  return join(items, [](const std::string& x) { return x; });
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(0, "", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError(0, "", "JSON config must be an object");
  ExperimentConfig c;
  auto assign = [&](const std::string& section, const std::string& key, const nlohmann::json& v) {
    const std::string name = field_name(section, key);
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) {
      return section == f.section && key == f.key;
    });
    if (it == fields().end()) throw ConfigError(0, name, "unknown key");
    try {
      it->set(c, json_value(v));
    } catch (const std::exception& e) {
      throw ConfigError(0, name, e.what());
    }
  };
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_object()) {
      assign("", key, value);
      continue;
    }
    const bool known = std::any_of(fields().begin(), fields().end(),
                                   [&](const Field& f) { return key == f.section; });
    if (key.empty() || !known) throw ConfigError(0, key, "unknown section");
    for (const auto& [k, v] : value.items()) assign(key, k, v);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
  return parse_config(text);
}

std::string serialize(const ExperimentConfig& c) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out += "\n[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(c) + "\n";
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(serialize(c)); }

std::string to_string(Diagnostic::Severity s) {
  return s == Diagnostic::Severity::error ? "error" : "warning";
}

bool has_errors(const std::vector<Diagnostic>& d) {
  return std::any_of(d.begin(), d.end(), [](const Diagnostic& x) {
    return x.severity == Diagnostic::Severity::error;
  });
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  using S = Diagnostic::Severity;
  std::vector<Diagnostic> d;
  auto add = [&](S s, std::string field, std::string msg) {
    d.push_back({s, std::move(field), std::move(msg)});
  };

  if (c.n < 2) add(S::error, "waveform.n", "N must be >= 2");
  if (c.constellation != 4 && c.constellation != 16 && c.constellation != 64) {
    add(S::error, "waveform.constellation", "constellation must be 4, 16 or 64");
  }
  if (c.waveforms.empty()) add(S::error, "waveform.kinds", "no waveforms selected");
  if (c.trials == 0) add(S::error, "sim.trials", "trials must be >= 1");
  if (c.snr_db.empty()) add(S::error, "sim.snr_db", "empty SNR grid");
  if (c.paths == 0) add(S::error, "channel.paths", "at least one path is required");
  if (c.n >= 2 && c.lmax >= c.n) add(S::error, "channel.lmax", "lmax must be < N");
  if (c.paths > (c.lmax + 1) * (2 * c.fmax + 1) && !c.fractional_doppler) {
    add(S::error, "channel.paths", "more paths than distinct (delay, Doppler) pairs");
  }
  if (c.oversampling == 0) add(S::error, "af.oversampling", "oversampling must be >= 1");
  if (c.permutations == 0) add(S::error, "af.permutations", "permutations must be >= 1");
  if (c.frames == 0) add(S::error, "papr.frames", "frames must be >= 1");
  if (c.wrong_keys == 0) add(S::error, "physec.wrong_keys", "wrong_keys must be >= 1");
  for (std::size_t s : c.keyspace_sizes) {
    if (s < 2) add(S::error, "keyspace.sizes", "sizes must be >= 2");
  }
  if (has_errors(d)) return d;

  const std::size_t load = orthogonality_load(c.lmax, c.fmax, c.guard);
  if (load > c.n) {
    const bool needs = c.experiment == Experiment::effchan;
    add(needs ? S::error : S::warning, "channel",
        "orthogonality violated: 2*(fmax+guard)*(lmax+1)+lmax = 2*" +
            std::to_string(c.fmax + c.guard) + "*" + std::to_string(c.lmax + 1) + "+" +
            std::to_string(c.lmax) + " = " + std::to_string(load) + " > N = " +
            std::to_string(c.n));
  }
  if (c.c1) {
    const double opt = optimal_c1(c.fmax, c.guard, c.n, c.lmax).c1;
    if (std::abs(*c.c1 - opt) > 1e-12 * std::max(1.0, opt)) {
      add(S::warning, "waveform.c1",
          "c1 = " + format_double(*c.c1) + " differs from the optimum " + format_double(opt));
    }
  }
  if (c.experiment == Experiment::cpim) {
    const std::size_t cap = max_index_bits(c.n);
    if (c.k_bits == 0) {
      add(S::error, "cpim.k_bits", "k_bits must be >= 1");
    } else if (c.k_bits > cap) {
      add(S::error, "cpim.k_bits",
          "capacity exceeded: k_bits = " + std::to_string(c.k_bits) + " > floor(log2(" +
              std::to_string(c.n) + "!)) = " + std::to_string(cap));
    } else if (c.k_bits > kMaxCodebookBits) {
      add(S::error, "cpim.k_bits",
          "k_bits = " + std::to_string(c.k_bits) + " exceeds the storage limit " +
              std::to_string(kMaxCodebookBits));
    }
  }
  return d;
}

}  // namespace cpafdm::cli
