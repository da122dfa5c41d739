#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpafdm/waveform.hpp"

namespace cpafdm::cli {

enum class Experiment { ber, papr, af, effchan, cpim, physec, keyspace };
enum class Format { csv, json };

std::string to_string(Experiment e);
std::string to_string(Format f);
Experiment experiment_from_string(const std::string& s);
Format format_from_string(const std::string& s);

/// Parse failure with the offending line (1-based, 0 when not tied to a
/// line) and "section.key" field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string field, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::ber;
  std::uint64_t seed = 1;
  Format format = Format::csv;

  // [waveform]
  std::vector<WaveformKind> waveforms{WaveformKind::ofdm, WaveformKind::afdm,
                                      WaveformKind::cpafdm_one_sided};
  std::size_t n = 64;
  std::optional<double> c1;  // unset: optimal for the channel box
  std::optional<double> c2;  // unset: 1/(2 N pi)
  std::uint64_t perm_seed = 7;
  std::size_t constellation = 4;

  // [channel]
  std::size_t paths = 3;
  std::size_t lmax = 2;
  std::size_t fmax = 2;
  std::size_t guard = 0;
  bool fractional_doppler = false;

  // [sim]
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
  std::uint64_t trials = 1000;

  // [papr]
  std::uint64_t frames = 10000;
  std::vector<double> gamma_db{4, 5, 6, 7, 8, 9, 10, 11, 12};

  // [af]
  std::size_t oversampling = 8;
  std::size_t permutations = 200;
  bool random_symbols = false;

  // [cpim]
  std::size_t k_bits = 2;
  std::uint64_t codebook_seed = 11;

  // [physec]
  std::size_t wrong_keys = 20;
  std::uint64_t key_seed = 5;

  // [keyspace]
  std::vector<std::size_t> keyspace_sizes{2, 16, 64};

  double resolved_c1() const;
  double resolved_c2() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// INI-style text: `key = value` lines, optional `[section]` headers,
/// `#`/`;` comments. Unknown keys, malformed values and duplicate keys throw
/// ConfigError.
ExperimentConfig parse_config(const std::string& text);
/// The same fields as a JSON object: top-level keys plus one nested object
/// per section; lists may be arrays. Parse errors carry line 0.
ExperimentConfig parse_config_json(const std::string& text);

/// Dispatches on content: a file whose first non-blank character is `{` is
/// JSON, anything else the INI form.
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& c);

/// FNV-1a of the canonical text.
std::uint64_t config_hash(const ExperimentConfig& c);

struct Diagnostic {
  enum class Severity { warning, error };
  Severity severity;
  std::string field;
  std::string message;
};

std::string to_string(Diagnostic::Severity s);

/// Semantic checks: orthogonality condition, c1 away from the optimum,
/// codebook capacity, sizes. Empty for a sound configuration.
std::vector<Diagnostic> validate(const ExperimentConfig& c);

bool has_errors(const std::vector<Diagnostic>& d);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace cpafdm::cli
