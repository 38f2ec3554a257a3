#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spsb/models.hpp"

namespace spsb::cli {

/// Invalid or unknown configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kConfigError = 2 };

enum class Scale { linear, log };

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  int points = 2;
  Scale scale = Scale::linear;

  /// Throws ConfigError for fewer than one point or a log grid touching zero.
  std::vector<double> values() const;
};

struct Tolerances {
  double symmetry = 1e-14;
  double conservation = 1e-10;
  double basis = 1e-12;
  double threshold = 1e-6;
  double goldstone = 1e-8;
  double alignment = 1e-6;
  double squeezing = 1e-6;
  double heisenberg = 1e-6;
  double shot_noise = 1e-3;
  double oracle = 1e-2;
  double cutoff_drift = 1e-6;
};

struct RunConfig {
  ModelKind model = ModelKind::chi3;
  OpoParams opo;
  Chi3Params chi3;
  int threads = 0;
  std::string out;  // empty: CSV goes to stdout

  GridSpec thresholds{0.0, 3.0, 31, Scale::linear};  // delta / gamma_s

  std::string steady_variable;  // empty: rho2 for chi3, pump_amplitude for opo
  GridSpec steady{0.3, 1.2, 19, Scale::linear};

  std::string spectrum_mode = "dark";  // dark, bright, twin, x, y, plus, minus, diagonal, antidiagonal
  std::optional<double> spectrum_phi;  // empty: optimal at omega = 0
  GridSpec omega{1e-3, 1e3, 401, Scale::log};
  bool omega_include_zero = true;

  GridSpec squeeze_delta{2.0, 6.0, 5, Scale::linear};
  GridSpec squeeze_fraction{1e-3, 0.999, 5, Scale::linear};  // position inside the existence interval

  std::vector<double> oracle_rho2{1.0, 2.0, 3.0, 4.0, 5.0};
  double oracle_g = -0.01;
  std::vector<double> oracle_pump{0.05, 0.1, 0.15, 0.2};
  int oracle_signal_cutoff = 7;
  int oracle_opo_cutoff = 12;
  bool oracle_double_cutoffs = true;

  int verify_thetas = 100;
  int verify_basis_samples = 10;
  int verify_threshold_deltas = 5;
  int verify_branch_points = 12;
  unsigned verify_seed = 20240611u;

  Tolerances tol;

  std::string steady_control() const;

  /// Checks every parameter block against its model invariants. Throws ConfigError.
  void validate() const;
};

/// Sets `section.key` (or `key` for top-level entries) from its textual value.
/// Throws ConfigError for unknown keys or malformed values.
void apply(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses "key = value" lines grouped under "[section]" headers; '#' starts a
/// comment. Throws ConfigError with the offending line number.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Splits "KEY=VALUE" for --set. Throws ConfigError without '='.
std::pair<std::string, std::string> split_assignment(const std::string& s);

/// Every accepted key with its current value, in a stable order.
std::vector<std::pair<std::string, std::string>> dump(const RunConfig& cfg);

/// Shortest round-trip decimal, scientific when 0 < |x| < 1e-3; "nan", "inf", "-inf".
std::string format_number(double x);
/// Real part, followed by "+bi" / "-bi" when the imaginary part is not negligible.
std::string format_complex(std::complex<double> z);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

struct CommandResult {
  std::string name;     // output file stem
  std::string output;   // CSV, or the report table for verify
  std::string message;  // notes for stderr
  int exit_code = kSuccess;
};

CommandResult cmd_thresholds(const RunConfig& cfg);
CommandResult cmd_steady(const RunConfig& cfg);
CommandResult cmd_spectrum(const RunConfig& cfg);
CommandResult cmd_squeeze_sweep(const RunConfig& cfg);
CommandResult cmd_oracle(const RunConfig& cfg);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Full invariant suite on the configured parameters.
std::vector<Check> run_verification(const RunConfig& cfg);
/// Fixed-width pass/fail table of the checks.
std::string format_report(const std::vector<Check>& checks);
/// Report table in `output`; exit 1 on any failure.
CommandResult cmd_verify(const RunConfig& cfg);

}  // namespace spsb::cli
