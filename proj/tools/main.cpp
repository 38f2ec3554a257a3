#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "spsb/cli.hpp"

namespace {

using namespace spsb::cli;

int emit(const CommandResult& r, const RunConfig& cfg) {
  if (!r.message.empty()) std::cerr << r.message;
  const bool report = r.name == "verify";
  if (cfg.out.empty() || report) std::cout << r.output << std::flush;
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    const auto path = std::filesystem::path(cfg.out) / (r.name + (report ? ".txt" : ".csv"));
    std::ofstream f(path, std::ios::binary);
    f << r.output;
    if (!f) throw std::runtime_error("cannot write " + path.string());
    std::cerr << "wrote " << path.string() << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization symmetry breaking in optical cavities: thresholds, noise spectra and Fock-space checks"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, model, out;
  std::vector<std::string> sets;
  int threads = -1;
  bool print_config = false;
  app.add_option("--config", config_path, "Configuration file (key = value, [section] headers)");
  app.add_option("--model", model, "Model: opo or chi3")->check(CLI::IsMember({"opo", "chi3"}));
  app.add_option("--out", out, "Output directory; CSV goes to stdout when omitted");
  app.add_option("--set", sets, "Override a key, e.g. --set chi3.delta=3 (repeatable)")->allow_extra_args(false);
  app.add_option("--threads", threads, "Worker threads, 0 for all cores");
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

  struct Sub {
    const char* name;
    const char* help;
    CommandResult (*run)(const RunConfig&);
  };
  const Sub subs[] = {
      {"thresholds", "Existence interval of the symmetry-broken branch over a detuning grid", cmd_thresholds},
      {"steady", "Steady states and stability along a parameter sweep", cmd_steady},
      {"spectrum", "Output quadrature noise spectrum", cmd_spectrum},
      {"squeeze-sweep", "Dark-mode squeezing over the existence region", cmd_squeeze_sweep},
      {"oracle", "Fock-space steady-state moments against the linearized covariance", cmd_oracle},
      {"verify", "Run the invariant suite and print a pass/fail table", cmd_verify},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }
  if (!print_config && app.get_subcommands().empty()) {
    std::cerr << "A subcommand is required\nRun with --help for more information.\n";
    return kConfigError;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path, cfg);
    if (!model.empty()) apply(cfg, "model", model);
    if (!out.empty()) cfg.out = out;
    if (threads >= 0) cfg.threads = threads;
    for (const auto& s : sets) {
      const auto [k, v] = split_assignment(s);
      apply(cfg, k, v);
    }
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  if (print_config) {
    for (const auto& [k, v] : dump(cfg)) std::cout << k << " = " << v << "\n";
    return kSuccess;
  }

  for (const auto& s : subs) {
    if (!app.got_subcommand(s.name)) continue;
    try {
      return emit(s.run(cfg), cfg);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid parameters: " << e.what() << "\n";
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << s.name << " failed: " << e.what() << "\n";
      return kVerificationFailure;
    }
  }
  return kConfigError;
}
