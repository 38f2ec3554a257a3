#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "spsb/cli.hpp"

namespace spsb::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long parse_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const long x = parse_integer(key, v);
  if (x < -1000000000L || x > 1000000000L) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

Scale parse_scale(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "linear") return Scale::linear;
  if (t == "log") return Scale::log;
  throw ConfigError(key + ": scale must be linear or log, got '" + v + "'");
}

std::string scale_name(Scale s) { return s == Scale::linear ? "linear" : "log"; }

std::string list_text(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_number(xs[i]);
  return out;
}

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Entry real(std::string key, double RunConfig::*field) {
  return {key, [key, field](RunConfig& c, const std::string& v) { c.*field = parse_double(key, v); },
          [field](const RunConfig& c) { return format_number(c.*field); }};
}

template <class Owner>
Entry real(std::string key, Owner RunConfig::*owner, double Owner::*field) {
  return {key, [key, owner, field](RunConfig& c, const std::string& v) { (c.*owner).*field = parse_double(key, v); },
          [owner, field](const RunConfig& c) { return format_number((c.*owner).*field); }};
}

template <class Owner>
Entry integer(std::string key, Owner RunConfig::*owner, int Owner::*field) {
  return {key, [key, owner, field](RunConfig& c, const std::string& v) { (c.*owner).*field = parse_int(key, v); },
          [owner, field](const RunConfig& c) { return std::to_string((c.*owner).*field); }};
}

Entry integer(std::string key, int RunConfig::*field) {
  return {key, [key, field](RunConfig& c, const std::string& v) { c.*field = parse_int(key, v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

void grid_entries(std::vector<Entry>& out, const std::string& prefix, GridSpec RunConfig::*grid) {
  out.push_back(real(prefix + "start", grid, &GridSpec::start));
  out.push_back(real(prefix + "stop", grid, &GridSpec::stop));
  out.push_back(integer(prefix + "points", grid, &GridSpec::points));
  const std::string key = prefix + "scale";
  out.push_back({key, [key, grid](RunConfig& c, const std::string& v) { (c.*grid).scale = parse_scale(key, v); },
                 [grid](const RunConfig& c) { return scale_name((c.*grid).scale); }});
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back({"model",
                 [](RunConfig& c, const std::string& v) {
                   const std::string t = trim(v);
                   if (t == "opo") c.model = ModelKind::opo;
                   else if (t == "chi3") c.model = ModelKind::chi3;
                   else throw ConfigError("model: expected opo or chi3, got '" + v + "'");
                 },
                 [](const RunConfig& c) { return std::string(c.model == ModelKind::opo ? "opo" : "chi3"); }});
    e.push_back(integer("threads", &RunConfig::threads));
    e.push_back({"out", [](RunConfig& c, const std::string& v) { c.out = trim(v); },
                 [](const RunConfig& c) { return c.out; }});

    e.push_back(real("opo.pump_amplitude", &RunConfig::opo, &OpoParams::pump_amplitude));
    e.push_back(real("opo.chi", &RunConfig::opo, &OpoParams::chi));
    e.push_back(real("opo.gamma_p", &RunConfig::opo, &OpoParams::gamma_p));
    e.push_back(real("opo.gamma_s", &RunConfig::opo, &OpoParams::gamma_s));

    e.push_back(real("chi3.delta", &RunConfig::chi3, &Chi3Params::delta));
    e.push_back(real("chi3.g", &RunConfig::chi3, &Chi3Params::g));
    e.push_back(real("chi3.rho2", &RunConfig::chi3, &Chi3Params::rho2));
    e.push_back(real("chi3.A", &RunConfig::chi3, &Chi3Params::A));
    e.push_back(real("chi3.B", &RunConfig::chi3, &Chi3Params::B));
    e.push_back(real("chi3.gamma_s", &RunConfig::chi3, &Chi3Params::gamma_s));

    grid_entries(e, "thresholds.delta_", &RunConfig::thresholds);

    e.push_back({"steady.variable", [](RunConfig& c, const std::string& v) { c.steady_variable = trim(v); },
                 [](const RunConfig& c) { return c.steady_variable; }});
    grid_entries(e, "steady.", &RunConfig::steady);

    e.push_back({"spectrum.mode", [](RunConfig& c, const std::string& v) { c.spectrum_mode = trim(v); },
                 [](const RunConfig& c) { return c.spectrum_mode; }});
    e.push_back({"spectrum.phi",
                 [](RunConfig& c, const std::string& v) {
                   if (trim(v) == "optimal") c.spectrum_phi.reset();
                   else c.spectrum_phi = parse_double("spectrum.phi", v);
                 },
                 [](const RunConfig& c) {
                   return c.spectrum_phi ? format_number(*c.spectrum_phi) : std::string("optimal");
                 }});
    grid_entries(e, "spectrum.omega_", &RunConfig::omega);
    e.push_back({"spectrum.include_zero",
                 [](RunConfig& c, const std::string& v) { c.omega_include_zero = parse_bool("spectrum.include_zero", v); },
                 [](const RunConfig& c) { return std::string(c.omega_include_zero ? "true" : "false"); }});

    grid_entries(e, "squeeze.delta_", &RunConfig::squeeze_delta);
    grid_entries(e, "squeeze.fraction_", &RunConfig::squeeze_fraction);

    e.push_back({"oracle.rho2", [](RunConfig& c, const std::string& v) { c.oracle_rho2 = parse_list("oracle.rho2", v); },
                 [](const RunConfig& c) { return list_text(c.oracle_rho2); }});
    e.push_back(real("oracle.g", &RunConfig::oracle_g));
    e.push_back({"oracle.pump", [](RunConfig& c, const std::string& v) { c.oracle_pump = parse_list("oracle.pump", v); },
                 [](const RunConfig& c) { return list_text(c.oracle_pump); }});
    e.push_back(integer("oracle.signal_cutoff", &RunConfig::oracle_signal_cutoff));
    e.push_back(integer("oracle.opo_cutoff", &RunConfig::oracle_opo_cutoff));
    e.push_back({"oracle.double_cutoffs",
                 [](RunConfig& c, const std::string& v) {
                   c.oracle_double_cutoffs = parse_bool("oracle.double_cutoffs", v);
                 },
                 [](const RunConfig& c) { return std::string(c.oracle_double_cutoffs ? "true" : "false"); }});

    e.push_back(integer("verify.thetas", &RunConfig::verify_thetas));
    e.push_back(integer("verify.basis_samples", &RunConfig::verify_basis_samples));
    e.push_back(integer("verify.threshold_deltas", &RunConfig::verify_threshold_deltas));
    e.push_back(integer("verify.branch_points", &RunConfig::verify_branch_points));
    e.push_back({"verify.seed",
                 [](RunConfig& c, const std::string& v) {
                   const long s = parse_integer("verify.seed", v);
                   if (s < 0 || s > 4294967295L) throw ConfigError("verify.seed: out of range");
                   c.verify_seed = static_cast<unsigned>(s);
                 },
                 [](const RunConfig& c) { return std::to_string(c.verify_seed); }});

    e.push_back(real("tolerances.symmetry", &RunConfig::tol, &Tolerances::symmetry));
    e.push_back(real("tolerances.conservation", &RunConfig::tol, &Tolerances::conservation));
    e.push_back(real("tolerances.basis", &RunConfig::tol, &Tolerances::basis));
    e.push_back(real("tolerances.threshold", &RunConfig::tol, &Tolerances::threshold));
    e.push_back(real("tolerances.goldstone", &RunConfig::tol, &Tolerances::goldstone));
    e.push_back(real("tolerances.alignment", &RunConfig::tol, &Tolerances::alignment));
    e.push_back(real("tolerances.squeezing", &RunConfig::tol, &Tolerances::squeezing));
    e.push_back(real("tolerances.heisenberg", &RunConfig::tol, &Tolerances::heisenberg));
    e.push_back(real("tolerances.shot_noise", &RunConfig::tol, &Tolerances::shot_noise));
    e.push_back(real("tolerances.oracle", &RunConfig::tol, &Tolerances::oracle));
    e.push_back(real("tolerances.cutoff_drift", &RunConfig::tol, &Tolerances::cutoff_drift));
    return e;
  }();
  return entries;
}

void check_grid(const std::string& name, const GridSpec& g) {
  if (g.points < 1) throw ConfigError(name + ": empty grid (points must be at least 1)");
  if (!std::isfinite(g.start) || !std::isfinite(g.stop)) throw ConfigError(name + ": grid bounds must be finite");
  if (g.scale == Scale::log && !(g.start > 0.0 && g.stop > 0.0))
    throw ConfigError(name + ": log grid needs positive bounds");
}

}  // namespace

std::vector<double> GridSpec::values() const {
  check_grid("grid", *this);
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out[i] = scale == Scale::linear ? start + (stop - start) * t
                                    : std::exp(std::log(start) + (std::log(stop) - std::log(start)) * t);
  }
  return out;
}

std::string RunConfig::steady_control() const {
  if (!steady_variable.empty()) return steady_variable;
  return model == ModelKind::opo ? "pump_amplitude" : "rho2";
}

void RunConfig::validate() const {
  try {
    opo.validate();
    chi3.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (threads < 0) throw ConfigError("threads must be non-negative");
  check_grid("thresholds", thresholds);
  check_grid("steady", steady);
  check_grid("spectrum.omega", omega);
  check_grid("squeeze.delta", squeeze_delta);
  check_grid("squeeze.fraction", squeeze_fraction);
  if (squeeze_fraction.start <= 0.0 || squeeze_fraction.stop >= 1.0 || squeeze_fraction.start > squeeze_fraction.stop)
    throw ConfigError("squeeze.fraction: must lie strictly inside (0, 1)");
  static const std::vector<std::string> modes{"dark", "bright", "twin", "x", "y", "plus", "minus", "diagonal",
                                              "antidiagonal"};
  if (std::find(modes.begin(), modes.end(), spectrum_mode) == modes.end())
    throw ConfigError("spectrum.mode: unknown mode '" + spectrum_mode + "'");
  if (spectrum_mode == "twin" && model != ModelKind::opo) throw ConfigError("spectrum.mode = twin needs model = opo");
  const std::vector<std::string> vars = model == ModelKind::opo
                                            ? std::vector<std::string>{"pump_amplitude", "chi", "gamma_p", "gamma_s"}
                                            : std::vector<std::string>{"delta", "g", "rho2", "gamma_s"};
  if (std::find(vars.begin(), vars.end(), steady_control()) == vars.end())
    throw ConfigError("steady.variable: '" + steady_control() + "' is not a sweepable parameter of this model");
  if (oracle_signal_cutoff < 1 || oracle_opo_cutoff < 1) throw ConfigError("oracle cutoffs must be at least 1");
  if (oracle_g == 0.0) throw ConfigError("oracle.g must be nonzero");
  for (double r : oracle_rho2)
    if (!(r >= 0.0)) throw ConfigError("oracle.rho2 entries must be non-negative");
  for (double p : oracle_pump)
    if (!(p >= 0.0)) throw ConfigError("oracle.pump entries must be non-negative");
  if (verify_thetas < 1 || verify_basis_samples < 0 || verify_threshold_deltas < 1 || verify_branch_points < 1)
    throw ConfigError("verify sizes must be positive");
  for (double t : {tol.symmetry, tol.conservation, tol.basis, tol.threshold, tol.goldstone, tol.alignment,
                   tol.squeezing, tol.heisenberg, tol.shot_noise, tol.oracle, tol.cutoff_drift})
    if (!(t >= 0.0)) throw ConfigError("tolerances must be non-negative");
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : registry()) {
    if (e.key == key) {
      e.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError("empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("missing key");
      apply(base, section.empty() ? key : section + "." + key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || trim(s.substr(0, eq)).empty())
    throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
  return {trim(s.substr(0, eq)), s.substr(eq + 1)};
}

std::vector<std::pair<std::string, std::string>> dump(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : registry()) out.emplace_back(e.key, e.get(cfg));
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  const double a = std::abs(x);
  const auto fmt = (a < 1e-3 || a >= 1e15) ? std::chars_format::scientific : std::chars_format::fixed;
  char buf[400];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, fmt);
  if (ec != std::errc()) throw std::runtime_error("format_number: buffer too small");
  return std::string(buf, ptr);
}

std::string format_complex(std::complex<double> z) {
  const double scale = std::max(1e-300, std::abs(z));
  if (std::abs(z.imag()) <= 1e-14 * scale) return format_number(z.real());
  return format_number(z.real()) + (z.imag() < 0 ? "-" : "+") + format_number(std::abs(z.imag())) + "i";
}

Csv::Csv(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("Csv::row: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += '\n';
  ++rows_;
}

}  // namespace spsb::cli
