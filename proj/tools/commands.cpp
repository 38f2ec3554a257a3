#include <cmath>
#include <functional>
#include <numbers>

#include "spsb/cli.hpp"
#include "spsb/fluctuations.hpp"
#include "spsb/fock_oracle.hpp"
#include "spsb/meanfield.hpp"
#include "spsb/parallel.hpp"

namespace spsb::cli {

namespace {

std::string flag(bool b) { return b ? "true" : "false"; }

double& chi3_field(Chi3Params& p, const std::string& name) {
  if (name == "delta") return p.delta;
  if (name == "g") return p.g;
  if (name == "rho2") return p.rho2;
  if (name == "gamma_s") return p.gamma_s;
  throw ConfigError("chi3 has no sweepable parameter '" + name + "'");
}

double& opo_field(OpoParams& p, const std::string& name) {
  if (name == "pump_amplitude") return p.pump_amplitude;
  if (name == "chi") return p.chi;
  if (name == "gamma_p") return p.gamma_p;
  if (name == "gamma_s") return p.gamma_s;
  throw ConfigError("opo has no sweepable parameter '" + name + "'");
}

/// Classical-pump model below threshold, full three-mode model above.
CavityModel opo_at(const OpoParams& p) {
  return p.pump_amplitude > opo_threshold(p) ? opo_model(p) : opo_classical_pump_model(p);
}

CavityModel configured_model(const RunConfig& cfg) {
  return cfg.model == ModelKind::opo ? opo_at(cfg.opo) : chi3_model(cfg.chi3);
}

double gamma_s_of(const RunConfig& cfg) { return cfg.model == ModelKind::opo ? cfg.opo.gamma_s : cfg.chi3.gamma_s; }

JonesVector fixed_mode(const std::string& name) {
  const double r = 1.0 / std::numbers::sqrt2;
  if (name == "x") return e_x();
  if (name == "y") return e_y();
  if (name == "plus") return e_plus();
  if (name == "minus") return e_minus();
  if (name == "diagonal") return {r, r};
  return {r, -r};
}

}  // namespace

CommandResult cmd_thresholds(const RunConfig& cfg) {
  cfg.validate();
  CommandResult out{"thresholds", {}, {}, kSuccess};
  if (cfg.model == ModelKind::opo) {
    Csv csv({"pump_threshold"});
    csv.row({format_number(opo_threshold(cfg.opo))});
    out.output = csv.text();
    return out;
  }
  if (cfg.chi3.g == 0.0) throw ConfigError("chi3.g must be nonzero for thresholds");
  Csv csv({"delta", "rho2_min", "rho2_max", "exists"});
  for (double delta : cfg.thresholds.values()) {
    Chi3Params p = cfg.chi3;
    p.delta = delta;
    const auto t = threshold_interval(p);
    const bool exists = t.exists && p.g * p.delta < 0.0;
    csv.row({format_number(delta / p.gamma_s), format_number(t.lower), format_number(t.upper), flag(exists)});
  }
  out.output = csv.text();
  return out;
}

CommandResult cmd_steady(const RunConfig& cfg) {
  cfg.validate();
  CommandResult out{"steady", {}, {}, kSuccess};
  const auto grid = cfg.steady.values();
  std::function<CavityModel(double)> model_at;
  if (cfg.model == ModelKind::opo) {
    model_at = [&](double x) {
      OpoParams p = cfg.opo;
      opo_field(p, cfg.steady_control()) = x;
      return opo_at(p);
    };
  } else {
    model_at = [&](double x) {
      Chi3Params p = cfg.chi3;
      chi3_field(p, cfg.steady_control()) = x;
      return chi3_model(p);
    };
  }
  const bool opo = cfg.model == ModelKind::opo;
  const auto rows = sweep(model_at, grid, cfg.threads);
  Csv csv({"control", opo ? "abs_alpha_x" : "abs_alpha_plus", opo ? "abs_alpha_y" : "abs_alpha_minus",
           "max_re_lambda", "nonzero_exists", "trivial_stable", "bright_stable", "branches", "failed_seeds", "status"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double gs = gamma_s_of(cfg);
    if (cfg.steady_control() == "gamma_s") gs = grid[i];
    const bool failed = !r.note.empty();
    if (failed) out.message += "point " + format_number(r.control) + ": " + r.note + "\n";
    const std::string status = failed ? "error" : "ok";
    csv.row({format_number(r.control), format_number(r.amplitude_a), format_number(r.amplitude_b),
             format_number(r.max_real_lambda / gs), flag(r.nonzero_exists), flag(r.trivial_stable),
             flag(r.bright_stable), std::to_string(r.branches), std::to_string(r.failed_seeds), status});
  }
  out.output = csv.text();
  return out;
}

CommandResult cmd_spectrum(const RunConfig& cfg) {
  cfg.validate();
  CommandResult out{"spectrum", {}, {}, kSuccess};
  const double gs = gamma_s_of(cfg);
  std::vector<double> omegas;
  if (cfg.omega_include_zero) omegas.push_back(0.0);
  for (double w : cfg.omega.values()) omegas.push_back(w * gs);

  NoiseSpectrum spec;
  if (cfg.spectrum_mode == "twin") {
    if (cfg.opo.pump_amplitude <= opo_threshold(cfg.opo))
      throw ConfigError("spectrum.mode = twin needs the OPO above threshold");
    spec = twin_beam_intensity_spectrum(cfg.opo, omegas);
  } else {
    const auto model = configured_model(cfg);
    const auto st = steady_states(model);
    const ClassicalState* state = nullptr;
    for (const auto& s : st.bright) {
      if (stability(model, s).stable) {
        state = &s;
        break;
      }
    }
    JonesVector mode;
    if (cfg.spectrum_mode == "dark" || cfg.spectrum_mode == "bright") {
      if (!state) throw ConfigError("spectrum.mode = " + cfg.spectrum_mode + " needs a stable bright branch at these parameters");
      mode = cfg.spectrum_mode == "dark" ? dark_polarization(model, *state)
                                         : normalize(field_polarization(model, state->amplitudes));
    } else {
      mode = fixed_mode(cfg.spectrum_mode);
    }
    if (!state) state = &st.trivial;
    const auto dd = linearize(model, *state);
    const double phi = cfg.spectrum_phi ? *cfg.spectrum_phi : optimal_quadrature(dd, mode_weights(model, mode)).phi;
    spec = output_spectrum(dd, model, mode, phi, omegas);
    out.message = "phi = " + format_number(phi) + "\n";
  }
  Csv csv({"omega_over_gamma_s", "V"});
  for (const auto& [w, v] : spec.samples) csv.row({format_number(w / gs), format_number(v)});
  out.output = csv.text();
  return out;
}

CommandResult cmd_squeeze_sweep(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.model != ModelKind::chi3) throw ConfigError("squeeze-sweep applies to model = chi3");
  if (cfg.chi3.g == 0.0) throw ConfigError("chi3.g must be nonzero for squeeze-sweep");
  CommandResult out{"squeeze_sweep", {}, {}, kSuccess};
  std::vector<Chi3Params> points;
  std::vector<bool> admissible;
  for (double delta : cfg.squeeze_delta.values()) {
    Chi3Params base = cfg.chi3;
    base.delta = delta;
    const auto t = threshold_interval(base);
    for (double f : cfg.squeeze_fraction.values()) {
      Chi3Params p = base;
      const bool ok = t.exists && base.g * base.delta < 0.0;
      p.rho2 = ok ? t.onset + f * (t.upper - t.onset) : t.lower * (1.0 + f);
      points.push_back(p);
      admissible.push_back(ok);
    }
  }
  const auto rows = dark_mode_squeezing(points, cfg.threads);
  Csv csv({"delta", "rho2", "g", "gamma_s", "V_min_at_0", "phi_opt"});
  int violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& p = r.params;
    csv.row({format_number(p.delta / p.gamma_s), format_number(p.rho2), format_number(p.g / p.gamma_s),
             format_number(p.gamma_s), format_number(r.v_min), format_number(r.phi_opt)});
    if (!r.on_branch) {
      out.message += "delta = " + format_number(p.delta) + ", rho2 = " + format_number(p.rho2) + ": flagged (" +
                     r.note + (admissible[i] ? "" : ", outside the existence region") + ")\n";
    } else if (!(r.v_min < cfg.tol.squeezing)) {
      ++violations;
      out.message += "delta = " + format_number(p.delta) + ", rho2 = " + format_number(p.rho2) +
                     ": V_min_at_0 above tolerance\n";
    }
  }
  if (violations > 0) out.exit_code = kVerificationFailure;
  out.output = csv.text();
  return out;
}

namespace {

struct OracleJob {
  std::string label;
  CavityModel model;
  std::vector<int> cutoffs;
};

std::vector<OracleJob> oracle_jobs(const RunConfig& cfg) {
  std::vector<OracleJob> jobs;
  if (cfg.model == ModelKind::opo) {
    for (double e : cfg.oracle_pump) {
      OpoParams p = cfg.opo;
      p.pump_amplitude = e;
      if (e >= opo_threshold(p)) throw ConfigError("oracle.pump entries must lie below the OPO threshold");
      jobs.push_back({"pump=" + format_number(e), opo_classical_pump_model(p),
                      {cfg.oracle_opo_cutoff, cfg.oracle_opo_cutoff}});
    }
  } else {
    for (double r : cfg.oracle_rho2) {
      Chi3Params p = cfg.chi3;
      p.g = cfg.oracle_g;
      p.rho2 = r;
      auto model = chi3_model(p);
      if (steady_states(model).nonzero_exists())
        throw ConfigError("oracle.rho2 = " + format_number(r) + " is not below threshold");
      jobs.push_back({"rho2=" + format_number(r), std::move(model),
                      {cfg.oracle_signal_cutoff, cfg.oracle_signal_cutoff}});
    }
  }
  return jobs;
}

}  // namespace

CommandResult cmd_oracle(const RunConfig& cfg) {
  cfg.validate();
  CommandResult out{"oracle", {}, {}, kSuccess};
  const auto jobs = oracle_jobs(cfg);
  std::vector<OracleComparison> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    results[i] = compare_with_linearized(jobs[i].model, jobs[i].cutoffs, jobs[i].label, cfg.oracle_double_cutoffs);
  });
  Csv csv({"point", "moment", "oracle", "linearized", "relative_deviation"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = results[j];
    for (const auto& row : r.rows)
      csv.row({row.point, row.moment, format_complex(row.oracle), format_complex(row.linearized),
               format_number(row.relative_deviation)});
    const bool ok = r.max_relative_deviation < cfg.tol.oracle && r.symmetric_zero_error < cfg.tol.conservation &&
                    (!cfg.oracle_double_cutoffs || r.cutoff_drift < cfg.tol.cutoff_drift);
    out.message += jobs[j].label + ": max deviation " + format_number(r.max_relative_deviation) + ", cutoff drift " +
                   format_number(r.cutoff_drift) + (ok ? "" : "  FAIL") + "\n";
    if (!ok) out.exit_code = kVerificationFailure;
  }
  out.output = csv.text();
  return out;
}

}  // namespace spsb::cli
