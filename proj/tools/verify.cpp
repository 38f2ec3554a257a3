#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "spsb/cli.hpp"
#include "spsb/fluctuations.hpp"
#include "spsb/fock_oracle.hpp"
#include "spsb/meanfield.hpp"
#include "spsb/parallel.hpp"

namespace spsb::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Check at_most(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value, tol, value <= tol, std::move(detail)};
}

double max_rotation_residual(const OperatorPolynomial& h, const std::vector<int>& charges, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, coefficient_distance(h, phase_rotate(h, theta(rng), charges)));
  return worst;
}

OpoParams above_threshold(const RunConfig& cfg) {
  OpoParams p = cfg.opo;
  if (p.pump_amplitude <= opo_threshold(p)) p.pump_amplitude = 1.5 * opo_threshold(p);
  return p;
}

/// Deterministic spread of admissible chi3 points over the existence region.
std::vector<Chi3Params> branch_points(const RunConfig& cfg, int n) {
  std::vector<Chi3Params> out;
  for (int i = 0; i < n; ++i) {
    Chi3Params p = cfg.chi3;
    p.g = -std::abs(cfg.chi3.g);
    p.delta = p.gamma_s * (2.0 + 4.0 * (n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    const double f = 0.02 + 0.96 * std::fmod(0.5 + i * 0.6180339887498949, 1.0);
    const auto t = threshold_interval(p);
    p.rho2 = t.onset + f * (t.upper - t.onset);
    out.push_back(p);
  }
  return out;
}

void symmetry_checks(const RunConfig& cfg, std::vector<Check>& out) {
  const auto opo = opo_model(cfg.opo);
  const auto chi3 = chi3_model(cfg.chi3);
  out.push_back(at_most("symmetry.opo", max_rotation_residual(opo.hamiltonian, opo.charges, cfg.verify_thetas, cfg.verify_seed),
                        cfg.tol.symmetry));
  out.push_back(at_most("symmetry.chi3",
                        max_rotation_residual(chi3.hamiltonian, chi3.charges, cfg.verify_thetas, cfg.verify_seed + 1),
                        cfg.tol.symmetry));
}

void conservation_checks(const RunConfig& cfg, std::vector<Check>& out) {
  const auto opo = opo_model(cfg.opo);
  const auto chi3 = chi3_model(cfg.chi3);
  out.push_back(at_most("conservation.opo.coefficients",
                        commutator(opo.number_difference(), opo.hamiltonian).max_abs_coefficient(), 0.0));
  out.push_back(at_most("conservation.chi3.coefficients",
                        commutator(chi3.number_difference(), chi3.hamiltonian).max_abs_coefficient(), 0.0));
  const std::vector<int> opo_cut{6, 6, 4}, chi3_cut{8, 8};
  out.push_back(at_most("conservation.opo.fock", conservation_check(opo.hamiltonian, opo.number_difference(), opo_cut),
                        cfg.tol.conservation));
  out.push_back(at_most("conservation.chi3.fock",
                        conservation_check(chi3.hamiltonian, chi3.number_difference(), chi3_cut), cfg.tol.conservation));
}

void basis_checks(const RunConfig& cfg, std::vector<Check>& out) {
  std::mt19937_64 rng(cfg.verify_seed + 2);
  std::uniform_real_distribution<double> a(0.0, 0.5);
  Chi3Params p = cfg.chi3;
  p.A = p.B = 1.0 / 3.0;
  double worst = verify_basis_equivalence(p);
  for (int i = 0; i < cfg.verify_basis_samples; ++i) {
    p.A = a(rng);
    p.B = 1.0 - 2.0 * p.A;
    worst = std::max(worst, verify_basis_equivalence(p));
  }
  out.push_back(at_most("basis_equivalence", worst, cfg.tol.basis));
}

void threshold_checks(const RunConfig& cfg, std::vector<Check>& out) {
  const int n = cfg.verify_threshold_deltas;
  std::vector<double> errors(n, kInf);
  parallel_for(n, cfg.threads, [&](int i) {
    Chi3Params p = cfg.chi3;
    p.g = -std::abs(cfg.chi3.g);
    p.delta = p.gamma_s * (2.0 + 4.0 * (n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    const auto t = threshold_interval(p);
    auto at = [p](double r) {
      Chi3Params q = p;
      q.rho2 = r;
      return chi3_model(q);
    };
    const auto b = existence_boundaries(at, 0.5 * t.lower, 1.5 * t.upper, 21, 1e-9);
    if (b.size() == 2) errors[i] = std::max(std::abs(b[0] - t.lower), std::abs(b[1] - t.upper));
  });
  out.push_back(at_most("thresholds.chi3.boundaries", *std::max_element(errors.begin(), errors.end()),
                        cfg.tol.threshold, std::to_string(n) + " delta values in [2, 6] gamma_s"));

  int found = 0;
  for (double d : {0.5, 1.0, 1.5, std::sqrt(3.0)}) {
    for (int k = 1; k <= 12; ++k) {
      Chi3Params p = cfg.chi3;
      p.g = -std::abs(cfg.chi3.g);
      p.delta = d * p.gamma_s;
      p.rho2 = 0.1 * k * p.gamma_s / std::abs(p.g);
      if (steady_states(chi3_model(p)).nonzero_exists()) ++found;
    }
  }
  out.push_back(at_most("thresholds.chi3.absent_below_sqrt3", found, 0.0, "branches found for delta <= sqrt(3) gamma_s"));

  const double eth = opo_threshold(cfg.opo);
  auto at = [&](double e) {
    OpoParams p = cfg.opo;
    p.pump_amplitude = e;
    return opo_model(p);
  };
  const auto b = existence_boundaries(at, 0.5 * eth, 2.0 * eth, 16, 1e-9);
  out.push_back(at_most("thresholds.opo.onset", b.size() == 1 ? std::abs(b[0] - eth) : kInf, cfg.tol.threshold));
}

void goldstone_checks(const RunConfig& cfg, std::vector<Check>& out) {
  std::vector<CavityModel> models;
  for (const auto& p : branch_points(cfg, cfg.verify_branch_points)) models.push_back(chi3_model(p));
  models.push_back(opo_model(above_threshold(cfg)));
  const int n = static_cast<int>(models.size());
  std::vector<int> bad_count(n, 0), states(n, 0);
  std::vector<double> misalign(n, 0.0);
  parallel_for(n, cfg.threads, [&](int i) {
    const auto st = steady_states(models[i]);
    if (st.bright.empty()) {
      bad_count[i] = 1;
      misalign[i] = kInf;
      return;
    }
    for (const auto& s : st.bright) {
      const auto rep = stability(models[i], s);
      ++states[i];
      if (rep.near_zero_count != 1 || !rep.goldstone_index) {
        ++bad_count[i];
        continue;
      }
      misalign[i] = std::max(misalign[i], 1.0 - alignment(rep.goldstone_vector, orbit_tangent(models[i], s)));
    }
  });
  int bad = 0, total = 0;
  for (int i = 0; i < n; ++i) {
    bad += bad_count[i];
    total += states[i];
  }
  out.push_back(at_most("goldstone.single_zero_eigenvalue", bad, 0.0, std::to_string(total) + " branch states"));
  out.push_back(at_most("goldstone.orbit_alignment", *std::max_element(misalign.begin(), misalign.end()),
                        cfg.tol.alignment, "1 - overlap with the orbit tangent"));
}

void squeezing_checks(const RunConfig& cfg, std::vector<Check>& out) {
  const auto points = branch_points(cfg, cfg.verify_branch_points);
  const auto rows = dark_mode_squeezing(points, cfg.threads);
  double worst = 0.0;
  int off = 0;
  for (const auto& r : rows) {
    if (!r.on_branch) {
      ++off;
      worst = kInf;
    } else {
      worst = std::max(worst, r.v_min);
    }
  }
  out.push_back(at_most("squeezing.dark_V0", worst, cfg.tol.squeezing,
                        std::to_string(rows.size() - off) + " stable branch points"));

  // Heisenberg products where both quadratures are finite: bright mode of each
  // branch point and the two-mode-squeezed OPO below threshold.
  double deficit = 0.0;
  int finite = 0;
  for (const auto& p : points) {
    const auto model = chi3_model(p);
    const auto st = steady_states(model);
    for (const auto& s : st.bright) {
      if (!stability(model, s).stable) continue;
      const auto dd = linearize(model, s);
      const auto q = optimal_quadrature(dd, mode_weights(model, normalize(field_polarization(model, s.amplitudes))));
      if (std::isfinite(q.v_conjugate)) {
        deficit = std::max(deficit, 1.0 - q.v_min * q.v_conjugate);
        ++finite;
      }
      break;
    }
  }
  for (double e : {0.1, 0.2, 0.5}) {
    OpoParams p = cfg.opo;
    p.pump_amplitude = e * opo_threshold(p);
    const auto model = opo_classical_pump_model(p);
    const auto dd = linearize(model, steady_states(model).trivial);
    const double r = 1.0 / std::numbers::sqrt2;
    const auto q = optimal_quadrature(dd, mode_weights(model, JonesVector{r, r}));
    deficit = std::max(deficit, 1.0 - q.v_min * q.v_conjugate);
    ++finite;
  }
  out.push_back(at_most("squeezing.heisenberg_product", deficit, cfg.tol.heisenberg,
                        "1 - V_phi V_phi+pi/2 over " + std::to_string(finite) + " finite pairs"));
}

void twin_beam_checks(const RunConfig& cfg, std::vector<Check>& out) {
  const OpoParams p = above_threshold(cfg);
  std::vector<double> omegas{0.0};
  for (int k = 0; k <= 20; ++k) omegas.push_back(p.gamma_s * 100.0 * std::pow(10.0, k / 10.0));
  const auto s = twin_beam_intensity_spectrum(p, omegas);
  out.push_back(at_most("twin_beams.V0", s.samples.front().second, cfg.tol.squeezing));
  double dev = 0.0;
  for (std::size_t i = 1; i < s.samples.size(); ++i) dev = std::max(dev, std::abs(s.samples[i].second - 1.0));
  out.push_back(at_most("twin_beams.shot_noise_above_100_gamma", dev, cfg.tol.shot_noise));
}

void oracle_checks(const RunConfig& cfg, std::vector<Check>& out) {
  OpoParams po = cfg.opo;
  po.pump_amplitude = *std::max_element(cfg.oracle_pump.begin(), cfg.oracle_pump.end());
  Chi3Params pc = cfg.chi3;
  pc.g = cfg.oracle_g;
  pc.rho2 = *std::max_element(cfg.oracle_rho2.begin(), cfg.oracle_rho2.end());
  const std::vector<CavityModel> models{opo_classical_pump_model(po), chi3_model(pc)};
  const std::vector<std::vector<int>> cutoffs{{cfg.oracle_opo_cutoff, cfg.oracle_opo_cutoff},
                                              {cfg.oracle_signal_cutoff, cfg.oracle_signal_cutoff}};
  std::vector<OracleComparison> r(2);
  parallel_for(2, cfg.threads, [&](int i) { r[i] = compare_with_linearized(models[i], cutoffs[i], "", true); });
  const char* names[2] = {"opo", "chi3"};
  for (int i = 0; i < 2; ++i) {
    const std::string base = std::string("oracle.") + names[i];
    out.push_back(at_most(base + ".relative_deviation", r[i].max_relative_deviation, cfg.tol.oracle,
                          "cutoff " + std::to_string(cutoffs[i][0])));
    out.push_back(at_most(base + ".cutoff_drift", r[i].cutoff_drift, cfg.tol.cutoff_drift));
    out.push_back(at_most(base + ".symmetric_zeros", r[i].symmetric_zero_error, cfg.tol.conservation));
  }
  const auto chi3 = models[1];
  const auto full = steady_state(liouvillian(chi3, TruncatedSpace(cutoffs[1]), Support::full));
  double defect = 0.0;
  for (double theta : {0.3, 1.1, 2.9}) defect = std::max(defect, symmetry_defect(full.rho, chi3.charges, theta));
  out.push_back(at_most("oracle.chi3.state_symmetry", defect, 1e-8));
}

}  // namespace

std::vector<Check> run_verification(const RunConfig& cfg) {
  cfg.validate();
  std::vector<Check> out;
  symmetry_checks(cfg, out);
  conservation_checks(cfg, out);
  basis_checks(cfg, out);
  threshold_checks(cfg, out);
  goldstone_checks(cfg, out);
  squeezing_checks(cfg, out);
  twin_beam_checks(cfg, out);
  oracle_checks(cfg, out);
  return out;
}

std::string format_report(const std::vector<Check>& checks) {
  std::string text;
  char line[512];
  std::snprintf(line, sizeof line, "%-40s %-12s %-12s %-6s %s\n", "check", "value", "tolerance", "result", "detail");
  text += line;
  int passed = 0;
  for (const auto& c : checks) {
    char value[32], tol[32];
    std::snprintf(value, sizeof value, "%.3e", c.value);
    std::snprintf(tol, sizeof tol, "%.3e", c.tolerance);
    std::snprintf(line, sizeof line, "%-40s %-12s %-12s %-6s %s\n", c.name.c_str(), value, tol,
                  c.passed ? "PASS" : "FAIL", c.detail.c_str());
    text += line;
    passed += c.passed;
  }
  std::snprintf(line, sizeof line, "%d/%zu checks passed\n", passed, checks.size());
  text += line;
  return text;
}

CommandResult cmd_verify(const RunConfig& cfg) {
  const auto checks = run_verification(cfg);
  CommandResult out{"verify", format_report(checks), {}, kSuccess};
  for (const auto& c : checks)
    if (!c.passed) out.exit_code = kVerificationFailure;
  return out;
}

}  // namespace spsb::cli
