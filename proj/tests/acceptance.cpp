// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spsb/cli.hpp"
#include "spsb/fluctuations.hpp"
#include "spsb/fock_oracle.hpp"
#include "spsb/meanfield.hpp"
#include "spsb/models.hpp"
#include "spsb/operator_algebra.hpp"
#include "spsb/parallel.hpp"

using namespace spsb;

namespace {

constexpr double kSymmetryTol = 1e-14;
constexpr double kFockConservationTol = 1e-10;
constexpr double kBasisTol = 1e-12;
constexpr double kThresholdTol = 1e-6;
constexpr double kGoldstoneZero = 1e-8;
constexpr double kAlignmentTol = 1e-6;
constexpr double kSqueezingTol = 1e-6;
constexpr double kHeisenbergTol = 1e-6;
constexpr double kShotNoiseTol = 1e-3;
constexpr double kOracleTol = 1e-2;
constexpr double kCutoffDriftTol = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string summary;
};

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] AC%d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.summary.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Chi3Params chi3(double delta, double rho2, double g = -1.0, double gamma_s = 1.0) {
  Chi3Params p;
  p.delta = delta;
  p.rho2 = rho2;
  p.g = g;
  p.gamma_s = gamma_s;
  return p;
}

Outcome symmetry_invariance() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
  const auto opo = opo_model(OpoParams{});
  const auto kerr = chi3_model(Chi3Params{});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = theta(rng);
    worst = std::max(worst, coefficient_distance(opo.hamiltonian, phase_rotate(opo.hamiltonian, t, opo.charges)));
    worst = std::max(worst, coefficient_distance(kerr.hamiltonian, phase_rotate(kerr.hamiltonian, t, kerr.charges)));
  }
  const bool charges_ok = opo.charges == std::vector<int>{1, -1, 0} && kerr.charges == std::vector<int>{1, -1};
  return {worst <= kSymmetryTol && charges_ok,
          "max |H - R_theta H| over 100 theta x 2 models = " + fmt("%.3e", worst) + " (tol 1e-14)"};
}

Outcome conservation() {
  const auto opo = opo_model(OpoParams{});
  const auto kerr = chi3_model(Chi3Params{});
  const double coeff = std::max(commutator(opo.number_difference(), opo.hamiltonian).max_abs_coefficient(),
                                commutator(kerr.number_difference(), kerr.hamiltonian).max_abs_coefficient());
  const std::vector<int> c_opo{8, 8, 5}, c_kerr{10, 10};
  const double fock = std::max(conservation_check(opo.hamiltonian, opo.number_difference(), c_opo),
                               conservation_check(kerr.hamiltonian, kerr.number_difference(), c_kerr));
  return {coeff == 0.0 && fock < kFockConservationTol,
          "coefficient-level " + fmt("%.3e", coeff) + " (exact), truncated Fock " + fmt("%.3e", fock) + " (tol 1e-10)"};
}

Outcome basis_equivalence() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> a(0.0, 0.5);
  Chi3Params p;
  p.A = p.B = 1.0 / 3.0;
  double worst = verify_basis_equivalence(p);
  for (int i = 0; i < 10; ++i) {
    p.A = a(rng);
    p.B = 1.0 - 2.0 * p.A;
    worst = std::max(worst, verify_basis_equivalence(p));
  }
  return {worst < kBasisTol, "max residual over A = B = 1/3 and 10 random (A, B) = " + fmt("%.3e", worst) + " (tol 1e-12)"};
}

Outcome thresholds() {
  const auto spot = threshold_interval(chi3(2.0, 0.0, 1.0));
  const bool spot_ok = std::abs(spot.lower - 0.5) < 1e-15 && std::abs(spot.upper - 5.0 / 6.0) < 1e-15;

  const int n = 20;
  std::vector<double> err(n, kInf);
  parallel_for(n, 0, [&](int i) {
    const double delta = 2.0 + 4.0 * i / (n - 1);
    const auto t = threshold_interval(chi3(delta, 0.0));
    auto at = [delta](double r) { return chi3_model(chi3(delta, r)); };
    const auto b = existence_boundaries(at, 0.5 * t.lower, 1.5 * t.upper, 21, 1e-9);
    if (b.size() == 2) err[i] = std::max(std::abs(b[0] - t.lower), std::abs(b[1] - t.upper));
  });
  const double worst = *std::max_element(err.begin(), err.end());

  int spurious = 0;
  for (double delta : {0.0, 0.5, 1.0, 1.5, 1.7, std::sqrt(3.0)})
    for (int k = 1; k <= 30; ++k)
      if (steady_states(chi3_model(chi3(delta, 0.05 * k))).nonzero_exists()) ++spurious;

  double opo_err = 0.0;
  for (const OpoParams base : {OpoParams{1.0, 1.0, 1.0, 1.0}, OpoParams{1.0, 0.5, 2.0, 3.0}, OpoParams{1.0, 1.7, 0.6, 1.3}}) {
    const double eth = opo_threshold(base);
    auto at = [base](double e) {
      OpoParams p = base;
      p.pump_amplitude = e;
      return opo_model(p);
    };
    const auto b = existence_boundaries(at, 0.5 * eth, 2.0 * eth, 16, 1e-9);
    opo_err = std::max(opo_err, b.size() == 1 ? std::abs(b[0] - base.gamma_p * base.gamma_s / base.chi) : kInf);
  }
  return {spot_ok && worst < kThresholdTol && spurious == 0 && opo_err < kThresholdTol,
          "spot (0.5, 0.8333) " + std::string(spot_ok ? "ok" : "wrong") + ", chi3 boundary error on 20 delta in [2, 6] = " +
              fmt("%.3e", worst) + ", branches for delta <= sqrt3 = " + std::to_string(spurious) +
              ", OPO onset error = " + fmt("%.3e", opo_err) + " (tol 1e-6)"};
}

/// Admissible chi3 points: fraction f of the way from the onset to the upper boundary.
std::vector<Chi3Params> region(const std::vector<double>& deltas, const std::vector<double>& fractions, double g = -1.0,
                               double gamma_s = 1.0) {
  std::vector<Chi3Params> out;
  for (double d : deltas) {
    for (double f : fractions) {
      Chi3Params p = chi3(d * gamma_s, 0.0, g, gamma_s);
      const auto t = threshold_interval(p);
      p.rho2 = t.onset + f * (t.upper - t.onset);
      out.push_back(p);
    }
  }
  return out;
}

Outcome goldstone() {
  std::vector<CavityModel> models;
  for (const auto& p : region({2.0, 2.4, 2.8, 3.2, 3.6, 4.0, 4.5, 5.0, 5.5, 6.0}, {0.01, 0.25, 0.5, 0.75, 0.99}))
    models.push_back(chi3_model(p));
  for (const auto& p : region({2.5, 4.0}, {0.1, 0.5, 0.9}, -0.3, 1.7)) models.push_back(chi3_model(p));
  for (double e : {1.2, 2.0, 4.0}) models.push_back(opo_model(OpoParams{e, 1.0, 1.0, 1.0}));
  const int n = static_cast<int>(models.size());
  std::vector<int> states(n, 0), bad(n, 0);
  std::vector<double> misalign(n, 0.0), zero(n, 0.0);
  parallel_for(n, 0, [&](int i) {
    const auto st = steady_states(models[i]);
    if (st.bright.empty()) bad[i] = 1;
    for (const auto& s : st.bright) {
      ++states[i];
      const auto rep = stability(models[i], s);
      int near = 0;
      for (const auto& l : rep.eigenvalues)
        if (std::abs(l) < kGoldstoneZero) ++near;
      if (near != 1 || !rep.goldstone_index) {
        ++bad[i];
        continue;
      }
      zero[i] = std::max(zero[i], std::abs(rep.eigenvalues[*rep.goldstone_index]));
      misalign[i] = std::max(misalign[i], 1.0 - alignment(rep.goldstone_vector, orbit_tangent(models[i], s)));
    }
  });
  int total = 0, failed = 0;
  for (int i = 0; i < n; ++i) {
    total += states[i];
    failed += bad[i];
  }
  const double worst_align = *std::max_element(misalign.begin(), misalign.end());
  const double worst_zero = *std::max_element(zero.begin(), zero.end());
  return {total >= 50 && failed == 0 && worst_align < kAlignmentTol,
          std::to_string(total) + " branch states, " + std::to_string(failed) +
              " without exactly one |lambda| < 1e-8, max |lambda_G| = " + fmt("%.3e", worst_zero) +
              ", max (1 - overlap) = " + fmt("%.3e", worst_align) + " (tol 1e-6)"};
}

Outcome squeezing() {
  auto points = region({2.0, 2.5, 3.0, 4.0, 5.0, 6.0}, {1e-3, 0.25, 0.5, 0.75, 1.0 - 1e-3});
  const auto extra = region({2.2, 3.7}, {1e-3, 0.5, 1.0 - 1e-3}, -0.05, 0.8);
  points.insert(points.end(), extra.begin(), extra.end());
  Chi3Params edge = chi3(3.0, 0.5 * (1.0 + 1e-3));
  points.push_back(edge);
  const auto rows = dark_mode_squeezing(points, 0);

  double worst = 0.0, min_conj = kInf, deficit = 0.0;
  int on = 0, finite = 0;
  for (const auto& r : rows) {
    if (!r.on_branch) {
      worst = kInf;
      continue;
    }
    ++on;
    worst = std::max(worst, r.v_min);
    min_conj = std::min(min_conj, r.v_conjugate);
    if (std::isfinite(r.v_conjugate)) {
      ++finite;
      deficit = std::max(deficit, 1.0 - r.v_min * r.v_conjugate);
    }
  }
  // Finite conjugate pairs on the same branches: the bright-mode quadratures.
  int bright_pairs = 0;
  for (const auto& p : points) {
    const auto model = chi3_model(p);
    for (const auto& s : steady_states(model).bright) {
      if (!stability(model, s).stable) continue;
      const auto q = optimal_quadrature(linearize(model, s),
                                        mode_weights(model, normalize(field_polarization(model, s.amplitudes))));
      if (std::isfinite(q.v_conjugate)) {
        ++bright_pairs;
        deficit = std::max(deficit, 1.0 - q.v_min * q.v_conjugate);
      }
      break;
    }
  }
  const bool conj_ok = finite > 0 || min_conj > 1e3;
  return {on == static_cast<int>(points.size()) && on >= 20 && worst < kSqueezingTol && conj_ok &&
              deficit <= kHeisenbergTol,
          std::to_string(on) + " points, max dark V(0) = " + fmt("%.3e", worst) + " (tol 1e-6), dark conjugate " +
              (finite ? "finite at " + std::to_string(finite) : std::string("infinite at all")) + " points, " +
              std::to_string(bright_pairs) + " finite bright pairs, max (1 - V V') = " + fmt("%.3e", deficit) +
              " (tol 1e-6)"};
}

Outcome twin_beams() {
  std::vector<double> omegas{0.0};
  for (int k = 0; k <= 40; ++k) omegas.push_back(100.0 * std::pow(10.0, k / 20.0));
  double v0 = 0.0, dev = 0.0;
  for (const OpoParams p : {OpoParams{1.5, 1.0, 1.0, 1.0}, OpoParams{3.0, 0.7, 1.3, 0.8}, OpoParams{2.1, 1.0, 2.0, 1.0}}) {
    std::vector<double> w = omegas;
    for (std::size_t i = 1; i < w.size(); ++i) w[i] *= p.gamma_s;
    const auto s = twin_beam_intensity_spectrum(p, w);
    v0 = std::max(v0, s.samples.front().second);
    for (std::size_t i = 1; i < s.samples.size(); ++i) dev = std::max(dev, std::abs(s.samples[i].second - 1.0));
  }
  return {v0 < kSqueezingTol && dev < kShotNoiseTol,
          "max V(0) = " + fmt("%.3e", v0) + " (tol 1e-6), max |V - 1| for omega >= 100 gamma_s = " + fmt("%.3e", dev) +
              " (tol 1e-3)"};
}

Outcome oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const OpoParams opo{0.2, 1.0, 1.0, 1.0};
  const auto r_opo = compare_with_linearized(opo_classical_pump_model(opo), std::vector<int>{12, 12}, "opo", true);
  Chi3Params kerr = chi3(2.0, 5.0, -0.01);
  const auto r_kerr = compare_with_linearized(chi3_model(kerr), std::vector<int>{7, 7}, "chi3", true);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = r_opo.max_relative_deviation < kOracleTol && r_kerr.max_relative_deviation < kOracleTol &&
                  r_opo.cutoff_drift >= 0.0 && r_opo.cutoff_drift < kCutoffDriftTol && r_kerr.cutoff_drift >= 0.0 &&
                  r_kerr.cutoff_drift < kCutoffDriftTol && r_opo.symmetric_zero_error < 1e-10 &&
                  r_kerr.symmetric_zero_error < 1e-10 && secs < 300.0;
  return {ok, "OPO (chi beta = 0.2, cutoff 12) deviation " + fmt("%.3e", r_opo.max_relative_deviation) + " drift " +
                  fmt("%.3e", r_opo.cutoff_drift) + "; chi3 (g = -0.01, rho2 = 5, cutoff 7) deviation " +
                  fmt("%.3e", r_kerr.max_relative_deviation) + " drift " + fmt("%.3e", r_kerr.cutoff_drift) +
                  " (tol 1e-2, drift 1e-6)"};
}

Outcome determinism() {
  const cli::RunConfig cfg;
  const auto a = cli::cmd_verify(cfg);
  cli::RunConfig threaded = cfg;
  threaded.threads = 3;
  const auto b = cli::cmd_verify(threaded);
  const bool same = a.output == b.output;
  return {same && a.exit_code == 0 && b.exit_code == 0,
          std::string("two verify runs ") + (same ? "byte-identical" : "DIFFER") + ", exit codes " +
              std::to_string(a.exit_code) + " and " + std::to_string(b.exit_code)};
}

}  // namespace

int main() {
  run(1, "symmetry invariance", symmetry_invariance);
  run(2, "conservation of the photon-number difference", conservation);
  run(3, "linear/circular basis equivalence", basis_equivalence);
  run(4, "threshold boundaries", thresholds);
  run(5, "Goldstone mode", goldstone);
  run(6, "noncritical dark-mode squeezing", squeezing);
  run(7, "twin-beam intensity difference", twin_beams);
  run(8, "Fock oracle agreement", oracle);
  run(9, "determinism of verify", determinism);
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
