// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stringmass/stringmass.hpp"

using namespace stringmass;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

oracle::Params as_oracle(const ModelParams& p) { return {p.mu0, p.mu1, p.w2, p.w02, p.w12}; }

/// Random element of the Robin domain: a finite combination of basis modes,
/// coefficients decaying as 1/n^2, with exact derivative channels.
MuFunction superposition(const ModeBasis& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(b.size());
  for (std::size_t n = 0; n < c.size(); ++n) c[n] = u(rng) / ((n + 1.0) * (n + 1.0));
  return detail::synthesize(b, c);
}

// 1 -------------------------------------------------------------------------

Outcome calibration() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mu(0.2, 3.0), w2(0.5, 3.0), spring(0.0, 4.0);
  double worst = 0.0, worst_probe = 0.0, worst_oracle = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ModelParams p{mu(rng), mu(rng), w2(rng), spring(rng), spring(rng)};
    const CalibratedMeasure cal = calibrate(p);
    for (int j = 0; j < 2; ++j) {
      const double a = cal.alpha(j), m = p.mu(j), d = p.delta(j);
      const double s = 1.0 - a * m * d;
      worst = std::max(worst, std::abs(a * s * s - m) / m);
      worst = std::max(worst, std::abs(cal.coupling(j) * s - m * d) / std::max(1.0, std::abs(m * d)));
      worst = std::max(worst, std::abs(cal.correction(j) - cal.coupling(j) * a) / std::max(1.0, std::abs(cal.correction(j))));
      worst_probe = std::max(worst_probe, cal.branch(j).probe_residual);
      double nearest = INFINITY;
      for (double r : oracle::calibration_roots(m, d)) nearest = std::min(nearest, std::abs(r - a) / a);
      worst_oracle = std::max(worst_oracle, nearest);
    }
  }
  const ModelParams flat{1.5, 0.5, 1.0, 1.0, 1.0};
  const CalibratedMeasure c0 = calibrate(flat);
  const bool exact = c0.alpha0 == 1.5 && c0.alpha1 == 0.5 && c0.a0 == 0.0 && c0.a1 == 0.0;
  return {worst <= 1e-12 && worst_probe <= 1e-8 && worst_oracle <= 1e-9 && exact,
          fmt("identity residual %.2e, probe %.2e, oracle root gap %.2e, delta=0 exact %s", worst, worst_probe,
              worst_oracle, exact ? "yes" : "no")};
}

// 2 -------------------------------------------------------------------------

Outcome bracketing() {
  const std::vector<ModelParams> sets = {{0.7, 1.3, 2.0, 2.4, 1.5},
                                         {1.0, 1.0, 1.0, 2.0, 2.0},
                                         {0.3, 2.5, 1.0, 0.0, 3.0},
                                         {2.0, 0.5, 3.0, 1.0, 6.0},
                                         {0.15, 0.15, 0.8, 5.0, 0.2}};
  bool one_per_bracket = true;
  double lo_exp = INFINITY, hi_exp = -INFINITY;
  for (const ModelParams& p : sets) {
    const NegativeRootSearch r = search_negative_roots(p, 210);
    int previous = -1;
    for (double w : r.omega) {
      const int k = static_cast<int>(std::floor(w / std::numbers::pi));
      if (k <= r.n0) continue;
      if (previous >= 0 && k != previous + 1) one_per_bracket = false;
      previous = k;
    }
    for (int k = r.n0 + 1; k < r.scanned_brackets; ++k)
      if (r.bracket_counts[k] != 1) one_per_bracket = false;
    std::vector<double> ks, err;
    for (double w : r.omega) {
      const int k = static_cast<int>(std::floor(w / std::numbers::pi));
      if (k < 20 || k > 200) continue;
      ks.push_back(k);
      err.push_back(std::abs(w - negative_root_asymptote(k, p)));
    }
    const double decay = -fit_power_law(ks, err).exponent;
    lo_exp = std::min(lo_exp, decay);
    hi_exp = std::max(hi_exp, decay);
  }
  return {one_per_bracket && lo_exp >= 1.8 && hi_exp <= 2.2,
          fmt("one root per bracket above n0 %s, fitted decay exponent in [%.3f, %.3f] (window [1.8, 2.2])",
              one_per_bracket ? "yes" : "no", lo_exp, hi_exp)};
}

// 3 -------------------------------------------------------------------------

Outcome orthonormality() {
  const ModelParams p{0.7, 1.3, 2.0, 2.4, 1.5};
  const CalibratedMeasure cal = calibrate(p);
  const Spectrum s = build_spectrum(p, cal, 30, 30, 4096);
  const ModeBasis b = make_basis(s, GridSpec{4096}, 12);
  std::mt19937_64 rng(5);
  double sym = 0.0, forms = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const MuFunction u = superposition(b, rng), w = superposition(b, rng);
    sym = std::max(sym, std::abs(inner_mu(laplacian_mu(u, cal), w, cal) - inner_mu(u, laplacian_mu(w, cal), cal)));
    forms = std::max(forms, std::abs(inner_mu(u, w, cal) - inner_modified(u, w, p)));
  }
  const auto& c = s.certificate;
  return {c.size == 30 && c.max_off_diagonal <= 1e-8 && sym <= 1e-8 && forms <= 1e-10,
          fmt("Gram off-diagonal %.2e (diagonal %.2e), symmetry %.2e, form gap %.2e", c.max_off_diagonal,
              c.max_diagonal_error, sym, forms)};
}

// 4 -------------------------------------------------------------------------

Outcome dynamics() {
  const ModelParams p{0.7, 1.3, 2.0, 2.4, 1.5};
  const CalibratedMeasure cal = calibrate(p);
  const std::size_t n_modes = 64;
  const Spectrum s = build_spectrum(p, cal, static_cast<int>(n_modes), 0);
  const ModeBasis fine = make_basis(s, GridSpec{4096}, n_modes);
  const ModeBasis coarse = make_basis(s, GridSpec{2048}, n_modes);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModeCoefficients c;
  c.q.resize(n_modes);
  c.p.resize(n_modes);
  for (std::size_t n = 0; n < n_modes; ++n) {
    const double decay = 1.0 / std::pow(n + 1.0, 3);
    c.q[n] = u(rng) * decay;
    c.p[n] = u(rng) * decay;
  }

  const CauchyData exact = evolve_modes(c, fine, 1.0);
  auto gap = [&](const ModeBasis& b, double dt) {
    const FdResult r = fd_evolve(evolve_modes(c, b, 0.0), p, dt, 1.0);
    const std::size_t stride = 4096 / b.grid.n_grid;
    double d = 0.0;
    for (std::size_t i = 0; i <= b.grid.n_grid; ++i)
      d = std::max(d, std::abs(r.state.q.values[i] - exact.q.values[i * stride]));
    return d;
  };
  const double gap_fine = gap(fine, 2.5e-5), gap_coarse = gap(coarse, 5e-5);

  const double e0 = hamiltonian(evolve_modes(c, fine, 0.0), p, cal);
  double mode_drift = 0.0;
  for (int k = 1; k <= 100; ++k)
    mode_drift = std::max(mode_drift, std::abs(hamiltonian(evolve_modes(c, fine, 0.1 * k), p, cal) - e0) / e0);

  FdOptions opts;
  opts.energy_every = 1000;
  const FdResult long_run = fd_evolve(evolve_modes(c, fine, 0.0), p, 2.5e-5, 10.0, opts);

  const double ratio = gap_coarse / gap_fine;
  return {gap_fine <= 1e-4 && ratio >= 3.0 && mode_drift <= 1e-8 && long_run.energy_drift <= 1e-5,
          fmt("gap %.2e, refinement ratio %.2f, mode drift %.2e, FD drift %.2e", gap_fine, ratio, mode_drift,
              long_run.energy_drift)};
}

// 5 -------------------------------------------------------------------------

Outcome matrix_oracle() {
  const std::vector<ModelParams> sets = {{0.7, 1.3, 2.0, 2.4, 1.5}, {1.0, 1.0, 1.0, 2.0, 2.0}, {0.5, 0.8, 3.0, 0.2, 0.4}};
  double worst = 0.0;
  for (const ModelParams& p : sets) {
    const Spectrum s = build_spectrum(p, calibrate(p), 8, 0);
    std::vector<double> physical;
    for (double l : oracle::matrix_eigenvalues(as_oracle(p), 2048, 16))
      if (l < p.w2) physical.push_back(l);
    for (std::size_t i = 0; i < 5; ++i)
      worst = std::max(worst, std::abs(physical[i] - s.modes[i].lambda) / std::abs(s.modes[i].lambda));
  }
  return {worst <= 1e-3, fmt("worst relative eigenvalue gap %.2e over 3 parameter sets", worst)};
}

// 6 -------------------------------------------------------------------------

Outcome fock_law() {
  const ModelParams p{0.7, 1.3, 2.0, 2.4, 1.5};
  const CalibratedMeasure cal = calibrate(p);
  const Spectrum s = build_spectrum(p, cal, 500, 0);
  const PowerLaw law = boundary_indicator_law(s, cal, 50, 500);
  const double expected_prefactor = boundary_indicator_prefactor(p, cal);
  const FactorizationReport r = factorization_diagnostic(s, cal, 500);
  std::vector<double> control(500);
  for (std::size_t n = 0; n < control.size(); ++n) control[n] = 1.0 / (n + 1.0);
  const FactorizationReport rc = partial_sum_diagnostic(control);
  const double pref_err = std::abs(law.prefactor / expected_prefactor - 1.0);
  const double slope_err = std::abs(r.log_slope / r.expected_slope - 1.0);
  return {std::abs(law.exponent + 0.5) <= 0.03 && pref_err <= 0.03 && slope_err <= 0.1 &&
              r.verdict == SummabilityVerdict::Divergent && rc.verdict == SummabilityVerdict::Convergent,
          fmt("exponent %.4f, prefactor off by %.2f%%, log slope off by %.2f%%, verdict %s, control %s", law.exponent,
              100.0 * pref_err, 100.0 * slope_err, to_string(r.verdict), to_string(rc.verdict))};
}

// 7 -------------------------------------------------------------------------

Outcome zero_mode_detection() {
  // (1 + mu0 d0)(1 + mu1 d1) = (1 - 0.5)(1 + 1) = 1
  const ModelParams on{1.0, 1.0, 1.0, 0.5, 2.0};
  const ModelParams off{0.7, 1.3, 2.0, 2.4, 1.5};
  const auto z = zero_mode(on);
  double rows = INFINITY;
  if (z) {
    const auto [r0, r1] = boundary_rows(z->shape, on);
    rows = std::max(std::abs(r0), std::abs(r1));
  }
  const double w = 1e-5;
  const double limit_on = std::abs(oracle::secular_negative(w, as_oracle(on)) / w);
  const double limit_off = std::abs(oracle::secular_negative(w, as_oracle(off)) / w);
  const Spectrum s_on = build_spectrum(on, calibrate(on), 4, 0);
  const Spectrum s_off = build_spectrum(off, calibrate(off), 4, 0);
  bool in_on = false, in_off = false;
  for (const Mode& m : s_on.modes) in_on = in_on || m.cls == ModeClass::Zero;
  for (const Mode& m : s_off.modes) in_off = in_off || m.cls == ModeClass::Zero;
  return {z && in_on && rows <= 1e-12 && limit_on <= 1e-8 && !zero_mode(off) && !in_off && limit_off > 1e-2,
          fmt("detected %s (rows %.1e, secular limit %.1e); generic: detected %s (secular limit %.2f)",
              z ? "yes" : "no", rows, limit_on, in_off ? "yes" : "no", limit_off)};
}

// 8 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("stringmass_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const fs::path config = fs::path(STRINGMASS_CONFIGS) / "generic.json";
  int compared = 0, mismatched = 0, failed_runs = 0;
  for (const std::string cmd : {"calibrate", "spectrum", "modes", "evolve", "fock"}) {
    std::vector<fs::path> dirs = {root / (cmd + "_a"), root / (cmd + "_b")};
    for (const fs::path& d : dirs) {
      const std::string line = std::string(STRINGMASS_CLI) + " " + cmd + " --config " + config.string() +
                               " --out " + d.string() + " --seed 7";
      const int status = std::system(line.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failed_runs;
    }
    if (!fs::exists(dirs[0])) continue;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++compared;
      if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename())) ++mismatched;
    }
  }
  fs::remove_all(root);
  return {failed_runs == 0 && mismatched == 0 && compared > 0,
          fmt("%d files compared, %d differ, %d failed runs", compared, mismatched, failed_runs)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "calibration", 1.0, calibration},
      {2, "bracketing and asymptotics", 5.0, bracketing},
      {3, "orthonormality and self-adjointness", 10.0, orthonormality},
      {4, "dynamics oracle equivalence", 60.0, dynamics},
      {5, "matrix oracle spectrum", 10.0, matrix_oracle},
      {6, "Fock coefficient law", 5.0, fock_law},
      {7, "zero-mode detection", 1.0, zero_mode_detection},
      {8, "CLI determinism", 30.0, cli_determinism},
  };
  bool all = true;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs <= c.budget_s;
    all = all && pass;
    std::printf("criterion %d %-38s %s  %s  [%.2f s / %.0f s]\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
