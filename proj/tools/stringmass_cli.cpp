// stringmass: command-line front end.
//
//   stringmass <calibrate|spectrum|modes|evolve|fock> --config run.json [--out dir] [--seed n]
//
// Exit codes: 0 ok, 1 bad usage or malformed config, 2 calibration, 3 spectrum,
// 4 dynamics, 5 fock. Every result is computed in memory first; nothing is
// written unless the whole command succeeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stringmass/stringmass.hpp"

namespace {

using json = nlohmann::json;
using namespace stringmass;

struct ExitError : std::runtime_error {
  int code;
  ExitError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

struct EvolveConfig {
  double t_end = 1.0;
  double dt = 0.01;  // sampling step of the modal solution
  int snapshot_every = 10;
  std::string data = "random";  // "random" or "mode"
  int mode = 1;                 // mode index for data == "mode"
  int terms = 16;               // leading modes excited by random data
};

struct RunConfig {
  ModelParams params;
  GridSpec grid;
  int n_modes = 64;
  int k_max = 50;
  EvolveConfig evolve;
  int fock_n_max = 500;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::string hash;
};

// -- config ---------------------------------------------------------------------

double number_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ExitError(1, where + "." + key + " is missing");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ExitError(1, where + "." + key + " must be a number");
  return v.get<double>();
}

template <class T>
T integer_field(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ExitError(1, where + "." + key + " must be an integer");
  return v.get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ExitError(1, "unknown key " + where + "." + item.key());
  }
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const json& s = root.at(key);
  if (!s.is_object()) throw ExitError(1, std::string(key) + " must be an object");
  return s;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig load_config(const std::string& path, const std::optional<std::string>& out,
                      const std::optional<std::uint64_t>& seed) {
  std::ifstream in(path);
  if (!in) throw ExitError(1, "cannot open config " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ExitError(1, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ExitError(1, "config must be a JSON object");
  reject_unknown(root, {"params", "grid", "n_modes", "spectrum", "evolve", "fock", "output_dir", "seed"}, "config");

  RunConfig c;
  if (!root.contains("params") || !root.at("params").is_object()) throw ExitError(1, "params section is missing");
  const json& p = root.at("params");
  reject_unknown(p, {"mu0", "mu1", "w2", "w02", "w12"}, "params");
  c.params.mu0 = number_field(p, "mu0", "params");
  c.params.mu1 = number_field(p, "mu1", "params");
  c.params.w2 = number_field(p, "w2", "params");
  c.params.w02 = number_field(p, "w02", "params");
  c.params.w12 = number_field(p, "w12", "params");

  const json& g = section(root, "grid");
  reject_unknown(g, {"n_grid", "quadrature"}, "grid");
  c.grid.n_grid = integer_field<std::size_t>(g, "n_grid", c.grid.n_grid, "grid");
  if (g.contains("quadrature") && g.at("quadrature") != "simpson")
    throw ExitError(1, "grid.quadrature must be \"simpson\"");

  c.n_modes = integer_field<int>(root, "n_modes", c.n_modes, "config");

  const json& sp = section(root, "spectrum");
  reject_unknown(sp, {"k_max"}, "spectrum");
  c.k_max = integer_field<int>(sp, "k_max", c.k_max, "spectrum");

  const json& ev = section(root, "evolve");
  reject_unknown(ev, {"t_end", "dt", "snapshot_every", "data", "mode", "terms"}, "evolve");
  if (ev.contains("t_end")) c.evolve.t_end = number_field(ev, "t_end", "evolve");
  if (ev.contains("dt")) c.evolve.dt = number_field(ev, "dt", "evolve");
  c.evolve.snapshot_every = integer_field<int>(ev, "snapshot_every", c.evolve.snapshot_every, "evolve");
  if (ev.contains("data")) {
    if (!ev.at("data").is_string()) throw ExitError(1, "evolve.data must be a string");
    c.evolve.data = ev.at("data").get<std::string>();
  }
  c.evolve.mode = integer_field<int>(ev, "mode", c.evolve.mode, "evolve");
  c.evolve.terms = integer_field<int>(ev, "terms", c.evolve.terms, "evolve");

  const json& fk = section(root, "fock");
  reject_unknown(fk, {"n_max"}, "fock");
  c.fock_n_max = integer_field<int>(fk, "n_max", c.fock_n_max, "fock");

  if (root.contains("output_dir")) {
    if (!root.at("output_dir").is_string()) throw ExitError(1, "output_dir must be a string");
    c.output_dir = root.at("output_dir").get<std::string>();
  }
  c.seed = integer_field<std::uint64_t>(root, "seed", 0, "config");
  if (out) c.output_dir = *out;
  if (seed) c.seed = *seed;

  // Preconditions of every module, checked before any computation.
  try {
    c.params.validate();
  } catch (const Error& e) {
    throw ExitError(2, e.what());
  }
  try {
    c.grid.validate();
  } catch (const Error& e) {
    throw ExitError(1, std::string("grid: ") + e.what());
  }
  if (c.n_modes < 1) throw ExitError(1, "n_modes must be >= 1");
  if (c.k_max < 1) throw ExitError(1, "spectrum.k_max must be >= 1");
  if (!(c.evolve.t_end >= 0.0) || !std::isfinite(c.evolve.t_end)) throw ExitError(1, "evolve.t_end must be >= 0");
  if (!(c.evolve.dt > 0.0) || !std::isfinite(c.evolve.dt)) throw ExitError(1, "evolve.dt must be > 0");
  if (c.evolve.t_end / c.evolve.dt > 1e6) throw ExitError(1, "evolve.t_end / evolve.dt exceeds 1e6 samples");
  if (c.evolve.snapshot_every < 1) throw ExitError(1, "evolve.snapshot_every must be >= 1");
  if (c.evolve.data != "random" && c.evolve.data != "mode")
    throw ExitError(1, "evolve.data must be \"random\" or \"mode\"");
  if (c.evolve.terms < 1 || c.evolve.terms > c.n_modes) throw ExitError(1, "evolve.terms must lie in [1, n_modes]");
  if (c.fock_n_max < 100) throw ExitError(1, "fock.n_max must be >= 100");

  // Hash of the effective configuration; the output location does not enter.
  const json canonical = {
      {"params", {{"mu0", c.params.mu0}, {"mu1", c.params.mu1}, {"w2", c.params.w2}, {"w02", c.params.w02}, {"w12", c.params.w12}}},
      {"grid", {{"n_grid", c.grid.n_grid}, {"quadrature", "simpson"}}},
      {"n_modes", c.n_modes},
      {"spectrum", {{"k_max", c.k_max}}},
      {"evolve",
       {{"t_end", c.evolve.t_end},
        {"dt", c.evolve.dt},
        {"snapshot_every", c.evolve.snapshot_every},
        {"data", c.evolve.data},
        {"mode", c.evolve.mode},
        {"terms", c.evolve.terms}}},
      {"fock", {{"n_max", c.fock_n_max}}},
      {"seed", c.seed}};
  c.hash = fnv1a_hex(canonical.dump());
  return c;
}

// -- helpers --------------------------------------------------------------------

struct OutputFile {
  std::string name;
  std::string content;
};

std::string csv_header(const RunConfig& c) { return "# config_hash=" + c.hash + "\n"; }

std::string num(double v) { return format_number(v); }

template <class F>
auto stage(int code, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ExitError(code, std::string(to_string(e.code())) + ": " + e.what());
  }
}

CalibratedMeasure run_calibration(const RunConfig& c) {
  return stage(2, [&] { return calibrate(c.params); });
}

Spectrum run_spectrum(const RunConfig& c, const CalibratedMeasure& cal, int k_max) {
  return stage(3, [&] { return build_spectrum(c.params, cal, k_max); });
}

json branch_json(const EndpointBranch& b) {
  return {{"root_index", b.root_index},
          {"root_count", b.root_count},
          {"sign", b.sign},
          {"continued", b.continued},
          {"cubic_residual", b.cubic_residual},
          {"coupling_residual", b.coupling_residual},
          {"probe_residual", b.probe_residual},
          {"candidates", b.candidates}};
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// -- commands -------------------------------------------------------------------

std::vector<OutputFile> cmd_calibrate(const RunConfig& c) {
  const CalibratedMeasure cal = run_calibration(c);
  json j = {{"config_hash", c.hash},
            {"params", {{"mu0", c.params.mu0}, {"mu1", c.params.mu1}, {"w2", c.params.w2}, {"w02", c.params.w02}, {"w12", c.params.w12}}},
            {"delta", {c.params.delta0(), c.params.delta1()}},
            {"alpha", {cal.alpha0, cal.alpha1}},
            {"A", {cal.a0, cal.a1}},
            {"C", {cal.c0, cal.c1}},
            {"branch", {branch_json(cal.branch0), branch_json(cal.branch1)}}};
  return {{"calibration.json", json_text(j)}};
}

std::vector<OutputFile> cmd_spectrum(const RunConfig& c) {
  const CalibratedMeasure cal = run_calibration(c);
  const Spectrum s = run_spectrum(c, cal, c.k_max);
  std::ostringstream os;
  os << csv_header(c);
  for (const std::string& w : s.warnings) os << "# warning: " << w << '\n';
  os << "n,class,omega,lambda,g,asymptote_error\n";
  for (const Mode& m : s.modes) {
    std::string err;
    if (m.cls == ModeClass::Negative && m.bracket >= 1)
      err = num(std::abs(m.omega - negative_root_asymptote(m.bracket, c.params)));
    os << m.index << ',' << to_string(m.cls) << ',' << num(m.omega) << ',' << num(m.lambda) << ','
       << num(m.g) << ',' << err << '\n';
  }
  return {{"spectrum.csv", os.str()}};
}

std::vector<OutputFile> cmd_modes(const RunConfig& c) {
  const CalibratedMeasure cal = run_calibration(c);
  const Spectrum s = run_spectrum(c, cal, c.n_modes);
  std::vector<OutputFile> files;
  std::ostringstream summary;
  summary << csv_header(c) << "n,class,omega,lambda,g,g_printed,atom0,trace0,atom1,trace1\n";
  std::vector<MuFunction> ys(static_cast<std::size_t>(c.n_modes));
  stage(3, [&] {
    parallel_for(ys.size(), [&](std::size_t i) { ys[i] = basis_mode(s.modes[i], c.params, cal, c.grid); });
    return 0;
  });
  for (int i = 0; i < c.n_modes; ++i) {
    const Mode& m = s.modes[static_cast<std::size_t>(i)];
    const MuFunction& y = ys[static_cast<std::size_t>(i)];
    summary << m.index << ',' << to_string(m.cls) << ',' << num(m.omega) << ',' << num(m.lambda) << ','
            << num(m.g) << ',' << (std::isnan(m.g_printed) ? std::string() : num(m.g_printed)) << ','
            << num(y.atom0) << ',' << num(y.trace0()) << ',' << num(y.atom1) << ',' << num(y.trace1()) << '\n';
    std::ostringstream one;
    one << csv_header(c);
    write_csv(one, y);
    files.push_back({"mode_" + std::to_string(m.index) + ".csv", one.str()});
  }
  files.insert(files.begin(), {"modes.csv", summary.str()});
  return files;
}

/// Uniform double in [-1, 1) from raw 64-bit engine output, independent of the
/// standard library's distribution implementations.
double unit_symmetric(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

std::vector<OutputFile> cmd_evolve(const RunConfig& c) {
  const CalibratedMeasure cal = run_calibration(c);
  const Spectrum s = run_spectrum(c, cal, c.n_modes);
  return stage(4, [&] {
    const ModeBasis basis = make_basis(s, c.grid, static_cast<std::size_t>(c.n_modes));
    ModeCoefficients coeffs;
    coeffs.q.assign(basis.size(), 0.0);
    coeffs.p.assign(basis.size(), 0.0);
    if (c.evolve.data == "mode") {
      std::size_t pos = basis.size();
      for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis.modes[i].index == c.evolve.mode) pos = i;
      if (pos == basis.size())
        throw Error(ErrorCode::InvalidArgument, "evolve.mode is not among the first n_modes modes");
      coeffs.q[pos] = 1.0;
    } else {
      std::mt19937_64 rng(c.seed);
      for (int i = 0; i < c.evolve.terms; ++i) {
        const double decay = 1.0 / ((i + 1.0) * (i + 1.0));
        coeffs.q[i] = unit_symmetric(rng) * decay;
        coeffs.p[i] = unit_symmetric(rng) * decay;
      }
    }

    const auto samples = static_cast<std::size_t>(std::llround(std::floor(c.evolve.t_end / c.evolve.dt + 1e-9)));
    std::ostringstream ev, en;
    ev << csv_header(c) << "t,x,u,udot\n";
    en << csv_header(c) << "t,energy,relative_drift\n";
    double e0 = 0.0;
    for (std::size_t k = 0; k <= samples; ++k) {
      const double t = static_cast<double>(k) * c.evolve.dt;
      const CauchyData d = evolve_modes(coeffs, basis, t);
      const double e = hamiltonian(d, c.params, cal);
      if (k == 0) e0 = e;
      en << num(t) << ',' << num(e) << ',' << num(e0 != 0.0 ? (e - e0) / e0 : 0.0) << '\n';
      if (k % static_cast<std::size_t>(c.evolve.snapshot_every) == 0 || k == samples) {
        for (std::size_t i = 0; i < d.q.values.size(); ++i)
          ev << num(t) << ',' << num(c.grid.x(i)) << ',' << num(d.q.values[i]) << ',' << num(d.p.values[i]) << '\n';
      }
    }
    return std::vector<OutputFile>{{"evolve.csv", ev.str()}, {"energy.csv", en.str()}};
  });
}

std::vector<OutputFile> cmd_fock(const RunConfig& c) {
  const CalibratedMeasure cal = run_calibration(c);
  const Spectrum s = run_spectrum(c, cal, c.fock_n_max);
  return stage(5, [&] {
    const auto n_max = static_cast<std::size_t>(c.fock_n_max);
    const FactorizationReport r = factorization_diagnostic(s, cal, n_max);
    std::vector<double> control(n_max);
    for (std::size_t n = 0; n < n_max; ++n) control[n] = 1.0 / static_cast<double>(n + 1);
    const FactorizationReport rc = partial_sum_diagnostic(control);
    const PowerLaw law = boundary_indicator_law(s, cal, 50, std::min(500, c.fock_n_max));
    json j = {{"config_hash", c.hash},
              {"n_max", c.fock_n_max},
              {"coefficients", r.coefficients},
              {"partial_sums", r.partial_sums},
              {"log_slope", r.log_slope},
              {"expected_slope", r.expected_slope},
              {"octave_slopes", {r.octave_slope_lower, r.octave_slope_upper}},
              {"verdict", to_string(r.verdict)},
              {"coefficient_law",
               {{"exponent", law.exponent},
                {"prefactor", law.prefactor},
                {"expected_prefactor", boundary_indicator_prefactor(c.params, cal)}}},
              {"indicator_l2_mu_norm2", cal.alpha0},
              {"control_verdict", to_string(rc.verdict)}};
    return std::vector<OutputFile>{{"fock.json", json_text(j)}};
  });
}

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ExitError(1, "cannot create output directory " + dir + ": " + ec.message());
  for (const OutputFile& f : files) {
    const std::filesystem::path path = std::filesystem::path(dir) / f.name;
    std::ofstream out(path, std::ios::binary);
    out << f.content;
    if (!out) throw ExitError(1, "cannot write " + path.string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"String with dynamical point-mass boundaries: calibration, spectrum, dynamics, one-particle diagnostics"};
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = 0;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized data (overrides seed)")->check(CLI::NonNegativeNumber);
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"calibrate", "calibrate the boundary measure, writes calibration.json"},
      {"spectrum", "eigenfrequencies and normalisations, writes spectrum.csv"},
      {"modes", "sampled basis functions, writes modes.csv and mode_<n>.csv"},
      {"evolve", "modal time evolution, writes evolve.csv and energy.csv"},
      {"fock", "one-particle diagnostic of the boundary indicator, writes fock.json"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    const RunConfig cfg = load_config(config_path, *out_opt ? std::optional<std::string>(out_dir) : std::nullopt,
                                      *seed_opt ? std::optional<std::uint64_t>(static_cast<std::uint64_t>(seed)) : std::nullopt);
    std::vector<OutputFile> files;
    if (command == "calibrate") files = cmd_calibrate(cfg);
    else if (command == "spectrum") files = cmd_spectrum(cfg);
    else if (command == "modes") files = cmd_modes(cfg);
    else if (command == "evolve") files = cmd_evolve(cfg);
    else files = cmd_fock(cfg);
    write_outputs(cfg.output_dir, files);
    return 0;
  } catch (const ExitError& e) {
    std::cerr << "stringmass: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "stringmass: " << e.what() << '\n';
    return 1;
  }
}
