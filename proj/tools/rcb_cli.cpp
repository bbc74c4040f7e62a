// Command-line harness around the rcb library: spectrum emission, seeded
// Monte-Carlo dispersion runs, the bundled table presets, and the brute-force
// oracle suite. All output is CSV; see the README for the config schema.

#include "rcb/rcb.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rcb::ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& contents) {
  if (out_path.empty()) {
    std::cout << contents;
  } else {
    rcb::write_file(out_path, contents);
  }
}

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_seed_option(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option_function<std::uint64_t>(
         "--seed", [&opts](std::uint64_t s) { opts.seed = s; opts.seed_set = true; },
         "Master seed (overrides the config value)");
}

rcb::ExperimentConfig load_config(const CommonOptions& opts) {
  if (opts.config_path.empty()) throw rcb::ConfigError("--config is required");
  rcb::ExperimentConfig cfg = rcb::parse_config(read_text_file(opts.config_path));
  if (opts.seed_set) cfg.master_seed = opts.seed;
  return cfg;
}

int run_spectrum(const CommonOptions& opts, int method_index, bool exact_r0, bool averaged) {
  rcb::ExperimentConfig cfg = load_config(opts);
  if (method_index < 0 || method_index >= static_cast<int>(cfg.methods.size())) {
    throw rcb::ConfigError("--method index out of range");
  }
  const rcb::MethodSpec method = cfg.methods[method_index];
  const rcb::RealVector thetas = rcb::uniform_grid(cfg.grid_points);

  rcb::RealVector values;
  if (exact_r0) {
    const rcb::ComplexMatrix r0 = rcb::true_covariance(cfg.scenario);
    values = rcb::normalize_pattern(rcb::detail::method_spectrum(method, r0, cfg, thetas));
  } else if (averaged) {
    rcb::ExperimentConfig one = cfg;
    one.methods = {method};
    const rcb::MonteCarloRun run = rcb::run_monte_carlo(one);
    if (run.methods.front().failed) {
      throw rcb::NumericalError("spectrum: a trial failed; rerun with another seed or method");
    }
    values = run.methods.front().mean_pattern();
  } else {
    const auto seed = rcb::substream_seed(cfg.master_seed, 0);
    const rcb::SnapshotSet snaps = rcb::generate_snapshots(cfg.scenario, cfg.snapshots, seed);
    const rcb::ComplexMatrix rhat = rcb::sample_covariance(snaps);
    values = rcb::normalize_pattern(rcb::detail::method_spectrum(method, rhat, cfg, thetas));
  }

  std::ostringstream os;
  rcb::write_spectrum_csv(os, rcb::SpectrumGrid{thetas, values});
  emit(opts.out_path, os.str());
  return 0;
}

int run_montecarlo(const CommonOptions& opts, const std::string& patterns_path,
                   bool raw_dispersion) {
  rcb::ExperimentConfig cfg = load_config(opts);
  if (raw_dispersion) cfg.raw_dispersion = true;
  const rcb::MonteCarloRun run = rcb::run_monte_carlo(cfg);
  std::ostringstream os;
  rcb::write_dispersion_csv(os, run);
  emit(opts.out_path, os.str());
  if (!patterns_path.empty()) {
    std::ostringstream ps;
    rcb::write_mean_patterns_csv(ps, run);
    rcb::write_file(patterns_path, ps.str());
  }
  return 0;
}

int run_table(const CommonOptions& opts, rcb::ExperimentConfig cfg) {
  if (opts.seed_set) cfg.master_seed = opts.seed;
  const rcb::MonteCarloRun run = rcb::run_monte_carlo(cfg);
  std::ostringstream os;
  rcb::write_dispersion_csv(os, run);
  emit(opts.out_path, os.str());
  return 0;
}

bool report(const char* name, bool ok) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
  return ok;
}

// Brute-force cross-checks of the solvers, small enough to run ad hoc.
int run_oracle(std::uint64_t seed) {
  using namespace rcb;
  bool all_ok = true;
  const ExperimentConfig cfg = default_config(seed);
  const SnapshotSet snaps = generate_snapshots(cfg.scenario, cfg.snapshots,
                                               substream_seed(seed, 0));
  const ComplexMatrix rhat = sample_covariance(snaps);
  const int n_sources = cfg.scenario.n_sources();

  {
    const ComplexMatrix gamma =
        gamma_matrix(eigendecompose(rhat), GammaSpec{0.5, 0.05, n_sources});
    const double violation =
        oracle::max_interval_dominance_violation(rhat, gamma, 200, 50, seed);
    all_ok &= report("interval members stay below the dominant member", violation <= 1e-10);
  }

  {
    Rng rng(substream_seed(seed, 1));
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      const ComplexMatrix m = random_hpd(rng, 3);
      const ComplexVector a = random_complex_vector(rng, 3);
      ComplexMatrix reg = random_hpd(rng, 3, 0.0);
      const QuadraticConstraint cset{a, 0.3 * a.squaredNorm() /
                                            hermitian_eigenvalues(reg).maxCoeff(),
                                     reg};
      const auto sol = regularized_constraint_weights(m, cset);
      if (!sol) continue;
      const auto search = oracle::random_search_min_power(m, cset.constraint_matrix(), 100000,
                                                          rng.next_u64());
      ok = std::abs(sol->objective - search.objective) <=
           1e-3 * std::max(sol->objective, search.objective);
    }
    all_ok &= report("pencil solver matches random search", ok);
  }

  {
    Rng rng(substream_seed(seed, 2));
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      const ComplexMatrix m = random_hpd(rng, 3);
      const ComplexVector a = random_complex_vector(rng, 3);
      const double k = 0.1 + 5.0 * rng.uniform();
      const QuarticSolution sol = quartic_regularized_weights(m, SingletonConstraint{a}, k);
      const auto search = oracle::random_search_quartic(m, a, k, 50000, rng.next_u64());
      const double objective = quadratic_form(sol.beamformer.weights, m) +
                               std::pow(sol.beamformer.weights.squaredNorm(), 2) / (4.0 * k);
      ok = objective <= search.objective + 1e-8;
    }
    all_ok &= report("quartic fixed point beats random search", ok);
  }

  {
    Rng rng(substream_seed(seed, 3));
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      const ComplexMatrix m = random_hpd(rng, 6);
      const ComplexVector a = random_complex_vector(rng, 6);
      const double p0 = constrained_min_power(m, SingletonConstraint{a})->objective;
      const double tau = p0 * (1.0 + 0.01 + rng.uniform());
      const auto res = globally_robust_loading(m, SingletonConstraint{a}, tau,
                                               ComplexMatrix::Identity(6, 6));
      const double phi =
          constrained_min_power(hermitian_part(m + ComplexMatrix::Identity(6, 6) / (4.0 * res.k)),
                                SingletonConstraint{a})
              ->objective;
      ok = std::abs(phi - tau) <= 1e-8 * tau;
    }
    all_ok &= report("budgeted loading hits the requested power", ok);
  }

  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Capon beamforming experiment harness"};
  app.require_subcommand(1);

  CommonOptions opts;
  int method_index = 0;
  bool exact_r0 = false;
  bool averaged = false;
  std::string patterns_path;
  bool raw_dispersion = false;

  CLI::App* spectrum = app.add_subcommand("spectrum", "Emit one method's spectrum as CSV");
  spectrum->add_option("--config", opts.config_path, "JSON experiment config")->required();
  spectrum->add_option("--method", method_index, "Index into the config's methods list");
  spectrum->add_flag("--exact-r0", exact_r0, "Use the true covariance instead of snapshots");
  spectrum->add_flag("--averaged", averaged, "Average normalized per-trial spectra");
  spectrum->add_option("--out", opts.out_path, "Output path (default: stdout)");
  add_seed_option(spectrum, opts);

  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "Run the Monte-Carlo experiment, emit dispersion CSV");
  montecarlo->add_option("--config", opts.config_path, "JSON experiment config")->required();
  montecarlo->add_option("--out", opts.out_path, "Output path (default: stdout)");
  montecarlo->add_option("--patterns", patterns_path, "Also write averaged patterns here");
  montecarlo->add_flag("--raw-dispersion", raw_dispersion,
                       "Dispersion of raw (unnormalized) patterns");
  add_seed_option(montecarlo, opts);

  CLI::App* table1 = app.add_subcommand("table1", "Dispersion sweep over loading levels");
  CLI::App* table2 = app.add_subcommand("table2", "Dispersion sweep, subspace loading 0.01");
  CLI::App* table3 = app.add_subcommand("table3", "Dispersion sweep, subspace loading 0.025");
  for (CLI::App* t : {table1, table2, table3}) {
    t->add_option("--out", opts.out_path, "Output path (default: stdout)");
    add_seed_option(t, opts);
  }

  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "Run the brute-force solver cross-checks");
  add_seed_option(oracle_cmd, opts);

  CLI11_PARSE(app, argc, argv);

  const std::uint64_t table_seed = opts.seed_set ? opts.seed : 1;
  try {
    if (spectrum->parsed()) return run_spectrum(opts, method_index, exact_r0, averaged);
    if (montecarlo->parsed()) return run_montecarlo(opts, patterns_path, raw_dispersion);
    if (table1->parsed()) return run_table(opts, rcb::table1_config(table_seed));
    if (table2->parsed()) return run_table(opts, rcb::table2_config(table_seed));
    if (table3->parsed()) return run_table(opts, rcb::table3_config(table_seed));
    if (oracle_cmd->parsed()) return run_oracle(opts.seed_set ? opts.seed : 1);
  } catch (const rcb::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
