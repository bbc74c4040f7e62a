#pragma once

#include "rcb/array_model.hpp"
#include "rcb/beamformers.hpp"
#include "rcb/covariance.hpp"
#include "rcb/io.hpp"
#include "rcb/metrics.hpp"
#include "rcb/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace rcb {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Recipe for a prior/weight matrix that is resolved per trial: either the
/// identity or the subspace loading matrix built on the sample eigenbasis.
struct MatrixSpec {
  enum class Kind { Identity, Gamma };
  Kind kind = Kind::Identity;
  double delta_signal = 0.0;
  double delta_noise = 0.0;

  ComplexMatrix resolve(const EigenDecomposition& ed, int n_sources) const {
    if (kind == Kind::Identity) {
      return ComplexMatrix::Identity(ed.dimension(), ed.dimension());
    }
    return gamma_matrix(ed, GammaSpec{delta_signal, delta_noise, n_sources});
  }
};

struct CaponMethod {};
struct CaponDlMethod {
  double eps = 0.0;
};
struct CaponUdlMethod {
  double delta_signal = 0.0;
  double delta_noise = 0.0;
};
struct EigThresholdMethod {
  double mu = 0.0;
};
struct BayesianMethod {
  double beta = 0.0;
  MatrixSpec prior;
};
struct MusicMethod {};
struct GloballyRobustMethod {
  double objective_excess = 0.0;  // t added on top of the per-direction optimum
  MatrixSpec weight;
};

using MethodSpec = std::variant<CaponMethod, CaponDlMethod, CaponUdlMethod, EigThresholdMethod,
                                BayesianMethod, MusicMethod, GloballyRobustMethod>;

inline std::string method_id(const MethodSpec& spec) {
  struct Visitor {
    std::string operator()(const CaponMethod&) const { return "capon"; }
    std::string operator()(const CaponDlMethod&) const { return "capon_dl"; }
    std::string operator()(const CaponUdlMethod&) const { return "capon_udl"; }
    std::string operator()(const EigThresholdMethod&) const { return "eig_threshold"; }
    std::string operator()(const BayesianMethod&) const { return "bayesian"; }
    std::string operator()(const MusicMethod&) const { return "music"; }
    std::string operator()(const GloballyRobustMethod&) const { return "globally_robust"; }
  };
  return std::visit(Visitor{}, spec);
}

namespace detail {
inline std::string trim_number(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}
}  // namespace detail

inline std::string method_parameter(const MethodSpec& spec) {
  struct Visitor {
    std::string operator()(const CaponMethod&) const { return ""; }
    std::string operator()(const CaponDlMethod& m) const { return detail::trim_number(m.eps); }
    std::string operator()(const CaponUdlMethod& m) const {
      return "d1=" + detail::trim_number(m.delta_signal) +
             ";d2=" + detail::trim_number(m.delta_noise);
    }
    std::string operator()(const EigThresholdMethod& m) const {
      return detail::trim_number(m.mu);
    }
    std::string operator()(const BayesianMethod& m) const {
      return "beta=" + detail::trim_number(m.beta);
    }
    std::string operator()(const MusicMethod&) const { return ""; }
    std::string operator()(const GloballyRobustMethod& m) const {
      return "t=" + detail::trim_number(m.objective_excess);
    }
  };
  return std::visit(Visitor{}, spec);
}

/// Constraint recipe; the steering vector itself is filled in per direction.
struct ConstraintSpec {
  enum class Kind { Singleton, Quadratic };
  Kind kind = Kind::Singleton;
  double eps2 = 0.0;
  MatrixSpec reg;
};

struct ExperimentConfig {
  SourceScenario scenario;
  int grid_points = 200;
  int trials = 10;
  int snapshots = 25;
  std::uint64_t master_seed = 1;
  ConstraintSpec constraint;
  std::vector<MethodSpec> methods;
  bool raw_dispersion = false;  // skip per-trial peak normalization

  void validate() const {
    scenario.validate();
    if (scenario.sources.empty()) {
      throw ConfigError("config: scenario needs at least one source");
    }
    if (grid_points < 2) throw ConfigError("config: grid_points must be >= 2");
    if (trials < 1) throw ConfigError("config: trials must be >= 1");
    if (snapshots < 1) throw ConfigError("config: snapshots must be >= 1");
    if (methods.empty()) throw ConfigError("config: no methods requested");
    const Eigen::Index n = scenario.geometry.n_elements;
    const int k = scenario.n_sources();
    for (const MethodSpec& m : methods) {
      if (const auto* dl = std::get_if<CaponDlMethod>(&m)) {
        if (dl->eps < 0.0) throw ConfigError("config: capon_dl eps must be >= 0");
      } else if (const auto* udl = std::get_if<CaponUdlMethod>(&m)) {
        GammaSpec spec{udl->delta_signal, udl->delta_noise, k};
        try {
          spec.validate(n);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("config: capon_udl: ") + e.what());
        }
      } else if (const auto* et = std::get_if<EigThresholdMethod>(&m)) {
        if (!(et->mu >= 0.0 && et->mu <= 1.0)) {
          throw ConfigError("config: eig_threshold mu must be in [0,1]");
        }
      } else if (const auto* bayes = std::get_if<BayesianMethod>(&m)) {
        if (!(bayes->beta >= 0.0 && bayes->beta <= 1.0)) {
          throw ConfigError("config: bayesian beta must be in [0,1]");
        }
      } else if (const auto* gr = std::get_if<GloballyRobustMethod>(&m)) {
        if (gr->objective_excess < 0.0) {
          throw ConfigError("config: globally_robust t must be >= 0");
        }
      }
    }
    if (constraint.kind == ConstraintSpec::Kind::Quadratic && constraint.eps2 < 0.0) {
      throw ConfigError("config: constraint eps2 must be >= 0");
    }
  }
};

namespace detail {

inline ConstraintSet make_constraint(const ConstraintSpec& spec, const ComplexVector& steering,
                                     const EigenDecomposition& ed, int n_sources) {
  if (spec.kind == ConstraintSpec::Kind::Singleton) {
    return SingletonConstraint{steering};
  }
  return QuadraticConstraint{steering, spec.eps2, spec.reg.resolve(ed, n_sources)};
}

/// Spectrum values of one method on one covariance realization, over the
/// whole grid. Every method reports the optimal value of its (robustified)
/// per-direction problem; MUSIC reports its pseudo-spectrum and ignores the
/// constraint kind.
inline RealVector method_spectrum(const MethodSpec& method, const ComplexMatrix& r,
                                  const ExperimentConfig& cfg, const RealVector& thetas) {
  const ArrayGeometry& geometry = cfg.scenario.geometry;
  const int k = cfg.scenario.n_sources();

  if (std::holds_alternative<MusicMethod>(method)) {
    return music_pseudospectrum(r, k, thetas, geometry).values;
  }

  // Lazily share one eigendecomposition of R among the pieces that need it.
  std::optional<EigenDecomposition> ed;
  const auto eigen = [&]() -> const EigenDecomposition& {
    if (!ed) ed = eigendecompose(r);
    return *ed;
  };

  if (const auto* gr = std::get_if<GloballyRobustMethod>(&method)) {
    const ComplexMatrix weight = gr->weight.resolve(eigen(), k);
    RealVector values(thetas.size());
    for (Eigen::Index i = 0; i < thetas.size(); ++i) {
      const ComplexVector a = steering_vector(geometry, thetas(i));
      const ConstraintSet cset = make_constraint(cfg.constraint, a, eigen(), k);
      const auto unloaded = constrained_min_power(r, cset);
      if (!unloaded) throw NumericalError("globally_robust: infeasible direction");
      const double tau = unloaded->objective + gr->objective_excess;
      values(i) = globally_robust_loading(r, cset, tau, weight).objective;
    }
    return values;
  }

  // The remaining methods minimize w^H M w over the constraint set with a
  // method-specific effective covariance M.
  ComplexMatrix effective;
  if (std::holds_alternative<CaponMethod>(method)) {
    effective = r;
  } else if (const auto* dl = std::get_if<CaponDlMethod>(&method)) {
    effective = diagonal_load(r, dl->eps);
  } else if (const auto* udl = std::get_if<CaponUdlMethod>(&method)) {
    const ComplexMatrix gamma =
        gamma_matrix(eigen(), GammaSpec{udl->delta_signal, udl->delta_noise, k});
    effective = hermitian_part(r + gamma);
  } else if (const auto* et = std::get_if<EigThresholdMethod>(&method)) {
    effective = eigen_threshold(r, et->mu);
  } else if (const auto* bayes = std::get_if<BayesianMethod>(&method)) {
    effective = bayesian_combine(r, bayes->prior.resolve(eigen(), k), bayes->beta);
  } else {
    throw std::logic_error("method_spectrum: unhandled method");
  }

  if (cfg.constraint.kind == ConstraintSpec::Kind::Singleton) {
    return capon_spectrum(effective, thetas, geometry).values;
  }

  RealVector values(thetas.size());
  for (Eigen::Index i = 0; i < thetas.size(); ++i) {
    const ComplexVector a = steering_vector(geometry, thetas(i));
    const ConstraintSet cset = make_constraint(cfg.constraint, a, eigen(), k);
    const auto sol = constrained_min_power(effective, cset);
    if (!sol) throw NumericalError("quadratic constraint infeasible at a grid direction");
    values(i) = sol->objective;
  }
  return values;
}

}  // namespace detail

/// One (method, trial) cell of a Monte-Carlo run.
struct RunRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t covariance_hash = 0;
  bool ok = false;
  std::string error;
};

struct MethodRun {
  MethodSpec spec;
  std::string id;
  std::string parameter;
  std::vector<RunRecord> records;
  PatternEnsemble ensemble;  // normalized patterns of the successful trials
  double dispersion = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;  // at least one trial cell failed

  RealVector mean_pattern() const { return ensemble.mean_pattern(); }
};

struct MonteCarloRun {
  RealVector thetas;
  std::vector<MethodRun> methods;
};

/// Runs the seeded Monte-Carlo experiment: per trial, draw snapshots from the
/// trial substream, estimate the covariance once, and hand the same estimate
/// to every method (paired comparison). A failing cell is recorded and the
/// method's dispersion becomes NaN; other cells are unaffected.
inline MonteCarloRun run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  MonteCarloRun run;
  run.thetas = uniform_grid(cfg.grid_points);
  run.methods.reserve(cfg.methods.size());
  for (const MethodSpec& m : cfg.methods) {
    MethodRun mr;
    mr.spec = m;
    mr.id = method_id(m);
    mr.parameter = method_parameter(m);
    mr.ensemble.thetas = run.thetas;
    run.methods.push_back(std::move(mr));
  }

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t seed = substream_seed(cfg.master_seed, static_cast<std::uint64_t>(trial));
    const SnapshotSet snapshots = generate_snapshots(cfg.scenario, cfg.snapshots, seed);
    const ComplexMatrix rhat = sample_covariance(snapshots);
    const std::uint64_t rhash = matrix_hash(rhat);

    for (MethodRun& mr : run.methods) {
      RunRecord record;
      record.trial = trial;
      record.seed = seed;
      record.covariance_hash = rhash;
      try {
        RealVector pattern = detail::method_spectrum(mr.spec, rhat, cfg, run.thetas);
        if (!cfg.raw_dispersion) pattern = normalize_pattern(pattern);
        mr.ensemble.patterns.push_back(std::move(pattern));
        record.ok = true;
      } catch (const std::exception& e) {
        record.ok = false;
        record.error = e.what();
        mr.failed = true;
      }
      mr.records.push_back(std::move(record));
    }
  }

  for (MethodRun& mr : run.methods) {
    mr.dispersion = mr.failed ? std::numeric_limits<double>::quiet_NaN()
                              : dispersion(mr.ensemble);
  }
  return run;
}

/// Columns method,parameter,dispersion; one row per method, run order.
inline void write_dispersion_csv(std::ostream& os, const MonteCarloRun& run) {
  os << "method,parameter,dispersion\n";
  for (const MethodRun& mr : run.methods) {
    os << mr.id << ',' << mr.parameter << ',';
    if (mr.failed) {
      os << "nan\n";
    } else {
      os << format_double(mr.dispersion) << '\n';
    }
  }
}

/// Long-format per-method averaged patterns: method,parameter,theta_rad,theta_deg,value.
inline void write_mean_patterns_csv(std::ostream& os, const MonteCarloRun& run) {
  os << "method,parameter,theta_rad,theta_deg,value\n";
  for (const MethodRun& mr : run.methods) {
    if (mr.ensemble.patterns.empty()) continue;
    const RealVector mean = mr.mean_pattern();
    for (Eigen::Index i = 0; i < run.thetas.size(); ++i) {
      os << mr.id << ',' << mr.parameter << ',' << format_double(run.thetas(i)) << ','
         << format_double(run.thetas(i) * 180.0 / pi) << ',' << format_double(mean(i)) << '\n';
    }
  }
}

/// The default scene: a 10-element half-wavelength array, unit-power sources
/// at -30, -26 and +30 degrees, 1/32 W noise (15 dB SNR), 25 snapshots,
/// 10 trials, 200 grid points.
inline ExperimentConfig default_config(std::uint64_t master_seed = 1) {
  ExperimentConfig cfg;
  cfg.scenario.geometry = ArrayGeometry{10, 0.5};
  cfg.scenario.sources = {Source{-30.0 * pi / 180.0, 1.0}, Source{-26.0 * pi / 180.0, 1.0},
                          Source{30.0 * pi / 180.0, 1.0}};
  cfg.scenario.noise_power = 1.0 / 32.0;
  cfg.scenario.soi_index = 0;
  cfg.grid_points = 200;
  cfg.trials = 10;
  cfg.snapshots = 25;
  cfg.master_seed = master_seed;
  return cfg;
}

/// Preset sweeps behind the table1/table2/table3 commands.
inline ExperimentConfig table1_config(std::uint64_t master_seed) {
  ExperimentConfig cfg = default_config(master_seed);
  cfg.methods = {CaponMethod{}, CaponDlMethod{0.01}, CaponDlMethod{0.025}, CaponDlMethod{0.05}};
  return cfg;
}

inline ExperimentConfig table2_config(std::uint64_t master_seed) {
  ExperimentConfig cfg = default_config(master_seed);
  cfg.methods = {CaponMethod{}, CaponUdlMethod{1.0, 0.01}, CaponUdlMethod{2.0, 0.01},
                 CaponUdlMethod{3.0, 0.01}, CaponUdlMethod{10.0, 0.01}};
  return cfg;
}

inline ExperimentConfig table3_config(std::uint64_t master_seed) {
  ExperimentConfig cfg = default_config(master_seed);
  cfg.methods = {CaponMethod{}, CaponUdlMethod{1.0, 0.025}, CaponUdlMethod{3.0, 0.025},
                 CaponUdlMethod{5.0, 0.025}, CaponUdlMethod{10.0, 0.025}};
  return cfg;
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

namespace detail {

inline double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(std::string("config: missing or non-numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

inline MatrixSpec parse_matrix_spec(const nlohmann::json& j, const char* what) {
  MatrixSpec spec;
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") {
      throw ConfigError(std::string("config: unknown ") + what + " '" + j.get<std::string>() +
                        "' (expected \"identity\" or a gamma object)");
    }
    return spec;
  }
  if (j.is_object() && j.contains("gamma")) {
    spec.kind = MatrixSpec::Kind::Gamma;
    spec.delta_signal = require_number(j["gamma"], "delta_signal");
    spec.delta_noise = require_number(j["gamma"], "delta_noise");
    return spec;
  }
  throw ConfigError(std::string("config: malformed ") + what);
}

inline MethodSpec parse_method(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ConfigError("config: each method needs a string 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "capon") return CaponMethod{};
  if (type == "capon_dl") return CaponDlMethod{require_number(j, "eps")};
  if (type == "capon_udl") {
    return CaponUdlMethod{require_number(j, "delta_signal"), require_number(j, "delta_noise")};
  }
  if (type == "eig_threshold") return EigThresholdMethod{require_number(j, "mu")};
  if (type == "bayesian") {
    BayesianMethod m;
    m.beta = require_number(j, "beta");
    if (j.contains("prior")) m.prior = parse_matrix_spec(j["prior"], "prior");
    return m;
  }
  if (type == "music") return MusicMethod{};
  if (type == "globally_robust") {
    GloballyRobustMethod m;
    m.objective_excess = require_number(j, "t");
    if (j.contains("weight")) m.weight = parse_matrix_spec(j["weight"], "weight");
    return m;
  }
  throw ConfigError("config: unknown method type '" + type + "'");
}

}  // namespace detail

/// Parses the JSON experiment description (DoAs in degrees). Throws
/// ConfigError on malformed or out-of-range input.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    if (!j.contains("scenario")) throw ConfigError("config: missing 'scenario'");
    const nlohmann::json& sc = j["scenario"];
    cfg.scenario.geometry.n_elements =
        static_cast<int>(detail::require_number(sc, "n_elements"));
    if (sc.contains("spacing_wavelengths")) {
      cfg.scenario.geometry.spacing_wavelengths = detail::require_number(sc, "spacing_wavelengths");
    }
    cfg.scenario.noise_power = detail::require_number(sc, "noise_power");
    if (!sc.contains("sources") || !sc["sources"].is_array()) {
      throw ConfigError("config: scenario needs a 'sources' array");
    }
    for (const nlohmann::json& s : sc["sources"]) {
      cfg.scenario.sources.push_back(
          Source{detail::require_number(s, "doa_deg") * pi / 180.0,
                 detail::require_number(s, "power")});
    }
    if (sc.contains("soi_index")) {
      cfg.scenario.soi_index = static_cast<int>(detail::require_number(sc, "soi_index"));
    }

    if (j.contains("grid_points")) {
      cfg.grid_points = static_cast<int>(detail::require_number(j, "grid_points"));
    }
    if (j.contains("trials")) cfg.trials = static_cast<int>(detail::require_number(j, "trials"));
    if (j.contains("snapshots")) {
      cfg.snapshots = static_cast<int>(detail::require_number(j, "snapshots"));
    }
    if (j.contains("master_seed")) {
      cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    }
    if (j.contains("raw_dispersion")) cfg.raw_dispersion = j["raw_dispersion"].get<bool>();

    if (j.contains("constraint")) {
      const nlohmann::json& c = j["constraint"];
      if (c.is_string() && c.get<std::string>() == "singleton") {
        cfg.constraint.kind = ConstraintSpec::Kind::Singleton;
      } else if (c.is_object() && c.value("kind", "") == "quadratic") {
        cfg.constraint.kind = ConstraintSpec::Kind::Quadratic;
        cfg.constraint.eps2 = detail::require_number(c, "eps2");
        if (c.contains("reg")) {
          cfg.constraint.reg = detail::parse_matrix_spec(c["reg"], "constraint regularizer");
        }
      } else {
        throw ConfigError("config: constraint must be \"singleton\" or a quadratic object");
      }
    }

    if (!j.contains("methods") || !j["methods"].is_array()) {
      throw ConfigError("config: missing 'methods' array");
    }
    for (const nlohmann::json& m : j["methods"]) cfg.methods.push_back(detail::parse_method(m));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace rcb
