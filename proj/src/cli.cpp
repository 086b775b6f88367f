#include "sfde/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sfde/convergence.hpp"
#include "sfde/euler.hpp"
#include "sfde/fbm.hpp"
#include "sfde/io.hpp"
#include "sfde/version.hpp"

namespace sfde::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream stream(s);
  while (std::getline(stream, part, sep)) parts.push_back(part);
  return parts;
}

json parse_scalar(const std::string& text) {
  const json parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded()) return parsed;
  return json(text);
}

// --- shorthand expansion -------------------------------------------------

json coefficient_from_shorthand(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw ValidationError("empty coefficient spec");
  const std::string& kind = parts[0];
  if (kind == "constant") {
    if (parts.size() != 2) {
      throw ValidationError("coefficient shorthand: constant:<value>");
    }
    return json{{"kind", "constant"}, {"value", std::stod(parts[1])}};
  }
  if (kind == "point_delay") {
    if (parts.size() != 2) {
      throw ValidationError("coefficient shorthand: point_delay:<outer>");
    }
    return json{{"kind", "point_delay"}, {"outer", parts[1]}};
  }
  if (kind == "integral" || kind == "integral_functional") {
    if (parts.size() != 3) {
      throw ValidationError(
          "coefficient shorthand: integral:<outer>:<density>");
    }
    return json{{"kind", "integral_functional"},
                {"outer", parts[1]},
                {"measure", json{{"density", parts[2]}, {"atoms", json::array()}}}};
  }
  throw ValidationError("unknown coefficient kind: " + kind);
}

json xi_from_shorthand(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw ValidationError("empty xi spec");
  if (parts[0] == "constant") {
    if (parts.size() != 2) throw ValidationError("xi shorthand: constant:<value>");
    return json{{"kind", "constant"}, {"value", std::stod(parts[1])}};
  }
  if (parts[0] == "poly" || parts[0] == "polynomial") {
    if (parts.size() != 2) {
      throw ValidationError("xi shorthand: poly:<c0,c1,...>");
    }
    json coeffs = json::array();
    for (const auto& c : split(parts[1], ',')) coeffs.push_back(std::stod(c));
    return json{{"kind", "polynomial"}, {"coefficients", coeffs}};
  }
  throw ValidationError("unknown xi kind: " + parts[0]);
}

json inject_from_shorthand(const std::string& text) {
  json pairs = json::array();
  for (const auto& entry : split(text, ',')) {
    const auto nv = split(entry, ':');
    if (nv.size() != 2) {
      throw ValidationError("inject shorthand: n:error[,n:error...]");
    }
    pairs.push_back(json::array({std::stod(nv[0]), std::stod(nv[1])}));
  }
  return pairs;
}

// --- builders -------------------------------------------------------------

coefficient::OuterFunction outer_from_json(const json& config) {
  const std::string name = config.value("outer", "identity");
  if (name == "identity") return coefficient::OuterFunction::identity();
  if (name == "affine") {
    return coefficient::OuterFunction::affine(config.value("outer_a", 1.0),
                                              config.value("outer_b", 0.0));
  }
  if (name == "sin_shift") return coefficient::OuterFunction::sin_shift();
  if (name == "tanh") return coefficient::OuterFunction::tanh_fn();
  throw ValidationError("unknown outer function: " + name);
}

coefficient::Measure measure_from_json(const json& config) {
  coefficient::Measure measure = coefficient::Measure::atoms_only({});
  const std::string density = config.value("density", "lebesgue");
  if (density == "lebesgue") {
    measure = coefficient::Measure::lebesgue();
  } else if (density == "uniform") {
    measure = coefficient::Measure::uniform(config.value("scale", 1.0));
  } else if (density == "table") {
    measure = coefficient::Measure::density_table(
        config.at("table").get<std::vector<double>>());
  } else if (density != "none") {
    throw ValidationError("unknown measure density: " + density);
  }
  if (config.contains("atoms")) {
    for (const auto& atom : config.at("atoms")) {
      measure.add_atom(atom.at("offset").get<double>(),
                       atom.at("mass").get<double>());
    }
  }
  return measure;
}

coefficient::FunctionalCoefficient coefficient_from_json(const json& config) {
  const std::string kind = config.at("kind").get<std::string>();
  if (kind == "constant") {
    return coefficient::FunctionalCoefficient::constant(
        config.at("value").get<double>());
  }
  if (kind == "point_delay") {
    return coefficient::FunctionalCoefficient::point_delay(
        outer_from_json(config));
  }
  if (kind == "integral_functional") {
    return coefficient::FunctionalCoefficient::integral_functional(
        outer_from_json(config),
        measure_from_json(config.value("measure", json::object())));
  }
  throw ValidationError("unknown coefficient kind: " + kind);
}

path::InitialCondition xi_from_json(const json& config, double tau) {
  const std::string kind = config.at("kind").get<std::string>();
  if (kind == "constant") {
    return path::InitialCondition::constant(config.at("value").get<double>());
  }
  if (kind == "polynomial") {
    return path::InitialCondition::polynomial(
        config.at("coefficients").get<std::vector<double>>());
  }
  if (kind == "tabulated") {
    return path::InitialCondition::tabulated(
        config.at("values").get<std::vector<double>>(), tau);
  }
  throw ValidationError("unknown xi kind: " + kind);
}

fbm::FbmPath generate_driver(const std::string& generator, std::size_t n_steps,
                             fbm::Hurst hurst, double horizon,
                             std::uint64_t seed) {
  if (generator == "circulant") {
    return fbm::sample_circulant(n_steps, hurst, horizon, seed);
  }
  if (generator == "cholesky") {
    return fbm::sample_cholesky(n_steps, hurst, horizon, seed);
  }
  throw ValidationError("unknown generator: " + generator);
}

// --- output helpers --------------------------------------------------------

std::string csv_fbm(const fbm::FbmPath& path) {
  std::string out = "t,value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    out += io::format_float(path.time_at(k));
    out += ',';
    out += io::format_float(path.values[k]);
    out += '\n';
  }
  return out;
}

std::string csv_solution(const euler::SolveResult& result) {
  std::string out = "t,X,f_trace\n";
  const auto& spec = result.spec;
  const auto n = static_cast<std::ptrdiff_t>(spec.steps_per_delay);
  const auto last = static_cast<std::ptrdiff_t>(spec.horizon_steps);
  for (std::ptrdiff_t k = -n; k <= last; ++k) {
    out += io::format_float(spec.time_at(k));
    out += ',';
    out += io::format_float(result.solution.value_at(k));
    out += ',';
    if (k >= 0) {
      out += io::format_float(result.f_trace[static_cast<std::size_t>(k)]);
    }
    out += '\n';
  }
  return out;
}

json fit_to_json(const convergence::RateFit& fit) {
  json out;
  out["slope"] = fit.slope;
  out["intercept"] = fit.intercept;
  out["r_squared"] = fit.r_squared;
  out["degenerate"] = fit.degenerate;
  out["excluded_zero_errors"] = fit.excluded;
  return out;
}

json summary_from_report(const convergence::ConvergenceReport& report) {
  json per_n_median = json::object();
  for (std::size_t i = 0; i < report.resolutions.size(); ++i) {
    per_n_median[std::to_string(report.resolutions[i])] =
        report.median_error[i];
  }
  json out;
  out["slope"] = report.median_fit.slope;
  out["intercept"] = report.median_fit.intercept;
  out["r2"] = report.median_fit.r_squared;
  out["degenerate_fit"] = report.median_fit.degenerate;
  out["target_rate"] = report.target_rate;
  out["threshold_rate"] = report.threshold_rate;
  out["per_n_median"] = per_n_median;
  out["p2_moment_fit"] = fit_to_json(report.p2_fit);
  out["median_fit"] = fit_to_json(report.median_fit);
  if (report.sensitivity_refine > 0) {
    out["sensitivity_fit"] = fit_to_json(report.sensitivity_fit);
    out["slope_agreement"] =
        std::fabs(report.median_fit.slope - report.sensitivity_fit.slope);
  }
  out["injected"] = report.injected;
  return out;
}

std::string csv_errors(const convergence::ConvergenceReport& report) {
  std::string out = "replication,n,error\n";
  const std::size_t reps = report.errors.empty() ? 0 : report.errors[0].size();
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < report.resolutions.size(); ++i) {
      out += std::to_string(r);
      out += ',';
      out += std::to_string(report.resolutions[i]);
      out += ',';
      out += io::format_float(report.errors[i][r]);
      out += '\n';
    }
  }
  return out;
}

std::string csv_rate_plot(const convergence::ConvergenceReport& report) {
  std::string out = "n,median_error,target_line\n";
  // Reference line with the theoretical slope, anchored at the coarsest n.
  double anchor = 0.0;
  if (!report.median_error.empty() && report.median_error.front() > 0.0) {
    anchor = report.median_error.front() *
             std::pow(static_cast<double>(report.resolutions.front()),
                      report.target_rate);
  }
  for (std::size_t i = 0; i < report.resolutions.size(); ++i) {
    const double n = static_cast<double>(report.resolutions[i]);
    out += std::to_string(report.resolutions[i]);
    out += ',';
    out += io::format_float(report.median_error[i]);
    out += ',';
    out += io::format_float(anchor * std::pow(n, -report.target_rate));
    out += '\n';
  }
  return out;
}

// --- config plumbing --------------------------------------------------------

json base_defaults() {
  return json{
      {"seed", 1},
      {"H", 0.75},
  };
}

double require_number(const json& config, const std::string& key) {
  if (!config.contains(key) || !config.at(key).is_number()) {
    throw ValidationError("config field '" + key + "' must be a number");
  }
  return config.at(key).get<double>();
}

std::size_t require_positive_integer(const json& config,
                                     const std::string& key) {
  if (!config.contains(key) || !config.at(key).is_number_integer() ||
      config.at(key).get<std::int64_t>() < 1) {
    throw ValidationError("config field '" + key +
                          "' must be a positive integer");
  }
  return config.at(key).get<std::size_t>();
}

void check_hurst(double h, bool solver) {
  if (!(h > 0.0 && h < 1.0)) {
    throw ValidationError("H must lie in (0,1)");
  }
  if (solver && !(h > 0.5)) {
    throw ValidationError("the solver requires H > 1/2");
  }
}

void check_lambda(double lambda, double h) {
  if (!(lambda > 0.5 && lambda < h)) {
    throw ValidationError("lambda must lie in (1/2, H)");
  }
}

void validate_grid(const json& config) {
  try {
    path::build_grid(require_number(config, "tau"),
                     require_positive_integer(config, "n"),
                     require_number(config, "T"));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace

json default_config(const std::string& subcommand) {
  if (subcommand == "fbm") {
    json config = base_defaults();
    config["n"] = 512;
    config["T"] = 1.0;
    config["seed"] = 7;
    config["generator"] = "circulant";
    return config;
  }
  if (subcommand == "simulate") {
    json config = base_defaults();
    config["tau"] = 0.1;
    config["n"] = 50;  // dt = 1/500, the reference experiment's step
    config["T"] = 1.0;
    config["generator"] = "circulant";
    config["coefficient"] = json{
        {"kind", "integral_functional"},
        {"outer", "sin_shift"},
        {"measure", json{{"density", "lebesgue"}, {"atoms", json::array()}}}};
    config["xi"] =
        json{{"kind", "polynomial"}, {"coefficients", {2.0, 0.0, 1.0}}};
    return config;
  }
  if (subcommand == "convergence") {
    json config = default_config("simulate");
    config.erase("n");
    config.erase("generator");
    config["lambda"] = 0.7;
    config["eps_margin"] = 0.15;
    config["resolutions"] = {10, 20, 40, 80, 160};
    config["refine"] = 16;
    config["sensitivity_refine"] = 8;
    config["replications"] = 20;
    return config;
  }
  if (subcommand == "diagnose") {
    json config = default_config("simulate");
    config["n"] = 200;
    config["lambda"] = 0.7;
    config["refine"] = 8;
    config["max_triples"] = 100000;
    return config;
  }
  throw ValidationError("unknown subcommand: " + subcommand);
}

json merge_config(json base, const json& overlay) {
  if (!overlay.is_object() || !base.is_object()) return overlay;
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      base[key] = merge_config(base[key], value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

void apply_dotted_overrides(json& config,
                            const std::vector<std::string>& overrides) {
  for (const std::string& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("override must look like key=value: " + entry);
    }
    const std::string key = entry.substr(0, eq);
    const json value = parse_scalar(entry.substr(eq + 1));
    json* node = &config;
    for (const std::string& part : split(key, '.')) {
      node = &((*node)[part]);
    }
    *node = value;
  }
}

json resolve_config(const std::string& subcommand, json config) {
  // Expand shorthand strings into their object forms.
  if (config.contains("coefficient") && config["coefficient"].is_string()) {
    config["coefficient"] =
        coefficient_from_shorthand(config["coefficient"].get<std::string>());
  }
  if (config.contains("xi") && config["xi"].is_string()) {
    config["xi"] = xi_from_shorthand(config["xi"].get<std::string>());
  }
  if (config.contains("inject") && config["inject"].is_string()) {
    config["inject"] = inject_from_shorthand(config["inject"].get<std::string>());
  }
  if (config.contains("resolutions") && config["resolutions"].is_string()) {
    json arr = json::array();
    for (const auto& p : split(config["resolutions"].get<std::string>(), ','))
      arr.push_back(std::stoul(p));
    config["resolutions"] = arr;
  }

  try {
    if (subcommand == "fbm") {
      check_hurst(require_number(config, "H"), false);
      const std::size_t n = require_positive_integer(config, "n");
      if (!(require_number(config, "T") > 0.0)) {
        throw ValidationError("T must be > 0");
      }
      const std::string gen = config.value("generator", "circulant");
      if (gen != "circulant" && gen != "cholesky") {
        throw ValidationError("unknown generator: " + gen);
      }
      if (gen == "cholesky" && n > fbm::kMaxCholeskySteps) {
        throw ValidationError("cholesky generator is capped at n <= 2048");
      }
      return config;
    }

    if (subcommand == "simulate" || subcommand == "diagnose") {
      const double h = require_number(config, "H");
      check_hurst(h, true);
      validate_grid(config);
      if (!config.contains("lambda")) {
        config["lambda"] = euler::default_lambda(h);
      }
      check_lambda(require_number(config, "lambda"), h);
      coefficient_from_json(config.at("coefficient"));  // shape check
      xi_from_json(config.at("xi"), require_number(config, "tau"));
      if (subcommand == "diagnose") {
        if (!config.contains("mu")) {
          config["mu"] = 2.0 * config["lambda"].get<double>();
        }
        if (!(require_number(config, "mu") > 1.0)) {
          throw ValidationError(
              "mu must be > 1 (the sewing inequality needs mu > 1)");
        }
        require_positive_integer(config, "refine");
        require_positive_integer(config, "max_triples");
      } else {
        const std::string gen = config.value("generator", "circulant");
        if (gen != "circulant" && gen != "cholesky") {
          throw ValidationError("unknown generator: " + gen);
        }
      }
      return config;
    }

    if (subcommand == "convergence") {
      const double h = require_number(config, "H");
      check_hurst(h, true);
      check_lambda(require_number(config, "lambda"), h);
      if (config.contains("inject") && !config["inject"].is_null()) {
        for (const auto& pair : config["inject"]) {
          if (!pair.is_array() || pair.size() != 2 ||
              !(pair[0].get<double>() > 0.0)) {
            throw ValidationError("inject entries must be [n, error] with n > 0");
          }
        }
        return config;
      }
      const std::size_t refine = require_positive_integer(config, "refine");
      require_positive_integer(config, "replications");
      if (!config.contains("resolutions") ||
          !config["resolutions"].is_array() || config["resolutions"].empty()) {
        throw ValidationError("resolutions must be a non-empty array");
      }
      std::size_t n_max = 0;
      for (const auto& n : config["resolutions"]) {
        n_max = std::max(n_max, n.get<std::size_t>());
      }
      for (const auto& entry : config["resolutions"]) {
        const auto n = entry.get<std::size_t>();
        if (n < 1 || (refine * n_max) % n != 0) {
          throw ValidationError(
              "every resolution must divide refine * max(resolutions)");
        }
        json probe = config;
        probe["n"] = n;
        validate_grid(probe);
      }
      const std::size_t sens = config.value("sensitivity_refine", std::size_t{0});
      if (sens > 0 && refine % sens != 0) {
        throw ValidationError(
            "sensitivity_refine must divide refine");
      }
      coefficient_from_json(config.at("coefficient"));
      xi_from_json(config.at("xi"), require_number(config, "tau"));
      return config;
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("unknown subcommand: " + subcommand);
}

namespace {

json make_manifest(const std::string& subcommand, const json& resolved) {
  return json{{"subcommand", subcommand},
              {"version", sfde::kVersion},
              {"config", resolved}};
}

struct PendingFile {
  std::string name;
  std::string content;
};

ExecutionResult write_all(const std::string& out_dir, bool force,
                          std::vector<PendingFile> files,
                          bool checks_passed = true,
                          std::string failure = {}) {
  fs::create_directories(out_dir);
  for (const auto& f : files) {
    const fs::path target = fs::path(out_dir) / f.name;
    if (fs::exists(target) && !force) {
      throw ValidationError("refusing to overwrite " + target.string() +
                            " without --force");
    }
  }
  ExecutionResult result;
  result.checks_passed = checks_passed;
  result.failure = std::move(failure);
  for (const auto& f : files) {
    io::write_text_file((fs::path(out_dir) / f.name).string(), f.content);
    result.files.push_back(f.name);
  }
  return result;
}

ExecutionResult execute_fbm(const json& config, const std::string& out_dir,
                            bool force) {
  const fbm::FbmPath path = generate_driver(
      config.value("generator", "circulant"),
      config.at("n").get<std::size_t>(), fbm::Hurst(config.at("H").get<double>()),
      config.at("T").get<double>(), config.at("seed").get<std::uint64_t>());
  std::vector<PendingFile> files;
  files.push_back({"path.csv", csv_fbm(path)});
  files.push_back(
      {"manifest.json", make_manifest("fbm", config).dump(2) + "\n"});
  return write_all(out_dir, force, std::move(files));
}

euler::SolveResult solve_from_config(const json& config) {
  const fbm::Hurst hurst(config.at("H").get<double>());
  const path::GridSpec spec =
      path::build_grid(config.at("tau").get<double>(),
                       config.at("n").get<std::size_t>(),
                       config.at("T").get<double>());
  const fbm::FbmPath driver = generate_driver(
      config.value("generator", "circulant"), spec.horizon_steps, hurst,
      config.at("T").get<double>(), config.at("seed").get<std::uint64_t>());
  return euler::euler_solve(coefficient_from_json(config.at("coefficient")),
                            xi_from_json(config.at("xi"), spec.tau), driver,
                            spec, config.at("lambda").get<double>());
}

ExecutionResult execute_simulate(const json& config,
                                 const std::string& out_dir, bool force) {
  const euler::SolveResult result = solve_from_config(config);
  std::vector<PendingFile> files;
  files.push_back({"solution.csv", csv_solution(result)});
  files.push_back(
      {"manifest.json", make_manifest("simulate", config).dump(2) + "\n"});
  return write_all(out_dir, force, std::move(files));
}

ExecutionResult execute_convergence(const json& config,
                                    const std::string& out_dir, bool force) {
  convergence::ConvergenceReport report;
  if (config.contains("inject") && !config["inject"].is_null()) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& pair : config["inject"]) {
      pairs.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    report = convergence::report_from_injection(
        pairs, config.at("lambda").get<double>(),
        config.value("eps_margin", 0.15));
  } else {
    convergence::LadderConfig ladder;
    ladder.hurst = config.at("H").get<double>();
    ladder.tau = config.at("tau").get<double>();
    ladder.horizon = config.at("T").get<double>();
    ladder.lambda = config.at("lambda").get<double>();
    ladder.eps_margin = config.value("eps_margin", 0.15);
    ladder.resolutions =
        config.at("resolutions").get<std::vector<std::size_t>>();
    ladder.refine = config.at("refine").get<std::size_t>();
    ladder.sensitivity_refine =
        config.value("sensitivity_refine", std::size_t{0});
    ladder.replications = config.at("replications").get<std::size_t>();
    ladder.base_seed = config.at("seed").get<std::uint64_t>();
    ladder.coeff = coefficient_from_json(config.at("coefficient"));
    ladder.xi = xi_from_json(config.at("xi"), ladder.tau);
    report = convergence::run_ladder(ladder);
  }
  std::vector<PendingFile> files;
  files.push_back({"errors.csv", csv_errors(report)});
  files.push_back({"summary.json", summary_from_report(report).dump(2) + "\n"});
  files.push_back({"rate_plot.csv", csv_rate_plot(report)});
  files.push_back(
      {"manifest.json", make_manifest("convergence", config).dump(2) + "\n"});
  return write_all(out_dir, force, std::move(files));
}

ExecutionResult execute_diagnose(const json& config,
                                 const std::string& out_dir, bool force) {
  const euler::SolveResult result = solve_from_config(config);
  const double lambda = config.at("lambda").get<double>();
  const double mu = config.at("mu").get<double>();
  const std::size_t refine = config.at("refine").get<std::size_t>();

  // m-refined solve of the same realization for the solution remainder.
  const path::GridSpec spec = result.spec;
  const fbm::Hurst hurst(config.at("H").get<double>());
  const fbm::FbmPath driver_fine = fbm::sample_circulant(
      spec.horizon_steps * refine, hurst, spec.horizon,
      config.at("seed").get<std::uint64_t>());
  const euler::SolveResult reference = euler::reference_solve(
      coefficient_from_json(config.at("coefficient")),
      xi_from_json(config.at("xi"), spec.tau), driver_fine, spec, refine,
      lambda);

  const double r_n_norm = euler::scheme_remainder_norm(result, 2.0 * lambda);
  const double r_x_norm =
      euler::solution_remainder_norm(reference, 2.0 * lambda);
  const holder::SewingCheck sewing = euler::scheme_remainder_sewing(result, mu);
  const double chaining = euler::chaining_identity_defect(
      result, config.at("max_triples").get<std::size_t>());
  const double scale =
      holder::sup_norm(result.solution.nonnegative_values());

  const auto nonneg = result.solution.nonnegative_values();
  const std::vector<double> driver_window(
      result.driver.values.begin(),
      result.driver.values.begin() + static_cast<std::ptrdiff_t>(nonneg.size()));
  const holder::YoungProbe young = holder::young_bound_probe(
      result.f_trace, driver_window, spec.dt, lambda, lambda, 0,
      spec.horizon_steps);
  const double young_constant = holder::young_constant(2.0 * lambda);

  const bool sewing_pass = sewing.passes();
  const bool chaining_pass = chaining <= 1e-12 * std::max(1.0, scale);
  const bool young_pass = young.lhs <= young_constant * young.rhs_without_constant +
                                           1e-12 * std::max(1.0, scale);
  const bool all_pass = sewing_pass && chaining_pass && young_pass;

  json diag;
  diag["lambda"] = lambda;
  diag["mu"] = mu;
  diag["scheme_remainder_norm"] = r_n_norm;
  diag["solution_remainder_norm"] = r_x_norm;
  diag["sewing"] = json{{"lhs", sewing.lhs},
                        {"bound", sewing.bound},
                        {"diag", sewing.diag},
                        {"delta_norm", sewing.delta_part},
                        {"constant", holder::sewing_constant(mu)},
                        {"rounding_slack", sewing.rounding_slack},
                        {"pass", sewing_pass}};
  diag["chaining"] = json{{"defect", chaining},
                          {"scale", scale},
                          {"pass", chaining_pass}};
  if (result.coefficient_range.has_range) {
    json range = json{{"inner_min", result.coefficient_range.inner_min},
                      {"inner_max", result.coefficient_range.inner_max}};
    if (result.coefficient_range.has_lipschitz) {
      range["lipschitz_on_range"] = result.coefficient_range.lipschitz_on_range;
    }
    diag["coefficient_range"] = range;
  }
  diag["young"] = json{{"lhs", young.lhs},
                       {"rhs_without_constant", young.rhs_without_constant},
                       {"constant", young_constant},
                       {"pass", young_pass}};
  diag["all_pass"] = all_pass;

  std::string failure;
  if (!sewing_pass) failure = "sewing lhs exceeds bound";
  else if (!chaining_pass) failure = "chaining identity defect too large";
  else if (!young_pass) failure = "young bound probe failed";

  std::vector<PendingFile> files;
  files.push_back({"diagnostics.json", diag.dump(2) + "\n"});
  files.push_back(
      {"manifest.json", make_manifest("diagnose", config).dump(2) + "\n"});
  return write_all(out_dir, force, std::move(files), all_pass, failure);
}

}  // namespace

ExecutionResult execute(const std::string& subcommand, const json& resolved,
                        const std::string& out_dir, bool force) {
  if (subcommand == "fbm") return execute_fbm(resolved, out_dir, force);
  if (subcommand == "simulate") {
    return execute_simulate(resolved, out_dir, force);
  }
  if (subcommand == "convergence") {
    return execute_convergence(resolved, out_dir, force);
  }
  if (subcommand == "diagnose") {
    return execute_diagnose(resolved, out_dir, force);
  }
  throw ValidationError("unknown subcommand: " + subcommand);
}

namespace {

struct SubcommandFlags {
  std::string config_path;
  std::string out_dir;
  bool force = false;
  std::vector<std::string> sets;
  // typed overrides; presence tracked through CLI11 option counts
  double hurst = 0, tau = 0, horizon = 0, lambda = 0, mu = 0, eps_margin = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0, refine = 0, replications = 0, max_triples = 0;
  std::string generator, coefficient, xi, inject, resolutions;

  CLI::Option* o_hurst = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_horizon = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_mu = nullptr;
  CLI::Option* o_eps = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_n = nullptr;
  CLI::Option* o_refine = nullptr;
  CLI::Option* o_reps = nullptr;
  CLI::Option* o_triples = nullptr;
  CLI::Option* o_generator = nullptr;
  CLI::Option* o_coefficient = nullptr;
  CLI::Option* o_xi = nullptr;
  CLI::Option* o_inject = nullptr;
  CLI::Option* o_resolutions = nullptr;
};

void attach_flags(CLI::App* cmd, SubcommandFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config or manifest file");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_flag("--force", f.force, "allow overwriting existing outputs");
  cmd->add_option("--set", f.sets,
                  "dotted-key config override, e.g. --set coefficient.kind=constant");
  f.o_seed = cmd->add_option("--seed", f.seed, "base RNG seed");
  f.o_hurst = cmd->add_option("--H", f.hurst, "Hurst parameter");
  f.o_tau = cmd->add_option("--tau", f.tau, "delay");
  f.o_horizon = cmd->add_option("--T", f.horizon, "time horizon");
  f.o_n = cmd->add_option("--n", f.n, "steps (per delay for solver commands)");
  f.o_lambda = cmd->add_option("--lambda", f.lambda, "working Holder exponent");
  f.o_mu = cmd->add_option("--mu", f.mu, "sewing exponent (diagnose)");
  f.o_eps = cmd->add_option("--eps-margin", f.eps_margin,
                            "rate acceptance margin (convergence)");
  f.o_refine = cmd->add_option("--refine", f.refine, "reference refinement");
  f.o_reps = cmd->add_option("--replications", f.replications,
                             "Monte Carlo replications");
  f.o_triples = cmd->add_option("--max-triples", f.max_triples,
                                "triple budget for the chaining check");
  f.o_generator = cmd->add_option("--generator", f.generator,
                                  "fBm generator: circulant | cholesky");
  f.o_coefficient = cmd->add_option(
      "--coefficient", f.coefficient,
      "coefficient: constant:<c> | point_delay:<outer> | integral:<outer>:<density>");
  f.o_xi = cmd->add_option("--xi", f.xi,
                           "initial condition: constant:<c> | poly:<c0,c1,...>");
  f.o_inject = cmd->add_option("--inject", f.inject,
                               "synthetic errors n:e[,n:e...] (convergence)");
  f.o_resolutions = cmd->add_option("--resolutions", f.resolutions,
                                    "comma-separated resolution ladder");
}

json overlay_from_flags(const SubcommandFlags& f) {
  json overlay = json::object();
  if (f.o_seed->count()) overlay["seed"] = f.seed;
  if (f.o_hurst->count()) overlay["H"] = f.hurst;
  if (f.o_tau->count()) overlay["tau"] = f.tau;
  if (f.o_horizon->count()) overlay["T"] = f.horizon;
  if (f.o_n->count()) overlay["n"] = f.n;
  if (f.o_lambda->count()) overlay["lambda"] = f.lambda;
  if (f.o_mu->count()) overlay["mu"] = f.mu;
  if (f.o_eps->count()) overlay["eps_margin"] = f.eps_margin;
  if (f.o_refine->count()) overlay["refine"] = f.refine;
  if (f.o_reps->count()) overlay["replications"] = f.replications;
  if (f.o_triples->count()) overlay["max_triples"] = f.max_triples;
  if (f.o_generator->count()) overlay["generator"] = f.generator;
  if (f.o_coefficient->count()) overlay["coefficient"] = f.coefficient;
  if (f.o_xi->count()) overlay["xi"] = f.xi;
  if (f.o_inject->count()) overlay["inject"] = f.inject;
  if (f.o_resolutions->count()) overlay["resolutions"] = f.resolutions;
  return overlay;
}

int run_subcommand(const std::string& name, const SubcommandFlags& flags) {
  json config = default_config(name);
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw ValidationError("cannot read config: " + flags.config_path);
    json file_config = json::parse(in, nullptr, false);
    if (file_config.is_discarded()) {
      throw ValidationError("config is not valid JSON: " + flags.config_path);
    }
    if (file_config.contains("config")) {
      // manifest form: {"subcommand", "version", "config"}
      if (file_config.contains("subcommand") &&
          file_config["subcommand"] != name) {
        throw ValidationError("manifest subcommand '" +
                              file_config["subcommand"].get<std::string>() +
                              "' does not match '" + name + "'");
      }
      file_config = file_config["config"];
    }
    config = merge_config(config, file_config);
  }
  apply_dotted_overrides(config, flags.sets);
  config = merge_config(config, overlay_from_flags(flags));

  const json resolved = resolve_config(name, config);
  const std::string out_dir =
      flags.out_dir.empty() ? ("runs/" + name) : flags.out_dir;
  const ExecutionResult result = execute(name, resolved, out_dir, flags.force);
  for (const auto& file : result.files) {
    std::cout << out_dir << "/" << file << "\n";
  }
  if (!result.checks_passed) {
    std::cerr << "FAIL: " << result.failure << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main_entry(int argc, const char* const* argv) {
  CLI::App app{
      "Euler scheme for stochastic functional differential equations driven "
      "by fractional Brownian motion (H > 1/2)"};
  app.require_subcommand(1);

  SubcommandFlags fbm_flags, sim_flags, conv_flags, diag_flags;
  CLI::App* cmd_fbm = app.add_subcommand("fbm", "sample an fBm path to CSV");
  attach_flags(cmd_fbm, fbm_flags);
  CLI::App* cmd_sim =
      app.add_subcommand("simulate", "run one Euler solve of the SFDE");
  attach_flags(cmd_sim, sim_flags);
  CLI::App* cmd_conv = app.add_subcommand(
      "convergence", "strong-rate ladder experiment with log-log fit");
  attach_flags(cmd_conv, conv_flags);
  CLI::App* cmd_diag = app.add_subcommand(
      "diagnose", "remainder/sewing/chaining diagnostics on one solve");
  attach_flags(cmd_diag, diag_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (cmd_fbm->parsed()) return run_subcommand("fbm", fbm_flags);
    if (cmd_sim->parsed()) return run_subcommand("simulate", sim_flags);
    if (cmd_conv->parsed()) return run_subcommand("convergence", conv_flags);
    if (cmd_diag->parsed()) return run_subcommand("diagnose", diag_flags);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace sfde::cli
