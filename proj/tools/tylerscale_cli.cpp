#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tylerscale/errors.hpp"
#include "tylerscale/expansion.hpp"
#include "tylerscale/experiments.hpp"
#include "tylerscale/report_json.hpp"
#include "tylerscale/sampler.hpp"
#include "tylerscale/scaler.hpp"
#include "tylerscale/tyler.hpp"

using namespace tylerscale;

namespace {

constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

struct Options {
  long d = 4;
  long n = 16;
  std::vector<long> n_grid;
  long trials = 1;
  std::uint64_t seed = 0;
  std::string radial = "constant";
  std::string shape = "identity";
  double tol = 1e-10;
  std::string method = "flipflop";
  std::string beta = "1/2";
  std::string mode = "exact";
  long subsets = 2000;
  unsigned threads = 0;
  std::string input;
  std::string csv;
  std::string json;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes `text` to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

Matrix load_or_sample_data(const Options& o) {
  if (!o.input.empty()) return read_matrix_file(o.input);
  const ShapePD shape = ShapeSpec::parse(o.shape).build(o.d);
  const EllipticalModel model(shape, RadialLaw::parse(o.radial));
  return sample_elliptical(model, o.n, SeedSpec{o.seed, 0});
}

Frame load_or_sample_frame(const Options& o) {
  if (!o.input.empty()) return read_frame_file(o.input);
  return Frame(sample_sphere_matrix(o.d, o.n, SeedSpec{o.seed, 0}));
}

int run_estimate(const Options& o) {
  SolverConfig config;
  config.tol = o.tol;
  const EstimatorResult result = tyler_iterate(load_or_sample_data(o), config);
  std::ostringstream out;
  write_estimate_json(out, result);
  emit(o.json, out.str());
  return 0;
}

int run_scale(const Options& o) {
  SolverConfig config;
  config.tol = o.tol;
  const ScalingMethod method = parse_scaling_method(o.method);
  const ScalingResult result = solve_scaling(load_or_sample_frame(o), config, method);
  std::ostringstream out;
  write_scaling_json(out, result, method, o.tol);
  emit(o.json, out.str());
  if (!o.csv.empty()) {
    std::ostringstream trajectory;
    write_trajectory_csv(trajectory, result.trajectory);
    emit(o.csv, trajectory.str());
  }
  return 0;
}

int run_expansion(const Options& o) {
  const Frame frame = load_or_sample_frame(o);
  const ExpansionReport report =
      expansion_report(frame, Rational::parse(o.beta), parse_certificate_mode(o.mode),
                       o.subsets, SeedSpec{o.seed, 0});
  std::ostringstream out;
  write_expansion_json(out, report, frame.count());
  emit(o.json, out.str());
  return 0;
}

ExperimentConfig experiment_config(const Options& o, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.d = o.d;
  if (o.n_grid.empty()) {
    c.n_grid = {static_cast<Index>(o.n)};
  } else {
    c.n_grid.assign(o.n_grid.begin(), o.n_grid.end());
  }
  c.trials = o.trials;
  c.radial = RadialLaw::parse(o.radial);
  c.shape = ShapeSpec::parse(o.shape);
  c.master_seed = o.seed;
  c.tol = o.tol;
  c.mode = parse_certificate_mode(o.mode);
  c.subsets = o.subsets;
  c.threads = o.threads;
  c.csv_path = o.csv;
  c.json_path = o.json;
  c.validate();
  return c;
}

template <typename Result>
void emit_csv(const ExperimentConfig& c, const Result& result) {
  std::ostringstream out;
  write_csv(out, result);
  emit(c.csv_path, out.str());
}

int run_experiment(const Options& o, ExperimentKind kind) {
  const ExperimentConfig c = experiment_config(o, kind);
  switch (kind) {
    case ExperimentKind::kSampleComplexity:
      emit_csv(c, run_sample_complexity(c));
      break;
    case ExperimentKind::kConvergence:
      emit_csv(c, run_convergence(c));
      break;
    case ExperimentKind::kExpansionSurvey:
      emit_csv(c, run_expansion_survey(c));
      break;
    case ExperimentKind::kDiagnostics:
      break;
  }
  return 0;
}

int run_derivatives(const Options& o) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kDiagnostics;
  c.master_seed = o.seed;
  const DiagnosticsResult result = run_diagnostics(c);
  std::ostringstream csv;
  write_csv(csv, result);
  emit(o.csv, csv.str());
  if (!o.json.empty()) {
    std::ostringstream json;
    write_diagnostics_json(json, result);
    emit(o.json, json.str());
  }
  if (!result.passed()) {
    std::cerr << "derivative check failed\n";
    return kExitCheckFailed;
  }
  return 0;
}

void add_io(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "Input matrix file");
  cmd->add_option("--csv", o.csv, "CSV output path (default stdout)");
  cmd->add_option("--json", o.json, "JSON output path (default stdout)");
}

void add_sampling(CLI::App* cmd, Options& o) {
  cmd->add_option("--d", o.d, "Dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--n", o.n, "Number of samples or columns")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--radial", o.radial, "Radial law: constant, gaussian or t:NU");
  cmd->add_option("--shape", o.shape, "Shape: identity, cond:K or random:SEED");
  cmd->add_option("--tol", o.tol, "Solver tolerance");
}

void add_certificates(CLI::App* cmd, Options& o) {
  cmd->add_option("--beta", o.beta, "Subset fraction P/Q");
  cmd->add_option("--mode", o.mode, "exact or sampled");
  cmd->add_option("--subsets", o.subsets, "Sampled subsets per certificate")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tyler's M-estimator, frame scaling and expansion certificates"};
  app.require_subcommand(1);
  Options o;

  auto* estimate = app.add_subcommand("estimate", "Estimate the shape matrix of data");
  add_sampling(estimate, o);
  add_io(estimate, o);

  auto* scale = app.add_subcommand("scale", "Scale a frame to doubly balanced");
  add_sampling(scale, o);
  add_io(scale, o);
  scale->add_option("--method", o.method, "flipflop or flow");

  auto* expansion = app.add_subcommand("expansion", "Expansion certificates of a frame");
  add_sampling(expansion, o);
  add_io(expansion, o);
  add_certificates(expansion, o);

  auto* experiment = app.add_subcommand("experiment", "Run an experiment sweep");
  experiment->require_subcommand(1);
  std::vector<std::pair<CLI::App*, ExperimentKind>> sweeps;
  for (auto [name, kind, about] :
       {std::tuple{"sample-complexity", ExperimentKind::kSampleComplexity,
                   "Estimation error against sample count"},
        std::tuple{"convergence", ExperimentKind::kConvergence,
                   "Per-iteration convergence trace"},
        std::tuple{"expansion-survey", ExperimentKind::kExpansionSurvey,
                   "Expansion certificates of random frames"}}) {
    auto* cmd = experiment->add_subcommand(name, about);
    add_sampling(cmd, o);
    add_io(cmd, o);
    add_certificates(cmd, o);
    cmd->add_option("--n-grid", o.n_grid, "Comma-separated counts")->delimiter(',');
    cmd->add_option("--trials", o.trials, "Trials per count")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sweeps.emplace_back(cmd, kind);
  }

  auto* diagnose = app.add_subcommand("diagnose", "Numerical self-checks");
  diagnose->require_subcommand(1);
  auto* derivatives = diagnose->add_subcommand("derivatives", "Flow derivative identities");
  derivatives->add_option("--seed", o.seed, "Seed of the random battery members");
  add_io(derivatives, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return run_estimate(o);
    if (scale->parsed()) return run_scale(o);
    if (expansion->parsed()) return run_expansion(o);
    for (auto& [cmd, kind] : sweeps) {
      if (cmd->parsed()) return run_experiment(o, kind);
    }
    if (derivatives->parsed()) return run_derivatives(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
