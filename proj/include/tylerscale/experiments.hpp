#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tylerscale/expansion.hpp"
#include "tylerscale/sampler.hpp"
#include "tylerscale/scaler.hpp"
#include "tylerscale/shape.hpp"

namespace tylerscale {

enum class ExperimentKind { kSampleComplexity, kConvergence, kExpansionSurvey, kDiagnostics };

ExperimentKind parse_experiment_kind(const std::string& text);
std::string to_string(ExperimentKind kind);

/// Shape matrix of the sampled model: "identity", "cond:K" (log-spaced
/// diagonal from 1 to K) or "random:SEED" (Q diag(10^u) Q^T, u in [-1, 1]).
/// Every variant is trace-normalized to d.
struct ShapeSpec {
  enum class Kind { kIdentity, kCondition, kRandom };
  Kind kind = Kind::kIdentity;
  double kappa = 1.0;
  std::uint64_t seed = 0;

  static ShapeSpec parse(const std::string& text);
  std::string to_string() const;
  ShapePD build(Index d) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSampleComplexity;
  Index d = 16;
  std::vector<Index> n_grid;
  long trials = 1;
  RadialLaw radial;
  ShapeSpec shape;
  std::uint64_t master_seed = 0;
  double tol = 1e-10;
  CertificateMode mode = CertificateMode::kSampled;
  long subsets = 2000;
  // Worker threads; 0 means one per hardware thread.
  unsigned threads = 0;
  std::string csv_path;
  std::string json_path;

  void validate() const;
};

/// Runs task(i) for i in [0, count) on a pool of workers. Each task writes its
/// own slot, so results do not depend on the schedule.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task);

double median(std::vector<double> values);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided Mann-Whitney U test p-value (normal approximation with tie
/// correction).
double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b);

// Sample complexity: relative operator error of the estimate against n.

struct SampleComplexityRow {
  Index d = 0;
  Index n = 0;
  long trial = 0;
  std::uint64_t seed = 0;
  double rel_op_error = 0.0;
  long iterations = 0;
  bool converged = false;
};

struct SampleComplexityResult {
  std::vector<SampleComplexityRow> rows;
  std::vector<Index> n;
  std::vector<double> median_error;
  std::vector<long> converged_trials;
  double slope = 0.0;
};

SampleComplexityResult run_sample_complexity(const ExperimentConfig& config);
void write_csv(std::ostream& out, const SampleComplexityResult& result);

// Convergence: per-iteration trace of one estimation per trial.

struct ConvergenceRow {
  long trial = 0;
  long iter = 0;
  double frobenius_gap_to_limit = 0.0;
  double capacity = 0.0;
  double residual = 0.0;
};

struct ConvergenceTrial {
  long trial = 0;
  std::uint64_t seed = 0;
  long iterations = 0;
  bool converged = false;
  long burn_in = 0;
  double tail_ratio = 0.0;
  double max_capacity_increase = 0.0;
  std::string failure;
};

struct ConvergenceResult {
  Index d = 0;
  Index n = 0;
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceTrial> trials;
};

inline constexpr long kTailWindow = 20;
inline constexpr double kContractionThreshold = 0.95;
inline constexpr double kReferenceTol = 1e-13;

ConvergenceResult run_convergence(const ExperimentConfig& config);
void write_csv(std::ostream& out, const ConvergenceResult& result);

// Expansion survey over sphere-uniform frames.

struct SurveyRow {
  Index d = 0;
  Index n = 0;
  long trial = -1;  // -1 marks the control frame
  std::uint64_t seed = 0;
  CertificateMode mode = CertificateMode::kSampled;
  double lambda_infty = 0.0;
  double alpha_min_quarter = 0.0;
  double alpha_max_quarter = 0.0;
  double alpha_min_half = 0.0;
  double alpha_max_half = 0.0;
  double op_error_rel = 0.0;
  std::string failure;
};

// Thresholds for the doubly-balanced flag columns.
inline constexpr double kSurveyEps[] = {0.1, 0.25, 0.5};

struct SurveyResult {
  std::vector<SurveyRow> rows;
};

SurveyResult run_expansion_survey(const ExperimentConfig& config);
void write_csv(std::ostream& out, const SurveyResult& result);

// Derivative diagnostics over a fixed battery.

struct DiagnosticsEntry {
  std::string frame;
  DerivativeReport report;
  bool passed = false;
};

struct DiagnosticsResult {
  std::vector<DiagnosticsEntry> entries;
  bool passed() const;
};

inline constexpr double kDiagnosticStep = 1e-6;

/// Named frames: degenerate, rescaled, balanced and seeded random members.
std::vector<std::pair<std::string, Frame>> diagnostic_battery(std::uint64_t seed);

DiagnosticsResult run_diagnostics(const ExperimentConfig& config);
void write_csv(std::ostream& out, const DiagnosticsResult& result);

}  // namespace tylerscale
