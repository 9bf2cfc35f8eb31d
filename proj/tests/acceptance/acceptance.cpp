// Acceptance checks. Each criterion prints one PASS/FAIL line with the
// measured values; the exit status is nonzero if any selected criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tylerscale/expansion.hpp"
#include "tylerscale/experiments.hpp"
#include "tylerscale/sampler.hpp"
#include "tylerscale/scaler.hpp"
#include "tylerscale/tyler.hpp"

using namespace tylerscale;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Damped fixed-point iteration with LU inverses.
Matrix damped_oracle(const Matrix& x, double tol) {
  const Index d = x.rows();
  const double n = static_cast<double>(x.cols());
  Matrix sigma = Matrix::Identity(d, d);
  for (int k = 0; k < 1000000; ++k) {
    const Matrix inv = sigma.fullPivLu().inverse();
    Matrix t = Matrix::Zero(d, d);
    for (Index j = 0; j < x.cols(); ++j) {
      t += x.col(j) * x.col(j).transpose() / x.col(j).dot(inv * x.col(j));
    }
    t *= static_cast<double>(d) / n;
    if ((t - sigma).norm() <= tol) return sigma;
    sigma = 0.5 * sigma + 0.5 * t;
    sigma *= static_cast<double>(d) / sigma.trace();
  }
  throw std::runtime_error("damped oracle did not converge");
}

// 50 sphere-uniform inputs, d in {2, 3, 4}, n = 4d.
std::vector<Matrix> oracle_battery() {
  std::vector<Matrix> out;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Index d = 2 + static_cast<Index>(t % 3);
    out.push_back(sample_sphere_matrix(d, 4 * d, SeedSpec{2024, t}));
  }
  return out;
}

// 20 balanced frames, d <= 3, even n <= 12.
std::vector<Frame> balanced_battery() {
  std::vector<Frame> out;
  SolverConfig c;
  c.tol = 1e-14;
  c.max_iters = 100000;
  for (std::uint64_t t = 0; out.size() < 20; ++t) {
    const Index d = 2 + static_cast<Index>(t % 2);
    const Index n = 6 + 2 * static_cast<Index>((t / 2) % 4);
    const ScalingResult r = solve_scaling(Frame(sample_sphere_matrix(d, n, SeedSpec{909, t})), c,
                                          ScalingMethod::kFlipFlop);
    if (r.final_error <= 1e-12) out.emplace_back(r.balanced);
  }
  return out;
}

Outcome criterion_1() {
  const auto start = Clock::now();
  long worst_iters = 0;
  double worst_residual = 0.0;
  bool converged = true;
  for (Index d = 1; d <= 8; ++d) {
    const EstimatorResult r = tyler_iterate(Matrix::Identity(d, d), SolverConfig{});
    worst_iters = std::max(worst_iters, r.iterations);
    worst_residual = std::max(worst_residual, r.residual);
    converged = converged && r.converged;
  }
  const double t = seconds_since(start);
  return {converged && worst_iters <= 2 && worst_residual <= 1e-12 && t < 1.0,
          "max iterations " + std::to_string(worst_iters) + ", max residual " +
              num(worst_residual) + ", " + num(t) + " s"};
}

Outcome criterion_2() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const Matrix& x : oracle_battery()) {
    SolverConfig c;
    c.tol = 1e-12;
    const EstimatorResult r = tyler_iterate(x, c);
    worst = std::max(worst, (r.sigma_hat.matrix() - damped_oracle(x, 1e-12)).norm());
  }
  const double t = seconds_since(start);
  return {worst <= 1e-8 && t < 30.0,
          "max Frobenius gap to oracle " + num(worst) + " over 50 inputs, " + num(t) + " s"};
}

Outcome criterion_3() {
  const auto start = Clock::now();
  double worst_gap = 0.0;
  double worst_err = 0.0;
  for (const Matrix& x : oracle_battery()) {
    SolverConfig c;
    c.tol = 1e-12;
    const EstimatorResult est = tyler_iterate(x, c);
    const ScalingResult sc = solve_scaling(Frame(x), c, ScalingMethod::kFlipFlop);
    const ShapePD from_scaling = estimator_from_scaling(sc.scaling.left());
    worst_gap = std::max(worst_gap, (from_scaling.matrix() - est.sigma_hat.matrix()).norm());
    const EstimatorScaling back = scaling_from_estimator(x, est.sigma_hat);
    const ErrorReport rep = error_report_of(back.scaling.apply(x));
    worst_err = std::max(worst_err, rep.op_error / rep.size);
  }
  const double t = seconds_since(start);
  return {worst_gap <= 1e-6 && worst_err <= 1e-6 && t < 60.0,
          "max estimator gap " + num(worst_gap) + ", max op_error/s " + num(worst_err) + ", " +
              num(t) + " s"};
}

Outcome criterion_4() {
  const auto start = Clock::now();
  int passed = 0;
  int total = 0;
  double worst_rel = 0.0;
  for (const auto& [name, frame] : diagnostic_battery(0)) {
    const DerivativeReport r = derivative_diagnostics(frame, 1e-6);
    ++total;
    passed += r.passes(1e-3) ? 1 : 0;
    for (const DerivativeCheck* c : {&r.quadratic_form, &r.column_norm, &r.size_change}) {
      if (std::abs(c->analytic) > 1e-12 * std::max(1.0, r.size * r.size)) {
        worst_rel = std::max(worst_rel, c->rel_error);
      }
    }
  }
  const double t = seconds_since(start);
  return {passed == total && total == 10 && t < 5.0,
          std::to_string(passed) + "/" + std::to_string(total) +
              " frames pass, max relative error " + num(worst_rel) + ", " + num(t) + " s"};
}

Outcome criterion_5() {
  long steps = 0;
  long increases = 0;
  double worst_rise = -INFINITY;
  SolverConfig c;
  for (const auto& [name, frame] : diagnostic_battery(0)) {
    FlowState state = FlowState::start(frame);
    double s = size_of(state.frame);
    for (long k = 0; k < 20000; ++k) {
      const ErrorReport rep = error_report_of(state.frame);
      if (rep.op_error / rep.size <= 1e-12) break;
      try {
        state = gradient_flow_step(state, c);
      } catch (const std::exception&) {
        break;
      }
      const double next = size_of(state.frame);
      worst_rise = std::max(worst_rise, next - s);
      increases += next > s + 1e-12 ? 1 : 0;
      s = next;
      ++steps;
    }
  }
  return {increases == 0, std::to_string(steps) + " accepted steps, " +
                              std::to_string(increases) + " size increases, max change " +
                              num(worst_rise)};
}

ExperimentConfig sample_complexity_config(RadialLaw radial) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kSampleComplexity;
  c.d = 16;
  c.n_grid = {256, 512, 1024, 2048, 4096};
  c.trials = 50;
  c.radial = radial;
  c.master_seed = 1;
  return c;
}

Outcome criterion_6() {
  const auto start = Clock::now();
  const SampleComplexityResult r = run_sample_complexity(sample_complexity_config(RadialLaw::constant()));
  const double ratio = r.median_error.front() / r.median_error.back();
  const double t = seconds_since(start);
  return {r.slope >= -0.70 && r.slope <= -0.30 && ratio >= 2.5 && t < 600.0,
          "slope " + num(r.slope) + ", median ratio n=256/n=4096 " + num(ratio) + ", " + num(t) +
              " s"};
}

Outcome criterion_7() {
  const SampleComplexityResult base =
      run_sample_complexity(sample_complexity_config(RadialLaw::constant()));
  long mismatches = 0;
  double worst = 0.0;
  for (const RadialLaw law : {RadialLaw::gaussian_norm(), RadialLaw::student_t(2.0)}) {
    const SampleComplexityResult other = run_sample_complexity(sample_complexity_config(law));
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
      const double a = base.rows[i].rel_op_error;
      const double b = other.rows[i].rel_op_error;
      if (a != b) {
        ++mismatches;
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " of " +
                               std::to_string(2 * base.rows.size()) +
                               " error values differ bitwise, max relative deviation " +
                               num(worst)};
}

Outcome criterion_8() {
  const auto start = Clock::now();
  ExperimentConfig c;
  c.kind = ExperimentKind::kConvergence;
  c.d = 16;
  c.n_grid = {64};
  c.trials = 20;
  c.master_seed = 1;
  const ConvergenceResult r = run_convergence(c);
  int contracting = 0;
  int monotone = 0;
  double worst_ratio = 0.0;
  double worst_rise = -INFINITY;
  for (const ConvergenceTrial& trial : r.trials) {
    contracting += trial.tail_ratio <= 0.95 ? 1 : 0;
    monotone += trial.max_capacity_increase <= 1e-10 ? 1 : 0;
    worst_ratio = std::max(worst_ratio, trial.tail_ratio);
    worst_rise = std::max(worst_rise, trial.max_capacity_increase);
  }
  const double t = seconds_since(start);
  return {contracting >= 18 && monotone == 20 && t < 120.0,
          std::to_string(contracting) + "/20 trials with tail ratio <= 0.95 (max " +
              num(worst_ratio) + "), capacity monotone on " + std::to_string(monotone) +
              "/20 (max rise " + num(worst_rise) + "), " + num(t) + " s"};
}

Outcome criterion_9() {
  const auto start = Clock::now();
  int held = 0;
  double min_cheeger_margin = INFINITY;
  double min_quantum_margin = INFINITY;
  for (const Frame& f : balanced_battery()) {
    const double lambda_infty = infty_expansion_exact(f).lambda;
    const double ch = cheeger_constant(f).ch;
    const double lambda_q = quantum_expansion_exact(f).lambda;
    min_cheeger_margin = std::min(min_cheeger_margin, ch - lambda_infty / 6.0);
    min_quantum_margin = std::min(min_quantum_margin, lambda_q - ch * ch);
    held += (ch >= lambda_infty / 6.0 && lambda_q >= ch * ch) ? 1 : 0;
  }
  const double t = seconds_since(start);
  return {held == 20 && t < 120.0,
          std::to_string(held) + "/20 frames, min ch - lambda_infty/6 " + num(min_cheeger_margin) +
              ", min lambda_quantum - ch^2 " + num(min_quantum_margin) + ", " + num(t) + " s"};
}

Outcome criterion_10() {
  const auto start = Clock::now();
  int held = 0;
  double worst = -INFINITY;
  for (const Frame& f : balanced_battery()) {
    const ErrorReport rep = error_report(f);
    const double s = rep.size;
    const double eps = rep.op_error / s;
    const double lambda = infty_expansion_exact(f).lambda;
    const PseudorandomResult p =
        pseudorandom_check(f, Rational{1, 2}, CertificateMode::kExact, 1, SeedSpec{});
    // Forward: s (1 - lambda) <= min{s (1 + eps) - alpha_min, alpha_max - s (1 - eps)}.
    const double forward =
        s * (1.0 - lambda) - std::min(s * (1.0 + eps) - p.alpha_min, p.alpha_max - s * (1.0 - eps));
    // Converse: s (lambda - eps) <= alpha_min <= alpha_max <= s (2 - (lambda - eps)).
    const double conv_lo = s * (lambda - eps) - p.alpha_min;
    const double conv_mid = p.alpha_min - p.alpha_max;
    const double conv_hi = p.alpha_max - s * (2.0 - (lambda - eps));
    const double violation = std::max({forward, conv_lo, conv_mid, conv_hi});
    worst = std::max(worst, violation);
    held += violation <= 1e-12 * s ? 1 : 0;
  }
  const double t = seconds_since(start);
  return {held == 20 && t < 120.0, std::to_string(held) + "/20 frames, max violation " +
                                       num(worst) + ", " + num(t) + " s"};
}

Outcome criterion_11() {
  ExperimentConfig c;
  c.kind = ExperimentKind::kExpansionSurvey;
  c.d = 4;
  c.n_grid = {16};
  c.trials = 100;
  c.mode = CertificateMode::kExact;
  c.master_seed = 1;
  const SurveyResult r = run_expansion_survey(c);
  int positive = 0;
  int balanced = 0;
  double best = -INFINITY;
  for (const SurveyRow& row : r.rows) {
    if (row.trial < 0) continue;
    positive += row.lambda_infty > 0.0 ? 1 : 0;
    balanced += row.op_error_rel <= 0.5 ? 1 : 0;
    best = std::max(best, row.lambda_infty);
  }
  const double control = r.rows.front().lambda_infty;
  // The same draws after scaling to doubly balanced, reported alongside.
  int scaled_positive = 0;
  SolverConfig solver;
  solver.tol = 1e-12;
  for (long t = 0; t < c.trials; ++t) {
    const Frame raw(sample_sphere_matrix(c.d, 16, SeedSpec{c.master_seed, static_cast<std::uint64_t>(t)}));
    const ScalingResult sc = solve_scaling(raw, solver, ScalingMethod::kFlipFlop);
    scaled_positive += infty_expansion_exact(Frame(sc.balanced)).lambda > 0.0 ? 1 : 0;
  }
  return {positive >= 95 && control == 0.0,
          std::to_string(positive) + "/100 trials with lambda_infty > 0 (max " + num(best) +
              ", " + std::to_string(balanced) + " with op_error/s <= 0.5), control lambda_infty " +
              num(control) + "; after scaling to balanced " + std::to_string(scaled_positive) +
              "/100"};
}

template <typename Run>
bool rerun_identical(const ExperimentConfig& c, Run run) {
  std::ostringstream a;
  std::ostringstream b;
  write_csv(a, run(c));
  ExperimentConfig other = c;
  other.threads = c.threads == 1 ? 3 : 1;
  write_csv(b, run(other));
  return !a.str().empty() && a.str() == b.str();
}

Outcome criterion_12() {
  ExperimentConfig sc;
  sc.kind = ExperimentKind::kSampleComplexity;
  sc.d = 4;
  sc.n_grid = {16, 64};
  sc.trials = 10;
  sc.radial = RadialLaw::student_t(2.0);
  sc.shape = ShapeSpec::parse("random:3");
  sc.master_seed = 12;
  sc.threads = 1;
  ExperimentConfig cv = sc;
  cv.kind = ExperimentKind::kConvergence;
  cv.n_grid = {16};
  ExperimentConfig sv = sc;
  sv.kind = ExperimentKind::kExpansionSurvey;
  sv.n_grid = {8, 12};
  sv.mode = CertificateMode::kExact;
  ExperimentConfig sampled = sv;
  sampled.n_grid = {24};
  sampled.mode = CertificateMode::kSampled;
  sampled.subsets = 100;
  ExperimentConfig dg;
  dg.kind = ExperimentKind::kDiagnostics;

  int same = 0;
  same += rerun_identical(sc, run_sample_complexity);
  same += rerun_identical(cv, run_convergence);
  same += rerun_identical(sv, run_expansion_survey);
  same += rerun_identical(sampled, run_expansion_survey);
  same += rerun_identical(dg, run_diagnostics);
  return {same == 5, std::to_string(same) + "/5 experiment configs byte-identical on rerun"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5,  criterion_6,
      criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12};
  bool all = true;
  for (int k = 1; k <= 12; ++k) {
    if (only != 0 && only != k) continue;
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << ": " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
