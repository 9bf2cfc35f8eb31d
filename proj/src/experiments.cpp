#include "tylerscale/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "tylerscale/errors.hpp"
#include "tylerscale/tyler.hpp"

namespace tylerscale {

ExperimentKind parse_experiment_kind(const std::string& text) {
  if (text == "sample-complexity") return ExperimentKind::kSampleComplexity;
  if (text == "convergence") return ExperimentKind::kConvergence;
  if (text == "expansion-survey") return ExperimentKind::kExpansionSurvey;
  if (text == "diagnostics") return ExperimentKind::kDiagnostics;
  throw ConfigurationError("unknown experiment '" + text + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSampleComplexity: return "sample-complexity";
    case ExperimentKind::kConvergence: return "convergence";
    case ExperimentKind::kExpansionSurvey: return "expansion-survey";
    case ExperimentKind::kDiagnostics: return "diagnostics";
  }
  return "unknown";
}

ShapeSpec ShapeSpec::parse(const std::string& text) {
  ShapeSpec out;
  if (text == "identity") return out;
  try {
    if (text.rfind("cond:", 0) == 0) {
      out.kind = Kind::kCondition;
      std::size_t used = 0;
      out.kappa = std::stod(text.substr(5), &used);
      if (used != text.size() - 5) throw std::invalid_argument(text);
      if (!(out.kappa > 1.0) || !std::isfinite(out.kappa)) {
        throw ConfigurationError("shape condition number must be > 1");
      }
      return out;
    }
    if (text.rfind("random:", 0) == 0) {
      out.kind = Kind::kRandom;
      std::size_t used = 0;
      out.seed = std::stoull(text.substr(7), &used);
      if (used != text.size() - 7) throw std::invalid_argument(text);
      return out;
    }
  } catch (const ConfigurationError&) {
    throw;
  } catch (const std::logic_error&) {
  }
  throw ConfigurationError("unknown shape '" + text +
                           "' (expected identity, cond:K or random:SEED)");
}

std::string ShapeSpec::to_string() const {
  char buf[64];
  switch (kind) {
    case Kind::kIdentity: return "identity";
    case Kind::kCondition:
      std::snprintf(buf, sizeof buf, "cond:%.17g", kappa);
      return buf;
    case Kind::kRandom: return "random:" + std::to_string(seed);
  }
  return "identity";
}

ShapePD ShapeSpec::build(Index d) const {
  switch (kind) {
    case Kind::kIdentity: return ShapePD::identity(d);
    case Kind::kCondition: {
      Vector diag(d);
      for (Index i = 0; i < d; ++i) {
        diag(i) = d == 1 ? 1.0 : std::pow(kappa, static_cast<double>(i) / (d - 1));
      }
      return ShapePD::normalized(diag.asDiagonal().toDenseMatrix());
    }
    case Kind::kRandom: {
      CounterRng rng(SeedSpec{seed, 0}, 0);
      Matrix g(d, d);
      for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
      }
      const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
      Vector spectrum(d);
      for (Index i = 0; i < d; ++i) spectrum(i) = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
      return ShapePD::normalized(symmetrize(q * spectrum.asDiagonal() * q.transpose()));
    }
  }
  return ShapePD::identity(d);
}

void ExperimentConfig::validate() const {
  if (d < 1) throw ConfigurationError("d must be positive");
  if (trials < 1) throw ConfigurationError("trials must be at least 1");
  if (!(tol > 0.0)) throw ConfigurationError("tol must be > 0");
  if (subsets < 1) throw ConfigurationError("subsets must be positive");
  if (shape.kind == ShapeSpec::Kind::kCondition && !(shape.kappa > 1.0)) {
    throw ConfigurationError("shape condition number must be > 1");
  }
  if (kind == ExperimentKind::kDiagnostics) return;
  if (n_grid.empty()) throw ConfigurationError("n grid is empty");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw ConfigurationError("n grid must be strictly increasing");
    }
  }
  for (Index n : n_grid) {
    switch (kind) {
      case ExperimentKind::kSampleComplexity:
        if (n < d) throw ConfigurationError("every n must be at least d");
        break;
      case ExperimentKind::kConvergence:
        if (n_grid.size() != 1) {
          throw ConfigurationError("the convergence experiment takes a single n");
        }
        if (n < 2 * d) throw ConfigurationError("convergence needs n >= 2d");
        break;
      case ExperimentKind::kExpansionSurvey:
        if (n < d) throw ConfigurationError("every n must be at least d");
        if (n % 4 != 0) {
          throw ConfigurationError("survey counts must be multiples of 4 (beta = 1/4, 1/2)");
        }
        if (mode == CertificateMode::kExact) {
          if (n > kMaxExactInftyColumns) {
            throw ConfigurationError("exact survey supports n <= 20");
          }
        }
        break;
      case ExperimentKind::kDiagnostics:
        break;
    }
  }
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task) {
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  if (a.empty() || b.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, int>> all;
  for (double v : a) all.emplace_back(v, 0);
  for (double v : b) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end());
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second == 0) rank_sum_a += avg_rank;
    }
    i = j;
  }
  const double u = rank_sum_a - na * (na + 1.0) / 2.0;
  const double mean_u = na * nb / 2.0;
  const double total = na + nb;
  const double var_u = na * nb / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
  if (!(var_u > 0.0)) return 1.0;
  const double z = std::abs(u - mean_u) / std::sqrt(var_u);
  return std::erfc(z / std::sqrt(2.0));
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct TrialKey {
  Index n;
  long trial;
};

std::vector<TrialKey> trial_grid(const ExperimentConfig& config) {
  std::vector<TrialKey> keys;
  for (Index n : config.n_grid) {
    for (long t = 0; t < config.trials; ++t) keys.push_back({n, t});
  }
  return keys;
}

SeedSpec trial_seed(const ExperimentConfig& config, long trial) {
  return {config.master_seed, static_cast<std::uint64_t>(trial)};
}

}  // namespace

SampleComplexityResult run_sample_complexity(const ExperimentConfig& config) {
  config.validate();
  const ShapePD shape = config.shape.build(config.d);
  const EllipticalModel model(shape, config.radial);
  const std::vector<TrialKey> keys = trial_grid(config);
  SampleComplexityResult result;
  result.rows.resize(keys.size());
  SolverConfig solver;
  solver.tol = config.tol;

  parallel_for(keys.size(), config.threads, [&](std::size_t i) {
    SampleComplexityRow& row = result.rows[i];
    row.d = config.d;
    row.n = keys[i].n;
    row.trial = keys[i].trial;
    row.seed = config.master_seed;
    try {
      const Matrix x = sample_elliptical(model, keys[i].n, trial_seed(config, keys[i].trial));
      const EstimatorResult est = tyler_iterate(x, solver);
      row.iterations = est.iterations;
      row.converged = est.converged;
      row.rel_op_error = relative_op_error(shape, est.sigma_hat);
    } catch (const std::exception&) {
      row.rel_op_error = std::numeric_limits<double>::quiet_NaN();
      row.converged = false;
    }
  });

  std::vector<double> xs;
  std::vector<double> ys;
  for (Index n : config.n_grid) {
    std::vector<double> errors;
    long converged = 0;
    for (const SampleComplexityRow& row : result.rows) {
      if (row.n != n) continue;
      if (!std::isnan(row.rel_op_error)) errors.push_back(row.rel_op_error);
      converged += row.converged ? 1 : 0;
    }
    const double med = median(errors);
    result.n.push_back(n);
    result.median_error.push_back(med);
    result.converged_trials.push_back(converged);
    if (std::isfinite(med) && med > 0.0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(med);
    }
  }
  result.slope = log_log_slope(xs, ys);
  return result;
}

void write_csv(std::ostream& out, const SampleComplexityResult& result) {
  out << "d,n,trial,seed,rel_op_error,iterations,converged\n";
  for (const SampleComplexityRow& r : result.rows) {
    out << r.d << ',' << r.n << ',' << r.trial << ',' << r.seed << ','
        << fmt(r.rel_op_error) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
        << '\n';
  }
  out << "# summary\n";
  out << "n,median_rel_op_error,converged_trials\n";
  for (std::size_t i = 0; i < result.n.size(); ++i) {
    out << result.n[i] << ',' << fmt(result.median_error[i]) << ','
        << result.converged_trials[i] << '\n';
  }
  out << "log_log_slope," << fmt(result.slope) << '\n';
}

ConvergenceResult run_convergence(const ExperimentConfig& config) {
  config.validate();
  const Index n = config.n_grid.front();
  const ShapePD shape = config.shape.build(config.d);
  const EllipticalModel model(shape, config.radial);
  ConvergenceResult result;
  result.d = config.d;
  result.n = n;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  std::vector<std::vector<ConvergenceRow>> traces(result.trials.size());

  parallel_for(result.trials.size(), config.threads, [&](std::size_t i) {
    ConvergenceTrial& trial = result.trials[i];
    trial.trial = static_cast<long>(i);
    trial.seed = config.master_seed;
    std::vector<ConvergenceRow>& rows = traces[i];
    try {
      const Matrix x = sample_elliptical(model, n, trial_seed(config, trial.trial));
      SolverConfig reference;
      reference.tol = kReferenceTol;
      reference.max_iters = 100000;
      const Matrix limit = tyler_iterate(x, reference).sigma_hat.matrix();

      SolverConfig solver;
      solver.tol = config.tol;
      const Matrix identity = Matrix::Identity(config.d, config.d);
      rows.push_back({trial.trial, 0, relative_frobenius_error(limit, identity), 0.0,
                      tyler_fixed_point_residual(x, ShapePD::identity(config.d))});
      const EstimatorResult est = tyler_iterate(
          x, solver, [&](long iter, const Matrix& sigma, double residual, double cap) {
            rows.push_back({trial.trial, iter, relative_frobenius_error(limit, sigma), cap,
                            residual});
          });
      rows.front().capacity = est.capacity_trace.front();
      trial.iterations = est.iterations;
      trial.converged = est.converged;
      trial.failure = est.failure;

      const long last = static_cast<long>(rows.size()) - 1;
      const long window = std::min(kTailWindow, last);
      trial.tail_ratio =
          window > 0 ? std::pow(rows[last].frobenius_gap_to_limit /
                                    rows[last - window].frobenius_gap_to_limit,
                                1.0 / static_cast<double>(window))
                     : std::numeric_limits<double>::quiet_NaN();
      long burn = last;
      while (burn > 0 && rows[burn].frobenius_gap_to_limit <=
                             kContractionThreshold * rows[burn - 1].frobenius_gap_to_limit) {
        --burn;
      }
      trial.burn_in = burn;
      double rise = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 1; t < est.capacity_trace.size(); ++t) {
        rise = std::max(rise, est.capacity_trace[t] - est.capacity_trace[t - 1]);
      }
      trial.max_capacity_increase = est.capacity_trace.size() > 1 ? rise : 0.0;
    } catch (const std::exception& e) {
      trial.failure = e.what();
      trial.tail_ratio = std::numeric_limits<double>::quiet_NaN();
    }
  });

  for (const auto& rows : traces) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

void write_csv(std::ostream& out, const ConvergenceResult& result) {
  out << "trial,iter,frobenius_gap_to_limit,capacity,residual\n";
  for (const ConvergenceRow& r : result.rows) {
    out << r.trial << ',' << r.iter << ',' << fmt(r.frobenius_gap_to_limit) << ','
        << fmt(r.capacity) << ',' << fmt(r.residual) << '\n';
  }
  out << "# summary\n";
  out << "trial,seed,d,n,iterations,converged,burn_in,tail_contraction_ratio,"
         "max_capacity_increase,failure\n";
  for (const ConvergenceTrial& t : result.trials) {
    out << t.trial << ',' << t.seed << ',' << result.d << ',' << result.n << ','
        << t.iterations << ',' << (t.converged ? 1 : 0) << ',' << t.burn_in << ','
        << fmt(t.tail_ratio) << ',' << fmt(t.max_capacity_increase) << ',' << t.failure
        << '\n';
  }
}

namespace {

Matrix control_frame(Index d) {
  if (d % 2 == 0) return Matrix::Identity(d, d);
  Matrix v(d, 2 * d);
  v << Matrix::Identity(d, d), Matrix::Identity(d, d);
  return v;
}

void fill_survey_row(SurveyRow& row, const Frame& frame, const ExperimentConfig& config,
                     SeedSpec seed) {
  const bool exact = config.mode == CertificateMode::kExact;
  const Index n = frame.count();
  const ExpansionValue inf =
      exact || n <= kMaxExactInftyColumns ? infty_expansion_exact(frame)
                                          : infty_expansion_sampled(frame, config.subsets, seed);
  row.lambda_infty = inf.lambda;
  bool all_exact = inf.mode == CertificateMode::kExact;
  const ErrorReport rep = error_report(frame);
  row.op_error_rel = rep.op_error / rep.size;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.alpha_min_quarter = row.alpha_max_quarter = nan;
  row.alpha_min_half = row.alpha_max_half = nan;
  if (n % 4 == 0) {
    const PseudorandomResult q =
        pseudorandom_check(frame, Rational{1, 4}, config.mode, config.subsets, seed);
    row.alpha_min_quarter = q.alpha_min;
    row.alpha_max_quarter = q.alpha_max;
    all_exact = all_exact && q.mode == CertificateMode::kExact;
  }
  if (n % 2 == 0) {
    const PseudorandomResult h =
        pseudorandom_check(frame, Rational{1, 2}, config.mode, config.subsets, seed);
    row.alpha_min_half = h.alpha_min;
    row.alpha_max_half = h.alpha_max;
    all_exact = all_exact && h.mode == CertificateMode::kExact;
  }
  row.mode = all_exact ? CertificateMode::kExact : CertificateMode::kSampled;
}

}  // namespace

SurveyResult run_expansion_survey(const ExperimentConfig& config) {
  config.validate();
  const std::vector<TrialKey> keys = trial_grid(config);
  SurveyResult result;
  result.rows.resize(keys.size() + 1);

  SurveyRow& control = result.rows.front();
  const Frame identity(control_frame(config.d));
  control.d = config.d;
  control.n = identity.count();
  control.trial = -1;
  control.seed = config.master_seed;
  fill_survey_row(control, identity, config, trial_seed(config, 0));

  parallel_for(keys.size(), config.threads, [&](std::size_t i) {
    SurveyRow& row = result.rows[i + 1];
    row.d = config.d;
    row.n = keys[i].n;
    row.trial = keys[i].trial;
    row.seed = config.master_seed;
    const SeedSpec seed = trial_seed(config, keys[i].trial);
    try {
      const Frame frame(sample_sphere_matrix(config.d, keys[i].n, seed));
      fill_survey_row(row, frame, config, seed);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.lambda_infty = row.op_error_rel = nan;
      row.alpha_min_quarter = row.alpha_max_quarter = nan;
      row.alpha_min_half = row.alpha_max_half = nan;
      row.failure = e.what();
    }
  });
  return result;
}

void write_csv(std::ostream& out, const SurveyResult& result) {
  out << "d,n,trial,seed,mode,lambda_infty,alpha_min_beta_1_4,alpha_max_beta_1_4,"
         "alpha_min_beta_1_2,alpha_max_beta_1_2,op_error_over_s";
  for (double eps : kSurveyEps) out << ",balanced_eps_" << fmt(eps);
  out << ",failure\n";
  for (const SurveyRow& r : result.rows) {
    out << r.d << ',' << r.n << ',' << (r.trial < 0 ? std::string("control") : std::to_string(r.trial))
        << ',' << r.seed << ',' << to_string(r.mode) << ',' << fmt(r.lambda_infty) << ','
        << fmt(r.alpha_min_quarter) << ',' << fmt(r.alpha_max_quarter) << ','
        << fmt(r.alpha_min_half) << ',' << fmt(r.alpha_max_half) << ','
        << fmt(r.op_error_rel);
    for (double eps : kSurveyEps) out << ',' << (r.op_error_rel <= eps ? 1 : 0);
    out << ',' << r.failure << '\n';
  }
  out << "# summary\n";
  out << "n,trials,lambda_infty_positive,median_lambda_infty,median_alpha_min_half_over_n\n";
  std::vector<Index> counts;
  for (const SurveyRow& r : result.rows) {
    if (r.trial >= 0 && std::find(counts.begin(), counts.end(), r.n) == counts.end()) {
      counts.push_back(r.n);
    }
  }
  for (Index n : counts) {
    long total = 0;
    long positive = 0;
    std::vector<double> lambdas;
    std::vector<double> alphas;
    for (const SurveyRow& r : result.rows) {
      if (r.trial < 0 || r.n != n) continue;
      ++total;
      if (r.lambda_infty > 0.0) ++positive;
      if (!std::isnan(r.lambda_infty)) lambdas.push_back(r.lambda_infty);
      if (!std::isnan(r.alpha_min_half)) alphas.push_back(r.alpha_min_half / static_cast<double>(n));
    }
    out << n << ',' << total << ',' << positive << ',' << fmt(median(lambdas)) << ','
        << fmt(median(alphas)) << '\n';
  }
}

bool DiagnosticsResult::passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const DiagnosticsEntry& e) { return e.passed; });
}

std::vector<std::pair<std::string, Frame>> diagnostic_battery(std::uint64_t seed) {
  std::vector<std::pair<std::string, Frame>> battery;
  Matrix repeated(2, 3);
  repeated << 1, 1, 0, 0, 0, 1;
  battery.emplace_back("repeated_e1_e1_e2", Frame(repeated));
  battery.emplace_back("repeated_scaled_10", Frame(10.0 * repeated));
  Matrix short_column(2, 3);
  short_column << 1, 0, 1e-3, 0, 1, 1e-3;
  battery.emplace_back("short_column", Frame(short_column));
  battery.emplace_back("identity_over_sqrt2",
                       Frame(Matrix::Identity(2, 2) / std::sqrt(2.0)));
  Matrix mercedes(2, 3);
  for (int j = 0; j < 3; ++j) {
    const double angle = M_PI / 2.0 + 2.0 * M_PI * j / 3.0;
    mercedes(0, j) = std::cos(angle);
    mercedes(1, j) = std::sin(angle);
  }
  battery.emplace_back("mercedes_benz", Frame(mercedes));
  Matrix equiangular(2, 4);
  for (int j = 0; j < 4; ++j) {
    equiangular(0, j) = std::cos(M_PI * j / 4.0);
    equiangular(1, j) = std::sin(M_PI * j / 4.0);
  }
  battery.emplace_back("equiangular_4", Frame(equiangular));
  battery.emplace_back("sphere_3x6", Frame(sample_sphere_matrix(3, 6, SeedSpec{seed, 0})));
  battery.emplace_back("gaussian_4x10", sample_gaussian_frame(4, 10, 1.0, SeedSpec{seed, 1}));
  const EllipticalModel model(ShapeSpec{ShapeSpec::Kind::kCondition, 10.0, 0}.build(3),
                              RadialLaw::student_t(3.0));
  battery.emplace_back("elliptical_3x8", Frame(sample_elliptical(model, 8, SeedSpec{seed, 2})));
  battery.emplace_back("sphere_5x12_scaled_10",
                       Frame(10.0 * sample_sphere_matrix(5, 12, SeedSpec{seed, 3})));
  return battery;
}

DiagnosticsResult run_diagnostics(const ExperimentConfig& config) {
  DiagnosticsResult result;
  for (auto& [name, frame] : diagnostic_battery(config.master_seed)) {
    DiagnosticsEntry entry{name, derivative_diagnostics(frame, kDiagnosticStep)};
    entry.passed = entry.report.passes();
    result.entries.push_back(std::move(entry));
  }
  return result;
}

void write_csv(std::ostream& out, const DiagnosticsResult& result) {
  out << "frame,check,h,size,analytic,finite_difference,abs_error,rel_error,passed\n";
  for (const DiagnosticsEntry& e : result.entries) {
    for (const DerivativeCheck* c :
         {&e.report.quadratic_form, &e.report.column_norm, &e.report.size_change}) {
      out << e.frame << ',' << c->name << ',' << fmt(e.report.h) << ','
          << fmt(e.report.size) << ',' << fmt(c->analytic) << ','
          << fmt(c->finite_difference) << ',' << fmt(c->abs_error) << ','
          << fmt(c->rel_error) << ',' << (e.passed ? 1 : 0) << '\n';
    }
  }
}

}  // namespace tylerscale
