#include "tylerscale/scaler.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "tylerscale/errors.hpp"

namespace tylerscale {

ScalingPair::ScalingPair(Matrix left, Vector right)
    : L_(std::move(left)), R_(std::move(right)) {
  if (L_.rows() != L_.cols() || L_.rows() < 1) {
    throw std::invalid_argument("ScalingPair: left scaling must be square");
  }
  if (!L_.allFinite() || !R_.allFinite()) {
    throw std::invalid_argument("ScalingPair: non-finite entry");
  }
  if (R_.size() < 1 || !(R_.minCoeff() > 0.0)) {
    throw std::invalid_argument("ScalingPair: right scaling must be positive");
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(L_).singularValues();
  if (!(sv(sv.size() - 1) > 0.0)) {
    throw std::invalid_argument("ScalingPair: left scaling is singular");
  }
}

ScalingPair ScalingPair::identity(Index d, Index n) {
  return ScalingPair(Matrix::Identity(d, d), Vector::Ones(n));
}

Matrix ScalingPair::apply(const Matrix& v) const {
  return L_ * v * R_.asDiagonal();
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigurationError("solver tol must be > 0");
  if (max_iters && *max_iters < 1) {
    throw ConfigurationError("solver max_iters must be positive");
  }
  if (!(step_safety > 0.0 && step_safety <= 1.0)) {
    throw ConfigurationError("step_safety must lie in (0, 1]");
  }
  if (checkpoint_every < 1) {
    throw ConfigurationError("checkpoint_every must be positive");
  }
}

FlowState FlowState::start(const Frame& frame) {
  FlowState s{frame.matrix(), ScalingPair::identity(frame.dim(), frame.count()),
              0.0, 0.0, 0.0, std::make_shared<const Matrix>(frame.matrix())};
  return s;
}

double FlowState::reconstruction_error() const {
  const Matrix rebuilt = scaling.apply(*initial);
  return (frame - rebuilt).norm() / frame.norm();
}

namespace {

struct RawFlipFlop {
  Matrix left;
  Vector right;
  Matrix after_left;
  Matrix result;
};

RawFlipFlop flip_flop_raw(const Matrix& v) {
  const SymmetricEigen eig = symmetric_eigen(symmetrize(v * v.transpose()));
  const double lo = eig.values(0);
  const double hi = eig.values(eig.values.size() - 1);
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition) {
    throw NumericalError("Flip-Flop: Gram matrix is ill-conditioned (cond = " +
                         std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }
  RawFlipFlop out;
  out.left = eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() *
             eig.vectors.transpose();
  out.after_left = out.left * v;
  out.right = out.after_left.colwise().norm().transpose().cwiseInverse();
  if (!out.right.allFinite()) {
    throw NumericalError("Flip-Flop: zero column after the left step");
  }
  out.result = out.after_left * out.right.asDiagonal();
  return out;
}

FlowState flow_update(const FlowState& state, const ErrorReport& rep, double h) {
  const Index d = state.frame.rows();
  const Matrix left_factor = Matrix::Identity(d, d) - h * rep.E;
  const Vector right_factor = Vector::Ones(rep.F.size()) - h * rep.F;
  if (!(right_factor.minCoeff() > 0.0)) {
    throw NumericalError("gradient flow: step makes a right scaling non-positive");
  }
  FlowState next{left_factor * state.frame * right_factor.asDiagonal(),
                 ScalingPair(left_factor * state.scaling.left(),
                             state.scaling.right().cwiseProduct(right_factor)),
                 state.time + h, state.int_E_op + h * rep.e_op,
                 state.int_F_op + h * rep.f_op, state.initial};
  return next;
}

CheckpointRow checkpoint(double time, const ErrorReport& rep, double int_e,
                         double int_f) {
  return {time, rep.size, rep.e_op, rep.f_op, rep.delta, int_e, int_f};
}

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

FlipFlopStep flip_flop_step(const Frame& frame) {
  RawFlipFlop raw = flip_flop_raw(frame.matrix());
  return {Frame(std::move(raw.result)),
          ScalingPair(std::move(raw.left), std::move(raw.right)),
          std::move(raw.after_left)};
}

double flow_step_size(const ErrorReport& report, double step_safety) {
  return step_safety *
         std::min(0.1 / (report.e_op + report.f_op + 1e-30), 0.1 / report.size);
}

FlowState gradient_flow_step(const FlowState& state, const SolverConfig& config) {
  const ErrorReport rep = error_report_of(state.frame);
  const double h = flow_step_size(rep, config.step_safety);
  if (!(h >= kMinFlowStep)) {
    throw NumericalError("gradient flow: step size underflow (h = " +
                         std::to_string(h) + ")");
  }
  return flow_update(state, rep, h);
}

FlowState gradient_flow_step_fixed(const FlowState& state, double h) {
  if (!(h > 0.0)) throw ConfigurationError("gradient flow: h must be > 0");
  return flow_update(state, error_report_of(state.frame), h);
}

ScalingMethod parse_scaling_method(const std::string& text) {
  if (text == "flipflop") return ScalingMethod::kFlipFlop;
  if (text == "flow") return ScalingMethod::kFlow;
  throw ConfigurationError("unknown scaling method '" + text +
                           "' (expected flipflop or flow)");
}

std::string to_string(ScalingMethod method) {
  return method == ScalingMethod::kFlipFlop ? "flipflop" : "flow";
}

namespace {

ScalingResult solve_flip_flop(const Frame& frame, const SolverConfig& config) {
  const Matrix& v0 = frame.matrix();
  const Index d = frame.dim();
  const Index n = frame.count();
  const long max_rounds = config.max_iters.value_or(10000);

  Matrix left = Matrix::Identity(d, d);
  Vector right = Vector::Ones(n);
  Matrix v = v0;
  ErrorReport rep = error_report_of(v);
  double err = rep.op_error / rep.size;

  ScalingResult result{.scaling = ScalingPair::identity(d, n), .balanced = v};
  result.trajectory.push_back(checkpoint(0.0, rep, 0.0, 0.0));
  double best_err = err;
  Matrix best_left = left;
  Vector best_right = right;
  Matrix best_v = v;

  long round = 0;
  while (err > config.tol && round < max_rounds) {
    RawFlipFlop step;
    try {
      step = flip_flop_raw(v);
    } catch (const NumericalError& e) {
      result.failure = e.what();
      break;
    }
    ++round;
    // Fold the size-1 normalization into the left scaling.
    const double c = 1.0 / std::sqrt(size_of(step.result));
    left = c * step.left * left;
    right = right.cwiseProduct(step.right);
    v = left * v0 * right.asDiagonal();
    rep = error_report_of(v);
    const double next = rep.op_error / rep.size;
    if (next > err) ++result.error_increases;
    err = next;
    result.round_errors.push_back(err);
    if (round % config.checkpoint_every == 0) {
      result.trajectory.push_back(checkpoint(static_cast<double>(round), rep, 0.0, 0.0));
    }
    if (err < best_err) {
      best_err = err;
      best_left = left;
      best_right = right;
      best_v = v;
    }
  }
  result.iterations = round;
  result.converged = best_err <= config.tol;
  result.scaling = ScalingPair(best_left, best_right);
  result.balanced = best_v;
  result.final_error = best_err;
  return result;
}

ScalingResult solve_flow(const Frame& frame, const SolverConfig& config) {
  const long max_steps = config.max_iters.value_or(200000);
  FlowState state = FlowState::start(frame);
  ErrorReport rep = error_report_of(state.frame);
  double err = rep.op_error / rep.size;

  ScalingResult result{.scaling = state.scaling, .balanced = state.frame};
  result.input_unit_size = std::abs(rep.size - 1.0) <= 1e-12;
  result.trajectory.push_back(checkpoint(0.0, rep, 0.0, 0.0));
  FlowState best = state;
  double best_err = err;

  long steps = 0;
  while (err > config.tol && steps < max_steps) {
    const double h = flow_step_size(rep, config.step_safety);
    if (!(h >= kMinFlowStep)) {
      result.failure = "gradient flow: step size underflow";
      break;
    }
    FlowState next = state;
    try {
      next = flow_update(state, rep, h);
    } catch (const NumericalError& e) {
      result.failure = e.what();
      break;
    }
    ++steps;
    const double previous_size = rep.size;
    state = std::move(next);
    rep = error_report_of(state.frame);
    if (rep.size > previous_size + 1e-12) ++result.size_increases;
    err = rep.op_error / rep.size;
    if (steps % config.checkpoint_every == 0) {
      result.trajectory.push_back(
          checkpoint(state.time, rep, state.int_E_op, state.int_F_op));
    }
    if (err < best_err) {
      best_err = err;
      best = state;
    }
  }
  result.iterations = steps;
  result.converged = best_err <= config.tol;
  result.scaling = best.scaling;
  result.balanced = best.frame;
  result.final_error = best_err;
  result.int_E_op = best.int_E_op;
  result.int_F_op = best.int_F_op;
  const Index d = frame.dim();
  result.left_growth = spectral_norm(best.scaling.left() - Matrix::Identity(d, d));
  result.left_growth_bound = std::expm1(best.int_E_op);
  result.right_growth = (best.scaling.right().array() - 1.0).abs().maxCoeff();
  result.right_growth_bound = std::expm1(best.int_F_op);
  return result;
}

}  // namespace

ScalingResult solve_scaling(const Frame& frame, const SolverConfig& config,
                            ScalingMethod method) {
  config.validate();
  return method == ScalingMethod::kFlipFlop ? solve_flip_flop(frame, config)
                                            : solve_flow(frame, config);
}

CanonicalScaling canonicalize(const ScalingPair& scaling, const Matrix& balanced) {
  const Matrix& left = scaling.left();
  Matrix p = polar_pd_factor(left);
  // Undo the orthogonal factor U = L P^{-1} so the frame is P V diag(R).
  const Matrix u = left * inverse_pd(p);
  const Matrix unrotated = u.transpose() * balanced;
  p *= static_cast<double>(p.rows()) / p.trace();
  return {p, unrotated / std::sqrt(size_of(unrotated))};
}

void write_trajectory_csv(std::ostream& out, const std::vector<CheckpointRow>& rows) {
  out << "time,size,op_error_E,op_error_F,delta,int_E_op,int_F_op\n";
  char buf[256];
  for (const CheckpointRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.time, r.size, r.op_error_E, r.op_error_F, r.delta, r.int_E_op,
                  r.int_F_op);
    out << buf;
  }
}

namespace {

Matrix flow_velocity(const Matrix& v) {
  const ErrorReport rep = error_report_of(v);
  return -(rep.E * v + v * rep.F.asDiagonal());
}

Matrix rk4_step(const Matrix& v, double h) {
  const Matrix k1 = flow_velocity(v);
  const Matrix k2 = flow_velocity(v + 0.5 * h * k1);
  const Matrix k3 = flow_velocity(v + 0.5 * h * k2);
  const Matrix k4 = flow_velocity(v + h * k3);
  return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

DerivativeCheck make_check(std::string name, double analytic, double fd) {
  DerivativeCheck c{std::move(name), analytic, fd, std::abs(fd - analytic), 0.0};
  c.rel_error = analytic != 0.0 ? c.abs_error / std::abs(analytic) : c.abs_error;
  return c;
}

}  // namespace

bool DerivativeReport::passes(double rel_tol, double abs_tol) const {
  const double scale = std::max(1.0, size * size);
  for (const DerivativeCheck* c : {&quadratic_form, &column_norm, &size_change}) {
    if (c->rel_error <= rel_tol) continue;
    const bool analytic_zero = std::abs(c->analytic) <= 1e-12 * scale;
    if (analytic_zero && std::abs(c->finite_difference) / scale <= abs_tol) continue;
    return false;
  }
  return true;
}

DerivativeReport derivative_diagnostics(const Frame& frame, double h) {
  if (!(h >= 1e-9 && h <= 1e-3)) {
    throw ConfigurationError("derivative_diagnostics: h must lie in [1e-9, 1e-3]");
  }
  const Matrix& v = frame.matrix();
  const ErrorReport rep = error_report_of(v);
  const Matrix gram = v * v.transpose();

  // Eigenvector of E whose eigenvalue has the largest magnitude.
  const SymmetricEigen eig = symmetric_eigen(rep.E);
  Index top = 0;
  for (Index i = 1; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i)) >= std::abs(eig.values(top))) top = i;
  }
  const Vector x = eig.vectors.col(top);

  Index longest = 0;
  const Vector norms2 = v.colwise().squaredNorm().transpose();
  norms2.maxCoeff(&longest);
  const auto vj = v.col(longest);

  const Vector vx = v.transpose() * x;
  const double quad_analytic =
      -2.0 * (x.dot(rep.E * gram * x) + rep.F.dot(vx.cwiseAbs2()));
  const double norm_analytic =
      -2.0 * (rep.F(longest) * norms2(longest) + vj.dot(rep.E * vj));
  const double size_analytic = -2.0 * rep.delta;

  const Matrix forward = rk4_step(v, h);
  const Matrix backward = rk4_step(v, -h);
  auto quad = [&](const Matrix& m) { return (m.transpose() * x).squaredNorm(); };
  auto col = [&](const Matrix& m) { return m.col(longest).squaredNorm(); };

  DerivativeReport out;
  out.h = h;
  out.size = rep.size;
  out.quadratic_form = make_check("quadratic_form", quad_analytic,
                                  (quad(forward) - quad(backward)) / (2.0 * h));
  out.column_norm = make_check("column_norm", norm_analytic,
                               (col(forward) - col(backward)) / (2.0 * h));
  out.size_change = make_check("size", size_analytic,
                               (size_of(forward) - size_of(backward)) / (2.0 * h));
  return out;
}

}  // namespace tylerscale
