#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tylerscale/frame.hpp"

namespace tylerscale {

/// Left scaling L (invertible d x d) and diagonal right scaling R (positive,
/// stored as a length-n vector). Applies as V -> L * V * diag(R).
class ScalingPair {
 public:
  ScalingPair(Matrix left, Vector right);
  static ScalingPair identity(Index d, Index n);

  const Matrix& left() const { return L_; }
  const Vector& right() const { return R_; }

  Matrix apply(const Matrix& v) const;

 private:
  Matrix L_;
  Vector R_;
};

struct SolverConfig {
  double tol = 1e-10;
  // Unset means the method's own budget.
  std::optional<long> max_iters;
  // Multiplier on the gradient-flow step rule, in (0, 1].
  double step_safety = 1.0;
  // Trajectory checkpoint spacing in steps (flow) or rounds (Flip-Flop).
  long checkpoint_every = 10;

  void validate() const;
};

/// State of the gradient flow -dV/dt = E(V) V + V F(V).
///
/// `frame` is the current iterate V_t, `scaling` the accumulated (L_t, R_t)
/// with V_t = L_t V_0 diag(R_t), and the integrals accumulate
/// h * ||E||_op and h * ||F||_op over accepted steps.
struct FlowState {
  static FlowState start(const Frame& frame);

  Matrix frame;
  ScalingPair scaling;
  double time = 0.0;
  double int_E_op = 0.0;
  double int_F_op = 0.0;
  std::shared_ptr<const Matrix> initial;

  // ||V_t - L_t V_0 diag(R_t)||_F / ||V_t||_F.
  double reconstruction_error() const;
};

struct FlipFlopStep {
  Frame frame;
  ScalingPair scaling;
  // Frame after the left half-step only.
  Matrix after_left;
};

/// One Flip-Flop round: V <- (V V^T)^{-1/2} V, then unit columns.
///
/// Throws NumericalError when the Gram matrix condition number exceeds 1e14.
FlipFlopStep flip_flop_step(const Frame& frame);

inline constexpr double kMaxGramCondition = 1e14;
inline constexpr double kMinFlowStep = 1e-18;

/// Step size for the flow at a given error report:
/// safety * min(0.1 / (||E||_op + ||F||_op + 1e-30), 0.1 / s).
double flow_step_size(const ErrorReport& report, double step_safety);

/// One explicit step V <- (I - hE) V (I - hF) with the rule above.
/// Throws NumericalError if the step underflows kMinFlowStep.
FlowState gradient_flow_step(const FlowState& state, const SolverConfig& config);

/// The same update with a caller-chosen step h > 0.
FlowState gradient_flow_step_fixed(const FlowState& state, double h);

enum class ScalingMethod { kFlipFlop, kFlow };

ScalingMethod parse_scaling_method(const std::string& text);
std::string to_string(ScalingMethod method);

/// One trajectory checkpoint. For Flip-Flop `time` is the round number.
struct CheckpointRow {
  double time = 0.0;
  double size = 0.0;
  double op_error_E = 0.0;
  double op_error_F = 0.0;
  double delta = 0.0;
  double int_E_op = 0.0;
  double int_F_op = 0.0;
};

struct ScalingResult {
  ScalingPair scaling;
  Matrix balanced;  // L * V * diag(R)
  bool converged = false;
  long iterations = 0;
  double final_error = 0.0;  // op_error / s of `balanced`
  std::string failure{};     // set when the solve stopped early

  // Flow only: integrals and the scaling-growth inequalities
  // ||L_T - I||_op <= exp(int_E_op) - 1, max_j |R_j - 1| <= exp(int_F_op) - 1.
  double int_E_op = 0.0;
  double int_F_op = 0.0;
  double left_growth = 0.0;
  double left_growth_bound = 0.0;
  double right_growth = 0.0;
  double right_growth_bound = 0.0;
  bool input_unit_size = false;  // the bound is stated for s(V_0) = 1

  // Flow only: steps where the size increased by more than 1e-12.
  long size_increases = 0;
  // Flip-Flop only: rounds where op_error / s went up (logged, not an error).
  long error_increases = 0;
  std::vector<double> round_errors{};

  std::vector<CheckpointRow> trajectory{};
};

/// Frame scaling by Flip-Flop or by integrating the gradient flow.
///
/// Stops once op_error / s <= config.tol. Running out of iterations (or a
/// numerical breakdown) yields converged = false with the best iterate seen.
ScalingResult solve_scaling(const Frame& frame, const SolverConfig& config,
                            ScalingMethod method);

/// Canonical representative of a scaling solution: the PD polar factor P of L
/// normalized to trace d, and the balanced frame with the orthogonal polar
/// factor of L removed (P V diag(R)), rescaled to size 1.
struct CanonicalScaling {
  Matrix left_pd;
  Matrix balanced_unit;
};

CanonicalScaling canonicalize(const ScalingPair& scaling, const Matrix& balanced);

void write_trajectory_csv(std::ostream& out, const std::vector<CheckpointRow>& rows);

/// Finite-difference check of one derivative identity along the flow at t=0.
struct DerivativeCheck {
  std::string name;
  double analytic = 0.0;
  double finite_difference = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / |analytic|, or abs_error if analytic == 0
};

struct DerivativeReport {
  double h = 0.0;
  double size = 0.0;
  DerivativeCheck quadratic_form;  // <xx^T, V V^T> along the top eigenvector of E
  DerivativeCheck column_norm;     // ||v_j||^2 for the longest column
  DerivativeCheck size_change;     // s(V_t), analytic -2 Delta

  // Relative error <= rel_tol, or, when the analytic value is zero at the
  // size scale, |finite difference| / max(1, s^2) <= abs_tol.
  bool passes(double rel_tol = 1e-3, double abs_tol = 1e-8) const;
};

/// Central differences of the flow trajectory (RK4 half-steps to t = +-h)
/// against the closed-form derivatives. Requires h in [1e-9, 1e-3].
DerivativeReport derivative_diagnostics(const Frame& frame, double h);

}  // namespace tylerscale
