#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tylerscale/errors.hpp"
#include "tylerscale/sampler.hpp"
#include "tylerscale/scaler.hpp"

using namespace tylerscale;

namespace {

Matrix e1e1e2() {
  Matrix v(2, 3);
  v << 1, 1, 0, 0, 0, 1;
  return v;
}

Matrix mercedes_benz() {
  Matrix v(2, 3);
  for (int j = 0; j < 3; ++j) {
    const double angle = M_PI / 2.0 + 2.0 * M_PI * j / 3.0;
    v(0, j) = std::cos(angle);
    v(1, j) = std::sin(angle);
  }
  return v;
}

SolverConfig tight(double tol = 1e-11) {
  SolverConfig c;
  c.tol = tol;
  return c;
}

double reconstruction(const ScalingResult& r, const Frame& f) {
  return (r.balanced - r.scaling.apply(f.matrix())).norm() / r.balanced.norm();
}

}  // namespace

TEST_SUITE("scaler") {

TEST_CASE("scaling pair validation") {
  CHECK_THROWS(ScalingPair(Matrix::Identity(2, 2), Vector::Zero(3)));
  CHECK_THROWS(ScalingPair(Matrix::Zero(2, 2), Vector::Ones(3)));
  CHECK_THROWS(ScalingPair(Matrix::Ones(2, 3), Vector::Ones(3)));
  const ScalingPair id = ScalingPair::identity(2, 3);
  CHECK(id.apply(e1e1e2()) == e1e1e2());
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigurationError);
  c = SolverConfig{};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigurationError);
  c = SolverConfig{};
  c.step_safety = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigurationError);
  c = SolverConfig{};
  c.checkpoint_every = 0;
  CHECK_THROWS_AS(c.validate(), ConfigurationError);
}

TEST_CASE("flip-flop fixes the identity") {
  const FlipFlopStep step = flip_flop_step(Frame(Matrix::Identity(3, 3)));
  CHECK((step.frame.matrix() - Matrix::Identity(3, 3)).norm() <= 1e-15);
  CHECK((step.scaling.left() - Matrix::Identity(3, 3)).norm() <= 1e-15);
  CHECK((step.scaling.right() - Vector::Ones(3)).norm() <= 1e-15);
}

TEST_CASE("flip-flop on a stretched basis") {
  Matrix v(2, 2);
  v << 2, 0, 0, 1;
  const FlipFlopStep step = flip_flop_step(Frame(v));
  CHECK((step.after_left - Matrix::Identity(2, 2)).norm() <= 1e-15);
  CHECK((step.frame.matrix() - Matrix::Identity(2, 2)).norm() <= 1e-15);
  Matrix expected(2, 2);
  expected << 0.5, 0, 0, 1;
  CHECK((step.scaling.left() - expected).norm() <= 1e-15);
}

TEST_CASE("flip-flop half steps are exact") {
  for (std::uint64_t t = 0; t < 5; ++t) {
    const Frame f = sample_gaussian_frame(4, 11, 1.0, SeedSpec{20, t});
    const FlipFlopStep step = flip_flop_step(f);
    const Matrix gram = step.after_left * step.after_left.transpose();
    CHECK((gram - Matrix::Identity(4, 4)).norm() <= 1e-12);
    CHECK(error_report_of(step.after_left).e_op <= 1e-12 * 4);
    const Vector norms = step.frame.matrix().colwise().norm();
    CHECK((norms.array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((step.scaling.apply(f.matrix()) - step.frame.matrix()).norm() <= 1e-12);
  }
}

TEST_CASE("flip-flop rejects ill-conditioned Gram matrices") {
  Matrix v(2, 2);
  v << 1, 0, 0, 1e-8;
  CHECK_THROWS_AS(flip_flop_step(Frame(v)), NumericalError);
}

TEST_CASE("flow step on a repeated-vector frame") {
  FlowState state = FlowState::start(Frame(e1e1e2()));
  const FlowState next = gradient_flow_step_fixed(state, 0.01);
  Matrix expected(2, 3);
  expected << 0.99, 0.99, 0, 0, 0, 1.01;
  CHECK((next.frame - expected).norm() <= 1e-15);
  CHECK(next.time == 0.01);
  CHECK(next.int_E_op == doctest::Approx(0.01));
  CHECK(next.int_F_op == 0.0);
  CHECK(next.reconstruction_error() <= 1e-15);
}

TEST_CASE("flow leaves balanced frames in place") {
  const Frame f(mercedes_benz());
  const FlowState state = FlowState::start(f);
  const FlowState next = gradient_flow_step(state, SolverConfig{});
  CHECK((next.frame - f.matrix()).norm() <= 1e-14);
  CHECK(next.time > 0.0);
  CHECK(next.time == doctest::Approx(0.1 / 3.0));
}

TEST_CASE("flow step size rule") {
  const ErrorReport r = error_report(Frame(e1e1e2()));
  CHECK(flow_step_size(r, 1.0) == doctest::Approx(0.1 / 3.0));
  CHECK(flow_step_size(r, 0.5) == doctest::Approx(0.05 / 3.0));
  const ErrorReport unit = error_report(Frame(e1e1e2() / std::sqrt(3.0)));
  // At s = 1: min(0.1 / (||E|| + ||F||), 0.1).
  CHECK(flow_step_size(unit, 1.0) == doctest::Approx(std::min(0.1 / (unit.e_op + unit.f_op), 0.1)));
  CHECK(flow_step_size(unit, 1.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(gradient_flow_step_fixed(FlowState::start(Frame(e1e1e2())), 0.0),
                  ConfigurationError);
}

TEST_CASE("size derivative along the flow") {
  for (std::uint64_t t = 0; t < 4; ++t) {
    const Frame f = sample_gaussian_frame(3, 7, 1.0, SeedSpec{21, t});
    const double h = 1e-6;
    const FlowState next = gradient_flow_step_fixed(FlowState::start(f), h);
    const ErrorReport r = error_report(f);
    const double rate = (size_of(next.frame) - r.size) / h;
    CHECK(rate == doctest::Approx(-2.0 * r.delta).epsilon(1e-3));
  }
}

TEST_CASE("solve_scaling on frames that are already balanced") {
  for (ScalingMethod method : {ScalingMethod::kFlipFlop, ScalingMethod::kFlow}) {
    const Frame id(Matrix::Identity(3, 3));
    const ScalingResult r = solve_scaling(id, SolverConfig{}, method);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.scaling.left() == Matrix::Identity(3, 3));
    CHECK(r.scaling.right() == Vector::Ones(3));

    Matrix pairs(2, 4);
    pairs << 1, 1, 0, 0, 0, 0, 1, 1;
    const ScalingResult p = solve_scaling(Frame(pairs), SolverConfig{}, method);
    CHECK(p.iterations == 0);
    CHECK(p.scaling.left() == Matrix::Identity(2, 2));

    const ErrorReport mb = error_report(Frame(mercedes_benz()));
    CHECK(mb.op_error <= 1e-14);
    const ScalingResult m = solve_scaling(Frame(mercedes_benz()), SolverConfig{}, method);
    CHECK(m.converged);
    CHECK(m.iterations == 0);
  }
}

TEST_CASE("both methods balance random frames") {
  for (std::uint64_t t = 0; t < 5; ++t) {
    const Frame f(sample_sphere_matrix(4, 16, SeedSpec{22, t}) *
                  Vector::LinSpaced(16, 0.5, 2.0).asDiagonal());
    for (ScalingMethod method : {ScalingMethod::kFlipFlop, ScalingMethod::kFlow}) {
      const ScalingResult r = solve_scaling(f, tight(1e-10), method);
      CHECK(r.converged);
      const ErrorReport rep = error_report_of(r.balanced);
      CHECK(rep.op_error <= 1e-10 * rep.size);
      CHECK(r.final_error == doctest::Approx(rep.op_error / rep.size));
      CHECK(reconstruction(r, f) <= 1e-8);
    }
  }
}

TEST_CASE("flip-flop and flow agree after canonicalization") {
  const Frame f(sample_sphere_matrix(4, 16, SeedSpec{23, 0}) *
                Vector::LinSpaced(16, 0.3, 3.0).asDiagonal());
  const ScalingResult a = solve_scaling(f, tight(), ScalingMethod::kFlipFlop);
  const ScalingResult b = solve_scaling(f, tight(), ScalingMethod::kFlow);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  const CanonicalScaling ca = canonicalize(a.scaling, a.balanced);
  const CanonicalScaling cb = canonicalize(b.scaling, b.balanced);
  CHECK((ca.left_pd - cb.left_pd).norm() <= 1e-6);
  CHECK((ca.balanced_unit - cb.balanced_unit).norm() <= 1e-6);
  CHECK(ca.left_pd.trace() == doctest::Approx(4.0));
  CHECK(size_of(ca.balanced_unit) == doctest::Approx(1.0));
}

TEST_CASE("flow trajectory diagnostics") {
  for (std::uint64_t t = 0; t < 5; ++t) {
    Matrix v = sample_gaussian_frame(3, 9, 1.0, SeedSpec{24, t}).matrix();
    v /= v.norm();
    const Frame f(v);
    const ScalingResult r = solve_scaling(f, tight(1e-9), ScalingMethod::kFlow);
    REQUIRE(r.converged);
    CHECK(r.input_unit_size);
    CHECK(r.size_increases == 0);
    CHECK(r.left_growth <= r.left_growth_bound);
    CHECK(r.right_growth <= r.right_growth_bound);
    CHECK(r.int_E_op > 0.0);
    REQUIRE(r.trajectory.size() >= 2);
    for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
      CHECK(r.trajectory[k].size <= r.trajectory[k - 1].size + 1e-12);
      CHECK(r.trajectory[k].time > r.trajectory[k - 1].time);
    }
  }
}

TEST_CASE("flow reconstruction identity holds step by step") {
  const Frame f = sample_gaussian_frame(3, 6, 1.0, SeedSpec{25, 0});
  FlowState state = FlowState::start(f);
  for (int k = 0; k < 200; ++k) {
    const FlowState next = gradient_flow_step(state, SolverConfig{});
    CHECK(size_of(next.frame) <= size_of(state.frame) + 1e-12);
    state = next;
  }
  CHECK(state.reconstruction_error() <= 1e-8);
}

TEST_CASE("iteration budget exhaustion keeps the best iterate") {
  const Frame f = sample_gaussian_frame(4, 9, 1.0, SeedSpec{26, 0});
  SolverConfig c;
  c.tol = 1e-14;
  c.max_iters = 3;
  for (ScalingMethod method : {ScalingMethod::kFlipFlop, ScalingMethod::kFlow}) {
    const ScalingResult r = solve_scaling(f, c, method);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.final_error > 1e-14);
    CHECK(reconstruction(r, f) <= 1e-12);
  }
}

TEST_CASE("flip-flop logs per-round errors") {
  const Frame f = sample_gaussian_frame(3, 8, 1.0, SeedSpec{27, 0});
  const ScalingResult r = solve_scaling(f, tight(), ScalingMethod::kFlipFlop);
  CHECK(r.round_errors.size() == static_cast<std::size_t>(r.iterations));
  CHECK(r.round_errors.back() <= 1e-11);
  CHECK(r.error_increases >= 0);
}

TEST_CASE("trajectory CSV") {
  std::ostringstream out;
  write_trajectory_csv(out, {{0.5, 1.0, 0.25, 0.125, 0.1, 0.0, 0.0}});
  CHECK(out.str() ==
        "time,size,op_error_E,op_error_F,delta,int_E_op,int_F_op\n"
        "0.5,1,0.25,0.125,0.10000000000000001,0,0\n");
}

TEST_CASE("scaling method parsing") {
  CHECK(parse_scaling_method("flipflop") == ScalingMethod::kFlipFlop);
  CHECK(parse_scaling_method("flow") == ScalingMethod::kFlow);
  CHECK(to_string(ScalingMethod::kFlow) == "flow");
  CHECK_THROWS_AS(parse_scaling_method("newton"), ConfigurationError);
}

TEST_CASE("derivative identities on the repeated-vector frame") {
  const DerivativeReport r = derivative_diagnostics(Frame(e1e1e2()), 1e-6);
  CHECK(r.passes());
  CHECK(r.size_change.analytic == doctest::Approx(-2.0));
  CHECK(r.quadratic_form.rel_error <= 1e-3);
  CHECK(r.column_norm.rel_error <= 1e-3);
  CHECK(r.size_change.rel_error <= 1e-3);
}

TEST_CASE("derivative identities vanish on balanced frames") {
  const DerivativeReport r = derivative_diagnostics(Frame(mercedes_benz()), 1e-6);
  CHECK(r.passes());
  for (const DerivativeCheck* c : {&r.quadratic_form, &r.column_norm, &r.size_change}) {
    CHECK(std::abs(c->analytic) <= 1e-12);
    CHECK(std::abs(c->finite_difference) <= 1e-8);
  }
}

TEST_CASE("derivative identities scale with the fourth power") {
  const Frame f = sample_gaussian_frame(3, 7, 1.0, SeedSpec{28, 0});
  const double c = 10.0;
  const DerivativeReport a = derivative_diagnostics(f, 1e-6);
  const DerivativeReport b = derivative_diagnostics(Frame(c * f.matrix()), 1e-6);
  CHECK(b.quadratic_form.analytic == doctest::Approx(std::pow(c, 4) * a.quadratic_form.analytic));
  CHECK(b.column_norm.analytic == doctest::Approx(std::pow(c, 4) * a.column_norm.analytic));
  CHECK(b.size_change.analytic == doctest::Approx(std::pow(c, 4) * a.size_change.analytic));
  CHECK(a.passes());
  CHECK(b.passes());
}

TEST_CASE("derivative diagnostics step range") {
  CHECK_THROWS_AS(derivative_diagnostics(Frame(e1e1e2()), 1e-2), ConfigurationError);
  CHECK_THROWS_AS(derivative_diagnostics(Frame(e1e1e2()), 1e-10), ConfigurationError);
}

}  // TEST_SUITE
