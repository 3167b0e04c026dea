#pragma once

// Finite-horizon constrained optimal control of the error dynamics and the
// receding-horizon driver.
//
// The cost on a window of Nt steps is
//   J(u) = dt sum_n w_n 1/2 |Q z_n|_H^2 + dt sum_{n<Nt} 1/2 |u_n|^2,
// with trapezoid weights w_0 = w_Nt = 1/2. The gradient is that of this
// discrete functional through the CNAB scheme (discrete adjoint), so it is
// exact up to round-off. With N(z) = -M g(z), g(z) = f^{yt}(z) + z, and
// L = M + dt/2 nu K, R = M - dt/2 nu K, the adjoint recursion is
//   L l_m = R l_{m+1} - dt D_m M (3/2 l_{m+1} - 1/2 l_{m+2}) + dt w_m M Q z_m
// for m = Nt..1 with l_{Nt+1} = l_{Nt+2} = 0 and D_m = diag(g'(z_m)). The
// reduced gradient in the time-discrete L^2 product is g_n = u_n + B^T l_{n+1}.

#include <cstddef>
#include <vector>

#include "schloegl/actuation.hpp"
#include "schloegl/control_signal.hpp"
#include "schloegl/dynamics.hpp"
#include "schloegl/observation.hpp"

namespace schloegl {

struct CostBreakdown {
  double total = 0.0;
  double state = 0.0;
  double control = 0.0;
};

/// Trapezoid state cost and exact piecewise-constant control cost.
CostBreakdown cost(const std::vector<Field>& states, const ControlSignal& u,
                   double dt, const ObservationQ& q);

/// Projection onto {|||v||| <= bound}: componentwise clamp for l-infinity,
/// radial for l2.
std::vector<double> clamp_project(std::span<const double> v, double bound,
                                  NormKind kind = NormKind::LInf);
void clamp_project(ControlSignal& u, NormKind kind = NormKind::LInf);

struct OptimizerOptions {
  std::size_t max_iters = 200;
  double tolerance = 1e-5;
  double tau0 = 1e-2;
  double tau_min = 1e-6;
  double tau_max = 1e2;
  std::size_t max_rejections = 20;

  void validate() const;
};

struct OcpProblem {
  const Grid* grid = nullptr;
  const FemOperators* ops = nullptr;
  const ActuatorFamily* fam = nullptr;
  const ObservationQ* observation = nullptr;
  ReactionParams params;
  double s0 = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  Field z0;
  /// Target on the window steps 0..steps.
  TargetTrace target;
  double bound = 0.0;
  NormKind constraint = NormKind::LInf;
  OptimizerOptions optimizer;

  double s1() const { return s0 + static_cast<double>(steps) * dt; }
  /// Throws ConfigError on missing pieces or inconsistent sizes.
  void validate() const;
};

/// Forward run with every state kept.
SimTrace forward(const OcpProblem& problem, const ControlSignal& u);

/// Discrete adjoint l_1..l_Nt of a complete forward trace. Entry n of the
/// result is p(t_n) := l_{n+1} for n < Nt and p(t_Nt) = 0.
std::vector<Field> solve_adjoint(const OcpProblem& problem, const SimTrace& z);

struct GradientEvaluation {
  SimTrace z;
  std::vector<Field> p;
  ControlSignal gradient;
  CostBreakdown cost;
};

/// Forward solve, adjoint solve and g_n = u_n + (U diamond)^* p(t_n).
GradientEvaluation reduced_gradient(const OcpProblem& problem, const ControlSignal& u);

/// Time-discrete L^2 inner product dt sum_n a_n . b_n.
double l2_inner(const ControlSignal& a, const ControlSignal& b, double dt);

struct OcpResult {
  ControlSignal u;
  SimTrace z;
  std::vector<Field> p;
  CostBreakdown cost;
  /// Gradient evaluations performed.
  std::size_t iterations = 0;
  std::size_t rejections = 0;
  bool converged = false;
  /// |u - P(u - g)| / max(1, |u|) of the returned iterate.
  double residual = 0.0;
};

/// Projected gradient with alternating BB1/BB2 steps. Returns the iterate
/// with the lowest cost; non-convergence is reported through the flag.
OcpResult solve_ocp(const OcpProblem& problem, const ControlSignal* initial = nullptr);

struct WindowReport {
  std::size_t index = 0;
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double cost = 0.0;
  double cost_state = 0.0;
  double cost_control = 0.0;
  double residual = 0.0;
  double wall_seconds = 0.0;
  /// |p(s0)|_H, the multiplier attached to the initial condition.
  double initial_multiplier_norm = 0.0;
};

struct RhcSetup {
  const Grid* grid = nullptr;
  const FemOperators* ops = nullptr;
  const ActuatorFamily* fam = nullptr;
  const ObservationQ* observation = nullptr;
  ReactionParams params;
  const TargetSpec* target = nullptr;
  double T = 15.0;
  double horizon = 1.0;
  double shift = 0.5;
  double dt = 1e-3;
  double bound = 30.0;
  NormKind constraint = NormKind::LInf;
  OptimizerOptions optimizer;
  double snapshot_interval = 0.01;
};

struct RhcResult {
  SimTrace trace;
  std::vector<WindowReport> windows;
};

/// Solves on (i shift, i shift + horizon), applies the first `shift` of the
/// optimal control and hands the state over. Window failures are rethrown
/// with the window index prepended.
RhcResult receding_horizon(const Field& z0, const RhcSetup& setup);
/// Same, filling `result` as the windows complete so that a failure leaves
/// the trace up to the failing segment in place.
void receding_horizon_into(RhcResult& result, const Field& z0, const RhcSetup& setup);

struct DppReport {
  double gap = 0.0;
  double full_cost = 0.0;
  double head_cost = 0.0;
  double tail_cost = 0.0;
  bool full_converged = false;
  bool tail_converged = false;
};

/// J*_I - (J(z*, u*) on (s0, a) + J*_(a, s1)).
DppReport dpp_gap(const OcpProblem& problem, double a);

}  // namespace schloegl
