#pragma once

// Schlögl reaction terms, target trajectories and the CNAB integrator.
//
// Free dynamics:   y' - nu y'' + f(y) = h
// Error dynamics:  z' + A z + f^{yt}(z) = sum_i u_i chi_i,   A = -nu d_xx + 1
// with f(y) = (y - zeta1)(y - zeta2)(y - zeta3) and
//   f^{yt}(z) = f(z + yt) - f(yt) - z.
//
// Weak-form CNAB step, diffusion Crank-Nicolson, reaction and forcing AB2:
//   (M + dt/2 nu K) y^{n+1} = (M - dt/2 nu K) y^n + dt (3/2 N^n - 1/2 N^{n-1})
//                             + dt M sum_i u^n_i chi_i
// where N is the mass-weighted reaction/forcing term and N^{-1} = N^0 (one
// explicit Euler step). For the error dynamics N = -M (f^{yt}(z) + z).
// The control is held constant on [t_n, t_{n+1}), so its contribution is
// integrated exactly rather than extrapolated.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "schloegl/actuation.hpp"
#include "schloegl/control_signal.hpp"
#include "schloegl/expr.hpp"
#include "schloegl/fem.hpp"
#include "schloegl/observation.hpp"

namespace schloegl {

struct XiCoeffs {
  double xi0 = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
};

/// Coefficients of (w - z1)(w - z2)(w - z3) = w^3 + xi2 w^2 + xi1 w + xi0.
XiCoeffs xi_coeffs(const std::array<double, 3>& zeta);

struct ReactionParams {
  std::array<double, 3> zeta{-1.0, 0.0, 2.0};
  XiCoeffs xi() const { return xi_coeffs(zeta); }
};

Field f_cubic(const Field& y, const ReactionParams& params);
/// f(z + yt) - f(yt) - z, nodewise.
Field f_error(const Field& z, const Field& yt, const ReactionParams& params);
/// Derivative of f_error at zbar applied to w, nodewise.
Field df_error(const Field& zbar, const Field& yt, const ReactionParams& params,
               const Field& w);

/// Target trajectory y_t(t, x) with closed-form derivatives.
class TargetSpec {
 public:
  enum class Kind { Zero, SeparableSinCos, Custom };

  static TargetSpec zero();
  /// amplitude * sin(omega t) * cos(wavenumber pi x / L)
  static TargetSpec separable_sin_cos(double amplitude, double omega,
                                      double wavenumber, double length);
  /// Throws ConfigError unless d_x y_t vanishes at x = 0 and x = L.
  static TargetSpec custom(const Expr& expr, double length);

  Kind kind() const noexcept { return kind_; }
  const Expr& expr() const noexcept { return y_; }
  double value(double x, double t) const;
  double time_derivative(double x, double t) const;
  double second_space_derivative(double x, double t) const;
  Field at(const Grid& grid, double t) const;

 private:
  TargetSpec(Kind kind, Expr y, double length);

  Kind kind_;
  Expr y_;
  Expr yt_;
  Expr yxx_;
};

/// Nodal values of the target on the steps t0 + n dt, n = 0..steps.
class TargetTrace {
 public:
  TargetTrace() = default;
  /// Precomputes every step when `cache` is set, otherwise evaluates lazily.
  TargetTrace(const TargetSpec& spec, const Grid& grid, double t0, double dt,
              std::size_t steps, bool cache);

  std::size_t steps() const noexcept { return steps_; }
  bool is_zero() const noexcept { return zero_; }
  Field at(std::size_t n) const;
  /// Sub-trace starting at step `first` with `steps` steps.
  TargetTrace window(std::size_t first, std::size_t steps) const;

 private:
  std::optional<TargetSpec> spec_;
  std::vector<double> x_;
  double t0_ = 0.0;
  double dt_ = 0.0;
  std::size_t offset_ = 0;
  std::size_t steps_ = 0;
  bool zero_ = true;
  std::vector<Field> cache_;
};

/// h(t) = d_t y_t - nu d_xx y_t + f(y_t), evaluated nodally.
class ManufacturedForcing {
 public:
  ManufacturedForcing(TargetSpec target, ReactionParams params, double nu);
  Field at(const Grid& grid, double t) const;

 private:
  TargetSpec target_;
  ReactionParams params_;
  double nu_;
};

/// One CNAB step: (M + dt/2 nu K) y+ = (M - dt/2 nu K) y + dt (3/2 N - 1/2 N_prev).
class CnabStepper {
 public:
  CnabStepper(const FemOperators& ops, double dt);

  double dt() const noexcept { return dt_; }
  Field step(const Field& y, const Field& n_now, const Field& n_prev) const;
  /// Same step plus dt * held, a term constant over the step.
  Field step(const Field& y, const Field& n_now, const Field& n_prev,
             const Field& held) const;
  const SymTridiag& lhs() const noexcept { return lhs_; }
  const SymTridiag& rhs() const noexcept { return rhs_; }
  const TridiagSolver& lhs_solver() const noexcept { return solver_; }

 private:
  double dt_;
  SymTridiag lhs_;
  SymTridiag rhs_;
  TridiagSolver solver_;
};

/// Number of steps of length dt covering T; ConfigError unless T is a
/// multiple of dt to 1e-12.
std::size_t step_count(double T, double dt);

struct SimTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t width = 0;
  /// Steps t0 + n dt, n = 0..Nt.
  std::vector<double> times;
  std::vector<double> norm_h;
  std::vector<double> norm_v;
  std::vector<double> norm_l6;
  /// Row n is applied on [t_n, t_{n+1}); the last row is the value that
  /// would be held next.
  std::vector<std::vector<double>> controls;
  std::vector<std::uint8_t> saturated;
  /// Running 1/2 int |Q z|^2 (trapezoid) and 1/2 int |u|^2 (exact for
  /// piecewise-constant u) up to t_n.
  std::vector<double> cost_state;
  std::vector<double> cost_control;
  std::vector<double> snapshot_times;
  std::vector<Field> snapshots;
  /// Every state, only when requested.
  std::vector<Field> states;
  Field final_state;
  /// max_n (sum_i u_i chi_i, z_n)_H over the run.
  double max_control_work = -std::numeric_limits<double>::infinity();

  std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
  /// Writes every `stride`-th row and always the last one.
  void write_csv(std::ostream& out, std::size_t stride = 1) const;
  /// Appends `tail`, whose first row coincides with this trace's last time.
  /// Running costs of `tail` are shifted by the current totals.
  void append(const SimTrace& tail);
};

struct SimContext {
  const Grid* grid = nullptr;
  const FemOperators* ops = nullptr;
  ReactionParams params;
};

/// y-equation with forcing h; an empty function means h = 0.
struct FreeRhs {
  std::function<Field(double)> forcing;
};
/// Error dynamics with the sample-and-hold feedback u_n = feedback(z_n).
struct ClosedLoopRhs {
  const ActuatorFamily* fam = nullptr;
  FeedbackConfig feedback;
  const TargetTrace* target = nullptr;
};
/// Error dynamics driven by a fixed control signal; fam == nullptr or an
/// empty signal means u = 0.
struct OpenLoopRhs {
  const ActuatorFamily* fam = nullptr;
  const ControlSignal* control = nullptr;
  const TargetTrace* target = nullptr;
};
using Rhs = std::variant<FreeRhs, ClosedLoopRhs, OpenLoopRhs>;

struct RecordOptions {
  /// Time between stored snapshots; <= 0 stores none. The first and last
  /// states are always stored when positive.
  double snapshot_interval = 0.01;
  bool keep_states = false;
  /// State cost observation; identity when null.
  const ObservationQ* observation = nullptr;
  /// Norm used to flag saturated control samples in open-loop mode.
  NormKind control_norm = NormKind::LInf;
};

/// Blow-up threshold on |y|_H.
inline constexpr double kBlowUpNorm = 1e6;

/// Integrates over [t0, t0 + T]. Throws BlowUpError on non-finite states or
/// |y|_H > kBlowUpNorm; `trace` keeps everything recorded up to that point.
void simulate_into(SimTrace& trace, const Field& initial, double T, double dt,
                   const SimContext& ctx, const Rhs& rhs,
                   const RecordOptions& record = {}, double t0 = 0.0);

SimTrace simulate(const Field& initial, double T, double dt,
                  const SimContext& ctx, const Rhs& rhs,
                  const RecordOptions& record = {}, double t0 = 0.0);

}  // namespace schloegl
