#include "schloegl/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "schloegl/errors.hpp"
#include "schloegl/kernels.hpp"

namespace schloegl {

namespace k = kernels::omp;

XiCoeffs xi_coeffs(const std::array<double, 3>& z) {
  return {-z[0] * z[1] * z[2], z[0] * z[1] + z[0] * z[2] + z[1] * z[2],
          -(z[0] + z[1] + z[2])};
}

Field f_cubic(const Field& y, const ReactionParams& params) {
  const XiCoeffs xi = params.xi();
  Field out(y.size());
  k::cubic(y.span(), xi.xi0, xi.xi1, xi.xi2, out.span());
  return out;
}

Field f_error(const Field& z, const Field& yt, const ReactionParams& params) {
  const XiCoeffs xi = params.xi();
  Field out(z.size());
  k::error_reaction(z.span(), yt.span(), xi.xi1, xi.xi2, out.span());
  return out;
}

Field df_error(const Field& zbar, const Field& yt, const ReactionParams& params,
               const Field& w) {
  const XiCoeffs xi = params.xi();
  Field out(zbar.size());
  k::error_reaction_slope(zbar.span(), yt.span(), xi.xi1, xi.xi2, out.span());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= w[i];
  return out;
}

namespace {

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return "(" + std::string(buf, res.ptr) + ")";
}

}  // namespace

TargetSpec::TargetSpec(Kind kind, Expr y, double length)
    : kind_(kind),
      y_(y),
      yt_(y.derivative(Expr::Var::T)),
      yxx_(y.derivative(Expr::Var::X).derivative(Expr::Var::X)) {
  const Expr yx = y.derivative(Expr::Var::X);
  for (double t : {0.0, 0.37, 1.1, 2.9, 7.3, 14.6}) {
    const double scale = 1.0 + std::abs(y.eval(0.0, t)) + std::abs(y.eval(length, t));
    for (double x : {0.0, length}) {
      const double slope = yx.eval(x, t);
      if (!std::isfinite(slope) || std::abs(slope) > 1e-8 * scale)
        throw ConfigError("target '" + y.to_string() +
                          "' violates the Neumann condition: d/dx = " +
                          std::to_string(slope) + " at x = " + std::to_string(x) +
                          ", t = " + std::to_string(t));
    }
  }
}

TargetSpec TargetSpec::zero() { return TargetSpec(Kind::Zero, Expr::constant(0.0), 1.0); }

TargetSpec TargetSpec::separable_sin_cos(double amplitude, double omega,
                                         double wavenumber, double length) {
  const std::string text = number(amplitude) + " * sin(" + number(omega) + " * t) * cos(" +
                           number(wavenumber) + " * pi * x / " + number(length) + ")";
  return TargetSpec(Kind::SeparableSinCos, Expr::parse(text), length);
}

TargetSpec TargetSpec::custom(const Expr& expr, double length) {
  return TargetSpec(Kind::Custom, expr, length);
}

double TargetSpec::value(double x, double t) const { return y_.eval(x, t); }
double TargetSpec::time_derivative(double x, double t) const { return yt_.eval(x, t); }
double TargetSpec::second_space_derivative(double x, double t) const {
  return yxx_.eval(x, t);
}

Field TargetSpec::at(const Grid& grid, double t) const {
  if (kind_ == Kind::Zero) return grid.constant(0.0);
  return grid.interpolate([&](double x) { return y_.eval(x, t); });
}

TargetTrace::TargetTrace(const TargetSpec& spec, const Grid& grid, double t0,
                         double dt, std::size_t steps, bool cache)
    : spec_(spec),
      x_(grid.x),
      t0_(t0),
      dt_(dt),
      steps_(steps),
      zero_(spec.kind() == TargetSpec::Kind::Zero) {
  if (cache && !zero_) {
    std::vector<Field> fields;
    fields.reserve(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) fields.push_back(at(n));
    cache_ = std::move(fields);
  }
}

Field TargetTrace::at(std::size_t n) const {
  if (zero_) return Field(x_.size());
  if (!cache_.empty()) return cache_[n];
  const double t = t0_ + static_cast<double>(offset_ + n) * dt_;
  Field out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = spec_->value(x_[i], t);
  return out;
}

TargetTrace TargetTrace::window(std::size_t first, std::size_t steps) const {
  if (first + steps > steps_)
    throw ConfigError("target window [" + std::to_string(first) + ", " +
                      std::to_string(first + steps) + "] exceeds the trace length " +
                      std::to_string(steps_));
  TargetTrace w = *this;
  w.offset_ = offset_ + first;
  w.steps_ = steps;
  if (!cache_.empty())
    w.cache_.assign(cache_.begin() + static_cast<std::ptrdiff_t>(first),
                    cache_.begin() + static_cast<std::ptrdiff_t>(first + steps + 1));
  return w;
}

ManufacturedForcing::ManufacturedForcing(TargetSpec target, ReactionParams params,
                                         double nu)
    : target_(std::move(target)), params_(params), nu_(nu) {}

Field ManufacturedForcing::at(const Grid& grid, double t) const {
  const Field y = target_.at(grid, t);
  Field h = f_cubic(y, params_);
  if (target_.kind() == TargetSpec::Kind::Zero) return h;
  for (std::size_t i = 0; i < grid.n_nodes; ++i) {
    const double x = grid.x[i];
    h[i] += target_.time_derivative(x, t) - nu_ * target_.second_space_derivative(x, t);
  }
  return h;
}

CnabStepper::CnabStepper(const FemOperators& ops, double dt)
    : dt_(dt),
      lhs_(linear_combination(1.0, ops.mass, 0.5 * dt * ops.nu, ops.stiffness)),
      rhs_(linear_combination(1.0, ops.mass, -0.5 * dt * ops.nu, ops.stiffness)),
      solver_(lhs_) {}

Field CnabStepper::step(const Field& y, const Field& n_now, const Field& n_prev) const {
  Field out = rhs_.apply(y);
  k::axpy(1.5 * dt_, n_now.span(), out.span());
  k::axpy(-0.5 * dt_, n_prev.span(), out.span());
  solver_.solve_in_place(out.span());
  return out;
}

Field CnabStepper::step(const Field& y, const Field& n_now, const Field& n_prev,
                        const Field& held) const {
  Field out = rhs_.apply(y);
  k::axpy(1.5 * dt_, n_now.span(), out.span());
  k::axpy(-0.5 * dt_, n_prev.span(), out.span());
  k::axpy(dt_, held.span(), out.span());
  solver_.solve_in_place(out.span());
  return out;
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("time horizon must be positive");
  const double ratio = std::round(T / dt);
  if (std::abs(ratio * dt - T) > 1e-12 * std::max(1.0, T))
    throw ConfigError("horizon " + std::to_string(T) + " is not a multiple of dt = " +
                      std::to_string(dt));
  return static_cast<std::size_t>(ratio);
}

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void SimTrace::write_csv(std::ostream& out, std::size_t stride) const {
  if (stride == 0) throw ConfigError("trace stride must be >= 1");
  out << "t,normH,normV,normL6";
  for (std::size_t i = 0; i < width; ++i) out << ",u_" << (i + 1);
  out << ",saturated,cost_state,cost_control\n";
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (n % stride != 0 && n + 1 != times.size()) continue;
    put(out, times[n]);
    for (double v : {norm_h[n], norm_v[n], norm_l6[n]}) {
      out << ',';
      put(out, v);
    }
    for (std::size_t i = 0; i < width; ++i) {
      out << ',';
      put(out, controls[n][i]);
    }
    out << ',' << static_cast<int>(saturated[n]) << ',';
    put(out, cost_state[n]);
    out << ',';
    put(out, cost_control[n]);
    out << '\n';
  }
}

void SimTrace::append(const SimTrace& tail) {
  if (times.empty()) {
    *this = tail;
    return;
  }
  if (tail.times.empty()) return;
  if (std::abs(tail.times.front() - times.back()) > 1e-9 * std::max(1.0, times.back()) ||
      tail.width != width)
    throw ConfigError("appended trace does not start where the current one ends");
  const double cs = cost_state.back();
  const double cc = cost_control.back();
  controls.back() = tail.controls.front();
  saturated.back() = tail.saturated.front();
  for (std::size_t n = 1; n < tail.times.size(); ++n) {
    times.push_back(tail.times[n]);
    norm_h.push_back(tail.norm_h[n]);
    norm_v.push_back(tail.norm_v[n]);
    norm_l6.push_back(tail.norm_l6[n]);
    controls.push_back(tail.controls[n]);
    saturated.push_back(tail.saturated[n]);
    cost_state.push_back(cs + tail.cost_state[n]);
    cost_control.push_back(cc + tail.cost_control[n]);
  }
  for (std::size_t s = 0; s < tail.snapshot_times.size(); ++s) {
    if (!snapshot_times.empty() && tail.snapshot_times[s] <= snapshot_times.back() + 1e-12)
      continue;
    snapshot_times.push_back(tail.snapshot_times[s]);
    snapshots.push_back(tail.snapshots[s]);
  }
  if (!tail.states.empty()) {
    if (states.empty()) states.push_back(final_state);
    states.insert(states.end(), tail.states.begin() + 1, tail.states.end());
  }
  final_state = tail.final_state;
  max_control_work = std::max(max_control_work, tail.max_control_work);
}

namespace {

struct ModeView {
  const ActuatorFamily* fam = nullptr;
  const TargetTrace* target = nullptr;
  const FeedbackConfig* feedback = nullptr;
  const ControlSignal* control = nullptr;
  const FreeRhs* free = nullptr;
};

ModeView view(const Rhs& rhs) {
  ModeView v;
  if (const auto* f = std::get_if<FreeRhs>(&rhs)) {
    v.free = f;
  } else if (const auto* c = std::get_if<ClosedLoopRhs>(&rhs)) {
    v.fam = c->fam;
    v.target = c->target;
    v.feedback = &c->feedback;
    if (!v.fam) throw ConfigError("closed-loop simulation needs an actuator family");
  } else {
    const auto& o = std::get<OpenLoopRhs>(rhs);
    v.fam = o.fam;
    v.target = o.target;
    v.control = o.control;
  }
  return v;
}

}  // namespace

void simulate_into(SimTrace& trace, const Field& initial, double T, double dt,
                   const SimContext& ctx, const Rhs& rhs, const RecordOptions& record,
                   double t0) {
  if (!ctx.grid || !ctx.ops) throw ConfigError("simulation context needs a grid and operators");
  const Grid& grid = *ctx.grid;
  const FemOperators& ops = *ctx.ops;
  const std::size_t steps = step_count(T, dt);
  if (initial.size() != grid.n_nodes)
    throw ConfigError("initial state has " + std::to_string(initial.size()) +
                      " entries, grid has " + std::to_string(grid.n_nodes));
  if (!initial.all_finite()) throw ConfigError("initial state has non-finite entries");

  const ModeView mode = view(rhs);
  const bool error_mode = mode.free == nullptr;
  if (error_mode && mode.target && mode.target->steps() < steps)
    throw ConfigError("target trace covers " + std::to_string(mode.target->steps()) +
                      " steps, simulation needs " + std::to_string(steps));
  const bool has_control = mode.fam != nullptr &&
                           (mode.feedback != nullptr ||
                            (mode.control != nullptr && mode.control->steps() > 0));
  const std::size_t width = mode.fam ? mode.fam->count() : 0;
  if (mode.control && mode.control->steps() > 0) {
    if (mode.control->steps() < steps)
      throw ConfigError("control signal covers " + std::to_string(mode.control->steps()) +
                        " steps, simulation needs " + std::to_string(steps));
    if (mode.control->width() != width)
      throw ConfigError("control signal width does not match the actuator count");
  }
  if (mode.feedback) mode.feedback->validate();

  const XiCoeffs xi = ctx.params.xi();
  const CnabStepper stepper(ops, dt);
  std::size_t snapshot_every = 0;
  if (record.snapshot_interval > 0.0)
    snapshot_every = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(record.snapshot_interval / dt)));

  trace = SimTrace{};
  trace.t0 = t0;
  trace.dt = dt;
  trace.width = width;
  trace.times.reserve(steps + 1);

  Field state = initial;
  Field mn_prev;
  Field work(grid.n_nodes);
  double prev_q = 0.0;
  double running_control = 0.0;
  std::vector<double> u(width, 0.0);

  for (std::size_t n = 0;; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    const double nh = ops.norm_h(state);
    if (!state.all_finite() || !(nh <= kBlowUpNorm))
      throw BlowUpError("state norm left the admissible range at t = " + std::to_string(t), t);

    bool sat = false;
    if (has_control) {
      if (mode.feedback) {
        FeedbackResult fb = feedback(state, *mode.fam, ops, *mode.feedback);
        u = std::move(fb.u);
        sat = fb.saturated;
      } else {
        const auto row = mode.control->at(std::min(n, steps - 1));
        u.assign(row.begin(), row.end());
        const double bound = mode.control->bound();
        sat = std::isfinite(bound) && vector_norm(u, record.control_norm) >= bound;
      }
    }

    const Norms nr = norms(state, ops, grid);
    const double q = record.observation ? record.observation->norm_sq(state) : nh * nh;
    trace.times.push_back(t);
    trace.norm_h.push_back(nr.h);
    trace.norm_v.push_back(nr.v);
    trace.norm_l6.push_back(nr.l6);
    trace.controls.push_back(u);
    trace.saturated.push_back(sat ? 1 : 0);
    trace.cost_state.push_back(n == 0 ? 0.0 : trace.cost_state.back() + 0.25 * dt * (prev_q + q));
    trace.cost_control.push_back(running_control);
    prev_q = q;
    if (record.keep_states) trace.states.push_back(state);
    if (snapshot_every > 0 && (n % snapshot_every == 0 || n == steps)) {
      trace.snapshot_times.push_back(t);
      trace.snapshots.push_back(state);
    }
    if (has_control) {
      double w = 0.0;
      for (std::size_t i = 0; i < width; ++i) w += u[i] * k::dot(mode.fam->loads[i].span(), state.span());
      trace.max_control_work = std::max(trace.max_control_work, w);
    }
    if (n == steps) break;

    double usq = 0.0;
    for (double v : u) usq += v * v;
    running_control += 0.5 * dt * usq;

    // Mass-weighted explicit term.
    Field mn(grid.n_nodes);
    if (error_mode) {
      if (mode.target && !mode.target->is_zero()) {
        const Field yt = mode.target->at(n);
        k::error_reaction(state.span(), yt.span(), xi.xi1, xi.xi2, work.span());
      } else {
        const Field yt(grid.n_nodes);
        k::error_reaction(state.span(), yt.span(), xi.xi1, xi.xi2, work.span());
      }
      k::axpy(1.0, state.span(), work.span());
      ops.mass.apply(work.span(), mn.span());
      for (double& v : mn) v = -v;
    } else {
      k::cubic(state.span(), xi.xi0, xi.xi1, xi.xi2, work.span());
      for (double& v : work) v = -v;
      if (mode.free->forcing) {
        const Field h = mode.free->forcing(t);
        k::axpy(1.0, h.span(), work.span());
      }
      ops.mass.apply(work.span(), mn.span());
    }
    if (n == 0) mn_prev = mn;
    if (has_control) {
      Field bu(grid.n_nodes);
      for (std::size_t i = 0; i < width; ++i) k::axpy(u[i], mode.fam->loads[i].span(), bu.span());
      state = stepper.step(state, mn, mn_prev, bu);
    } else {
      state = stepper.step(state, mn, mn_prev);
    }
    mn_prev = std::move(mn);
  }
  trace.final_state = std::move(state);
}

SimTrace simulate(const Field& initial, double T, double dt, const SimContext& ctx,
                  const Rhs& rhs, const RecordOptions& record, double t0) {
  SimTrace trace;
  simulate_into(trace, initial, T, dt, ctx, rhs, record, t0);
  return trace;
}

}  // namespace schloegl
