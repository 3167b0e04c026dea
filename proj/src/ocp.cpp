#include "schloegl/ocp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "schloegl/errors.hpp"
#include "schloegl/kernels.hpp"

namespace schloegl {

namespace k = kernels::omp;

CostBreakdown cost(const std::vector<Field>& states, const ControlSignal& u,
                   double dt, const ObservationQ& q) {
  CostBreakdown c;
  const std::size_t nt = states.empty() ? 0 : states.size() - 1;
  for (std::size_t n = 0; n <= nt && !states.empty(); ++n) {
    const double w = (n == 0 || n == nt) ? 0.5 : 1.0;
    c.state += 0.5 * dt * w * q.norm_sq(states[n]);
  }
  for (std::size_t n = 0; n < u.steps(); ++n)
    for (double v : u.at(n)) c.control += 0.5 * dt * v * v;
  c.total = c.state + c.control;
  return c;
}

std::vector<double> clamp_project(std::span<const double> v, double bound, NormKind kind) {
  if (kind == NormKind::L2) return saturate(v, bound, kind);
  std::vector<double> out(v.begin(), v.end());
  if (std::isinf(bound)) return out;
  for (double& x : out) x = std::clamp(x, -bound, bound);
  return out;
}

void clamp_project(ControlSignal& u, NormKind kind) {
  for (std::size_t n = 0; n < u.steps(); ++n) {
    auto row = u.at(n);
    const auto p = clamp_project(row, u.bound(), kind);
    std::copy(p.begin(), p.end(), row.begin());
  }
}

void OptimizerOptions::validate() const {
  if (max_iters < 1) throw ConfigError("optimizer max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("optimizer tolerance must be positive");
  if (!(tau_min > 0.0) || !(tau_max >= tau_min) || !(tau0 >= tau_min) || !(tau0 <= tau_max))
    throw ConfigError("optimizer step bounds need 0 < tau_min <= tau0 <= tau_max");
}

void OcpProblem::validate() const {
  if (!grid || !ops || !fam || !observation)
    throw ConfigError("optimal control problem needs grid, operators, actuators and Q");
  if (!(dt > 0.0) || steps == 0) throw ConfigError("optimal control window must be nonempty");
  if (z0.size() != grid->n_nodes) throw ConfigError("initial error does not match the grid");
  if (!z0.all_finite()) throw ConfigError("initial error has non-finite entries");
  if (target.steps() < steps) throw ConfigError("target trace is shorter than the window");
  if (!(bound > 0.0)) throw ConfigError("control bound must be positive");
  optimizer.validate();
}

SimTrace forward(const OcpProblem& problem, const ControlSignal& u) {
  const SimContext ctx{problem.grid, problem.ops, problem.params};
  RecordOptions rec;
  rec.snapshot_interval = 0.0;
  rec.keep_states = true;
  rec.observation = problem.observation;
  rec.control_norm = problem.constraint;
  return simulate(problem.z0, static_cast<double>(problem.steps) * problem.dt, problem.dt, ctx,
                  OpenLoopRhs{problem.fam, &u, &problem.target}, rec, problem.s0);
}

std::vector<Field> solve_adjoint(const OcpProblem& problem, const SimTrace& z) {
  const std::size_t nt = problem.steps;
  if (z.states.size() != nt + 1)
    throw ConfigError("adjoint needs the complete forward trajectory (" +
                      std::to_string(nt + 1) + " states, got " +
                      std::to_string(z.states.size()) + ")");
  const FemOperators& ops = *problem.ops;
  const std::size_t n_nodes = problem.grid->n_nodes;
  const double dt = problem.dt;
  const XiCoeffs xi = problem.params.xi();
  const CnabStepper stepper(ops, dt);

  // l[m] for m = 0..Nt+2; l[0] is unused.
  std::vector<Field> l(nt + 3, Field(n_nodes));
  Field slope(n_nodes);
  Field mu(n_nodes);
  Field mmu(n_nodes);
  for (std::size_t m = nt; m >= 1; --m) {
    Field rhs = stepper.rhs().apply(l[m + 1]);
    mu = l[m + 1];
    mu *= 1.5;
    k::axpy(-0.5, l[m + 2].span(), mu.span());
    ops.mass.apply(mu.span(), mmu.span());
    const Field yt = problem.target.at(m);
    k::error_reaction_slope(z.states[m].span(), yt.span(), xi.xi1, xi.xi2, slope.span());
    for (std::size_t i = 0; i < n_nodes; ++i) rhs[i] -= dt * (slope[i] + 1.0) * mmu[i];
    const double w = m == nt ? 0.5 : 1.0;
    k::axpy(dt * w, problem.observation->cost_gradient(z.states[m]).span(), rhs.span());
    stepper.lhs_solver().solve_in_place(rhs.span());
    if (!rhs.all_finite())
      throw BlowUpError("adjoint state became non-finite at t = " +
                            std::to_string(problem.s0 + static_cast<double>(m) * dt),
                        problem.s0 + static_cast<double>(m) * dt);
    l[m] = std::move(rhs);
  }
  std::vector<Field> p;
  p.reserve(nt + 1);
  for (std::size_t n = 0; n < nt; ++n) p.push_back(std::move(l[n + 1]));
  p.emplace_back(n_nodes);
  return p;
}

GradientEvaluation reduced_gradient(const OcpProblem& problem, const ControlSignal& u) {
  GradientEvaluation ev;
  ev.z = forward(problem, u);
  ev.p = solve_adjoint(problem, ev.z);
  ev.cost.state = ev.z.cost_state.back();
  ev.cost.control = ev.z.cost_control.back();
  ev.cost.total = ev.cost.state + ev.cost.control;
  ev.gradient = ControlSignal(u.steps(), u.width(), u.bound());
  for (std::size_t n = 0; n < u.steps(); ++n) {
    auto g = ev.gradient.at(n);
    const auto un = u.at(n);
    for (std::size_t i = 0; i < u.width(); ++i)
      g[i] = un[i] + k::dot(problem.fam->loads[i].span(), ev.p[n].span());
  }
  return ev;
}

double l2_inner(const ControlSignal& a, const ControlSignal& b, double dt) {
  return dt * k::dot(a.flat(), b.flat());
}

namespace {

double stationarity_residual(const ControlSignal& u, const ControlSignal& g, double dt,
                             NormKind kind) {
  ControlSignal step = u;
  auto s = step.flat();
  const auto gf = g.flat();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] -= gf[i];
  clamp_project(step, kind);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = u.flat()[i] - s[i];
  const double num = std::sqrt(l2_inner(step, step, dt));
  return num / std::max(1.0, std::sqrt(l2_inner(u, u, dt)));
}

}  // namespace

OcpResult solve_ocp(const OcpProblem& problem, const ControlSignal* initial) {
  problem.validate();
  const std::size_t width = problem.fam->count();
  const OptimizerOptions& opt = problem.optimizer;
  const double dt = problem.dt;

  ControlSignal u(problem.steps, width, problem.bound);
  if (initial) {
    if (initial->steps() != problem.steps || initial->width() != width)
      throw ConfigError("initial control does not match the window");
    std::copy(initial->flat().begin(), initial->flat().end(), u.flat().begin());
  }
  clamp_project(u, problem.constraint);

  OcpResult best;
  GradientEvaluation ev = reduced_gradient(problem, u);
  std::size_t evals = 1;
  double residual = stationarity_residual(u, ev.gradient, dt, problem.constraint);
  auto keep_if_best = [&](const ControlSignal& cand, GradientEvaluation& e, double res) {
    if (best.iterations == 0 || e.cost.total < best.cost.total) {
      best.u = cand;
      best.z = e.z;
      best.p = e.p;
      best.cost = e.cost;
      best.residual = res;
      best.iterations = 1;
    }
  };
  keep_if_best(u, ev, residual);
  bool converged = residual <= opt.tolerance;

  double tau = opt.tau0;
  std::size_t rejections = 0;
  std::size_t accepted = 0;
  while (!converged && evals < opt.max_iters) {
    ControlSignal trial = u;
    {
      auto t = trial.flat();
      const auto g = ev.gradient.flat();
      for (std::size_t i = 0; i < t.size(); ++i) t[i] -= tau * g[i];
    }
    clamp_project(trial, problem.constraint);
    GradientEvaluation next;
    try {
      ++evals;
      next = reduced_gradient(problem, trial);
    } catch (const BlowUpError&) {
      if (++rejections > opt.max_rejections) break;
      tau = std::max(opt.tau_min, 0.5 * tau);
      continue;
    }
    // Secant pair in the time-discrete L^2 product.
    ControlSignal s = trial;
    ControlSignal y = next.gradient;
    for (std::size_t i = 0; i < s.flat().size(); ++i) {
      s.flat()[i] -= u.flat()[i];
      y.flat()[i] -= ev.gradient.flat()[i];
    }
    const double sty = l2_inner(s, y, dt);
    if (sty > 0.0) {
      const double bb = (accepted % 2 == 0) ? l2_inner(s, s, dt) / sty
                                            : sty / l2_inner(y, y, dt);
      tau = std::clamp(bb, opt.tau_min, opt.tau_max);
    }
    ++accepted;
    u = std::move(trial);
    ev = std::move(next);
    residual = stationarity_residual(u, ev.gradient, dt, problem.constraint);
    keep_if_best(u, ev, residual);
    converged = residual <= opt.tolerance;
  }
  best.iterations = evals;
  best.rejections = rejections;
  best.converged = converged && best.residual <= opt.tolerance;
  return best;
}

RhcResult receding_horizon(const Field& z0, const RhcSetup& setup) {
  RhcResult result;
  receding_horizon_into(result, z0, setup);
  return result;
}

void receding_horizon_into(RhcResult& result, const Field& z0, const RhcSetup& setup) {
  if (!setup.target) throw ConfigError("receding horizon needs a target");
  if (!(setup.shift > 0.0) || setup.shift > setup.horizon)
    throw ConfigError("receding horizon needs 0 < shift <= horizon");
  const std::size_t total_steps = step_count(setup.T, setup.dt);
  const std::size_t shift_steps = step_count(setup.shift, setup.dt);
  const std::size_t window_steps = step_count(setup.horizon, setup.dt);
  if (total_steps % shift_steps != 0)
    throw ConfigError("horizon T must be a multiple of the receding-horizon shift");
  const std::size_t windows = total_steps / shift_steps;
  const std::size_t width = setup.fam->count();

  result = RhcResult{};
  Field z = z0;
  ControlSignal warm(window_steps, width, setup.bound);
  for (std::size_t w = 0; w < windows; ++w) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t first = w * shift_steps;
    OcpProblem problem;
    problem.grid = setup.grid;
    problem.ops = setup.ops;
    problem.fam = setup.fam;
    problem.observation = setup.observation;
    problem.params = setup.params;
    problem.dt = setup.dt;
    problem.s0 = static_cast<double>(first) * setup.dt;
    problem.steps = window_steps;
    problem.z0 = z;
    problem.target = TargetTrace(*setup.target, *setup.grid, problem.s0, setup.dt, window_steps, true);
    problem.bound = setup.bound;
    problem.constraint = setup.constraint;
    problem.optimizer = setup.optimizer;

    OcpResult sol;
    try {
      sol = solve_ocp(problem, &warm);
    } catch (const BlowUpError& e) {
      throw BlowUpError("window " + std::to_string(w) + ": " + e.what(), e.time_reached());
    } catch (const ConfigError& e) {
      throw ConfigError("window " + std::to_string(w) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("window " + std::to_string(w) + ": " + e.what());
    }

    // Apply the first shift of the optimal control.
    const std::size_t apply_steps = std::min(shift_steps, total_steps - first);
    ControlSignal applied(apply_steps, width, setup.bound);
    for (std::size_t n = 0; n < apply_steps; ++n) {
      const auto src = sol.u.at(n);
      std::copy(src.begin(), src.end(), applied.at(n).begin());
    }
    const TargetTrace seg_target = problem.target.window(0, apply_steps);
    const SimContext ctx{setup.grid, setup.ops, setup.params};
    RecordOptions rec;
    rec.snapshot_interval = setup.snapshot_interval;
    rec.observation = setup.observation;
    rec.control_norm = setup.constraint;
    SimTrace segment;
    try {
      simulate_into(segment, z, static_cast<double>(apply_steps) * setup.dt, setup.dt, ctx,
                    OpenLoopRhs{setup.fam, &applied, &seg_target}, rec, problem.s0);
    } catch (const BlowUpError& e) {
      result.trace.append(segment);
      throw BlowUpError("window " + std::to_string(w) + ": " + e.what(), e.time_reached());
    }
    // The held value at the segment end is the next optimal sample.
    if (apply_steps < window_steps) {
      const auto next = sol.u.at(apply_steps);
      segment.controls.back().assign(next.begin(), next.end());
      segment.saturated.back() =
          vector_norm(next, setup.constraint) >= setup.bound ? 1 : 0;
    }
    z = segment.final_state;
    result.trace.append(segment);

    WindowReport rep;
    rep.index = w;
    rep.s0 = problem.s0;
    rep.s1 = problem.s1();
    rep.iterations = sol.iterations;
    rep.converged = sol.converged;
    rep.cost = sol.cost.total;
    rep.cost_state = sol.cost.state;
    rep.cost_control = sol.cost.control;
    rep.residual = sol.residual;
    rep.initial_multiplier_norm = setup.ops->norm_h(sol.p.front());
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.windows.push_back(rep);

    // Shift and extend by zeros.
    warm = ControlSignal(window_steps, width, setup.bound);
    for (std::size_t n = 0; n + shift_steps < window_steps; ++n) {
      const auto src = sol.u.at(n + shift_steps);
      std::copy(src.begin(), src.end(), warm.at(n).begin());
    }
  }
}

DppReport dpp_gap(const OcpProblem& problem, double a) {
  problem.validate();
  const double offset = (a - problem.s0) / problem.dt;
  const auto ka = static_cast<std::size_t>(std::llround(offset));
  if (!(a > problem.s0) || !(a < problem.s1()) || std::abs(offset - static_cast<double>(ka)) > 1e-9)
    throw ConfigError("split point must be a grid time strictly inside the window");
  DppReport rep;
  const OcpResult full = solve_ocp(problem);
  rep.full_cost = full.cost.total;
  rep.full_converged = full.converged;
  rep.head_cost = full.z.cost_state[ka] + full.z.cost_control[ka];

  OcpProblem tail = problem;
  tail.s0 = a;
  tail.steps = problem.steps - ka;
  tail.z0 = full.z.states[ka];
  tail.target = problem.target.window(ka, tail.steps);
  ControlSignal warm(tail.steps, full.u.width(), problem.bound);
  for (std::size_t n = 0; n < tail.steps; ++n) {
    const auto src = full.u.at(n + ka);
    std::copy(src.begin(), src.end(), warm.at(n).begin());
  }
  const OcpResult rest = solve_ocp(tail, &warm);
  rep.tail_cost = rest.cost.total;
  rep.tail_converged = rest.converged;
  rep.gap = rep.full_cost - (rep.head_cost + rep.tail_cost);
  return rep;
}

}  // namespace schloegl
