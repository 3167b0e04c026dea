#include "schloegl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "schloegl/errors.hpp"

namespace schloegl {

namespace {

Eigen::MatrixXd dense(const SymTridiag& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = t.diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = t.off[static_cast<std::size_t>(i)];
  }
  return m;
}

double log2_ratio(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

}  // namespace

Eigen::MatrixXd indicator_complement(const ActuatorFamily& fam) {
  if (fam.count() == 0) throw ConfigError("actuator family is empty");
  const auto n = static_cast<Eigen::Index>(fam.loads.front().size());
  const auto m = static_cast<Eigen::Index>(fam.count());
  // (chi_i, h)_H = load_i^T h, so the complement is the null space of W^T.
  Eigen::MatrixXd W(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    W.col(j) = Eigen::Map<const Eigen::VectorXd>(fam.loads[static_cast<std::size_t>(j)].data(), n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(n - m);
}

double min_rayleigh_root(const Eigen::MatrixXd& basis, const FemOperators& ops) {
  const Eigen::MatrixXd A = basis.transpose() * dense(ops.shifted) * basis;
  const Eigen::MatrixXd M = basis.transpose() * dense(ops.mass) * basis;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      A, M, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw NumericalError("generalized eigensolver failed on the actuator complement (dim " +
                         std::to_string(basis.cols()) + ")");
  return std::sqrt(solver.eigenvalues()(0));
}

double poincare_xi(const ActuatorFamily& fam, const FemOperators& ops) {
  return min_rayleigh_root(indicator_complement(fam), ops);
}

MlamReport check_mlam(std::span<const Field> samples, double lambda,
                      const ActuatorFamily& fam, const FemOperators& ops) {
  if (!(lambda >= 0.0)) throw ConfigError("M-lambda check needs lambda >= 0");
  MlamReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Field& y = samples[s];
    const double hh = ops.inner_h(y, y);
    if (hh == 0.0) continue;
    const Field py = oblique_project(y, fam, ops, ProjectionDirection::OntoBumpsAlongUPerp);
    const double ratio = (ops.inner_v(y, y) + lambda * ops.inner_v(py, py)) / hh;
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.argmin = s;
    }
  }
  return rep;
}

std::vector<Field> mlam_samples(const Grid& grid, const EigenBasis& basis,
                                std::size_t random_count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<Field> out;
  out.reserve(random_count + basis.count());
  for (std::size_t k = 0; k < random_count; ++k) {
    Field f(grid.n_nodes);
    for (double& v : f) v = dist(rng);
    out.push_back(std::move(f));
  }
  out.insert(out.end(), basis.fields.begin(), basis.fields.end());
  return out;
}

DecayReport decay_rate(std::span<const double> times, std::span<const double> norms,
                       std::optional<double> t_start) {
  if (times.size() != norms.size() || times.size() < 2)
    throw ConfigError("decay fit needs matching time and norm histories of length >= 2");
  const double t0 = times.front();
  const double t1 = times.back();
  DecayReport rep;
  rep.fit_start = t_start.value_or(t0 + 0.1 * (t1 - t0));
  rep.fit_end = t1;

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < rep.fit_start) continue;
    if (!(norms[i] > 0.0))
      throw NumericalError("decay fit needs positive norms, got " + std::to_string(norms[i]) +
                           " at t = " + std::to_string(times[i]));
    const double y = 2.0 * std::log(norms[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
    ++count;
  }
  if (count < 2) throw ConfigError("decay fit window holds fewer than 2 samples");
  const double nd = static_cast<double>(count);
  const double denom = nd * stt - st * st;
  const double slope = (nd * sty - st * sy) / denom;
  const double icpt = (sy - slope * st) / nd;
  rep.mu = -slope;
  rep.intercept = std::exp(icpt);
  rep.fit_points = count;

  double ss = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < rep.fit_start) continue;
    const double r = 2.0 * std::log(norms[i]) - (icpt + slope * times[i]);
    ss += r * r;
  }
  rep.residual = std::sqrt(ss / nd);

  // Transient bound over at most 256 evenly spaced samples.
  const std::size_t stride = std::max<std::size_t>(1, times.size() / 256);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); i += stride) idx.push_back(i);
  if (idx.back() != times.size() - 1) idx.push_back(times.size() - 1);
  rep.rho = 1.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const double zs = norms[idx[a]];
    if (!(zs > 0.0)) continue;
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const double zt = norms[idx[b]];
      const double log_ratio =
          rep.mu * (times[idx[b]] - times[idx[a]]) + 2.0 * (std::log(zt) - std::log(zs));
      if (zt > 0.0) rep.rho = std::max(rep.rho, std::exp(log_ratio));
    }
  }
  return rep;
}

namespace {

Field run_manufactured(const TargetSpec& target, std::size_t n_nodes, double dt,
                       const ConvergenceOptions& opt, Grid* grid_out = nullptr,
                       FemOperators* ops_out = nullptr) {
  auto [grid, ops] = build_grid(n_nodes, opt.length, opt.nu);
  const ManufacturedForcing forcing(target, opt.params, opt.nu);
  const SimContext ctx{&grid, &ops, opt.params};
  const Grid& g = grid;
  FreeRhs rhs{[&forcing, &g](double t) { return forcing.at(g, t); }};
  RecordOptions rec;
  rec.snapshot_interval = 0.0;
  const SimTrace tr = simulate(target.at(grid, 0.0), opt.T, dt, ctx, rhs, rec);
  if (grid_out) *grid_out = grid;
  if (ops_out) *ops_out = ops;
  return tr.final_state;
}

}  // namespace

ConvergenceReport convergence_study(const TargetSpec& target,
                                    const ConvergenceOptions& opt) {
  if (opt.levels < 3) throw ConfigError("convergence study needs at least 3 levels");
  ConvergenceReport rep;

  auto [tgrid, tops] = build_grid(opt.time_nodes, opt.length, opt.nu);
  std::vector<Field> finals;
  for (std::size_t l = 0; l <= opt.levels; ++l) {
    const double dt = opt.dt0 / std::ldexp(1.0, static_cast<int>(l));
    rep.dts.push_back(dt);
    finals.push_back(run_manufactured(target, opt.time_nodes, dt, opt));
  }
  for (std::size_t l = 0; l + 1 < finals.size(); ++l)
    rep.time_differences.push_back(tops.norm_h(finals[l] - finals[l + 1]));

  for (std::size_t l = 0; l < opt.levels; ++l) {
    const std::size_t elements = opt.space_elements0 << l;
    Grid grid;
    FemOperators ops;
    const Field y = run_manufactured(target, elements + 1, opt.space_dt, opt, &grid, &ops);
    rep.hs.push_back(grid.h);
    rep.space_errors.push_back(ops.norm_h(y - target.at(grid, opt.T)));
  }

  auto orders = [&](const std::vector<double>& e, std::vector<double>& out) {
    for (std::size_t l = 0; l + 1 < e.size(); ++l) {
      out.push_back(log2_ratio(e[l], e[l + 1]));
      if (!(e[l + 1] < e[l])) rep.non_monotone = true;
    }
  };
  orders(rep.time_differences, rep.time_orders);
  orders(rep.space_errors, rep.space_orders);

  bool tiny = true;
  for (double e : rep.time_differences) tiny = tiny && e < 1e-13;
  for (double e : rep.space_errors) tiny = tiny && e < 1e-13;
  rep.at_roundoff = tiny;
  if (tiny) rep.non_monotone = false;
  rep.time_order = rep.time_orders.back();
  rep.space_order = rep.space_orders.back();
  if (tiny) {
    rep.time_order = std::numeric_limits<double>::quiet_NaN();
    rep.space_order = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace schloegl
