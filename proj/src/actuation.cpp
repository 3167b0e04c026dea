#include "schloegl/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "schloegl/errors.hpp"
#include "schloegl/kernels.hpp"

namespace schloegl {

namespace k = kernels::omp;

namespace {

// Exact integrals of 1_{[lo, hi]} against the hat functions of element e,
// added into `load`.
void add_element_indicator_load(const Grid& grid, std::size_t e, double lo,
                                double hi, Field& load) {
  const double xl = grid.x[e];
  const double xr = grid.x[e + 1];
  const double a = std::max(lo, xl);
  const double b = std::min(hi, xr);
  if (b <= a) return;
  const double h = grid.h;
  // integral of (xr - s)/h and (s - xl)/h over [a, b]
  const double left = ((xr - a) * (xr - a) - (xr - b) * (xr - b)) / (2.0 * h);
  const double right = ((b - xl) * (b - xl) - (a - xl) * (a - xl)) / (2.0 * h);
  load[e] += left;
  load[e + 1] += right;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

double ActuatorFamily::bump_value(std::size_t j, double x) const {
  const Interval& s = supports[j];
  if (!s.contains(x)) return 0.0;
  const double arg = static_cast<double>(M) * std::numbers::pi *
                     (x - centers[j] + r * length / (2.0 * static_cast<double>(M))) /
                     (r * length);
  const double sn = std::sin(arg);
  return sn * sn;
}

Eigen::VectorXd ActuatorFamily::indicator_moments(const Field& z) const {
  Eigen::VectorXd m(static_cast<Eigen::Index>(count()));
  for (std::size_t i = 0; i < count(); ++i)
    m(static_cast<Eigen::Index>(i)) = k::dot(loads[i].span(), z.span());
  return m;
}

Eigen::VectorXd ActuatorFamily::bump_moments(const Field& z,
                                             const FemOperators& ops) const {
  const Field mz = ops.mass.apply(z);
  Eigen::VectorXd m(static_cast<Eigen::Index>(count()));
  for (std::size_t i = 0; i < count(); ++i)
    m(static_cast<Eigen::Index>(i)) = k::dot(bumps[i].span(), mz.span());
  return m;
}

Eigen::VectorXd ActuatorFamily::solve_gram(const Eigen::VectorXd& rhs) const {
  return gram_lu_.solve(rhs);
}

Eigen::VectorXd ActuatorFamily::solve_gram_transposed(const Eigen::VectorXd& rhs) const {
  return gram_lu_.transpose().solve(rhs);
}

Eigen::VectorXd ActuatorFamily::solve_gram_uu(const Eigen::VectorXd& rhs) const {
  return gram_uu_llt_.solve(rhs);
}

ActuatorFamily build_actuators(std::size_t M, double r, const Grid& grid,
                               const FemOperators& ops) {
  if (M < 1) throw ConfigError("actuator partition index M must be >= 1");
  if (!(r > 0.0 && r < 1.0))
    throw ConfigError("actuator volume fraction r must lie in (0, 1), got " +
                      std::to_string(r));

  ActuatorFamily fam;
  fam.M = M;
  fam.r = r;
  fam.length = grid.length;
  const double L = grid.length;
  const double Md = static_cast<double>(M);
  const double half_width = r * L / (2.0 * Md);

  for (std::size_t j = 0; j < M; ++j) {
    const double c = (2.0 * static_cast<double>(j + 1) - 1.0) * L / (2.0 * Md);
    fam.centers.push_back(c);
    fam.supports.push_back({c - half_width, c + half_width});
  }

  for (std::size_t j = 0; j < M; ++j) {
    const Interval s = fam.supports[j];
    const auto inside = std::count_if(grid.x.begin(), grid.x.end(),
                                      [&](double x) { return s.contains(x); });
    if (inside < 4)
      throw ResolutionError("actuator support " + std::to_string(j + 1) + " of M = " +
                            std::to_string(M) + " contains " + std::to_string(inside) +
                            " grid nodes, need at least 4; refine the grid");

    Field load(grid.n_nodes);
    for (std::size_t e = 0; e + 1 < grid.n_nodes; ++e)
      add_element_indicator_load(grid, e, s.lo, s.hi, load);
    fam.indicators.push_back(ops.mass_solver.solve(load));
    fam.loads.push_back(std::move(load));
    fam.bumps.push_back(grid.interpolate([&](double x) { return fam.bump_value(j, x); }));
  }

  const auto n = static_cast<Eigen::Index>(M);
  fam.gram_uu.resize(n, n);
  fam.gram_u_psi.resize(n, n);
  fam.bump_stiffness.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const Field a_psi = ops.shifted.apply(fam.bumps[iu]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      fam.gram_uu(i, j) = k::dot(fam.loads[iu].span(), fam.indicators[ju].span());
      fam.gram_u_psi(i, j) = k::dot(fam.loads[iu].span(), fam.bumps[ju].span());
      fam.bump_stiffness(i, j) = k::dot(fam.bumps[ju].span(), a_psi.span());
    }
  }
  // Symmetrize away round-off in the symmetric Gram matrices.
  fam.gram_uu = 0.5 * (fam.gram_uu + fam.gram_uu.transpose()).eval();
  fam.bump_stiffness = 0.5 * (fam.bump_stiffness + fam.bump_stiffness.transpose()).eval();

  fam.gram_lu_.compute(fam.gram_u_psi);
  const double rc = fam.gram_lu_.rcond();
  if (!(rc > 1e-12))
    throw DegenerateFamilyError("indicator/bump Gram matrix is singular (rcond = " +
                                std::to_string(rc) + ")");
  fam.gram_uu_llt_.compute(fam.gram_uu);
  if (fam.gram_uu_llt_.info() != Eigen::Success)
    throw DegenerateFamilyError("indicator Gram matrix is not positive definite");
  return fam;
}

Field u_diamond(std::span<const double> u, const ActuatorFamily& fam) {
  Field out(fam.indicators.empty() ? 0 : fam.indicators.front().size());
  for (std::size_t i = 0; i < fam.count(); ++i)
    k::axpy(u[i], fam.indicators[i].span(), out.span());
  return out;
}

std::vector<double> u_diamond_adjoint(const Field& p, const ActuatorFamily& fam,
                                      const FemOperators& /*ops*/) {
  // (chi_i, p) = chi_i^T M p = load_i^T p
  return to_std(fam.indicator_moments(p));
}

Field oblique_project(const Field& z, const ActuatorFamily& fam,
                      const FemOperators& ops, ProjectionDirection direction) {
  Field out(z.size());
  if (direction == ProjectionDirection::OntoBumpsAlongUPerp) {
    const Eigen::VectorXd c = fam.solve_gram(fam.indicator_moments(z));
    for (std::size_t j = 0; j < fam.count(); ++j)
      k::axpy(c(static_cast<Eigen::Index>(j)), fam.bumps[j].span(), out.span());
  } else {
    const Eigen::VectorXd d = fam.solve_gram_transposed(fam.bump_moments(z, ops));
    for (std::size_t j = 0; j < fam.count(); ++j)
      k::axpy(d(static_cast<Eigen::Index>(j)), fam.indicators[j].span(), out.span());
  }
  return out;
}

double vector_norm(std::span<const double> v, NormKind kind) {
  double s = 0.0;
  if (kind == NormKind::LInf) {
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
  }
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> saturate(std::span<const double> v, double bound,
                             NormKind kind) {
  std::vector<double> out(v.begin(), v.end());
  if (std::isinf(bound)) return out;
  if (bound <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double nv = vector_norm(v, kind);
  if (nv <= bound) return out;
  const double scale = bound / nv;
  for (double& x : out) x *= scale;
  if (kind == NormKind::LInf) {
    for (double& x : out) x = std::clamp(x, -bound, bound);
  } else {
    while (vector_norm(out, kind) > bound)
      for (double& x : out) x = std::nextafter(x, 0.0);
  }
  return out;
}

void FeedbackConfig::validate() const {
  if (!(lambda >= 0.0) || std::isinf(lambda))
    throw ConfigError("feedback gain lambda must be finite and >= 0");
  if (!(bound >= 0.0))
    throw ConfigError("control bound C_u must be >= 0 (or inf)");
}

FeedbackResult feedback(const Field& z, const ActuatorFamily& fam,
                        const FemOperators& /*ops*/, const FeedbackConfig& cfg) {
  Eigen::VectorXd v;
  const Eigen::VectorXd moments = fam.indicator_moments(z);
  if (cfg.variant == FeedbackVariant::Oblique) {
    // A P_psi z paired with psi_i equals (psi_i, sum_j c_j psi_j)_V.
    const Eigen::VectorXd c = fam.solve_gram(moments);
    v = -cfg.lambda * fam.solve_gram_transposed(fam.bump_stiffness * c);
  } else {
    v = -cfg.lambda * fam.solve_gram_uu(moments);
  }
  FeedbackResult res;
  res.unsaturated = to_std(v);
  res.saturated = vector_norm(res.unsaturated, cfg.norm) > cfg.bound;
  res.u = saturate(res.unsaturated, cfg.bound, cfg.norm);
  return res;
}

double frak_u_norm(const ActuatorFamily& fam, const FemOperators& ops,
                   NormKind kind) {
  const auto n = static_cast<Eigen::Index>(fam.count());
  Eigen::MatrixXd ginv(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    ginv.col(j) = fam.solve_gram(Eigen::VectorXd::Unit(n, j));
  // Row i of S maps indicator moments (chi_k, w) to (frak_U w)_i.
  const Eigen::MatrixXd S = ginv.transpose() * fam.bump_stiffness * ginv;

  std::vector<Field> representers;
  for (Eigen::Index i = 0; i < n; ++i) {
    Field rho(fam.indicators.front().size());
    for (Eigen::Index kk = 0; kk < n; ++kk)
      k::axpy(S(i, kk), fam.indicators[static_cast<std::size_t>(kk)].span(), rho.span());
    representers.push_back(std::move(rho));
  }

  if (kind == NormKind::LInf) {
    double best = 0.0;
    for (const Field& rho : representers) best = std::max(best, ops.norm_h(rho));
    return best;
  }

  Eigen::MatrixXd normal(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      normal(i, j) = ops.inner_h(representers[static_cast<std::size_t>(i)],
                                 representers[static_cast<std::size_t>(j)]);

  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.1 * static_cast<double>(i);
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd y = normal * x;
    const double next = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 0 && std::abs(next - estimate) <= 1e-8 * std::abs(next))
      return std::sqrt(next);
    estimate = next;
  }
  throw NumericalError("power iteration for the l2 feedback operator norm did not converge in 10^4 steps");
}

double cu_star(double lambda, double absorbing_radius, double frak_norm) {
  return lambda * frak_norm * absorbing_radius;
}

}  // namespace schloegl
