#include "schloegl/fem.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "schloegl/errors.hpp"
#include "schloegl/kernels.hpp"

namespace schloegl {

namespace k = kernels::omp;

bool Field::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Field& Field::operator+=(const Field& other) {
  k::axpy(1.0, other.span(), span());
  return *this;
}

Field& Field::operator-=(const Field& other) {
  k::axpy(-1.0, other.span(), span());
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void SymTridiag::apply(std::span<const double> x, std::span<double> y) const {
  k::tridiag_apply(diag, off, x, y);
}

Field SymTridiag::apply(const Field& x) const {
  Field y(x.size());
  apply(x.span(), y.span());
  return y;
}

double SymTridiag::form(std::span<const double> x,
                        std::span<const double> y) const {
  return k::tridiag_form(diag, off, x, y);
}

std::vector<double> SymTridiag::row_sums() const {
  std::vector<double> ones(size(), 1.0), out(size());
  apply(ones, out);
  return out;
}

SymTridiag linear_combination(double a, const SymTridiag& A, double b,
                              const SymTridiag& B) {
  SymTridiag C;
  C.diag.resize(A.diag.size());
  C.off.resize(A.off.size());
  for (std::size_t i = 0; i < A.diag.size(); ++i)
    C.diag[i] = a * A.diag[i] + b * B.diag[i];
  for (std::size_t i = 0; i < A.off.size(); ++i)
    C.off[i] = a * A.off[i] + b * B.off[i];
  return C;
}

TridiagSolver::TridiagSolver(const SymTridiag& matrix) {
  const std::size_t n = matrix.size();
  d_.resize(n);
  l_.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    double pivot = matrix.diag[i];
    if (i > 0) pivot -= l_[i - 1] * l_[i - 1] * d_[i - 1];
    if (!(pivot > 0.0))
      throw NumericalError("tridiagonal factorization: nonpositive pivot at row " +
                           std::to_string(i));
    d_[i] = pivot;
    if (i + 1 < n) l_[i] = matrix.off[i] / pivot;
  }
}

void TridiagSolver::solve_in_place(std::span<double> rhs) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 1; i < n; ++i) rhs[i] -= l_[i - 1] * rhs[i - 1];
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= d_[i];
  for (std::size_t i = n; i-- > 1;) rhs[i - 1] -= l_[i - 1] * rhs[i];
}

Field TridiagSolver::solve(Field rhs) const {
  solve_in_place(rhs.span());
  return rhs;
}

double FemOperators::inner_h(const Field& a, const Field& b) const {
  return mass.form(a.span(), b.span());
}

double FemOperators::inner_v(const Field& a, const Field& b) const {
  return shifted.form(a.span(), b.span());
}

double FemOperators::norm_h(const Field& a) const {
  return std::sqrt(std::max(0.0, inner_h(a, a)));
}

double FemOperators::norm_v(const Field& a) const {
  return std::sqrt(std::max(0.0, inner_v(a, a)));
}

std::pair<Grid, FemOperators> build_grid(std::size_t n_nodes, double length,
                                         double nu) {
  if (n_nodes < 3)
    throw ConfigError("grid needs at least 3 nodes, got " +
                      std::to_string(n_nodes));
  if (!(length > 0.0) || !std::isfinite(length))
    throw ConfigError("domain length must be positive and finite");
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw ConfigError("diffusion coefficient must be positive and finite");

  Grid grid;
  grid.n_nodes = n_nodes;
  grid.length = length;
  grid.nu = nu;
  grid.h = length / static_cast<double>(n_nodes - 1);
  grid.x.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i)
    grid.x[i] = length * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
  grid.x.back() = length;

  const double h = grid.h;
  FemOperators ops;
  ops.nu = nu;
  ops.mass.diag.assign(n_nodes, 4.0 * h / 6.0);
  ops.mass.diag.front() = ops.mass.diag.back() = 2.0 * h / 6.0;
  ops.mass.off.assign(n_nodes - 1, h / 6.0);
  ops.stiffness.diag.assign(n_nodes, 2.0 / h);
  ops.stiffness.diag.front() = ops.stiffness.diag.back() = 1.0 / h;
  ops.stiffness.off.assign(n_nodes - 1, -1.0 / h);
  ops.shifted = linear_combination(nu, ops.stiffness, 1.0, ops.mass);
  ops.mass_solver = TridiagSolver(ops.mass);
  return {std::move(grid), std::move(ops)};
}

Norms norms(const Field& field, const FemOperators& ops, const Grid& grid) {
  Norms out;
  out.h = ops.norm_h(field);
  out.v = ops.norm_v(field);
  out.l6 = std::pow(k::l6_integral(field.span(), grid.h), 1.0 / 6.0);
  return out;
}

namespace {

Eigen::MatrixXd dense(const SymTridiag& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = t.diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      m(i, i + 1) = m(i + 1, i) = t.off[static_cast<std::size_t>(i)];
    }
  }
  return m;
}

}  // namespace

EigenBasis neumann_eigenbasis(const Grid& grid, const FemOperators& ops,
                              std::size_t count) {
  if (count == 0 || count > grid.n_nodes)
    throw ConfigError("eigenbasis size must be in [1, n_nodes], got " +
                      std::to_string(count));
  const Eigen::MatrixXd A = dense(ops.shifted);
  const Eigen::MatrixXd M = dense(ops.mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, M);
  if (solver.info() != Eigen::Success)
    throw NumericalError("generalized eigensolver failed for the Neumann basis (n = " +
                         std::to_string(grid.n_nodes) + ")");

  EigenBasis basis;
  basis.fields.reserve(count);
  basis.eigenvalues.reserve(count);
  // Eigenvalues come sorted ascending; eigenvectors are M-normalized.
  for (std::size_t j = 0; j < count; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    Field e(grid.n_nodes);
    for (std::size_t i = 0; i < grid.n_nodes; ++i)
      e[i] = solver.eigenvectors()(static_cast<Eigen::Index>(i), col);
    for (double v : e) {
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) e *= -1.0;
        break;
      }
    }
    const double nrm = ops.norm_h(e);
    e *= 1.0 / nrm;
    basis.fields.push_back(std::move(e));
    basis.eigenvalues.push_back(solver.eigenvalues()(col));
  }
  return basis;
}

}  // namespace schloegl
