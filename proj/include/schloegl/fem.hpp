#pragma once

// P1 finite elements on a uniform partition of (0, L) with homogeneous
// Neumann boundary conditions.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace schloegl {

/// Nodal coefficients of a continuous piecewise-linear function.
class Field {
 public:
  Field() = default;
  explicit Field(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit Field(std::vector<double> values) : values_(std::move(values)) {}
  Field(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

struct Grid {
  std::size_t n_nodes = 0;
  double length = 0.0;
  double nu = 0.0;
  double h = 0.0;
  std::vector<double> x;

  Field constant(double value) const { return Field(n_nodes, value); }
  /// Nodal interpolant of f.
  template <typename F>
  Field interpolate(F&& f) const {
    Field out(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) out[i] = f(x[i]);
    return out;
  }
};

/// Symmetric tridiagonal matrix; off[i] couples rows i and i + 1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const noexcept { return diag.size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  Field apply(const Field& x) const;
  /// x^T T y
  double form(std::span<const double> x, std::span<const double> y) const;
  /// Row sums, i.e. T applied to the constant one.
  std::vector<double> row_sums() const;
};

SymTridiag linear_combination(double a, const SymTridiag& A, double b,
                              const SymTridiag& B);

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix.
class TridiagSolver {
 public:
  TridiagSolver() = default;
  explicit TridiagSolver(const SymTridiag& matrix);

  std::size_t size() const noexcept { return d_.size(); }
  /// In place: rhs <- T^{-1} rhs.
  void solve_in_place(std::span<double> rhs) const;
  Field solve(Field rhs) const;

 private:
  std::vector<double> d_;  // pivots
  std::vector<double> l_;  // unit lower bidiagonal multipliers
};

/// Consistent mass, stiffness and the shifted operator A_h = nu K_h + M_h,
/// whose quadratic form is the squared V-norm nu |grad z|^2 + |z|^2.
struct FemOperators {
  SymTridiag mass;
  SymTridiag stiffness;
  SymTridiag shifted;
  TridiagSolver mass_solver;
  double nu = 0.0;

  double inner_h(const Field& a, const Field& b) const;
  double inner_v(const Field& a, const Field& b) const;
  double norm_h(const Field& a) const;
  double norm_v(const Field& a) const;
};

std::pair<Grid, FemOperators> build_grid(std::size_t n_nodes, double length,
                                         double nu);

struct Norms {
  double h = 0.0;
  double v = 0.0;
  double l6 = 0.0;
};

/// H (L^2), V (nu-weighted W^{1,2}) and L^6 norms of a field. The L^6 norm
/// integrates the sixth power of the P1 interpolant with 3-point Gauss
/// quadrature per element.
Norms norms(const Field& field, const FemOperators& ops, const Grid& grid);

/// M_h-orthonormal eigenpairs of A_h e = alpha M_h e, smallest first.
struct EigenBasis {
  std::vector<Field> fields;
  std::vector<double> eigenvalues;

  std::size_t count() const noexcept { return fields.size(); }
};

/// The `count` smallest generalized eigenpairs. Each eigenfield is
/// normalized so that its first entry with magnitude above 1e-12 is positive.
EigenBasis neumann_eigenbasis(const Grid& grid, const FemOperators& ops,
                              std::size_t count);

}  // namespace schloegl
