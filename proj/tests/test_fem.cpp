#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "schloegl/errors.hpp"
#include "schloegl/fem.hpp"

using namespace schloegl;

namespace {

Field random_field(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Field f(n);
  for (double& v : f) v = dist(rng);
  return f;
}

}  // namespace

TEST_CASE("three-node mass matrix") {
  const auto [grid, ops] = build_grid(3, 1.0, 0.1);
  CHECK(grid.h == 0.5);
  const double s = 0.5 / 6.0;
  CHECK(ops.mass.diag[0] == doctest::Approx(2 * s));
  CHECK(ops.mass.diag[1] == doctest::Approx(4 * s));
  CHECK(ops.mass.diag[2] == doctest::Approx(2 * s));
  CHECK(ops.mass.off[0] == doctest::Approx(s));
  CHECK(ops.mass.off[1] == doctest::Approx(s));
  double total = 0.0;
  for (double r : ops.mass.row_sums()) total += r;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("grid invariants") {
  const auto [grid, ops] = build_grid(1001, 1.0, 0.1);
  CHECK(grid.x.front() == 0.0);
  CHECK(grid.x.back() == 1.0);
  for (std::size_t i = 1; i < grid.n_nodes; ++i)
    CHECK(grid.x[i] - grid.x[i - 1] == doctest::Approx(grid.h).epsilon(1e-12));
  for (double r : ops.stiffness.row_sums()) CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("build_grid rejects invalid input") {
  CHECK_THROWS_AS(build_grid(2, 1.0, 0.1), ConfigError);
  CHECK_THROWS_AS(build_grid(11, 0.0, 0.1), ConfigError);
  CHECK_THROWS_AS(build_grid(11, 1.0, -0.1), ConfigError);
}

TEST_CASE("stiffness annihilates constants") {
  for (std::size_t n : {3u, 10u, 251u}) {
    const auto [grid, ops] = build_grid(n, 2.5, 0.1);
    const Field k1 = ops.stiffness.apply(grid.constant(1.0));
    for (double v : k1) CHECK(std::abs(v) < 1e-12 * static_cast<double>(n));
  }
}

TEST_CASE("norms of simple fields") {
  const auto [grid, ops] = build_grid(51, 1.0, 0.1);
  const Norms one = norms(grid.constant(1.0), ops, grid);
  CHECK(one.h == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.l6 == doctest::Approx(1.0).epsilon(1e-14));
  const Norms zero = norms(grid.constant(0.0), ops, grid);
  CHECK(zero.h == 0.0);
  CHECK(zero.v == 0.0);
  CHECK(zero.l6 == 0.0);
}

TEST_CASE("V-norm of cos(pi x) converges to its analytic value") {
  // nu |grad|^2 + |.|^2 of cos(pi x) on (0, 1) is 0.5 (0.1 pi^2 + 1).
  const double exact = 0.5 * (0.1 * std::numbers::pi * std::numbers::pi + 1.0);
  double prev_err = 0.0;
  for (std::size_t n : {101u, 201u, 401u}) {
    const auto [grid, ops] = build_grid(n, 1.0, 0.1);
    const Field f = grid.interpolate([](double x) { return std::cos(std::numbers::pi * x); });
    const double err = std::abs(ops.norm_v(f) * ops.norm_v(f) - exact);
    if (prev_err > 0.0) CHECK(std::log2(prev_err / err) == doctest::Approx(2.0).epsilon(0.05));
    prev_err = err;
  }
  CHECK(prev_err < 1e-5);
}

TEST_CASE("operator symmetry and V dominates H") {
  const auto [grid, ops] = build_grid(101, 1.0, 0.1);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Field a = random_field(grid.n_nodes, rng);
    const Field b = random_field(grid.n_nodes, rng);
    CHECK(ops.inner_h(a, b) == doctest::Approx(ops.inner_h(b, a)).epsilon(1e-12));
    CHECK(ops.inner_v(a, b) == doctest::Approx(ops.inner_v(b, a)).epsilon(1e-12));
    CHECK(ops.norm_v(a) >= ops.norm_h(a));
  }
}

TEST_CASE("tridiagonal solver inverts the mass matrix") {
  const auto [grid, ops] = build_grid(77, 1.0, 0.1);
  std::mt19937_64 rng(5);
  const Field b = random_field(grid.n_nodes, rng);
  const Field x = ops.mass_solver.solve(b);
  const Field r = ops.mass.apply(x) - b;
  for (double v : r) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("Neumann eigenbasis") {
  const auto [grid, ops] = build_grid(201, 1.0, 0.1);
  const EigenBasis basis = neumann_eigenbasis(grid, ops, 20);
  REQUIRE(basis.count() == 20);

  SUBCASE("first eigenpair is the constant with alpha 1") {
    CHECK(basis.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : basis.fields[0]) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("M-orthonormal and nondecreasing") {
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = 0; j < 20; ++j)
        CHECK(std::abs(ops.inner_h(basis.fields[i], basis.fields[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);
      if (i > 0) CHECK(basis.eigenvalues[i] >= basis.eigenvalues[i - 1]);
    }
  }
  SUBCASE("eigen residual") {
    for (std::size_t k = 0; k < 20; ++k) {
      const Field lhs = ops.shifted.apply(basis.fields[k]);
      const Field rhs = basis.eigenvalues[k] * ops.mass.apply(basis.fields[k]);
      const Field r = lhs - rhs;
      double m = 0.0;
      for (double v : r) m = std::max(m, std::abs(v));
      CHECK(m < 1e-9);
    }
  }
  SUBCASE("sign convention") {
    for (const Field& e : basis.fields) {
      for (double v : e) {
        if (std::abs(v) > 1e-12) {
          CHECK(v > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("discrete eigenvalues converge to nu pi^2 k^2 + 1 at order 2") {
  const double nu = 0.1;
  std::vector<std::vector<double>> errs;
  for (std::size_t n : {51u, 101u, 201u}) {
    const auto [grid, ops] = build_grid(n, 1.0, nu);
    const EigenBasis basis = neumann_eigenbasis(grid, ops, 6);
    std::vector<double> e;
    for (int k = 1; k <= 5; ++k) {
      const double exact = nu * std::numbers::pi * std::numbers::pi * k * k + 1.0;
      e.push_back(std::abs(basis.eigenvalues[static_cast<std::size_t>(k)] - exact));
    }
    errs.push_back(e);
  }
  for (std::size_t k = 0; k < 5; ++k) {
    CAPTURE(k + 1);
    const double order = std::log2(errs[1][k] / errs[2][k]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.05));
  }
  const auto [grid, ops] = build_grid(201, 1.0, nu);
  CHECK(neumann_eigenbasis(grid, ops, 2).eigenvalues[1] ==
        doctest::Approx(0.1 * std::numbers::pi * std::numbers::pi + 1.0).epsilon(1e-3));
}

TEST_CASE("eigenbasis rejects invalid counts") {
  const auto [grid, ops] = build_grid(11, 1.0, 0.1);
  CHECK_THROWS_AS(neumann_eigenbasis(grid, ops, 0), ConfigError);
  CHECK_THROWS_AS(neumann_eigenbasis(grid, ops, 12), ConfigError);
}
