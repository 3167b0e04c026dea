#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "schloegl/dynamics.hpp"
#include "schloegl/errors.hpp"

using namespace schloegl;

namespace {

Field random_field(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Field f(n);
  for (double& v : f) v = dist(rng);
  return f;
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("xi coefficients") {
  const XiCoeffs a = xi_coeffs({-1.0, 0.0, 2.0});
  CHECK(a.xi0 == 0.0);
  CHECK(a.xi1 == -2.0);
  CHECK(a.xi2 == -1.0);
  const XiCoeffs b = xi_coeffs({0.0, 0.0, 0.0});
  CHECK(b.xi0 == 0.0);
  CHECK(b.xi1 == 0.0);
  CHECK(b.xi2 == 0.0);
  const XiCoeffs c = xi_coeffs({1.0, 1.0, 1.0});
  CHECK(c.xi0 == -1.0);
  CHECK(c.xi1 == 3.0);
  CHECK(c.xi2 == -3.0);
}

TEST_CASE("cubic nonlinearity") {
  const ReactionParams p;
  const Field root = f_cubic(Field(5, -1.0), p);
  CHECK(max_abs(root) == 0.0);
  const Field one = f_cubic(Field(5, 1.0), p);
  for (double v : one) CHECK(v == -2.0);

  std::mt19937_64 rng(1);
  const ReactionParams q{{0.3, -1.7, 2.2}};
  const XiCoeffs xi = q.xi();
  const Field y = random_field(100, rng, 3.0);
  const Field f = f_cubic(y, q);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    CHECK(std::abs(f[i] - (v * v * v + xi.xi2 * v * v + xi.xi1 * v + xi.xi0)) <=
          1e-12 * (1 + std::abs(f[i])));
    CHECK(std::abs(f[i] - (v - 0.3) * (v + 1.7) * (v - 2.2)) <= 1e-12 * (1 + std::abs(f[i])));
  }
}

TEST_CASE("error nonlinearity is the shifted cubic") {
  const ReactionParams p;
  std::mt19937_64 rng(2);
  const Field z = random_field(200, rng, 2.0);
  const Field yt = random_field(200, rng, 1.5);
  const Field lhs = f_error(z, yt, p);
  const Field rhs = f_cubic(z + yt, p) - f_cubic(yt, p) - z;
  CHECK(max_abs(lhs - rhs) < 1e-10);

  const XiCoeffs xi = p.xi();
  CHECK(max_abs(f_error(Field(200), yt, p)) == 0.0);
  const Field w = random_field(200, rng);
  const Field d0 = df_error(Field(200), yt, p, w);
  for (std::size_t i = 0; i < 200; ++i) {
    const double c = 3 * yt[i] * yt[i] + 2 * xi.xi2 * yt[i] + xi.xi1 - 1;
    CHECK(d0[i] == doctest::Approx(c * w[i]).epsilon(1e-13));
  }
}

TEST_CASE("linearization has a second-order Taylor remainder") {
  const auto [grid, ops] = build_grid(101, 1.0, 0.1);
  const ReactionParams p;
  std::mt19937_64 rng(3);
  const Field z = random_field(101, rng);
  const Field yt = random_field(101, rng);
  const Field w = random_field(101, rng);
  std::vector<double> rem;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const Field r = f_error(z + eps * w, yt, p) - f_error(z, yt, p) - eps * df_error(z, yt, p, w);
    rem.push_back(ops.norm_h(r));
  }
  for (std::size_t i = 1; i < rem.size(); ++i)
    CHECK(std::log10(rem[i - 1] / rem[i]) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("targets") {
  const auto [grid, ops] = build_grid(51, 1.0, 0.1);
  const TargetSpec s = TargetSpec::separable_sin_cos(1.0, 3.0, 1.0, 1.0);
  CHECK(s.value(0.3, 0.7) == doctest::Approx(std::sin(2.1) * std::cos(0.3 * std::numbers::pi)));
  CHECK(s.time_derivative(0.3, 0.7) ==
        doctest::Approx(3 * std::cos(2.1) * std::cos(0.3 * std::numbers::pi)));
  CHECK(s.second_space_derivative(0.3, 0.7) ==
        doctest::Approx(-std::numbers::pi * std::numbers::pi * std::sin(2.1) *
                        std::cos(0.3 * std::numbers::pi)));
  CHECK_THROWS_AS(TargetSpec::custom(Expr::parse("sin(pi*x)"), 1.0), ConfigError);
  CHECK_THROWS_AS(TargetSpec::separable_sin_cos(1.0, 3.0, 1.5, 1.0), ConfigError);
  CHECK_NOTHROW(TargetSpec::custom(Expr::parse("cos(2*pi*x) * exp(-t)"), 1.0));

  const TargetTrace lazy(s, grid, 0.5, 0.01, 100, false);
  const TargetTrace cached(s, grid, 0.5, 0.01, 100, true);
  CHECK(lazy.at(37) == cached.at(37));
  CHECK(cached.window(30, 20).at(7) == cached.at(37));
  CHECK(lazy.window(30, 20).at(7) == cached.at(37));
  CHECK_THROWS_AS(cached.window(90, 20), ConfigError);
}

TEST_CASE("manufactured forcing") {
  const auto [grid, ops] = build_grid(51, 1.0, 0.1);
  const ReactionParams p;
  CHECK(max_abs(ManufacturedForcing(TargetSpec::zero(), p, 0.1).at(grid, 0.3)) == 0.0);
  const auto root = TargetSpec::custom(Expr::parse("-1"), 1.0);
  CHECK(max_abs(ManufacturedForcing(root, p, 0.1).at(grid, 0.3)) == 0.0);

  const double t = 0.4;
  const Field h = ManufacturedForcing(TargetSpec::separable_sin_cos(1, 3, 1, 1), p, 0.1).at(grid, t);
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < grid.n_nodes; ++i) {
    const double c = std::cos(pi * grid.x[i]);
    const double y = std::sin(3 * t) * c;
    const double expect = 3 * std::cos(3 * t) * c + 0.1 * pi * pi * std::sin(3 * t) * c +
                          (y + 1) * y * (y - 2);
    CHECK(h[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("constant roots are equilibria of the free dynamics") {
  const auto [grid, ops] = build_grid(101, 1.0, 0.1);
  const SimContext ctx{&grid, &ops, {}};
  for (double root : {-1.0, 0.0, 2.0}) {
    const SimTrace tr = simulate(grid.constant(root), 1.0, 1e-3, ctx, FreeRhs{});
    CHECK(max_abs(tr.final_state - grid.constant(root)) < 1e-10);
  }
}

TEST_CASE("Crank-Nicolson diffusion does not increase the H-norm") {
  const auto [grid, ops] = build_grid(101, 1.0, 0.1);
  const CnabStepper stepper(ops, 1e-2);
  std::mt19937_64 rng(4);
  Field y = random_field(101, rng);
  const Field zero(101);
  double prev = ops.norm_h(y);
  for (int n = 0; n < 1000; ++n) {
    y = stepper.step(y, zero, zero);
    const double now = ops.norm_h(y);
    CHECK(now <= prev * (1 + 1e-14));
    prev = now;
  }
}

TEST_CASE("closed-loop feedback never injects energy") {
  const auto [grid, ops] = build_grid(251, 1.0, 0.1);
  const ActuatorFamily fam = build_actuators(4, 0.1, grid, ops);
  const SimContext ctx{&grid, &ops, {}};
  const Field z0 = grid.interpolate([](double x) { return -4 + 8 * std::cos(2 * std::numbers::pi * x * x); });
  const TargetTrace target(TargetSpec::zero(), grid, 0.0, 1e-3, 2000, false);
  for (double bound : {15.0, 30.0, std::numeric_limits<double>::infinity()}) {
    const ClosedLoopRhs rhs{&fam, {0.05, bound}, &target};
    const SimTrace tr = simulate(z0, 2.0, 1e-3, ctx, rhs);
    CHECK(tr.max_control_work <= 1e-12);
    for (const auto& u : tr.controls) CHECK(vector_norm(u, NormKind::LInf) <= bound);
  }
}

TEST_CASE("trace bookkeeping") {
  const auto [grid, ops] = build_grid(101, 1.0, 0.1);
  const ActuatorFamily fam = build_actuators(2, 0.2, grid, ops);
  const SimContext ctx{&grid, &ops, {}};
  const TargetTrace target(TargetSpec::zero(), grid, 0.0, 1e-2, 100, false);
  ControlSignal u(100, 2, 5.0);
  for (std::size_t n = 0; n < 100; ++n) {
    u.at(n)[0] = 1.0;
    u.at(n)[1] = n < 50 ? 5.0 : 0.0;
  }
  const Field z0 = grid.interpolate([](double x) { return std::cos(std::numbers::pi * x); });
  RecordOptions rec;
  rec.snapshot_interval = 0.25;
  const SimTrace tr = simulate(z0, 1.0, 1e-2, ctx, OpenLoopRhs{&fam, &u, &target}, rec);
  REQUIRE(tr.times.size() == 101);
  CHECK(tr.norm_h.size() == 101);
  CHECK(tr.controls.size() == 101);
  CHECK(tr.cost_state.size() == 101);
  CHECK(tr.cost_control.size() == 101);
  CHECK(tr.snapshot_times == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  // 1/2 (1 + 25) * 0.5 + 1/2 * 1 * 0.5
  CHECK(tr.cost_control.back() == doctest::Approx(6.75).epsilon(1e-12));
  CHECK(tr.saturated[10] == 1);
  CHECK(tr.saturated[60] == 0);
  for (std::size_t n = 1; n < tr.times.size(); ++n)
    CHECK(tr.times[n] - tr.times[n - 1] == doctest::Approx(1e-2).epsilon(1e-10));

  std::ostringstream csv;
  tr.write_csv(csv);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,normH,normV,normL6,u_1,u_2,saturated,cost_state,cost_control");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 101);

  SUBCASE("split runs concatenate to the full run") {
    const SimTrace a = simulate(z0, 0.5, 1e-2, ctx, OpenLoopRhs{&fam, &u, &target}, rec);
    ControlSignal tail_u(50, 2, 5.0);
    for (std::size_t n = 0; n < 50; ++n) {
      tail_u.at(n)[0] = u.at(n + 50)[0];
      tail_u.at(n)[1] = u.at(n + 50)[1];
    }
    const TargetTrace tail_target = target.window(50, 50);
    const SimTrace b = simulate(a.final_state, 0.5, 1e-2, ctx,
                                OpenLoopRhs{&fam, &tail_u, &tail_target}, rec, 0.5);
    SimTrace joined = a;
    joined.append(b);
    REQUIRE(joined.times.size() == 101);
    // AB2 restarts with an Euler step at the joint, so states agree to O(dt^2).
    CHECK(max_abs(joined.final_state - tr.final_state) < 1e-3);
    CHECK(joined.controls[50] == tr.controls[50]);
    CHECK(joined.cost_control.back() == doctest::Approx(tr.cost_control.back()).epsilon(1e-12));
  }
}

TEST_CASE("invalid simulations") {
  const auto [grid, ops] = build_grid(51, 1.0, 0.1);
  const SimContext ctx{&grid, &ops, {}};
  CHECK_THROWS_AS(simulate(grid.constant(0), 1.0, 0.3, ctx, FreeRhs{}), ConfigError);
  CHECK_THROWS_AS(simulate(Field(10), 1.0, 0.1, ctx, FreeRhs{}), ConfigError);
  const TargetTrace short_target(TargetSpec::zero(), grid, 0.0, 0.1, 5, false);
  CHECK_THROWS_AS(simulate(grid.constant(0), 1.0, 0.1, ctx, OpenLoopRhs{nullptr, nullptr, &short_target}),
                  ConfigError);
  CHECK(step_count(15.0, 1e-3) == 15000);
}

TEST_CASE("blow-up is reported with the time reached") {
  const auto [grid, ops] = build_grid(51, 1.0, 0.1);
  const SimContext ctx{&grid, &ops, {}};
  SimTrace partial;
  try {
    simulate_into(partial, grid.constant(50.0), 1.0, 0.1, ctx, FreeRhs{});
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time_reached() > 0.0);
    CHECK(e.time_reached() < 1.0);
    CHECK(partial.times.size() == partial.norm_h.size());
    CHECK(partial.times.size() == partial.cost_control.size());
    CHECK(partial.times.back() < e.time_reached());
  }
}
