#pragma once

// Structural quantities of the discrete problem: Poincare-like constants of
// the actuator complement, the M-lambda inequality, decay-rate fits and
// refinement studies of the CNAB scheme.

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "schloegl/actuation.hpp"
#include "schloegl/dynamics.hpp"
#include "schloegl/fem.hpp"

namespace schloegl {

/// Columns span {h : (chi_i, h)_H = 0 for all i}, the discrete complement
/// of the indicator fields. The columns are Euclidean-orthonormal.
Eigen::MatrixXd indicator_complement(const ActuatorFamily& fam);

/// sqrt of the smallest generalized eigenvalue of (Z^T A_h Z, Z^T M_h Z),
/// i.e. the infimum of |h|_V / |h|_H over the column span of Z.
double min_rayleigh_root(const Eigen::MatrixXd& basis, const FemOperators& ops);

/// xi_M = inf over the complement of the indicators of |h|_V / |h|_H.
double poincare_xi(const ActuatorFamily& fam, const FemOperators& ops);

struct MlamReport {
  double min_ratio = 0.0;
  /// Index into the sample list where the minimum is attained.
  std::size_t argmin = 0;
};

/// min over samples of (|y|_V^2 + lambda |P y|_V^2) / |y|_H^2 with P the
/// projection onto the bumps along the complement of the indicators. Zero
/// samples are skipped.
MlamReport check_mlam(std::span<const Field> samples, double lambda,
                      const ActuatorFamily& fam, const FemOperators& ops);

/// `random_count` seeded Gaussian fields followed by the eigenfields.
std::vector<Field> mlam_samples(const Grid& grid, const EigenBasis& basis,
                                std::size_t random_count, unsigned seed);

struct DecayReport {
  /// Rate on squared norms: |z(t)|^2 ~ c exp(-mu t).
  double mu = 0.0;
  /// c of the fit above.
  double intercept = 0.0;
  /// max over sampled s <= t of exp(mu (t - s)) |z(t)|^2 / |z(s)|^2, >= 1.
  double rho = 1.0;
  double fit_start = 0.0;
  double fit_end = 0.0;
  /// Root mean square residual of the fit of log |z|^2.
  double residual = 0.0;
  std::size_t fit_points = 0;
};

/// Least-squares fit of log |z|^2 against t on [t_start, t_end]. Without
/// t_start the first 10% of the history is excluded as transient. Throws
/// NumericalError on nonpositive norms in the fit window.
DecayReport decay_rate(std::span<const double> times, std::span<const double> norms,
                       std::optional<double> t_start = std::nullopt);

struct ConvergenceOptions {
  std::size_t levels = 3;
  double T = 1.0;
  double nu = 0.1;
  double length = 1.0;
  ReactionParams params;
  /// Temporal study: fixed grid, dt halved from dt0.
  std::size_t time_nodes = 101;
  double dt0 = 0.02;
  /// Spatial study: elements doubled from space_elements0 at fixed dt.
  std::size_t space_elements0 = 20;
  double space_dt = 1e-4;
};

struct ConvergenceReport {
  std::vector<double> dts;
  /// |y_dt(T) - y_{dt/2}(T)|_H for consecutive levels.
  std::vector<double> time_differences;
  std::vector<double> time_orders;
  std::vector<double> hs;
  /// |y_h(T) - I_h y_t(T)|_H per level.
  std::vector<double> space_errors;
  std::vector<double> space_orders;
  /// Last observed orders; NaN when the errors are at round-off.
  double time_order = 0.0;
  double space_order = 0.0;
  /// Set when a refinement did not reduce the error.
  bool non_monotone = false;
  /// Set when every error is below 1e-13.
  bool at_roundoff = false;
};

/// Free dynamics with the manufactured forcing of `target` from y(0) =
/// y_t(0). Temporal orders come from self-convergence (levels + 1 runs),
/// spatial orders from the error against the exact target.
ConvergenceReport convergence_study(const TargetSpec& target,
                                    const ConvergenceOptions& options = {});

}  // namespace schloegl
