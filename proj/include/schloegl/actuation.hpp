#pragma once

// Indicator actuators, sin^2 bump functions, the oblique projections they
// induce, radial saturation and the explicit feedback laws.
//
// Conventions (all inner products are the discrete L^2 one, a^T M_h b):
//   chi_i   indicator field of omega_i (L^2 projection of 1_{omega_i} onto P1)
//   psi_j   nodal interpolant of the bump supported on omega_j
//   load_i  M_h chi_i, i.e. the exact integrals of 1_{omega_i} against hats
//   gram_u_psi(i, j) = (chi_i, psi_j),  gram_uu(i, j) = (chi_i, chi_j)
//
// Projection onto span{psi} along span{chi}^perp: z -> sum_j c_j psi_j with
//   gram_u_psi c = ((chi_i, z))_i.
// Projection onto span{chi} along span{psi}^perp: z -> sum_j d_j chi_j with
//   gram_u_psi^T d = ((psi_i, z))_i.

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "schloegl/fem.hpp"

namespace schloegl {

enum class NormKind { LInf, L2 };
enum class FeedbackVariant { Oblique, Orthogonal };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double measure() const { return hi - lo; }
  bool contains(double x) const { return x > lo && x < hi; }
};

class ActuatorFamily {
 public:
  std::size_t M = 0;
  double r = 0.0;
  double length = 0.0;
  std::vector<double> centers;
  std::vector<Interval> supports;
  std::vector<Field> indicators;
  std::vector<Field> loads;
  std::vector<Field> bumps;
  Eigen::MatrixXd gram_uu;
  Eigen::MatrixXd gram_u_psi;
  /// psi^T A_h psi, the V-Gram matrix of the bumps.
  Eigen::MatrixXd bump_stiffness;

  std::size_t count() const noexcept { return indicators.size(); }

  /// Exact bump Psi_j(x), zero outside omega_j.
  double bump_value(std::size_t j, double x) const;

  /// (chi_i, z) for all i.
  Eigen::VectorXd indicator_moments(const Field& z) const;
  /// (psi_i, z) for all i.
  Eigen::VectorXd bump_moments(const Field& z, const FemOperators& ops) const;
  /// Solves gram_u_psi c = rhs.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& rhs) const;
  /// Solves gram_u_psi^T d = rhs.
  Eigen::VectorXd solve_gram_transposed(const Eigen::VectorXd& rhs) const;
  /// Solves gram_uu e = rhs.
  Eigen::VectorXd solve_gram_uu(const Eigen::VectorXd& rhs) const;

 private:
  friend ActuatorFamily build_actuators(std::size_t, double, const Grid&,
                                        const FemOperators&);
  Eigen::PartialPivLU<Eigen::MatrixXd> gram_lu_;
  Eigen::LLT<Eigen::MatrixXd> gram_uu_llt_;
};

/// M_sigma = M actuators of width r L / M centred at (2k - 1) L / (2M).
/// Every support must contain at least 4 grid nodes.
ActuatorFamily build_actuators(std::size_t M, double r, const Grid& grid,
                               const FemOperators& ops);

/// sum_i u_i chi_i
Field u_diamond(std::span<const double> u, const ActuatorFamily& fam);
/// ((chi_i, p))_i
std::vector<double> u_diamond_adjoint(const Field& p, const ActuatorFamily& fam,
                                      const FemOperators& ops);

enum class ProjectionDirection { OntoBumpsAlongUPerp, OntoUAlongBumpsPerp };

Field oblique_project(const Field& z, const ActuatorFamily& fam,
                      const FemOperators& ops, ProjectionDirection direction);

double vector_norm(std::span<const double> v, NormKind kind);

/// Radial projection onto the ball of radius `bound`. For the l-infinity
/// norm the result is also clamped componentwise so that the bound holds
/// bitwise. bound = +inf returns v, bound = 0 returns 0.
std::vector<double> saturate(std::span<const double> v, double bound,
                             NormKind kind);

struct FeedbackConfig {
  double lambda = 0.0;
  double bound = std::numeric_limits<double>::infinity();
  NormKind norm = NormKind::LInf;
  FeedbackVariant variant = FeedbackVariant::Oblique;

  /// Throws ConfigError on negative gain or bound.
  void validate() const;
};

struct FeedbackResult {
  std::vector<double> u;
  /// Value before saturation.
  std::vector<double> unsaturated;
  bool saturated = false;
};

/// Oblique: v = -lambda (U^diamond)^{-1} P_U^{psi-perp} A P_psi^{U-perp} z.
/// Orthogonal: v = -lambda (U^diamond)^{-1} P_U z. Then u = saturate(v).
FeedbackResult feedback(const Field& z, const ActuatorFamily& fam,
                        const FemOperators& ops, const FeedbackConfig& cfg);

/// Operator norm of z -> (U^diamond)^{-1} P_U^{psi-perp} A P_psi^{U-perp} z
/// from H into (R^M, |||.|||).
double frak_u_norm(const ActuatorFamily& fam, const FemOperators& ops,
                   NormKind kind);

/// Saturation threshold lambda * frak_norm * D.
double cu_star(double lambda, double absorbing_radius, double frak_norm);

}  // namespace schloegl
