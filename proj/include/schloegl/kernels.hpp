#pragma once

// Data-parallel inner loops shared by the FEM, actuation and dynamics code.
//
// Two implementations with identical signatures:
//   kernels::reference  plain serial loops, kept as the test oracle;
//   kernels::omp        OpenMP versions used by the library.
//
// Reductions in the OpenMP versions sum fixed-size blocks and then combine the
// block partials in index order, so results do not depend on the thread count.
// For inputs shorter than one block they are bitwise equal to the reference.
//
// Symmetric tridiagonal matrices are passed as (diag, off) with
// diag.size() == n and off.size() == n - 1, off[i] coupling rows i and i + 1.

#include <cstddef>
#include <span>

namespace schloegl::kernels {

/// Loops shorter than this run on the calling thread only.
inline constexpr std::size_t kParallelThreshold = 16384;
/// Block length for deterministic reductions.
inline constexpr std::size_t kReductionBlock = 4096;

/// Gauss-Legendre 3-point rule on [0, 1].
struct Gauss3 {
  static constexpr double nodes[3] = {0.11270166537925831148, 0.5,
                                      0.88729833462074168852};
  static constexpr double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

namespace reference {

void tridiag_apply(std::span<const double> diag, std::span<const double> off,
                   std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
/// x^T T y
double tridiag_form(std::span<const double> diag, std::span<const double> off,
                    std::span<const double> x, std::span<const double> y);
/// Integral of p^6 for the P1 interpolant p of `values` on a uniform grid.
double l6_integral(std::span<const double> values, double h);
/// y <- y + a x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// out = y^3 + xi2 y^2 + xi1 y + xi0, nodewise.
void cubic(std::span<const double> y, double xi0, double xi1, double xi2,
           std::span<double> out);
/// out = z^3 + (3yt + xi2) z^2 + (3yt^2 + 2 xi2 yt + xi1 - 1) z, nodewise.
void error_reaction(std::span<const double> z, std::span<const double> yt,
                    double xi1, double xi2, std::span<double> out);
/// Diagonal of the linearized error reaction at zbar, nodewise.
void error_reaction_slope(std::span<const double> zbar,
                          std::span<const double> yt, double xi1, double xi2,
                          std::span<double> out);

}  // namespace reference

namespace omp {

void tridiag_apply(std::span<const double> diag, std::span<const double> off,
                   std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double tridiag_form(std::span<const double> diag, std::span<const double> off,
                    std::span<const double> x, std::span<const double> y);
double l6_integral(std::span<const double> values, double h);
void axpy(double a, std::span<const double> x, std::span<double> y);
void cubic(std::span<const double> y, double xi0, double xi1, double xi2,
           std::span<double> out);
void error_reaction(std::span<const double> z, std::span<const double> yt,
                    double xi1, double xi2, std::span<double> out);
void error_reaction_slope(std::span<const double> zbar,
                          std::span<const double> yt, double xi1, double xi2,
                          std::span<double> out);

}  // namespace omp

}  // namespace schloegl::kernels
