#include "schloegl/kernels.hpp"

#include <cmath>

namespace schloegl::kernels::reference {

void tridiag_apply(std::span<const double> diag, std::span<const double> off,
                   std::span<const double> x, std::span<double> y) {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double tridiag_form(std::span<const double> diag, std::span<const double> off,
                    std::span<const double> x, std::span<const double> y) {
  const std::size_t n = diag.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = diag[i] * y[i];
    if (i > 0) row += off[i - 1] * y[i - 1];
    if (i + 1 < n) row += off[i] * y[i + 1];
    s += x[i] * row;
  }
  return s;
}

double l6_integral(std::span<const double> values, double h) {
  double s = 0.0;
  for (std::size_t e = 0; e + 1 < values.size(); ++e) {
    double elem = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double xi = Gauss3::nodes[q];
      const double p = values[e] * (1.0 - xi) + values[e + 1] * xi;
      const double p2 = p * p;
      elem += Gauss3::weights[q] * p2 * p2 * p2;
    }
    s += elem * h;
  }
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void cubic(std::span<const double> y, double xi0, double xi1, double xi2,
           std::span<double> out) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    out[i] = ((v + xi2) * v + xi1) * v + xi0;
  }
}

void error_reaction(std::span<const double> z, std::span<const double> yt,
                    double xi1, double xi2, std::span<double> out) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double w = z[i];
    const double y = yt[i];
    const double c2 = 3.0 * y + xi2;
    const double c1 = 3.0 * y * y + 2.0 * xi2 * y + xi1 - 1.0;
    out[i] = ((w + c2) * w + c1) * w;
  }
}

void error_reaction_slope(std::span<const double> zbar,
                          std::span<const double> yt, double xi1, double xi2,
                          std::span<double> out) {
  for (std::size_t i = 0; i < zbar.size(); ++i) {
    const double w = zbar[i];
    const double y = yt[i];
    out[i] = 3.0 * w * w + (6.0 * y + 2.0 * xi2) * w +
             (3.0 * y * y + 2.0 * xi2 * y + xi1 - 1.0);
  }
}

}  // namespace schloegl::kernels::reference
