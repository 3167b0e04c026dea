#include "schloegl/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace schloegl::kernels::omp {
namespace {

using Index = std::int64_t;

// Sums block partials in index order; the per-block body runs in parallel.
template <typename BlockFn>
double blocked_sum(std::size_t n, BlockFn&& block_sum) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (blocks <= 1) return n == 0 ? 0.0 : block_sum(std::size_t{0}, n);
  std::vector<double> partial(blocks, 0.0);
  const Index nb = static_cast<Index>(blocks);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (Index b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    partial[static_cast<std::size_t>(b)] = block_sum(lo, hi);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

void tridiag_apply(std::span<const double> diag, std::span<const double> off,
                   std::span<const double> x, std::span<double> y) {
  const Index n = static_cast<Index>(diag.size());
#pragma omp parallel for schedule(static) if (diag.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

double tridiag_form(std::span<const double> diag, std::span<const double> off,
                    std::span<const double> x, std::span<const double> y) {
  const std::size_t n = diag.size();
  return blocked_sum(n, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      double row = diag[i] * y[i];
      if (i > 0) row += off[i - 1] * y[i - 1];
      if (i + 1 < n) row += off[i] * y[i + 1];
      s += x[i] * row;
    }
    return s;
  });
}

double l6_integral(std::span<const double> values, double h) {
  if (values.size() < 2) return 0.0;
  const std::size_t elements = values.size() - 1;
  return blocked_sum(elements, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t e = lo; e < hi; ++e) {
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
  });
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) y[i] += a * x[i];
}

void cubic(std::span<const double> y, double xi0, double xi1, double xi2,
           std::span<double> out) {
  const Index n = static_cast<Index>(y.size());
#pragma omp parallel for schedule(static) if (y.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) {
    const double v = y[i];
    out[i] = ((v + xi2) * v + xi1) * v + xi0;
  }
}

void error_reaction(std::span<const double> z, std::span<const double> yt,
                    double xi1, double xi2, std::span<double> out) {
  const Index n = static_cast<Index>(z.size());
#pragma omp parallel for schedule(static) if (z.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) {
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
  const Index n = static_cast<Index>(zbar.size());
#pragma omp parallel for schedule(static) if (zbar.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) {
    const double w = zbar[i];
    const double y = yt[i];
    out[i] = 3.0 * w * w + (6.0 * y + 2.0 * xi2) * w +
             (3.0 * y * y + 2.0 * xi2 * y + xi1 - 1.0);
  }
}

}  // namespace schloegl::kernels::omp
