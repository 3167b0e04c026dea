#pragma once

// Observation operator Q for the state cost 1/2 |Q z|_H^2.

#include <vector>

#include "schloegl/fem.hpp"

namespace schloegl {

class ObservationQ {
 public:
  enum class Mode { SpectralProjection, Identity };

  /// M_h-orthogonal projection onto span of the basis fields.
  static ObservationQ spectral(EigenBasis basis, const FemOperators& ops);
  static ObservationQ identity(const FemOperators& ops);

  Mode mode() const noexcept { return mode_; }
  const EigenBasis& basis() const noexcept { return basis_; }

  Field apply(const Field& z) const;
  /// |Q z|_H^2
  double norm_sq(const Field& z) const;
  /// Nodal gradient of 1/2 |Q z|_H^2, i.e. M_h Q z.
  Field cost_gradient(const Field& z) const;

 private:
  Mode mode_ = Mode::Identity;
  EigenBasis basis_;
  std::vector<Field> mass_basis_;  // M_h e_k
  SymTridiag mass_;
};

}  // namespace schloegl
