#include "schloegl/observation.hpp"

#include "schloegl/kernels.hpp"

namespace schloegl {

namespace k = kernels::omp;

ObservationQ ObservationQ::spectral(EigenBasis basis, const FemOperators& ops) {
  ObservationQ q;
  q.mode_ = Mode::SpectralProjection;
  q.mass_ = ops.mass;
  for (const Field& e : basis.fields) q.mass_basis_.push_back(ops.mass.apply(e));
  q.basis_ = std::move(basis);
  return q;
}

ObservationQ ObservationQ::identity(const FemOperators& ops) {
  ObservationQ q;
  q.mode_ = Mode::Identity;
  q.mass_ = ops.mass;
  return q;
}

Field ObservationQ::apply(const Field& z) const {
  if (mode_ == Mode::Identity) return z;
  Field out(z.size());
  for (std::size_t j = 0; j < basis_.count(); ++j)
    k::axpy(k::dot(mass_basis_[j].span(), z.span()), basis_.fields[j].span(), out.span());
  return out;
}

double ObservationQ::norm_sq(const Field& z) const {
  if (mode_ == Mode::Identity) return mass_.form(z.span(), z.span());
  double s = 0.0;
  for (const Field& me : mass_basis_) {
    const double c = k::dot(me.span(), z.span());
    s += c * c;
  }
  return s;
}

Field ObservationQ::cost_gradient(const Field& z) const {
  if (mode_ == Mode::Identity) return mass_.apply(z);
  Field out(z.size());
  for (const Field& me : mass_basis_)
    k::axpy(k::dot(me.span(), z.span()), me.span(), out.span());
  return out;
}

}  // namespace schloegl
