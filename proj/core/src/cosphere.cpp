#include "helios/cosphere.hpp"

#include <cmath>

#include "helios/error.hpp"

namespace helios {

void CospherePoint::validate() const {
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::non_unit_direction, "cosphere direction must be a unit vector");
  }
  if (!(omega > 0.0)) throw Error(ErrorCode::non_positive_frequency, "cosphere omega must be positive");
}

bool same_class(const CospherePoint& a, const CospherePoint& b, double tol) {
  const double scale = std::max(1.0, a.q.lpNorm<Eigen::Infinity>());
  return (a.q - b.q).lpNorm<Eigen::Infinity>() <= tol * scale &&
         (a.direction - b.direction).lpNorm<Eigen::Infinity>() <= tol;
}

CospherePoint project(const PhasePoint& z, const RefractiveIndexField& field) {
  const double pn = z.p.norm();
  if (!(pn > 0.0)) throw Error(ErrorCode::zero_momentum, "cannot project the zero section");
  return {z.q, z.p / pn, hamiltonian(field, z)};
}

PhasePoint lift(const CospherePoint& x, const RefractiveIndexField& field) {
  x.validate();
  return {x.q, wave_vector_from_direction(field, x.q, x.direction, x.omega)};
}

ReducedFlow reduced_flow(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                         const CospherePoint& x0, double T, double momentum_scale,
                         const FlowOptions& options) {
  if (!(momentum_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "momentum scale must be positive");
  PhasePoint z0 = lift(x0, field);
  z0.p *= momentum_scale;
  ReducedFlow out;
  out.full = flow(field, cfg, z0, T, options);
  out.exit_event = out.full.exit_event;
  out.samples.reserve(out.full.samples.size());
  for (const auto& s : out.full.samples) {
    CospherePoint x = project(s.z, field);
    x.omega /= momentum_scale;
    out.samples.push_back({s.t, x});
  }
  return out;
}

}  // namespace helios
