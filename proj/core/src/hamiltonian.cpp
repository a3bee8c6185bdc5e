#include "helios/hamiltonian.hpp"

#include <cmath>

#include <fmt/format.h>

#include "helios/error.hpp"

namespace helios {
namespace {

double momentum_norm(const Vec3& p) {
  const double pn = p.norm();
  if (!(pn > 0.0)) throw Error(ErrorCode::zero_momentum, "|p| = 0 is excluded from phase space");
  return pn;
}

}  // namespace

double hamiltonian(const RefractiveIndexField& field, const PhasePoint& z) {
  const double pn = momentum_norm(z.p);
  return field.speed_of_light() * pn / field.n(z.q);
}

Vec3 wave_vector_from_direction(const RefractiveIndexField& field, const Vec3& q, const Vec3& direction,
                                double omega) {
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::non_unit_direction, fmt::format("|s| = {}", direction.norm()));
  }
  if (!(omega > 0.0)) throw Error(ErrorCode::non_positive_frequency, fmt::format("omega = {}", omega));
  return (field.n(q) / field.speed_of_light() * omega) * direction;
}

PhaseVelocity vector_field(const RefractiveIndexField& field, const PhasePoint& z, Branch branch) {
  const double pn = momentum_norm(z.p);
  const double n = field.n(z.q);
  const double c = field.speed_of_light();
  const double sign = branch == Branch::positive ? 1.0 : -1.0;
  PhaseVelocity v;
  v.q_dot = (sign * c / (n * pn)) * z.p;
  v.p_dot = (sign * c * pn / (n * n)) * field.gradient(z.q);
  return v;
}

Mat6 vector_field_jacobian(const RefractiveIndexField& field, const PhasePoint& z, Branch branch) {
  const double pn = momentum_norm(z.p);
  const double n = field.n(z.q);
  const double c = field.speed_of_light();
  const Vec3 g = field.gradient(z.q);
  const Mat3 hess = field.hessian(z.q);
  const Vec3 u = z.p / pn;
  const double sign = branch == Branch::positive ? 1.0 : -1.0;

  Mat6 J;
  J.block<3, 3>(0, 0) = -(c / (n * n)) * u * g.transpose();
  J.block<3, 3>(0, 3) = (c / (n * pn)) * (Mat3::Identity() - u * u.transpose());
  J.block<3, 3>(3, 0) = c * pn * (hess / (n * n) - (2.0 / (n * n * n)) * g * g.transpose());
  J.block<3, 3>(3, 3) = (c / (n * n)) * g * u.transpose();
  return sign * J;
}

Vec3 fermat_geodesic_rhs(const RefractiveIndexField& field, const Vec3& q, const Vec3& velocity) {
  const double n = field.n(q);
  const Vec3 g = field.gradient(q);
  return (velocity.squaredNorm() * g - 2.0 * velocity.dot(g) * velocity) / n;
}

}  // namespace helios
