#include "helios/quadrature.hpp"

#include <cmath>

#include "helios/error.hpp"
#include "helios/numerics.hpp"

namespace helios {

namespace {

DirectionQuadrature product_rule(int n_polar, int n_azimuth, const Vec3& pole, double mu_lo) {
  if (n_polar < 1 || n_azimuth < 1) {
    throw Error(ErrorCode::invalid_argument, "direction quadrature needs at least one node per axis");
  }
  const Vec3 axis = pole.normalized();
  const auto [e1, e2] = orthonormal_frame(axis);
  const QuadratureRule mu = gauss_legendre(n_polar, mu_lo, 1.0);
  DirectionQuadrature out;
  out.directions.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
  out.weights.reserve(out.directions.capacity());
  const double dphi = 2.0 * kPi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - mu.nodes[i] * mu.nodes[i]));
    for (int k = 0; k < n_azimuth; ++k) {
      const double phi = (k + 0.5) * dphi;
      out.directions.push_back(mu.nodes[i] * axis + s * (std::cos(phi) * e1 + std::sin(phi) * e2));
      out.weights.push_back(mu.weights[i] * dphi);
    }
  }
  return out;
}

}  // namespace

DirectionQuadrature sphere_quadrature(int n_polar, int n_azimuth, const Vec3& pole) {
  return product_rule(n_polar, n_azimuth, pole, -1.0);
}

DirectionQuadrature hemisphere_quadrature(int n_polar, int n_azimuth, const Vec3& pole) {
  return product_rule(n_polar, n_azimuth, pole, 0.0);
}

void FiberQuadratureSpec::validate() const {
  if (n_dir < 1 || n_rad < 1) throw Error(ErrorCode::invalid_argument, "fiber quadrature needs n_dir, n_rad >= 1");
  if (!(p_min >= 0.0) || !(p_max > p_min)) {
    throw Error(ErrorCode::invalid_argument, "fiber quadrature needs 0 <= p_min < p_max");
  }
}

}  // namespace helios
