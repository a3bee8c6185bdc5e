#pragma once

#include <vector>

#include "helios/types.hpp"

namespace helios {

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta) about `pole`
/// times a uniform azimuthal rule. Weights sum to 4 pi.
struct DirectionQuadrature {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};
DirectionQuadrature sphere_quadrature(int n_polar, int n_azimuth, const Vec3& pole = Vec3::UnitZ());

/// Same construction restricted to the hemisphere s . pole > 0; weights sum to 2 pi.
DirectionQuadrature hemisphere_quadrature(int n_polar, int n_azimuth, const Vec3& pole);

/// Momentum-fiber rule: directions x radial Gauss-Legendre on [p_min, p_max].
struct FiberQuadratureSpec {
  int n_dir = 16;  ///< polar nodes; the azimuthal count is 2 * n_dir
  int n_rad = 32;
  double p_min = 0.0;
  double p_max = 8.0;

  void validate() const;
};

}  // namespace helios
