/**
 * @file measure.hpp
 * @brief Energy flowing through oriented surfaces, irradiance and radiance.
 *
 * The flux integrand at a surface point q with unit normal N is
 * (c / n(q)) L(q, p) (p/|p| . N), integrated over the momenta on one side
 * of the tangent plane. Which side is selected explicitly by `Hemisphere`.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "helios/density.hpp"
#include "helios/integrate.hpp"
#include "helios/quadrature.hpp"

namespace helios {

struct RectangleShape {
  Vec3 origin = Vec3::Zero();
  Vec3 edge1 = Vec3::UnitX();
  Vec3 edge2 = Vec3::UnitY();
};
struct DiscShape {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double radius = 1.0;
};
struct SphereShape {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};
using SurfaceShape = std::variant<RectangleShape, DiscShape, SphereShape>;

/// Oriented surface. Rectangles are oriented by edge1 x edge2, discs by their
/// normal, spheres outward.
class Surface {
 public:
  /// Throws DegenerateSurface for zero area or a zero normal.
  Surface(std::string id, SurfaceShape shape);

  const std::string& id() const { return id_; }
  const SurfaceShape& shape() const { return shape_; }
  double area() const;
  Vec3 normal(const Vec3& q) const;
  /// Signed distance to the supporting plane (or sphere), positive on the normal side.
  double signed_distance(const Vec3& q) const;
  /// Whether a point of the supporting plane or sphere lies on the patch itself.
  bool within_extent(const Vec3& q) const;
  /// Product Gauss rule with `n` nodes per parameter axis (2n azimuthal nodes for round shapes).
  std::vector<std::pair<Vec3, double>> area_quadrature(int n) const;
  Vec3 sample_point(CounterRng& rng) const;

 private:
  std::string id_;
  SurfaceShape shape_;
  Vec3 unit_normal_ = Vec3::UnitZ();
};

enum class Hemisphere { along_normal, against_normal, net };
Hemisphere parse_hemisphere(const std::string& name);
std::string to_string(Hemisphere h);

/// Density as a function of time: L_t(z).
using TimeDensity = std::function<double(double t, const PhasePoint& z)>;
TimeDensity stationary(AnalyticDensity density);
/// L_t = L_0 composed with the backward flow; exited characteristics give 0.
TimeDensity transported(const RefractiveIndexField& field, const IntegratorConfig& cfg, AnalyticDensity initial);

struct EstimatorSpec {
  enum class Kind { quadrature, monte_carlo };
  Kind kind = Kind::quadrature;
  Hemisphere hemisphere = Hemisphere::along_normal;
  int n_time = 4;
  int n_area = 8;
  int n_polar = 16;  ///< Gauss nodes in cos(angle to the normal); azimuth uses 2 * n_polar
  /// Radial rule in |p|; n_dir is unused here.
  FiberQuadratureSpec radial{16, 8, 0.0, 8.0};
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct MeasurementResult {
  std::string surface_id;
  double E = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double stddev = 0.0;
  std::size_t samples_used = 0;
  std::string warning;
};

/// Energy through the surface during [t1, t2] for an analytic density.
MeasurementResult measure_energy(const RefractiveIndexField& field, const TimeDensity& density,
                                 const Surface& surface, double t1, double t2, const EstimatorSpec& spec = {});

/// Particle estimator: sums the weights of trajectories crossing the patch
/// during [t1, t2) in the selected direction. Particles start at ensemble.t.
/// Crossing times are located by bisection to 1e-10.
MeasurementResult measure_ensemble_crossings(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                                             const Ensemble& ensemble, const Surface& surface, double t1,
                                             double t2, Hemisphere hemisphere = Hemisphere::along_normal);

struct IrradianceSpec {
  int n_polar = 32;
  int n_azimuth = 64;
  FiberQuadratureSpec radial{16, 16, 0.0, 8.0};
};

/// Energy per unit area and time through the plane through q with normal N.
double irradiance(const RefractiveIndexField& field, const AnalyticDensity& density, const Vec3& q,
                  const Vec3& normal, const IrradianceSpec& spec = {},
                  Hemisphere hemisphere = Hemisphere::along_normal);

/// Density of energy against dA_perp dOmega dnu at (q, direction, nu):
/// 2 pi omega^2 n(q)^2 L(q, p) / c^2 with p = n omega s / c and omega = 2 pi nu.
double radiance_sample(const RefractiveIndexField& field, const AnalyticDensity& density, const Vec3& q,
                       const Vec3& direction, double nu);

}  // namespace helios
