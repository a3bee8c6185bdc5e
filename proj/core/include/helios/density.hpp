/**
 * @file density.hpp
 * @brief Phase-space light energy density: analytic coefficient functions
 *        L(q, p) (density w.r.t. dq dp) and weighted particle ensembles.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "helios/numerics.hpp"
#include "helios/types.hpp"

namespace helios {

using DensityFunction = std::function<double(const PhasePoint&)>;

struct AnalyticDensity {
  std::string name;
  DensityFunction value;

  double operator()(const PhasePoint& z) const { return value(z); }
};

AnalyticDensity zero_density();

struct Particle {
  PhasePoint z;
  double w = 0.0;  ///< energy carried (J)
  bool exited = false;
};

struct Ensemble {
  std::vector<Particle> particles;
  std::uint64_t seed = 0;
  double t = 0.0;

  /// Pairwise sum of all weights, escaped particles included.
  double total_energy() const;
  double escaped_energy() const;
  void validate() const;
};

using LightEnergyDensity = std::variant<AnalyticDensity, Ensemble>;

// Parametric product densities L = E * f(q) * g(p), with g a normalized
// momentum distribution on a spherical shell |p| in [p_min, p_max].

/// Spatially uniform with the given value (not normalizable; measurements only).
struct UniformSpatial {
  double value = 1.0;
};
struct GaussianSpatial {
  Vec3 center = Vec3::Zero();
  double sigma = 1.0;
};
struct BallSpatial {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};
using SpatialProfile = std::variant<UniformSpatial, GaussianSpatial, BallSpatial>;

struct IsotropicDirections {};
/// von Mises-Fisher distribution about `mean` with concentration kappa.
struct VonMisesFisherDirections {
  Vec3 mean = Vec3::UnitZ();
  double kappa = 10.0;
};
using DirectionalProfile = std::variant<IsotropicDirections, VonMisesFisherDirections>;

struct MomentumShell {
  double p_min = 1.0;
  double p_max = 1.0;
  /// int_{p_min}^{p_max} r^2 dr
  double radial_moment() const { return (p_max * p_max * p_max - p_min * p_min * p_min) / 3.0; }
};

struct ProductDensity {
  SpatialProfile spatial = GaussianSpatial{};
  DirectionalProfile directions = IsotropicDirections{};
  MomentumShell shell;
  double energy = 1.0;  ///< total energy when the spatial profile is normalizable

  void validate() const;
  bool normalizable() const { return !std::holds_alternative<UniformSpatial>(spatial); }
  double operator()(const PhasePoint& z) const;
  double direction_pdf(const Vec3& unit) const;
  /// Exact draw from the normalized distribution (weight left at 0).
  PhasePoint sample(CounterRng& rng) const;
  AnalyticDensity as_analytic(std::string name = "product") const;
};

/// Particles i = 0..n-1 drawn from stream (seed, i), each with weight energy/n.
Ensemble sample_ensemble(const ProductDensity& density, std::size_t n, std::uint64_t seed);

/// Stationary field of a uniformly bright sphere in a homogeneous medium:
/// outside the sphere, L equals `radiance` for wave vectors in the shell
/// pointing away from the source within its angular radius, zero otherwise.
struct SphereSourceDensity {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
  double radiance = 1.0;
  MomentumShell shell;

  double operator()(const PhasePoint& z) const;
  AnalyticDensity as_analytic() const;
  /// Energy per unit time through any enclosing concentric sphere.
  double flux(double speed_of_light, double n) const;
};

}  // namespace helios
