/**
 * @file scenario.hpp
 * @brief Strict JSON scenario schema (version 1) for the helios tool.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "helios/density.hpp"
#include "helios/integrate.hpp"
#include "helios/measure.hpp"
#include "helios/medium.hpp"
#include "helios/wigner.hpp"

namespace helios::cli {

/// Malformed JSON, unknown keys, missing fields or values of the wrong type.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ZeroDensity {};

struct DensitySpec {
  std::variant<ProductDensity, SphereSourceDensity, ZeroDensity> model;

  std::string name() const;
  AnalyticDensity analytic() const;
  const ProductDensity* product() const { return std::get_if<ProductDensity>(&model); }
};

struct RaySpec {
  std::string id;
  Vec3 q0 = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double omega = 1.0;
};

struct EnsembleSpec {
  DensitySpec density;
  std::size_t n_particles = 0;
  std::uint64_t seed = 1;
};

struct MeasureSpec {
  enum class Estimator { particles, quadrature, monte_carlo };
  Estimator estimator = Estimator::quadrature;
  double t1 = 0.0;
  double t2 = 1.0;
  Hemisphere hemisphere = Hemisphere::along_normal;
  /// Quadrature and Monte Carlo only: evaluate the density transported to
  /// each time instead of treating it as stationary.
  bool transported = false;
  std::optional<DensitySpec> density;
  EstimatorSpec settings;
};

struct WignerScenario {
  std::size_t n = 1024;
  double q_min = -2.0;
  double q_max = 2.0;
  IndexProfile1D profile;
  double center = 0.0;
  double sigma = 0.1;
  double k0 = 0.5;
  double curvature = 0.0;  ///< S(q) = k0 q + curvature q^2 / 2
  std::vector<double> eps_ladder{4e-2, 2e-2, 1e-2};
  double T = 1.0;

  WkbSpec wkb() const;
};

struct Scenario {
  int schema = 1;
  std::string name;
  std::optional<RefractiveIndexField> medium;
  IntegratorConfig integrator;
  double duration = 0.0;
  std::size_t record_stride = 1;
  std::vector<RaySpec> rays;
  std::optional<EnsembleSpec> ensemble;
  std::vector<Surface> surfaces;
  std::optional<MeasureSpec> measure;
  std::optional<WignerScenario> wigner;
  std::vector<std::string> outputs;  ///< empty means every product of the command
  std::vector<std::filesystem::path> inputs;  ///< scenario file plus referenced data files
  std::string canonical;  ///< normalized JSON text used for the configuration hash

  bool wants(const std::string& product) const;
  const RefractiveIndexField& field() const;
};

/// Parses scenario JSON text; relative data paths resolve against base_dir.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir);
/// Reads and validates a scenario file; all failures are reported as SchemaError.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace helios::cli
