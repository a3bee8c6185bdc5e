/**
 * @file medium.hpp
 * @brief Refractive-index fields n(q) and their derivatives.
 *
 * The index field is the only physical input of the ray flow: the
 * Hamiltonian is c|p|/n(q). Fields are immutable after construction and
 * can be shared freely between threads.
 */
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "helios/types.hpp"

namespace helios {

/// Smallest admissible refractive index.
inline constexpr double kMinIndex = 1e-6;

/// Axis-aligned bounding box (closed).
struct Box {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);

  bool contains(const Vec3& q) const {
    return (q.array() >= lo.array()).all() && (q.array() <= hi.array()).all();
  }
  Vec3 extent() const { return hi - lo; }
};

struct HomogeneousMedium {
  double n0 = 1.0;
};

/// n(q) = n0 + g . q
struct LinearMedium {
  double n0 = 1.0;
  Vec3 gradient = Vec3::Zero();
};

/// Maxwell fish-eye, n(q) = n0 / (1 + |q|^2 / a^2). All rays are circles.
struct FisheyeMedium {
  double n0 = 2.0;
  double radius = 1.0;
};

/// Parabolic graded-index profile about a line through `origin` along `axis`:
/// n(q) = n0 (1 - kappa r_perp^2 / 2).
struct ParabolicGrinMedium {
  double n0 = 1.5;
  double kappa = 1.0;
  Vec3 axis = Vec3::UnitZ();
  Vec3 origin = Vec3::Zero();
};

enum class Interpolation { linear, cubic };

/// Samples on a regular lattice; index (i, j, k) is stored at
/// i + dims[0] * (j + dims[1] * k), x fastest.
struct GridMedium {
  std::array<std::size_t, 3> dims{2, 2, 2};
  Vec3 origin = Vec3::Zero();
  Vec3 spacing = Vec3::Ones();
  std::vector<double> values;
  Interpolation interpolation = Interpolation::cubic;

  Box bounds() const;
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[i + dims[0] * (j + dims[1] * k)];
  }
};

using MediumKind =
    std::variant<HomogeneousMedium, LinearMedium, FisheyeMedium, ParabolicGrinMedium, GridMedium>;

class RefractiveIndexField {
 public:
  /// Validates n >= kMinIndex over the domain; throws NonPositiveIndex.
  /// For grid media the domain is the lattice extent and `domain` is ignored.
  RefractiveIndexField(MediumKind kind, Box domain, double speed_of_light = 1.0);

  static RefractiveIndexField homogeneous(double n0, Box domain, double c = 1.0);
  static RefractiveIndexField linear(double n0, const Vec3& gradient, Box domain, double c = 1.0);
  static RefractiveIndexField fisheye(double n0, double radius, Box domain, double c = 1.0);
  static RefractiveIndexField parabolic_grin(double n0, double kappa, const Vec3& axis, Box domain,
                                             double c = 1.0);
  static RefractiveIndexField grid(GridMedium samples, double c = 1.0);

  /// n(q); throws OutOfDomain outside the bounding box.
  double n(const Vec3& q) const;
  Vec3 gradient(const Vec3& q) const;
  /// Analytic for closed-form media, central differences of the gradient for grids.
  Mat3 hessian(const Vec3& q) const;

  const Box& domain() const { return domain_; }
  bool contains(const Vec3& q) const { return domain_.contains(q); }
  double speed_of_light() const { return c_; }
  const MediumKind& kind() const { return kind_; }
  std::string kind_name() const;
  /// True when the gradient vanishes identically.
  bool is_homogeneous() const { return std::holds_alternative<HomogeneousMedium>(kind_); }

 private:
  void check_inside(const Vec3& q) const;

  MediumKind kind_;
  Box domain_;
  double c_;
};

/// eps = lambda / d_n with d_n = min n/|grad n| over a (samples+1)^3 lattice
/// covering the domain. Returns 0 for fields whose gradient vanishes at every
/// sample.
double estimate_scale_parameter(const RefractiveIndexField& field, double wavelength,
                                int samples_per_axis = 32);

/// Reads a little-endian float64 lattice with a JSON sidecar
/// {"dims": [nx, ny, nz], "origin": [..], "spacing": [..]}.
GridMedium load_grid_medium(const std::filesystem::path& raw_file,
                            const std::filesystem::path& header_file,
                            Interpolation interpolation = Interpolation::cubic);

void save_grid_medium(const GridMedium& grid, const std::filesystem::path& raw_file,
                      const std::filesystem::path& header_file);

}  // namespace helios
