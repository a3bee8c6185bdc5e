/**
 * @file integrate.hpp
 * @brief Time integration of the ray flow, flow maps and symplecticity probes.
 *
 * H = c|p|/n(q) is not separable, so explicit splitting is unavailable; the
 * default scheme is the implicit midpoint rule (symplectic, symmetric,
 * second order) solved by Newton's method. RK4 and an 8th-order explicit
 * reference exist for comparison and as test oracles.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "helios/hamiltonian.hpp"

namespace helios {

enum class Scheme { implicit_midpoint, rk4, reference_high_order };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct IntegratorConfig {
  Scheme scheme = Scheme::implicit_midpoint;
  double dt = 1e-3;
  double newton_tol = 1e-12;  ///< residual sup-norm, relative to max(1, |z|_inf)
  int newton_max_iter = 50;
  Branch branch = Branch::positive;

  void validate() const;
};

enum class Face { x_min, x_max, y_min, y_max, z_min, z_max };
std::string to_string(Face face);

/// Domain exit: the flow stops instead of extrapolating n.
struct ExitEvent {
  double t = 0.0;  ///< estimated crossing time
  Face face = Face::x_min;
  PhasePoint last_inside;
};

struct StepInfo {
  PhasePoint z;
  int newton_iterations = 0;
};

/// One step of length dt (|dt| <= cfg.dt; negative dt steps backwards).
/// Throws NewtonDiverged, ZeroMomentum, and OutOfDomain when the step leaves
/// the domain.
StepInfo step_with_info(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                        const PhasePoint& z, double dt);
PhasePoint step(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z,
                double dt);

struct FlowOptions {
  std::size_t record_stride = 1;  ///< keep every k-th step; 0 keeps only the endpoints
};

struct FlowResult {
  std::vector<RaySample> samples;
  std::optional<ExitEvent> exit_event;
  std::size_t steps_taken = 0;
  int max_newton_iters_seen = 0;

  /// max_t |H(t) - H(0)| / H(0) over the recorded samples.
  double max_relative_drift() const;
  const RaySample& final_sample() const { return samples.back(); }
};

/// Flow over [0, T] in ceil(T/dt) equal steps, recording RaySamples.
FlowResult flow(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z0,
                double T, const FlowOptions& options = {});

/// Signed-time flow map without sample recording. `exit_event` is set when
/// the trajectory leaves the domain, in which case `z` is the last point inside.
struct FlowEndpoint {
  PhasePoint z;
  std::optional<ExitEvent> exit_event;
  std::size_t steps_taken = 0;
};
FlowEndpoint advance(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z0,
                     double t);

/// Central-difference Jacobian of the time-T flow map with per-coordinate
/// step h_fd * (1 + |z_j|). Throws BoundaryHit if any probe trajectory exits.
Mat6 flow_jacobian(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z0,
                   double T, double h_fd = 1e-6);

/// The standard symplectic matrix [[0, I], [-I, 0]].
Mat6 symplectic_matrix();

/// max-entry norm of J^T Omega J - Omega.
double symplecticity_defect(const Mat6& jacobian);

struct GeodesicSample {
  double t = 0.0;
  Vec3 q;
  Vec3 v;
};

/// Geodesic of the optical metric g = (n^2 / c^2) I from position q0 and
/// velocity v0, integrated with a fixed-step 8th-order explicit scheme over
/// [0, T] in ceil(T/dt) equal steps. Throws OutOfDomain if the curve leaves
/// the domain.
std::vector<GeodesicSample> fermat_geodesic(const RefractiveIndexField& field, const Vec3& q0, const Vec3& v0,
                                            double T, double dt);

}  // namespace helios
