/**
 * @file cosphere.hpp
 * @brief Reduction to the cosphere bundle, the classical space of positions
 *        and directions.
 *
 * H is homogeneous of degree one in p, so rescaling p by alpha > 0 leaves
 * q(t) unchanged and scales p(t) by alpha. The quotient by this action keeps
 * (q, direction); the frequency omega is carried along as the conserved label
 * of the ray. Dynamics are integrated on the full phase space and projected.
 */
#pragma once

#include <optional>
#include <vector>

#include "helios/integrate.hpp"

namespace helios {

struct CospherePoint {
  Vec3 q = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();  ///< unit vector
  double omega = 1.0;              ///< rad/s

  void validate() const;
};

/// Same equivalence class: equal position and direction. omega is a label
/// and scales with the representative, so it is not compared.
bool same_class(const CospherePoint& a, const CospherePoint& b, double tol);

CospherePoint project(const PhasePoint& z, const RefractiveIndexField& field);
PhasePoint lift(const CospherePoint& x, const RefractiveIndexField& field);

struct CosphereSample {
  double t = 0.0;
  CospherePoint x;
};

struct ReducedFlow {
  std::vector<CosphereSample> samples;
  std::optional<ExitEvent> exit_event;
  FlowResult full;  ///< the phase-space trajectory that was projected
};

/// Lifts x0 with momentum scale `momentum_scale` (1 is the canonical lift
/// |p| = n(q0) omega / c), flows, and projects every sample. The omega label
/// is divided by the scale so results do not depend on the representative.
ReducedFlow reduced_flow(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                         const CospherePoint& x0, double T, double momentum_scale = 1.0,
                         const FlowOptions& options = {});

}  // namespace helios
