/**
 * @file transport.hpp
 * @brief Liouville transport of the light energy density along the ray flow,
 *        fiber integration to the electromagnetic energy density, and the
 *        field Hamiltonian.
 *
 * The flow is canonical and therefore preserves dq dp, so the coefficient
 * function of the density is transported by composition:
 * L_t(z) = L_0(eta_{-t}(z)).
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "helios/density.hpp"
#include "helios/integrate.hpp"
#include "helios/quadrature.hpp"

namespace helios {

struct TransportedValue {
  double value = 0.0;
  bool exited = false;  ///< the backward characteristic left the domain; value is 0
};

/// L_0(eta_{-t}(z)). Characteristics that leave the domain evaluate to 0.
TransportedValue evaluate_transported(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                                      const AnalyticDensity& initial, double t, const PhasePoint& z);

struct CasimirSample {
  PhasePoint z0;
  double before = 0.0;
  double after = 0.0;
};

struct TransportReport {
  double total_energy_before = 0.0;
  double total_energy_after = 0.0;
  double escaped_energy = 0.0;
  std::size_t escaped_particles = 0;
  std::vector<CasimirSample> casimir_samples;
  /// max |after - before| over the samples, relative to the largest `before`.
  double max_casimir_drift = 0.0;
};

struct TransportOptions {
  /// Analytic density the ensemble was drawn from; enables the Casimir samples.
  std::optional<AnalyticDensity> reference;
  /// When the reference is invariant under the flow, `after` is the reference
  /// evaluated directly at the advected point; otherwise it is the transported
  /// reference (one backward integration per sample).
  bool reference_is_stationary = false;
  std::size_t max_casimir_samples = 100;
};

struct TransportResult {
  Ensemble ensemble;
  TransportReport report;
};

/// Advects every particle over [0, T]. Weights are never modified; particles
/// that leave the domain are flagged and their energy is reported as escaped.
TransportResult transport_ensemble(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                                   const Ensemble& initial, double T, const TransportOptions& options = {});

struct FiberIntegral {
  double value = 0.0;
  /// Estimated share of the fiber integral lying beyond p_max, from the
  /// density sampled just outside the cutoff over one radial cell.
  double boundary_fraction = 0.0;
  bool truncation_warning = false;
};

/// E(q) = integral of L(q, p) over the momentum fiber.
FiberIntegral fiber_integrate_energy(const AnalyticDensity& density, const Vec3& q,
                                     const FiberQuadratureSpec& spec = {});

struct PhaseSpaceQuadratureSpec {
  int n_q = 8;  ///< Gauss-Legendre nodes per spatial axis over the field domain
  FiberQuadratureSpec fiber;
};

/// sum_i w_i H(z_i); escaped particles are included at their last position.
double field_hamiltonian(const RefractiveIndexField& field, const Ensemble& ensemble);
/// Phase-space quadrature of L * H over the field domain.
double field_hamiltonian(const RefractiveIndexField& field, const AnalyticDensity& density,
                         const PhaseSpaceQuadratureSpec& spec = {});

void write_ensemble_csv(const Ensemble& ensemble, const std::filesystem::path& path);
Ensemble read_ensemble_csv(const std::filesystem::path& path);

}  // namespace helios
