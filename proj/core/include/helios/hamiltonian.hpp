/**
 * @file hamiltonian.hpp
 * @brief Ray Hamiltonian H(q, p) = c|p|/n(q), its vector field, and the
 *        geodesic form of the same rays under the metric g = (n^2/c^2) I.
 */
#pragma once

#include "helios/medium.hpp"
#include "helios/types.hpp"

namespace helios {

/// Only the positive branch carries energy; the negative branch is the
/// time-reversed flow and only flips the sign of the vector field.
enum class Branch { positive, negative };

struct RaySample {
  double t = 0.0;
  PhasePoint z;
  double H = 0.0;  ///< angular frequency at z (rad/s)
};

/// omega = c |p| / n(q). Throws ZeroMomentum or OutOfDomain.
double hamiltonian(const RefractiveIndexField& field, const PhasePoint& z);

/// Wave vector p = n(q)/c * omega * s for a unit direction s.
Vec3 wave_vector_from_direction(const RefractiveIndexField& field, const Vec3& q, const Vec3& direction,
                                double omega);

/// omega = 2 pi nu; the single conversion point between the two frequency
/// conventions (measurements are parametrized by nu).
inline double angular_frequency(double nu) { return 2.0 * kPi * nu; }
inline double ordinary_frequency(double omega) { return omega / (2.0 * kPi); }

struct PhaseVelocity {
  Vec3 q_dot;
  Vec3 p_dot;

  Vec6 packed() const {
    Vec6 v;
    v << q_dot, p_dot;
    return v;
  }
};

/// Hamilton's equations: q' = (c/n) p/|p|, p' = (c|p|/n^2) grad n.
PhaseVelocity vector_field(const RefractiveIndexField& field, const PhasePoint& z,
                           Branch branch = Branch::positive);

/// d(q', p')/d(q, p), used by the implicit solvers.
Mat6 vector_field_jacobian(const RefractiveIndexField& field, const PhasePoint& z,
                           Branch branch = Branch::positive);

/// Geodesic acceleration for the conformally flat metric g_ij = n^2/c^2 delta_ij:
/// a^k = -Gamma^k_ij v^i v^j = (|v|^2 grad n - 2 (v . grad n) v) / n.
Vec3 fermat_geodesic_rhs(const RefractiveIndexField& field, const Vec3& q, const Vec3& velocity);

}  // namespace helios
