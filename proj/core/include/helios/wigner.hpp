/**
 * @file wigner.hpp
 * @brief One-dimensional Wigner transform of sampled wave fields and the
 *        comparison of wave propagation with Liouville transport as the
 *        semiclassical parameter eps tends to zero.
 *
 * Conventions: the field lives on a periodic grid q_j = q_min + j dq,
 * j = 0..N-1, N a power of two. The momentum grid is p_k = p_min + k dp with
 * dp = 2 pi eps / (N dq) and p_min = -(N/2) dp, so the discrete marginal
 * sum_k W(q_j, p_k) dp equals |u(q_j)|^2 exactly.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace helios {

using Complex = std::complex<double>;

struct IndexProfile1D {
  enum class Kind { homogeneous, linear };
  Kind kind = Kind::homogeneous;
  double n0 = 1.0;
  double gradient = 0.0;  ///< dn/dq for the linear kind
  double c = 1.0;

  double n(double q) const { return kind == Kind::linear ? n0 + gradient * q : n0; }
};

struct SampledField1D {
  std::vector<Complex> u;
  double q_min = 0.0;
  double dq = 1.0;
  double eps = 1e-2;
  IndexProfile1D profile;

  std::size_t size() const { return u.size(); }
  double q(std::size_t j) const { return q_min + static_cast<double>(j) * dq; }
  /// ||u||^2 dq
  double mass() const;
  /// Throws NonPowerOfTwo or InvalidArgument.
  void validate() const;
};

struct WignerGrid {
  std::size_t n = 0;
  double q_min = 0.0;
  double dq = 1.0;
  double p_min = 0.0;
  double dp = 1.0;
  std::vector<double> values;  ///< row-major, values[j * n + k] = W(q_j, p_k)
  double max_imag_ratio = 0.0;  ///< max |Im| / max |W| before discarding Im
  std::vector<std::string> warnings;

  double q(std::size_t j) const { return q_min + static_cast<double>(j) * dq; }
  double p(std::size_t k) const { return p_min + static_cast<double>(k) * dp; }
  double at(std::size_t j, std::size_t k) const { return values[j * n + k]; }
};

/// W(q_j, p_k) = sum_m u(q_j + m dq/2) conj(u(q_j - m dq/2)) exp(-i p_k m dq / eps) dq / (2 pi eps),
/// with the half-grid values taken from the band-limited interpolant.
/// Adds an AliasWarning when more than 1e-8 of the spectral energy lies above
/// 0.8 of the Nyquist wavenumber.
WignerGrid discrete_wigner(const SampledField1D& field);

/// sum_k W(q_j, p_k) dp for every j.
std::vector<double> marginal_position(const WignerGrid& grid);

/// u(q) = a(q) exp(i S(q) / eps) on n points covering [q_min, q_max).
struct WkbSpec {
  std::function<Complex(double)> amplitude;
  std::function<double(double)> phase;
  std::function<double(double)> phase_derivative;
  std::size_t n = 1024;
  double q_min = -1.0;
  double q_max = 1.0;
  IndexProfile1D profile;
};

/// Throws ResolutionError when dq > eps pi / max|S'|.
SampledField1D wkb_field(const WkbSpec& spec, double eps);

struct Concentration {
  double fraction = 0.0;   ///< share of sum |W| with |p - S'(q)| <= half_width
  double rms_width = 0.0;  ///< sqrt of the |W|-weighted mean of (p - S'(q))^2
};
Concentration wkb_concentration(const WignerGrid& grid, const std::function<double(double)>& phase_derivative,
                                double half_width);

/// Solves i eps u_t = Op(c|p|/n(q)) u over [0, T]. The homogeneous case uses
/// the exact Fourier multiplier; the linear case uses Krylov exponentials of
/// the symmetrized operator (M K + K M)/2, M = 1/n(q), K = c|eps k|, in
/// substeps no longer than eps.
SampledField1D propagate_semiclassical(const SampledField1D& field, double T);

struct ConvergenceRow {
  double eps = 0.0;
  double T = 0.0;
  double L1_distance = 0.0;  ///< sum |W_wave - W_liouville| dq dp / mass
  double mass = 0.0;
};

/// Distance between the Wigner transform of the propagated field and the
/// initial Wigner function carried along the exact characteristics.
ConvergenceRow liouville_distance(const SampledField1D& initial, double T);

std::vector<ConvergenceRow> compare_liouville(const WkbSpec& spec, const std::vector<double>& eps_ladder, double T);

}  // namespace helios
