#include "helios/wigner.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <mutex>

#include "helios/error.hpp"
#include "helios/numerics.hpp"
#include "helios/types.hpp"

namespace helios {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Complex DFT of fixed size and direction. Planning is serialized because the
// FFTW planner is not thread-safe; execution with new arrays is.
class FftPlan {
 public:
  FftPlan(std::size_t n, int sign) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan_ == nullptr) throw Error(ErrorCode::invalid_argument, "FFTW planning failed");
  }
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void execute(std::vector<Complex>& in, std::vector<Complex>& out) const {
    fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::vector<Complex> forward(const FftPlan& plan, std::vector<Complex> in) {
  std::vector<Complex> out(in.size());
  plan.execute(in, out);
  return out;
}

std::vector<Complex> inverse(const FftPlan& plan, std::vector<Complex> in) {
  std::vector<Complex> out(in.size());
  plan.execute(in, out);
  const double s = 1.0 / static_cast<double>(out.size());
  for (auto& x : out) x *= s;
  return out;
}

/// Angular wavenumbers in FFT order (Nyquist bin negative).
std::vector<double> wavenumbers(std::size_t n, double dq) {
  std::vector<double> k(n);
  const double base = 2.0 * kPi / (static_cast<double>(n) * dq);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<std::ptrdiff_t>(j);
    const auto nn = static_cast<std::ptrdiff_t>(n);
    k[j] = base * static_cast<double>(jj < nn / 2 ? jj : jj - nn);
  }
  return k;
}

/// Band-limited refinement to 2N points: v[2j] = u[j]. The Nyquist coefficient
/// is split evenly between the two bins that alias onto it.
std::vector<Complex> doubled(const std::vector<Complex>& u) {
  const std::size_t n = u.size();
  FftPlan fwd(n, FFTW_FORWARD);
  FftPlan inv(2 * n, FFTW_BACKWARD);
  const std::vector<Complex> U = forward(fwd, u);
  std::vector<Complex> V(2 * n, Complex(0.0));
  for (std::size_t j = 0; j < n / 2; ++j) V[j] = U[j];
  for (std::size_t j = n / 2 + 1; j < n; ++j) V[n + j] = U[j];
  V[n / 2] = 0.5 * U[n / 2];
  V[2 * n - n / 2] = 0.5 * U[n / 2];
  std::vector<Complex> v = inverse(inv, std::move(V));
  for (auto& x : v) x *= 2.0;
  return v;
}

/// Computes single rows W(q_j, .) of the discrete Wigner function.
class WignerRows {
 public:
  WignerRows(const SampledField1D& f, const FftPlan& plan)
      : n_(f.size()), v_(doubled(f.u)), scale_(f.dq / (2.0 * kPi * f.eps)), plan_(plan) {}

  /// Fills `row` (size N, fftshifted so index k is p_k) and returns max |Im|.
  double row(std::size_t j, std::vector<Complex>& kernel, std::vector<Complex>& spectrum,
             std::vector<double>& row) const {
    fill_kernel(j, kernel);
    plan_.execute(kernel, spectrum);
    double imag = 0.0;
    const std::size_t half = n_ / 2;
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex w = spectrum[(k + half) % n_] * scale_;
      row[k] = w.real();
      imag = std::max(imag, std::abs(w.imag()));
    }
    return imag;
  }

  /// W(q_j, 0) without a transform.
  double at_zero_momentum(std::size_t j, std::vector<Complex>& kernel) const {
    fill_kernel(j, kernel);
    Complex s(0.0);
    for (const auto& x : kernel) s += x;
    return s.real() * scale_;
  }

 private:
  void fill_kernel(std::size_t j, std::vector<Complex>& kernel) const {
    const auto nn = static_cast<std::ptrdiff_t>(n_);
    const auto two_n = 2 * nn;
    const auto c = 2 * static_cast<std::ptrdiff_t>(j);
    for (std::ptrdiff_t m = -nn / 2; m < nn / 2; ++m) {
      const std::size_t plus = static_cast<std::size_t>(((c + m) % two_n + two_n) % two_n);
      const std::size_t minus = static_cast<std::size_t>(((c - m) % two_n + two_n) % two_n);
      kernel[static_cast<std::size_t>((m + nn) % nn)] = v_[plus] * std::conj(v_[minus]);
    }
    // The lag -N/2 has no partner +N/2 on the periodic lag grid; keeping only
    // its Hermitian part makes the transform exactly real.
    kernel[n_ / 2] = Complex(kernel[n_ / 2].real(), 0.0);
  }

  std::size_t n_;
  std::vector<Complex> v_;
  double scale_;
  const FftPlan& plan_;
};

double alias_fraction(const SampledField1D& f) {
  const std::size_t n = f.size();
  FftPlan fwd(n, FFTW_FORWARD);
  const std::vector<Complex> U = forward(fwd, f.u);
  const std::vector<double> k = wavenumbers(n, f.dq);
  const double limit = 0.8 * kPi / f.dq;
  std::vector<double> all(n), high(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    all[j] = std::norm(U[j]);
    if (std::abs(k[j]) > limit) high[j] = all[j];
  }
  const double total = pairwise_sum(all);
  return total > 0.0 ? pairwise_sum(high) / total : 0.0;
}

WignerGrid empty_grid(const SampledField1D& f) {
  WignerGrid g;
  g.n = f.size();
  g.q_min = f.q_min;
  g.dq = f.dq;
  g.dp = 2.0 * kPi * f.eps / (static_cast<double>(g.n) * f.dq);
  g.p_min = -static_cast<double>(g.n / 2) * g.dp;
  return g;
}

}  // namespace

double SampledField1D::mass() const {
  std::vector<double> a(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) a[j] = std::norm(u[j]);
  return pairwise_sum(a) * dq;
}

void SampledField1D::validate() const {
  if (!is_power_of_two(u.size())) {
    throw Error(ErrorCode::non_power_of_two, fmt::format("field length {} is not a power of two", u.size()));
  }
  if (!(dq > 0.0) || !(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "field needs dq > 0 and eps > 0");
  if (!(profile.c > 0.0)) throw Error(ErrorCode::invalid_argument, "speed of light must be positive");
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!(profile.n(q(j)) > 0.0)) throw Error(ErrorCode::non_positive_index, "1-D index profile must stay positive");
  }
}

WignerGrid discrete_wigner(const SampledField1D& field) {
  field.validate();
  const std::size_t n = field.size();
  WignerGrid g = empty_grid(field);
  g.values.assign(n * n, 0.0);

  FftPlan plan(n, FFTW_FORWARD);
  const WignerRows rows(field, plan);
  std::vector<double> imag(n, 0.0);
#pragma omp parallel
  {
    std::vector<Complex> kernel(n), spectrum(n);
    std::vector<double> row(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
      imag[j] = rows.row(static_cast<std::size_t>(j), kernel, spectrum, row);
      std::copy(row.begin(), row.end(), g.values.begin() + j * static_cast<std::ptrdiff_t>(n));
    }
  }
  double peak = 0.0;
  for (double w : g.values) peak = std::max(peak, std::abs(w));
  const double worst = *std::max_element(imag.begin(), imag.end());
  g.max_imag_ratio = peak > 0.0 ? worst / peak : 0.0;

  const double alias = alias_fraction(field);
  if (alias > 1e-8) {
    g.warnings.push_back(fmt::format("AliasWarning: {:.3g} of the spectral energy lies above 0.8 Nyquist", alias));
  }
  return g;
}

std::vector<double> marginal_position(const WignerGrid& grid) {
  std::vector<double> out(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    out[j] = pairwise_sum(std::span<const double>(grid.values.data() + j * grid.n, grid.n)) * grid.dp;
  }
  return out;
}

SampledField1D wkb_field(const WkbSpec& spec, double eps) {
  if (!spec.amplitude || !spec.phase) throw Error(ErrorCode::invalid_argument, "WKB spec needs amplitude and phase");
  if (!(spec.q_max > spec.q_min)) throw Error(ErrorCode::invalid_argument, "WKB grid needs q_max > q_min");
  SampledField1D f;
  f.eps = eps;
  f.q_min = spec.q_min;
  f.dq = (spec.q_max - spec.q_min) / static_cast<double>(spec.n);
  f.profile = spec.profile;
  f.u.resize(spec.n);
  double max_slope = 0.0;
  for (std::size_t j = 0; j < spec.n; ++j) {
    const double q = f.q(j);
    const double slope = spec.phase_derivative
                             ? spec.phase_derivative(q)
                             : (spec.phase(q + 0.5 * f.dq) - spec.phase(q - 0.5 * f.dq)) / f.dq;
    max_slope = std::max(max_slope, std::abs(slope));
    f.u[j] = spec.amplitude(q) * std::polar(1.0, spec.phase(q) / eps);
  }
  f.validate();
  if (max_slope > 0.0 && f.dq > eps * kPi / max_slope) {
    throw Error(ErrorCode::resolution,
                fmt::format("grid spacing {:.3g} does not resolve max|S'| = {:.3g} at eps = {:.3g} (need <= {:.3g})",
                            f.dq, max_slope, eps, eps * kPi / max_slope));
  }
  return f;
}

Concentration wkb_concentration(const WignerGrid& grid, const std::function<double(double)>& phase_derivative,
                                double half_width) {
  std::vector<double> inside(grid.n), total(grid.n), second(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double centre = phase_derivative(grid.q(j));
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t k = 0; k < grid.n; ++k) {
      const double w = std::abs(grid.at(j, k));
      const double d = grid.p(k) - centre;
      b += w;
      c += w * d * d;
      if (std::abs(d) <= half_width) a += w;
    }
    inside[j] = a;
    total[j] = b;
    second[j] = c;
  }
  const double t = pairwise_sum(total);
  if (!(t > 0.0)) return {};
  return {pairwise_sum(inside) / t, std::sqrt(pairwise_sum(second) / t)};
}

namespace {

// exp(-i tau A / eps) u for Hermitian A, via Lanczos with full
// reorthogonalization. Substeps are halved until the Krylov error estimate
// is below tolerance.
class KrylovPropagator {
 public:
  KrylovPropagator(const SampledField1D& f)
      : n_(f.size()), eps_(f.eps), fwd_(n_, FFTW_FORWARD), inv_(n_, FFTW_BACKWARD), inv_n_(n_), symbol_(n_) {
    const std::vector<double> k = wavenumbers(n_, f.dq);
    for (std::size_t j = 0; j < n_; ++j) {
      inv_n_[j] = 1.0 / f.profile.n(f.q(j));
      symbol_[j] = f.profile.c * std::abs(f.eps * k[j]);
    }
  }

  std::vector<Complex> apply(const std::vector<Complex>& u) const {
    std::vector<Complex> mu(n_);
    for (std::size_t j = 0; j < n_; ++j) mu[j] = inv_n_[j] * u[j];
    const std::vector<Complex> kmu = multiplier(mu);
    const std::vector<Complex> ku = multiplier(u);
    std::vector<Complex> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = 0.5 * (inv_n_[j] * ku[j] + kmu[j]);
    return out;
  }

  std::vector<Complex> evolve(std::vector<Complex> u, double T) const {
    double done = 0.0;
    while (done < T) {
      double tau = std::min(eps_, T - done);
      u = krylov_step(u, tau);
      done += tau;
    }
    return u;
  }

 private:
  static constexpr int kKrylovDim = 40;
  static constexpr double kKrylovTol = 1e-11;

  std::vector<Complex> multiplier(const std::vector<Complex>& u) const {
    std::vector<Complex> U = forward(fwd_, u);
    for (std::size_t j = 0; j < n_; ++j) U[j] *= symbol_[j];
    return inverse(inv_, std::move(U));
  }

  static Complex dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    Complex s(0.0);
    for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
    return s;
  }

  // Advances by at most `tau`; on return `tau` holds the step actually taken.
  std::vector<Complex> krylov_step(const std::vector<Complex>& u, double& tau) const {
    const double beta0 = std::sqrt(std::real(dot(u, u)));
    if (beta0 == 0.0) return u;
    std::vector<std::vector<Complex>> V;
    std::vector<double> alpha, beta;
    V.push_back(u);
    for (auto& x : V[0]) x /= beta0;
    bool breakdown = false;
    for (int j = 0; j < kKrylovDim; ++j) {
      std::vector<Complex> w = apply(V[j]);
      alpha.push_back(std::real(dot(V[j], w)));
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& vi : V) {
          const Complex h = dot(vi, w);
          for (std::size_t i = 0; i < n_; ++i) w[i] -= h * vi[i];
        }
      }
      const double b = std::sqrt(std::real(dot(w, w)));
      beta.push_back(b);
      if (b < 1e-13) {
        breakdown = true;
        break;
      }
      if (j + 1 < kKrylovDim) {
        for (auto& x : w) x /= b;
        V.push_back(std::move(w));
      }
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      Tm(i, i) = alpha[i];
      if (i + 1 < m) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    Eigen::VectorXcd y;
    for (;;) {
      Eigen::VectorXcd phase(m);
      for (int i = 0; i < m; ++i) phase(i) = std::polar(1.0, -tau * es.eigenvalues()(i) / eps_) * Q(0, i);
      y = Q.cast<Complex>() * phase;
      const double err = breakdown ? 0.0 : beta.back() * std::abs(y(m - 1));
      if (err <= kKrylovTol || tau < 1e-6 * eps_) break;
      tau *= 0.5;
    }
    std::vector<Complex> out(n_, Complex(0.0));
    for (int i = 0; i < m; ++i) {
      const Complex c = beta0 * y(i);
      for (std::size_t j = 0; j < n_; ++j) out[j] += c * V[i][j];
    }
    return out;
  }

  std::size_t n_;
  double eps_;
  FftPlan fwd_, inv_;
  std::vector<double> inv_n_;
  std::vector<double> symbol_;
};

std::vector<Complex> spectral_shift(const SampledField1D& f, double s) {
  FftPlan fwd(f.size(), FFTW_FORWARD), inv(f.size(), FFTW_BACKWARD);
  std::vector<Complex> U = forward(fwd, f.u);
  const std::vector<double> k = wavenumbers(f.size(), f.dq);
  for (std::size_t j = 0; j < U.size(); ++j) U[j] *= std::polar(1.0, -k[j] * s);
  return inverse(inv, std::move(U));
}

double catmull_rom(double t, int i) {
  const double t2 = t * t, t3 = t2 * t;
  switch (i) {
    case 0: return 0.5 * (-t3 + 2 * t2 - t);
    case 1: return 0.5 * (3 * t3 - 5 * t2 + 2);
    case 2: return 0.5 * (-3 * t3 + 4 * t2 + t);
    default: return 0.5 * (t3 - t2);
  }
}

double interpolate(const WignerGrid& g, double q, double p) {
  const double x = (q - g.q_min) / g.dq;
  const double y = (p - g.p_min) / g.dp;
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::ptrdiff_t>(fx), iy = static_cast<std::ptrdiff_t>(fy);
  const auto n = static_cast<std::ptrdiff_t>(g.n);
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    const std::ptrdiff_t j = ix - 1 + a;
    if (j < 0 || j >= n) continue;
    const double wa = catmull_rom(x - fx, a);
    for (int b = 0; b < 4; ++b) {
      const std::ptrdiff_t k = iy - 1 + b;
      if (k < 0 || k >= n) continue;
      s += wa * catmull_rom(y - fy, b) * g.values[static_cast<std::size_t>(j * n + k)];
    }
  }
  return s;
}

}  // namespace

SampledField1D propagate_semiclassical(const SampledField1D& field, double T) {
  field.validate();
  if (!(T >= 0.0)) throw Error(ErrorCode::invalid_argument, "propagation time must be nonnegative");
  SampledField1D out = field;
  if (T == 0.0) return out;
  const IndexProfile1D& prof = field.profile;
  if (prof.kind == IndexProfile1D::Kind::homogeneous) {
    FftPlan fwd(field.size(), FFTW_FORWARD), inv(field.size(), FFTW_BACKWARD);
    std::vector<Complex> U = forward(fwd, field.u);
    const std::vector<double> k = wavenumbers(field.size(), field.dq);
    for (std::size_t j = 0; j < U.size(); ++j) U[j] *= std::polar(1.0, -prof.c * std::abs(k[j]) * T / prof.n0);
    out.u = inverse(inv, std::move(U));
    return out;
  }
  if (prof.kind == IndexProfile1D::Kind::linear) {
    out.u = KrylovPropagator(field).evolve(field.u, T);
    return out;
  }
  throw Error(ErrorCode::unsupported_profile, "unsupported 1-D index profile");
}

ConvergenceRow liouville_distance(const SampledField1D& initial, double T) {
  initial.validate();
  const std::size_t n = initial.size();
  const SampledField1D wave = propagate_semiclassical(initial, T);
  const IndexProfile1D& prof = initial.profile;
  const WignerGrid layout = empty_grid(initial);
  FftPlan plan(n, FFTW_FORWARD);
  const WignerRows wave_rows(wave, plan);
  std::vector<double> row_l1(n, 0.0);

  if (prof.kind == IndexProfile1D::Kind::homogeneous) {
    // Free transport shifts each momentum row by sign(p) c T / n; shift
    // covariance of the transform turns that into Wigner functions of
    // spectrally shifted fields.
    const double s = prof.c * T / prof.n0;
    SampledField1D plus = initial, minus = initial;
    plus.u = spectral_shift(initial, s);
    minus.u = spectral_shift(initial, -s);
    const WignerRows plus_rows(plus, plan), minus_rows(minus, plan), still_rows(initial, plan);
    const std::size_t zero = n / 2;
#pragma omp parallel
    {
      std::vector<Complex> kernel(n), spectrum(n);
      std::vector<double> w(n), wp(n), wm(n);
#pragma omp for schedule(static)
      for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        wave_rows.row(j, kernel, spectrum, w);
        plus_rows.row(j, kernel, spectrum, wp);
        minus_rows.row(j, kernel, spectrum, wm);
        const double w0 = still_rows.at_zero_momentum(j, kernel);
        std::vector<double> terms(n);
        for (std::size_t k = 0; k < n; ++k) {
          const double ref = k > zero ? wp[k] : (k < zero ? wm[k] : w0);
          terms[k] = std::abs(w[k] - ref);
        }
        row_l1[j] = pairwise_sum(terms);
      }
    }
  } else {
    const WignerGrid w0 = discrete_wigner(initial);
    const double g = prof.gradient;
#pragma omp parallel
    {
      std::vector<Complex> kernel(n), spectrum(n);
      std::vector<double> w(n), terms(n);
#pragma omp for schedule(static)
      for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        wave_rows.row(j, kernel, spectrum, w);
        const double q = layout.q(j);
        const double nq = prof.n(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double p = layout.p(k);
          const double sgn = p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
          double ref = 0.0;
          if (g == 0.0) {
            ref = interpolate(w0, q - sgn * prof.c * T / nq, p);
          } else {
            // Along a ray n(q(t))^2 changes at the constant rate 2 g c sign(p)
            // and |p| / n is conserved.
            const double n2 = nq * nq - 2.0 * g * prof.c * sgn * T;
            if (n2 > 0.0) {
              const double ns = std::sqrt(n2);
              ref = interpolate(w0, (ns - prof.n0) / g, p * ns / nq);
            }
          }
          terms[k] = std::abs(w[k] - ref);
        }
        row_l1[j] = pairwise_sum(terms);
      }
    }
  }

  ConvergenceRow row;
  row.eps = initial.eps;
  row.T = T;
  row.mass = initial.mass();
  row.L1_distance = row.mass > 0.0 ? pairwise_sum(row_l1) * layout.dq * layout.dp / row.mass : 0.0;
  return row;
}

std::vector<ConvergenceRow> compare_liouville(const WkbSpec& spec, const std::vector<double>& eps_ladder, double T) {
  std::vector<ConvergenceRow> rows;
  rows.reserve(eps_ladder.size());
  for (double eps : eps_ladder) rows.push_back(liouville_distance(wkb_field(spec, eps), T));
  return rows;
}

}  // namespace helios
