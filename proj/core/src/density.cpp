#include "helios/density.hpp"

#include <cmath>

#include "helios/error.hpp"

namespace helios {

AnalyticDensity zero_density() {
  return {"zero", [](const PhasePoint&) { return 0.0; }};
}

double Ensemble::total_energy() const {
  std::vector<double> w(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) w[i] = particles[i].w;
  return pairwise_sum(w);
}

double Ensemble::escaped_energy() const {
  std::vector<double> w(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) w[i] = particles[i].exited ? particles[i].w : 0.0;
  return pairwise_sum(w);
}

void Ensemble::validate() const {
  for (const auto& pt : particles) {
    if (!(pt.w >= 0.0) || !std::isfinite(pt.w)) {
      throw Error(ErrorCode::invalid_argument, "particle weights must be finite and nonnegative");
    }
    if (!(pt.z.p.norm() > 0.0)) throw Error(ErrorCode::zero_momentum, "particle with |p| = 0");
  }
}

void ProductDensity::validate() const {
  if (!(shell.p_min >= 0.0) || !(shell.p_max > shell.p_min)) {
    throw Error(ErrorCode::invalid_argument, "momentum shell needs 0 <= p_min < p_max");
  }
  if (!(energy >= 0.0)) throw Error(ErrorCode::invalid_argument, "density energy must be nonnegative");
  if (auto* g = std::get_if<GaussianSpatial>(&spatial); g && !(g->sigma > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "gaussian sigma must be positive");
  }
  if (auto* b = std::get_if<BallSpatial>(&spatial); b && !(b->radius > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
  }
  if (auto* v = std::get_if<VonMisesFisherDirections>(&directions)) {
    if (!(v->kappa > 0.0) || !(v->mean.norm() > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "vMF needs kappa > 0 and a nonzero mean direction");
    }
  }
}

double ProductDensity::direction_pdf(const Vec3& unit) const {
  if (std::holds_alternative<IsotropicDirections>(directions)) return 1.0 / (4.0 * kPi);
  const auto& v = std::get<VonMisesFisherDirections>(directions);
  const Vec3 mean = v.mean.normalized();
  // kappa / (4 pi sinh kappa) e^{kappa s.m}, written to stay finite for large kappa.
  return v.kappa / (2.0 * kPi * -std::expm1(-2.0 * v.kappa)) * std::exp(v.kappa * (unit.dot(mean) - 1.0));
}

double ProductDensity::operator()(const PhasePoint& z) const {
  const double pn = z.p.norm();
  if (pn < shell.p_min || pn > shell.p_max || pn == 0.0) return 0.0;
  double f = 0.0;
  if (const auto* u = std::get_if<UniformSpatial>(&spatial)) {
    f = u->value;
  } else if (const auto* g = std::get_if<GaussianSpatial>(&spatial)) {
    const double s2 = g->sigma * g->sigma;
    f = energy * std::exp(-0.5 * (z.q - g->center).squaredNorm() / s2) / std::pow(2.0 * kPi * s2, 1.5);
  } else {
    const auto& b = std::get<BallSpatial>(spatial);
    if ((z.q - b.center).norm() > b.radius) return 0.0;
    f = energy * 3.0 / (4.0 * kPi * b.radius * b.radius * b.radius);
  }
  return f * direction_pdf(z.p / pn) / shell.radial_moment();
}

PhasePoint ProductDensity::sample(CounterRng& rng) const {
  PhasePoint z;
  if (const auto* g = std::get_if<GaussianSpatial>(&spatial)) {
    z.q = g->center + g->sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
  } else if (const auto* b = std::get_if<BallSpatial>(&spatial)) {
    z.q = b->center + b->radius * std::cbrt(rng.uniform()) * rng.unit_vector();
  } else {
    throw Error(ErrorCode::invalid_argument, "cannot sample a spatially uniform density");
  }
  Vec3 dir;
  if (std::holds_alternative<IsotropicDirections>(directions)) {
    dir = rng.unit_vector();
  } else {
    const auto& v = std::get<VonMisesFisherDirections>(directions);
    const Vec3 mean = v.mean.normalized();
    const double u = rng.uniform_open0();
    const double w = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * v.kappa)) / v.kappa;
    const double phi = 2.0 * kPi * rng.uniform();
    const auto [t1, t2] = orthonormal_frame(mean);
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    dir = w * mean + s * (std::cos(phi) * t1 + std::sin(phi) * t2);
  }
  const double a3 = shell.p_min * shell.p_min * shell.p_min;
  const double b3 = shell.p_max * shell.p_max * shell.p_max;
  const double radius = std::cbrt(a3 + rng.uniform() * (b3 - a3));
  z.p = radius * dir;
  return z;
}

AnalyticDensity ProductDensity::as_analytic(std::string name) const {
  ProductDensity copy = *this;
  return {std::move(name), [copy](const PhasePoint& z) { return copy(z); }};
}

Ensemble sample_ensemble(const ProductDensity& density, std::size_t n, std::uint64_t seed) {
  density.validate();
  Ensemble e;
  e.seed = seed;
  e.particles.resize(n);
  const double w = n > 0 ? density.energy / static_cast<double>(n) : 0.0;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    e.particles[i].z = density.sample(rng);
    e.particles[i].w = w;
  }
  return e;
}

double SphereSourceDensity::operator()(const PhasePoint& z) const {
  const double pn = z.p.norm();
  if (pn < shell.p_min || pn > shell.p_max || pn == 0.0) return 0.0;
  const Vec3 d = z.q - center;
  const double r = d.norm();
  if (r <= radius) return radiance;
  const double cos_edge = std::sqrt(1.0 - (radius / r) * (radius / r));
  return d.dot(z.p) / (r * pn) >= cos_edge ? radiance : 0.0;
}

AnalyticDensity SphereSourceDensity::as_analytic() const {
  SphereSourceDensity copy = *this;
  return {"sphere_source", [copy](const PhasePoint& z) { return copy(z); }};
}

double SphereSourceDensity::flux(double speed_of_light, double n) const {
  // (c/n) L0 * radial moment * (4 pi r^2) * (pi sin^2 theta_s), with sin theta_s = R/r.
  return speed_of_light / n * radiance * shell.radial_moment() * 4.0 * kPi * kPi * radius * radius;
}

}  // namespace helios
