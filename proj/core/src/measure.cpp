#include "helios/measure.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>

#include "helios/error.hpp"
#include "helios/hamiltonian.hpp"
#include "helios/numerics.hpp"
#include "helios/transport.hpp"

namespace helios {

Surface::Surface(std::string id, SurfaceShape shape) : id_(std::move(id)), shape_(std::move(shape)) {
  if (const auto* r = std::get_if<RectangleShape>(&shape_)) {
    const Vec3 cross = r->edge1.cross(r->edge2);
    if (!(cross.norm() > 1e-300)) throw Error(ErrorCode::degenerate_surface, "rectangle '" + id_ + "' has zero area");
    unit_normal_ = cross.normalized();
  } else if (const auto* d = std::get_if<DiscShape>(&shape_)) {
    if (!(d->radius > 0.0) || !(d->normal.norm() > 0.0)) {
      throw Error(ErrorCode::degenerate_surface, "disc '" + id_ + "' needs radius > 0 and a nonzero normal");
    }
    unit_normal_ = d->normal.normalized();
  } else {
    if (!(std::get<SphereShape>(shape_).radius > 0.0)) {
      throw Error(ErrorCode::degenerate_surface, "sphere '" + id_ + "' needs radius > 0");
    }
  }
}

double Surface::area() const {
  if (const auto* r = std::get_if<RectangleShape>(&shape_)) return r->edge1.cross(r->edge2).norm();
  if (const auto* d = std::get_if<DiscShape>(&shape_)) return kPi * d->radius * d->radius;
  const double R = std::get<SphereShape>(shape_).radius;
  return 4.0 * kPi * R * R;
}

Vec3 Surface::normal(const Vec3& q) const {
  if (const auto* s = std::get_if<SphereShape>(&shape_)) {
    const Vec3 d = q - s->center;
    const double r = d.norm();
    return r > 0.0 ? Vec3(d / r) : Vec3(Vec3::UnitZ());
  }
  return unit_normal_;
}

double Surface::signed_distance(const Vec3& q) const {
  if (const auto* r = std::get_if<RectangleShape>(&shape_)) return (q - r->origin).dot(unit_normal_);
  if (const auto* d = std::get_if<DiscShape>(&shape_)) return (q - d->center).dot(unit_normal_);
  const auto& s = std::get<SphereShape>(shape_);
  return (q - s.center).norm() - s.radius;
}

bool Surface::within_extent(const Vec3& q) const {
  if (const auto* r = std::get_if<RectangleShape>(&shape_)) {
    // Solve for the in-plane coordinates with the 2x2 Gram system.
    const Vec3 d = q - r->origin;
    const double a = r->edge1.squaredNorm(), b = r->edge1.dot(r->edge2), c = r->edge2.squaredNorm();
    const double x = d.dot(r->edge1), y = d.dot(r->edge2);
    const double det = a * c - b * b;
    const double u = (c * x - b * y) / det;
    const double v = (a * y - b * x) / det;
    return u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0;
  }
  if (const auto* dsc = std::get_if<DiscShape>(&shape_)) {
    const Vec3 d = q - dsc->center;
    return (d - d.dot(unit_normal_) * unit_normal_).norm() <= dsc->radius;
  }
  return true;
}

std::vector<std::pair<Vec3, double>> Surface::area_quadrature(int n) const {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "area quadrature needs n >= 1");
  std::vector<std::pair<Vec3, double>> out;
  if (const auto* r = std::get_if<RectangleShape>(&shape_)) {
    const QuadratureRule g = gauss_legendre(n, 0.0, 1.0);
    const double jac = area();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.emplace_back(r->origin + g.nodes[i] * r->edge1 + g.nodes[j] * r->edge2, jac * g.weights[i] * g.weights[j]);
      }
    }
  } else if (const auto* d = std::get_if<DiscShape>(&shape_)) {
    const QuadratureRule g = gauss_legendre(n, 0.0, d->radius);
    const auto [e1, e2] = orthonormal_frame(unit_normal_);
    const int na = 2 * n;
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < na; ++k) {
        const double phi = 2.0 * kPi * (k + 0.5) / na;
        out.emplace_back(d->center + g.nodes[i] * (std::cos(phi) * e1 + std::sin(phi) * e2),
                         g.weights[i] * g.nodes[i] * 2.0 * kPi / na);
      }
    }
  } else {
    const auto& s = std::get<SphereShape>(shape_);
    const DirectionQuadrature dirs = sphere_quadrature(n, 2 * n);
    for (std::size_t k = 0; k < dirs.directions.size(); ++k) {
      out.emplace_back(s.center + s.radius * dirs.directions[k], s.radius * s.radius * dirs.weights[k]);
    }
  }
  return out;
}

Vec3 Surface::sample_point(CounterRng& rng) const {
  if (const auto* r = std::get_if<RectangleShape>(&shape_)) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    return r->origin + u * r->edge1 + v * r->edge2;
  }
  if (const auto* d = std::get_if<DiscShape>(&shape_)) {
    const auto [e1, e2] = orthonormal_frame(unit_normal_);
    const double rad = d->radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    return d->center + rad * (std::cos(phi) * e1 + std::sin(phi) * e2);
  }
  const auto& s = std::get<SphereShape>(shape_);
  return s.center + s.radius * rng.unit_vector();
}

Hemisphere parse_hemisphere(const std::string& name) {
  if (name == "along_normal") return Hemisphere::along_normal;
  if (name == "against_normal") return Hemisphere::against_normal;
  if (name == "net") return Hemisphere::net;
  throw Error(ErrorCode::invalid_argument, "unknown hemisphere '" + name + "'");
}

std::string to_string(Hemisphere h) {
  switch (h) {
    case Hemisphere::along_normal: return "along_normal";
    case Hemisphere::against_normal: return "against_normal";
    case Hemisphere::net: return "net";
  }
  return "?";
}

TimeDensity stationary(AnalyticDensity density) {
  return [d = std::move(density)](double, const PhasePoint& z) { return d(z); };
}

TimeDensity transported(const RefractiveIndexField& field, const IntegratorConfig& cfg, AnalyticDensity initial) {
  return [&field, cfg, d = std::move(initial)](double t, const PhasePoint& z) {
    return evaluate_transported(field, cfg, d, t, z).value;
  };
}

void EstimatorSpec::validate() const {
  if (n_time < 1 || n_area < 1 || n_polar < 1) {
    throw Error(ErrorCode::invalid_argument, "estimator node counts must be positive");
  }
  if (radial.n_rad < 1 || !(radial.p_min >= 0.0) || !(radial.p_max > radial.p_min)) {
    throw Error(ErrorCode::invalid_argument, "estimator radial rule needs n_rad >= 1 and 0 <= p_min < p_max");
  }
  if (kind == Kind::monte_carlo && mc_samples == 0) {
    throw Error(ErrorCode::invalid_argument, "Monte Carlo estimator needs samples");
  }
}

namespace {

struct HemisphereSums {
  double total = 0.0;
  double beyond_cutoff = 0.0;  // density just past p_max over one radial cell
};

// (c/n) * int over the hemisphere about `pole` of L(q, r s) (s . pole) r^2 dr dOmega.
HemisphereSums hemisphere_flux(const RefractiveIndexField& field, const std::function<double(const PhasePoint&)>& L,
                               const Vec3& q, const Vec3& pole, int n_polar, int n_azimuth,
                               const FiberQuadratureSpec& radial_spec, const QuadratureRule& radial) {
  const DirectionQuadrature dirs = hemisphere_quadrature(n_polar, n_azimuth, pole);
  const double speed = field.speed_of_light() / field.n(q);
  std::vector<double> shells(radial.nodes.size());
  std::vector<double> terms(dirs.directions.size());
  for (std::size_t r = 0; r < radial.nodes.size(); ++r) {
    const double radius = radial.nodes[r];
    for (std::size_t d = 0; d < dirs.directions.size(); ++d) {
      const Vec3& s = dirs.directions[d];
      terms[d] = dirs.weights[d] * s.dot(pole) * L(PhasePoint{q, radius * s});
    }
    shells[r] = speed * radial.weights[r] * radius * radius * pairwise_sum(terms);
  }
  const double p_max = radial_spec.p_max;
  const double probe_radius = p_max * (1.0 + 1e-6);
  for (std::size_t d = 0; d < dirs.directions.size(); ++d) {
    const Vec3& s = dirs.directions[d];
    terms[d] = dirs.weights[d] * s.dot(pole) * std::abs(L(PhasePoint{q, probe_radius * s}));
  }
  const double probe = speed * pairwise_sum(terms) * p_max * p_max * (p_max - radial_spec.p_min) / radial_spec.n_rad;
  return {pairwise_sum(shells), probe};
}

std::vector<std::pair<Vec3, double>> hemisphere_poles(Hemisphere h, const Vec3& normal) {
  switch (h) {
    case Hemisphere::along_normal: return {{normal, 1.0}};
    case Hemisphere::against_normal: return {{-normal, 1.0}};
    case Hemisphere::net: return {{normal, 1.0}, {-normal, -1.0}};
  }
  return {};
}

MeasurementResult quadrature_estimate(const RefractiveIndexField& field, const TimeDensity& density,
                                      const Surface& surface, double t1, double t2, const EstimatorSpec& spec) {
  const QuadratureRule times = gauss_legendre(spec.n_time, t1, t2);
  const auto nodes = surface.area_quadrature(spec.n_area);
  const QuadratureRule radial = gauss_legendre(spec.radial.n_rad, spec.radial.p_min, spec.radial.p_max);
  const std::size_t n_nodes = times.nodes.size() * nodes.size();
  std::vector<double> values(n_nodes), outer(n_nodes);
  std::vector<std::exception_ptr> errors(n_nodes);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(n_nodes); ++idx) {
    try {
      const std::size_t it = static_cast<std::size_t>(idx) / nodes.size();
      const auto& [q, wa] = nodes[static_cast<std::size_t>(idx) % nodes.size()];
      const double t = times.nodes[it];
      const double w = times.weights[it] * wa;
      const auto L = [&](const PhasePoint& z) { return density(t, z); };
      double v = 0.0, o = 0.0;
      for (const auto& [pole, sign] : hemisphere_poles(spec.hemisphere, surface.normal(q))) {
        const HemisphereSums s = hemisphere_flux(field, L, q, pole, spec.n_polar, 2 * spec.n_polar, spec.radial, radial);
        v += sign * s.total;
        o += s.beyond_cutoff;
      }
      values[idx] = w * v;
      outer[idx] = w * o;
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MeasurementResult res;
  res.surface_id = surface.id();
  res.t1 = t1;
  res.t2 = t2;
  res.E = pairwise_sum(values);
  res.samples_used = n_nodes;
  const double tail = pairwise_sum(outer);
  if (std::abs(res.E) > 0.0 && tail > 1e-6 * std::abs(res.E)) {
    res.warning = fmt::format("TruncationWarning: an estimated {:.3g} of the flux lies beyond p_max",
                              tail / std::abs(res.E));
  }
  return res;
}

MeasurementResult monte_carlo_estimate(const RefractiveIndexField& field, const TimeDensity& density,
                                       const Surface& surface, double t1, double t2, const EstimatorSpec& spec) {
  const QuadratureRule radial = gauss_legendre(spec.radial.n_rad, spec.radial.p_min, spec.radial.p_max);
  const double scale = (t2 - t1) * surface.area() * kPi;
  const std::size_t n = spec.mc_samples;
  std::vector<double> x(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      CounterRng rng(spec.seed, static_cast<std::uint64_t>(i));
      const double t = t1 + (t2 - t1) * rng.uniform();
      const Vec3 q = surface.sample_point(rng);
      Vec3 pole = surface.normal(q);
      double sign = 1.0;
      if (spec.hemisphere == Hemisphere::against_normal) {
        pole = -pole;
      } else if (spec.hemisphere == Hemisphere::net) {
        if (rng.uniform() < 0.5) {
          pole = -pole;
          sign = -2.0;
        } else {
          sign = 2.0;
        }
      }
      // Cosine-weighted direction about the pole: pdf = mu / pi.
      const double mu = std::sqrt(rng.uniform());
      const double phi = 2.0 * kPi * rng.uniform();
      const auto [e1, e2] = orthonormal_frame(pole);
      const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      const Vec3 s = mu * pole + st * (std::cos(phi) * e1 + std::sin(phi) * e2);
      double acc = 0.0;
      for (std::size_t r = 0; r < radial.nodes.size(); ++r) {
        const double rad = radial.nodes[r];
        acc += radial.weights[r] * rad * rad * density(t, PhasePoint{q, rad * s});
      }
      x[i] = sign * scale * field.speed_of_light() / field.n(q) * acc;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MeasurementResult res;
  res.surface_id = surface.id();
  res.t1 = t1;
  res.t2 = t2;
  res.samples_used = n;
  const double mean = pairwise_sum(x) / static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
  const double var = n > 1 ? pairwise_sum(dev) / static_cast<double>(n - 1) : 0.0;
  res.E = mean;
  res.stddev = std::sqrt(var / static_cast<double>(n));
  return res;
}

}  // namespace

MeasurementResult measure_energy(const RefractiveIndexField& field, const TimeDensity& density,
                                 const Surface& surface, double t1, double t2, const EstimatorSpec& spec) {
  spec.validate();
  if (!(t2 > t1)) throw Error(ErrorCode::invalid_argument, "measurement window needs t2 > t1");
  return spec.kind == EstimatorSpec::Kind::quadrature ? quadrature_estimate(field, density, surface, t1, t2, spec)
                                                      : monte_carlo_estimate(field, density, surface, t1, t2, spec);
}

namespace {

constexpr int kSubSamples = 8;
constexpr double kCrossingTimeTol = 1e-10;

// Net contribution of one particle: +w for each crossing inside the window in
// the selected direction (and -w for the opposite one when measuring net flux).
double particle_crossings(const RefractiveIndexField& field, const IntegratorConfig& cfg, const Particle& pt,
                          double t0, const Surface& surface, double t1, double t2, Hemisphere hemisphere) {
  const double h = cfg.dt;
  PhasePoint za = pt.z;
  double da = surface.signed_distance(za.q);
  double total = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double ta = t0 + static_cast<double>(k) * h;
    if (ta >= t2) break;
    PhasePoint zb;
    try {
      zb = step(field, cfg, za, h);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::out_of_domain) break;
      throw;
    }
    const double db = surface.signed_distance(zb.q);

    // Cubic Hermite interpolant of q on the step, sampled to count crossings.
    const Vec3 va = vector_field(field, za, cfg.branch).q_dot;
    const Vec3 vb = vector_field(field, zb, cfg.branch).q_dot;
    double d[kSubSamples + 1];
    d[0] = da;
    d[kSubSamples] = db;
    for (int j = 1; j < kSubSamples; ++j) {
      const double s = static_cast<double>(j) / kSubSamples;
      const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
      const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
      const Vec3 q = h00 * za.q + h10 * h * va + h01 * zb.q + h11 * h * vb;
      d[j] = surface.signed_distance(q);
    }
    int changes = 0;
    for (int j = 0; j < kSubSamples; ++j) changes += (d[j] < 0.0) != (d[j + 1] < 0.0);
    if (changes > 2) {
      throw Error(ErrorCode::ambiguous_crossing,
                  fmt::format("step at t = {:.17g} straddles surface '{}' {} times; reduce dt", ta, surface.id(),
                              changes));
    }
    for (int j = 0; j < kSubSamples && changes > 0; ++j) {
      if ((d[j] < 0.0) == (d[j + 1] < 0.0)) continue;
      double lo = ta + h * j / kSubSamples;
      double hi = ta + h * (j + 1) / kSubSamples;
      const bool lo_negative = d[j] < 0.0;
      while (hi - lo > kCrossingTimeTol) {
        const double mid = 0.5 * (lo + hi);
        const PhasePoint zm = step(field, cfg, za, mid - ta);
        if ((surface.signed_distance(zm.q) < 0.0) == lo_negative) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double tc = 0.5 * (lo + hi);
      if (tc < t1 || tc >= t2) continue;
      const PhasePoint zc = step(field, cfg, za, tc - ta);
      if (!surface.within_extent(zc.q)) continue;
      const double cosine = zc.p.dot(surface.normal(zc.q));
      if (cosine > 0.0 && hemisphere != Hemisphere::against_normal) total += pt.w;
      if (cosine < 0.0 && hemisphere == Hemisphere::against_normal) total += pt.w;
      if (cosine < 0.0 && hemisphere == Hemisphere::net) total -= pt.w;
    }
    za = zb;
    da = db;
  }
  return total;
}

}  // namespace

MeasurementResult measure_ensemble_crossings(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                                             const Ensemble& ensemble, const Surface& surface, double t1,
                                             double t2, Hemisphere hemisphere) {
  cfg.validate();
  if (!(t2 > t1)) throw Error(ErrorCode::invalid_argument, "measurement window needs t2 > t1");
  if (t1 < ensemble.t) throw Error(ErrorCode::invalid_argument, "measurement window starts before the ensemble time");

  const auto& ps = ensemble.particles;
  const std::size_t n = ps.size();
  std::vector<double> x(n, 0.0);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    if (ps[i].exited) continue;
    try {
      x[i] = particle_crossings(field, cfg, ps[i], ensemble.t, surface, t1, t2, hemisphere);
    } catch (const Error& e) {
      errors[i] = std::make_exception_ptr(Error(e.code(), fmt::format("particle {}: {}", i, e.what())));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MeasurementResult res;
  res.surface_id = surface.id();
  res.t1 = t1;
  res.t2 = t2;
  res.samples_used = n;
  res.E = pairwise_sum(x);
  if (n > 1) {
    const double mean = res.E / static_cast<double>(n);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
    // Sum of N iid contributions: Var = N * var(X).
    res.stddev = std::sqrt(pairwise_sum(dev) * static_cast<double>(n) / static_cast<double>(n - 1));
  }
  return res;
}

double irradiance(const RefractiveIndexField& field, const AnalyticDensity& density, const Vec3& q,
                  const Vec3& normal, const IrradianceSpec& spec, Hemisphere hemisphere) {
  if (!(normal.norm() > 0.0)) throw Error(ErrorCode::degenerate_surface, "irradiance needs a nonzero normal");
  const QuadratureRule radial = gauss_legendre(spec.radial.n_rad, spec.radial.p_min, spec.radial.p_max);
  const std::function<double(const PhasePoint&)> L = [&](const PhasePoint& z) { return density(z); };
  double out = 0.0;
  for (const auto& [pole, sign] : hemisphere_poles(hemisphere, normal.normalized())) {
    out += sign * hemisphere_flux(field, L, q, pole, spec.n_polar, spec.n_azimuth, spec.radial, radial).total;
  }
  return out;
}

double radiance_sample(const RefractiveIndexField& field, const AnalyticDensity& density, const Vec3& q,
                       const Vec3& direction, double nu) {
  const double omega = angular_frequency(nu);
  const double n = field.n(q);
  const double c = field.speed_of_light();
  const Vec3 p = wave_vector_from_direction(field, q, direction, omega);
  return 2.0 * kPi * omega * omega * n * n * density(PhasePoint{q, p}) / (c * c);
}

}  // namespace helios
