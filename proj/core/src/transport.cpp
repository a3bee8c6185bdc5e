#include "helios/transport.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include "helios/error.hpp"
#include "helios/numerics.hpp"

namespace helios {

TransportedValue evaluate_transported(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                                      const AnalyticDensity& initial, double t, const PhasePoint& z) {
  if (t == 0.0) return {initial(z), false};
  const FlowEndpoint back = advance(field, cfg, z, -t);
  if (back.exit_event) return {0.0, true};
  return {initial(back.z), false};
}

namespace {

// Runs body(i) for i in [0, n) in parallel. The exception from the lowest
// failing index is rethrown so failures are reported deterministically.
template <class Body>
void parallel_for_each_index(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  bool any = false;
#pragma omp parallel for schedule(dynamic, 16) reduction(|| : any)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
      any = true;
    }
  }
  if (!any) return;
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

TransportResult transport_ensemble(const RefractiveIndexField& field, const IntegratorConfig& cfg,
                                   const Ensemble& initial, double T, const TransportOptions& options) {
  cfg.validate();
  initial.validate();
  if (!(T >= 0.0)) throw Error(ErrorCode::invalid_argument, "transport time must be nonnegative");

  TransportResult out;
  out.ensemble = initial;
  out.ensemble.t = initial.t + T;
  auto& particles = out.ensemble.particles;

  parallel_for_each_index(particles.size(), [&](std::size_t i) {
    Particle& pt = particles[i];
    if (pt.exited) return;
    try {
      const FlowEndpoint end = advance(field, cfg, pt.z, T);
      pt.z = end.z;
      pt.exited = end.exit_event.has_value();
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("particle {}: {}", i, e.what()));
    }
  });

  TransportReport& rep = out.report;
  rep.total_energy_before = initial.total_energy();
  rep.total_energy_after = out.ensemble.total_energy();
  rep.escaped_energy = out.ensemble.escaped_energy();
  rep.escaped_particles = static_cast<std::size_t>(
      std::count_if(particles.begin(), particles.end(), [](const Particle& p) { return p.exited; }));

  if (options.reference) {
    const AnalyticDensity& ref = *options.reference;
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < particles.size() && picked.size() < options.max_casimir_samples; ++i) {
      if (!particles[i].exited) picked.push_back(i);
    }
    rep.casimir_samples.resize(picked.size());
    parallel_for_each_index(picked.size(), [&](std::size_t k) {
      const std::size_t i = picked[k];
      CasimirSample& s = rep.casimir_samples[k];
      s.z0 = initial.particles[i].z;
      s.before = ref(s.z0);
      s.after = options.reference_is_stationary
                    ? ref(particles[i].z)
                    : evaluate_transported(field, cfg, ref, T, particles[i].z).value;
    });
    double scale = 0.0;
    double worst = 0.0;
    for (const auto& s : rep.casimir_samples) {
      scale = std::max(scale, std::abs(s.before));
      worst = std::max(worst, std::abs(s.after - s.before));
    }
    rep.max_casimir_drift = scale > 0.0 ? worst / scale : worst;
  }
  return out;
}

FiberIntegral fiber_integrate_energy(const AnalyticDensity& density, const Vec3& q,
                                     const FiberQuadratureSpec& spec) {
  spec.validate();
  const DirectionQuadrature dirs = sphere_quadrature(spec.n_dir, 2 * spec.n_dir);
  const QuadratureRule rad = gauss_legendre(spec.n_rad, spec.p_min, spec.p_max);

  std::vector<double> shells(rad.nodes.size());
  std::vector<double> terms(dirs.directions.size());
  for (std::size_t r = 0; r < rad.nodes.size(); ++r) {
    const double radius = rad.nodes[r];
    for (std::size_t d = 0; d < dirs.directions.size(); ++d) {
      terms[d] = dirs.weights[d] * density(PhasePoint{q, radius * dirs.directions[d]});
    }
    shells[r] = rad.weights[r] * radius * radius * pairwise_sum(terms);
  }
  // Probe the density just past the cutoff, over a shell as thick as one radial cell.
  const double probe_radius = spec.p_max * (1.0 + 1e-6);
  for (std::size_t d = 0; d < dirs.directions.size(); ++d) {
    terms[d] = dirs.weights[d] * density(PhasePoint{q, probe_radius * dirs.directions[d]});
  }
  const double probe =
      std::abs(pairwise_sum(terms)) * spec.p_max * spec.p_max * (spec.p_max - spec.p_min) / spec.n_rad;
  FiberIntegral out;
  out.value = pairwise_sum(shells);
  const double total_abs = std::abs(out.value);
  out.boundary_fraction = total_abs > 0.0 ? probe / total_abs : (probe > 0.0 ? 1.0 : 0.0);
  out.truncation_warning = out.boundary_fraction > 1e-6;
  return out;
}

double field_hamiltonian(const RefractiveIndexField& field, const Ensemble& ensemble) {
  const auto& ps = ensemble.particles;
  std::vector<double> terms(ps.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ps.size()); ++i) {
    terms[i] = ps[i].w * hamiltonian(field, ps[i].z);
  }
  return pairwise_sum(terms);
}

double field_hamiltonian(const RefractiveIndexField& field, const AnalyticDensity& density,
                         const PhaseSpaceQuadratureSpec& spec) {
  spec.fiber.validate();
  if (spec.n_q < 1) throw Error(ErrorCode::invalid_argument, "n_q must be positive");
  const Box box = field.domain();
  QuadratureRule axes[3];
  for (int k = 0; k < 3; ++k) axes[k] = gauss_legendre(spec.n_q, box.lo[k], box.hi[k]);
  const DirectionQuadrature dirs = sphere_quadrature(spec.fiber.n_dir, 2 * spec.fiber.n_dir);
  const QuadratureRule rad = gauss_legendre(spec.fiber.n_rad, spec.fiber.p_min, spec.fiber.p_max);

  const int n = spec.n_q;
  std::vector<double> cells(static_cast<std::size_t>(n) * n * n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(cells.size()); ++idx) {
    const int i = static_cast<int>(idx % n);
    const int j = static_cast<int>((idx / n) % n);
    const int k = static_cast<int>(idx / (static_cast<std::ptrdiff_t>(n) * n));
    const Vec3 q(axes[0].nodes[i], axes[1].nodes[j], axes[2].nodes[k]);
    const double wq = axes[0].weights[i] * axes[1].weights[j] * axes[2].weights[k];
    const double speed = field.speed_of_light() / field.n(q);
    std::vector<double> shells(rad.nodes.size());
    std::vector<double> terms(dirs.directions.size());
    for (std::size_t r = 0; r < rad.nodes.size(); ++r) {
      const double radius = rad.nodes[r];
      for (std::size_t d = 0; d < dirs.directions.size(); ++d) {
        terms[d] = dirs.weights[d] * density(PhasePoint{q, radius * dirs.directions[d]});
      }
      shells[r] = rad.weights[r] * radius * radius * radius * speed * pairwise_sum(terms);
    }
    cells[idx] = wq * pairwise_sum(shells);
  }
  return pairwise_sum(cells);
}

void write_ensemble_csv(const Ensemble& ensemble, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("t,qx,qy,qz,px,py,pz,w,exited\n");
  for (const auto& pt : ensemble.particles) {
    out.print("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", ensemble.t, pt.z.q.x(),
              pt.z.q.y(), pt.z.q.z(), pt.z.p.x(), pt.z.p.y(), pt.z.p.z(), pt.w, pt.exited ? 1 : 0);
  }
}

Ensemble read_ensemble_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open ensemble file " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t,qx,qy,qz,px,py,pz,w,exited") {
    throw Error(ErrorCode::invalid_argument, "unexpected ensemble CSV header in " + path.string());
  }
  Ensemble e;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    double v[9];
    char sep = 0;
    for (int k = 0; k < 9; ++k) {
      if (!(ss >> v[k]) || (k < 8 && !(ss >> sep && sep == ','))) {
        throw Error(ErrorCode::invalid_argument, fmt::format("malformed ensemble row {} in {}", row, path.string()));
      }
    }
    e.t = v[0];
    e.particles.push_back(Particle{PhasePoint{Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])}, v[7], v[8] != 0.0});
  }
  return e;
}

}  // namespace helios
