#include "helios/validation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "helios/cosphere.hpp"
#include "helios/density.hpp"
#include "helios/error.hpp"
#include "helios/measure.hpp"
#include "helios/transport.hpp"
#include "helios/wigner.hpp"

namespace helios {

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

ValidationTolerances::ValidationTolerances()
    : values_{
          {"symplectic.defect", 1e-5},
          {"symplectic.order_ratio", 4.0},
          {"symplectic.order_ratio_rel", 0.2},
          {"conservation.h_drift", 1e-8},
          {"conservation.casimir", 1e-6},
          {"conservation.det", 1e-5},
          {"conservation.field_h_drift", 1e-8},
          {"conservation.return", 1e-5},
          {"cosphere.equivariance", 1e-9},
          {"cosphere.frequency", 1e-8},
          {"cosphere.closure", 1e-6},
          {"cosphere.reduction", 1e-10},
          {"cosphere.representative", 1e-9},
          {"fermat.closure", 1e-6},
          {"fermat.hausdorff", 1e-6},
          {"measure.cosine", 1e-3},
          {"measure.sigmas", 3.0},
          {"wigner.marginal", 1e-10},
          {"wigner.ladder_ratio", 1.2},
          {"wigner.realness", 1e-12},
          {"wigner.parseval", 1e-10},
          {"runtime.symplectic", 10.0},
          {"runtime.conservation", 30.0},
          {"runtime.equivariance", 5.0},
          {"runtime.fermat", 10.0},
          {"runtime.measure", 60.0},
          {"runtime.wigner", 60.0},
      } {}

double ValidationTolerances::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::invalid_argument, "unknown tolerance '" + key + "'");
  return it->second;
}

void ValidationTolerances::set(const std::string& key, double value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::invalid_argument, "unknown tolerance '" + key + "'");
  if (!std::isfinite(value)) throw Error(ErrorCode::invalid_argument, "tolerance '" + key + "' must be finite");
  it->second = value;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"symplectic", "conservation", "cosphere", "fermat", "measure", "wigner"};
  return names;
}

bool is_suite_name(const std::string& name) {
  const auto& n = suite_names();
  return name == "all" || std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool compare(double value, double tolerance, const std::string& cmp) {
  if (std::isnan(value)) return false;
  if (cmp == "<=") return value <= tolerance;
  if (cmp == ">=") return value >= tolerance;
  if (cmp == ">") return value > tolerance;
  if (cmp == "==") return value == tolerance;
  return false;
}

class Suite {
 public:
  explicit Suite(std::string name) { report_.suite = std::move(name); }

  void add(std::string name, int criterion, double value, double tolerance, std::string cmp, double seconds,
           std::string detail = {}) {
    CheckResult c;
    c.suite = report_.suite;
    c.name = std::move(name);
    c.criterion = criterion;
    c.value = value;
    c.tolerance = tolerance;
    c.comparison = std::move(cmp);
    c.pass = compare(value, tolerance, c.comparison);
    c.seconds = seconds;
    c.detail = std::move(detail);
    report_.checks.push_back(std::move(c));
  }

  // Records a check that could not be evaluated because the computation threw.
  void fail(std::string name, int criterion, const std::exception& e) {
    CheckResult c;
    c.suite = report_.suite;
    c.name = std::move(name);
    c.criterion = criterion;
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.comparison = "error";
    c.detail = e.what();
    report_.checks.push_back(std::move(c));
  }

  SuiteReport finish() {
    report_.seconds = clock_.seconds();
    return std::move(report_);
  }

 private:
  SuiteReport report_;
  Stopwatch clock_;
};

// Maxwell fish-eye n = 2 / (1 + r^2), c = 1. Every ray is a circle and the
// common period is pi * n0 * a / c = 2 pi.
struct Fisheye {
  RefractiveIndexField field = RefractiveIndexField::fisheye(2.0, 1.0, Box{Vec3::Constant(-4.0), Vec3::Constant(4.0)});
  double period = kPi * 2.0 * 1.0 / 1.0;
  PhasePoint launch() const {
    const Vec3 q(0.5, 0.0, 0.0);
    return {q, wave_vector_from_direction(field, q, Vec3::UnitY(), 1.0)};
  }
};

IntegratorConfig config(Scheme scheme, double dt) {
  IntegratorConfig cfg;
  cfg.scheme = scheme;
  cfg.dt = dt;
  return cfg;
}

IntegratorConfig midpoint(double dt) { return config(Scheme::implicit_midpoint, dt); }

// Rays near the tangential launch at (0.5, 0, 0): their circles stay well
// inside the box.
ProductDensity fisheye_bundle() {
  ProductDensity d;
  d.spatial = GaussianSpatial{Vec3(0.5, 0.0, 0.0), 0.05};
  d.directions = VonMisesFisherDirections{Vec3::UnitY(), 50.0};
  d.shell = MomentumShell{1.0, 2.0};
  d.energy = 1.0;
  return d;
}

// A density built from the conserved quantities H and L = q x p of the
// fish-eye, hence invariant under its flow.
AnalyticDensity fisheye_invariant_density(const RefractiveIndexField& field) {
  const Vec3 L0 = Vec3(0.5, 0.0, 0.0).cross(Vec3(0.0, 1.6, 0.0));
  return {"fisheye_invariant", [&field, L0](const PhasePoint& z) {
            const double h = hamiltonian(field, z) - 1.0;
            const Vec3 dl = z.q.cross(z.p) - L0;
            return std::exp(-h * h / (2.0 * 0.25)) * std::exp(-dl.squaredNorm() / (2.0 * 0.25));
          }};
}

double phase_distance(const PhasePoint& a, const PhasePoint& b) {
  return std::max((a.q - b.q).norm(), (a.p - b.p).norm());
}

// ---------------------------------------------------------------------------

SuiteReport symplectic_suite(const ValidationTolerances& tol) {
  Suite s("symplectic");
  const Fisheye fe;
  const PhasePoint z0 = fe.launch();

  try {
    Stopwatch sw;
    const Mat6 J = flow_jacobian(fe.field, midpoint(fe.period / 1000.0), z0, fe.period);
    const double defect = symplecticity_defect(J);
    const double secs = sw.seconds();
    s.add("fisheye_midpoint_symplecticity_defect", 1, defect, tol.get("symplectic.defect"), "<=", secs,
          "FD Jacobian of the one-period flow, dt = period/1000");
    s.add("fisheye_symplecticity_runtime_seconds", 1, secs, tol.get("runtime.symplectic"), "<=", secs);
    s.add("fisheye_jacobian_determinant_error", 0, std::abs(J.determinant() - 1.0), tol.get("conservation.det"),
          "<=", 0.0);
  } catch (const std::exception& e) {
    s.fail("fisheye_midpoint_symplecticity_defect", 1, e);
  }

  // Other analytic media over the same time span.
  struct Case {
    const char* name;
    RefractiveIndexField field;
    PhasePoint z0;
  };
  const auto make_case = [](const char* name, RefractiveIndexField f, const Vec3& q, const Vec3& dir) {
    const Vec3 p = wave_vector_from_direction(f, q, dir, 1.0);
    return Case{name, std::move(f), PhasePoint{q, p}};
  };
  std::vector<Case> cases;
  cases.push_back(make_case("homogeneous",
                            RefractiveIndexField::homogeneous(1.5, Box{Vec3::Constant(-10.0), Vec3::Constant(10.0)}),
                            Vec3(-3.0, 0.0, 0.0), Vec3(1.0, 1.0, 0.0).normalized()));
  cases.push_back(make_case("linear",
                            RefractiveIndexField::linear(1.0, Vec3(0.0, 0.1, 0.0),
                                                         Box{Vec3(-10.0, -5.0, -5.0), Vec3(10.0, 5.0, 5.0)}),
                            Vec3(-3.0, 0.0, 0.0), Vec3::UnitX()));
  cases.push_back(make_case("parabolic_grin",
                            RefractiveIndexField::parabolic_grin(1.5, 0.1, Vec3::UnitZ(),
                                                                 Box{Vec3(-2.0, -2.0, -20.0), Vec3(2.0, 2.0, 20.0)}),
                            Vec3(0.3, 0.0, -5.0), Vec3::UnitZ()));
  for (const auto& c : cases) {
    try {
      Stopwatch sw;
      const Mat6 J = flow_jacobian(c.field, midpoint(fe.period / 1000.0), c.z0, fe.period);
      s.add(fmt::format("{}_midpoint_symplecticity_defect", c.name), 0, symplecticity_defect(J),
            tol.get("symplectic.defect"), "<=", sw.seconds());
    } catch (const std::exception& e) {
      s.fail(fmt::format("{}_midpoint_symplecticity_defect", c.name), 0, e);
    }
  }

  try {
    Stopwatch sw;
    const double T = fe.period / 4.0;
    const PhasePoint ref = advance(fe.field, config(Scheme::reference_high_order, T / 2000.0), z0, T).z;
    const double e1 = phase_distance(advance(fe.field, midpoint(fe.period / 400.0), z0, T).z, ref);
    const double e2 = phase_distance(advance(fe.field, midpoint(fe.period / 800.0), z0, T).z, ref);
    const double ratio = e1 / e2;
    const double target = tol.get("symplectic.order_ratio");
    s.add("midpoint_error_ratio_on_halving_dt", 0, std::abs(ratio / target - 1.0),
          tol.get("symplectic.order_ratio_rel"), "<=", sw.seconds(),
          fmt::format("error ratio {:.6g} (errors {:.3e}, {:.3e})", ratio, e1, e2));
  } catch (const std::exception& e) {
    s.fail("midpoint_error_ratio_on_halving_dt", 0, e);
  }
  return s.finish();
}

// ---------------------------------------------------------------------------

SuiteReport conservation_suite(const ValidationTolerances& tol) {
  Suite s("conservation");
  const Fisheye fe;
  const PhasePoint z0 = fe.launch();

  // Frequency conservation over 1e5 steps at dt = period/1000.
  try {
    Stopwatch sw;
    const double dt = fe.period / 1000.0;
    const double T = 1e5 * dt;
    const FlowResult mid = flow(fe.field, midpoint(dt), z0, T);
    const FlowResult rk4 = flow(fe.field, config(Scheme::rk4, dt), z0, T);
    const double secs = sw.seconds();
    const double d_mid = mid.max_relative_drift();
    const double d_rk4 = rk4.max_relative_drift();
    s.add("midpoint_max_relative_H_drift_1e5_steps", 2, d_mid, tol.get("conservation.h_drift"), "<=", secs,
          fmt::format("{} steps at dt = period/1000", mid.steps_taken));
    s.add("rk4_H_drift_exceeds_midpoint", 2, d_rk4, d_mid, ">", secs,
          fmt::format("rk4 drift {:.3e} vs midpoint drift {:.3e}", d_rk4, d_mid));
    s.add("frequency_conservation_runtime_seconds", 2, secs, tol.get("runtime.conservation"), "<=", secs);
  } catch (const std::exception& e) {
    s.fail("midpoint_max_relative_H_drift_1e5_steps", 2, e);
  }

  // Density invariance along 100 random trajectories.
  const AnalyticDensity invariant = fisheye_invariant_density(fe.field);
  const Ensemble hundred = sample_ensemble(fisheye_bundle(), 100, 20260101);
  try {
    Stopwatch sw;
    const std::size_t n = hundred.particles.size();
    std::vector<double> worst(n, 0.0), scale(n, 0.0);
    std::vector<int> exited(n, 0);
    const IntegratorConfig cfg = midpoint(fe.period * 1e-4);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const PhasePoint& z = hundred.particles[i].z;
      const FlowResult r = flow(fe.field, cfg, z, fe.period, FlowOptions{50});
      const double l0 = invariant(z);
      scale[i] = l0;
      exited[i] = r.exit_event.has_value();
      for (const auto& sample : r.samples) worst[i] = std::max(worst[i], std::abs(invariant(sample.z) - l0));
    }
    const double drift = *std::max_element(worst.begin(), worst.end()) /
                         *std::max_element(scale.begin(), scale.end());
    const int n_exit = std::count(exited.begin(), exited.end(), 1);
    s.add("invariant_density_drift_along_100_rays", 4, drift, tol.get("conservation.casimir"), "<=", sw.seconds(),
          fmt::format("max |L(z_t) - L(z_0)| / max L over 1 period, dt = period*1e-4, {} exits", n_exit));
  } catch (const std::exception& e) {
    s.fail("invariant_density_drift_along_100_rays", 4, e);
  }

  try {
    Stopwatch sw;
    TransportOptions opts;
    opts.reference = invariant;
    opts.reference_is_stationary = true;
    const TransportResult tr = transport_ensemble(fe.field, midpoint(fe.period / 1000.0), hundred, fe.period, opts);
    s.add("ensemble_energy_change", 4, std::abs(tr.report.total_energy_after - tr.report.total_energy_before), 0.0,
          "==", sw.seconds(),
          fmt::format("before {:.17g}, after {:.17g}", tr.report.total_energy_before, tr.report.total_energy_after));
  } catch (const std::exception& e) {
    s.fail("ensemble_energy_change", 4, e);
  }

  try {
    Stopwatch sw;
    double worst = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      const Mat6 J = flow_jacobian(fe.field, midpoint(fe.period / 1000.0), hundred.particles[i].z, fe.period);
      worst = std::max(worst, std::abs(J.determinant() - 1.0));
    }
    s.add("flow_jacobian_determinant_error", 4, worst, tol.get("conservation.det"), "<=", sw.seconds(),
          "max |det D(eta_T) - 1| over 5 trajectories");
  } catch (const std::exception& e) {
    s.fail("flow_jacobian_determinant_error", 4, e);
  }

  // Field Hamiltonian of a 1e4-particle ensemble over one period.
  try {
    Stopwatch sw;
    const Ensemble e = sample_ensemble(fisheye_bundle(), 10000, 20260102);
    const double h0 = field_hamiltonian(fe.field, e);
    const TransportResult tr = transport_ensemble(fe.field, midpoint(fe.period / 2000.0), e, fe.period);
    const double h1 = field_hamiltonian(fe.field, tr.ensemble);
    const double secs = sw.seconds();
    s.add("field_hamiltonian_relative_drift_1e4_particles", 8, std::abs(h1 - h0) / std::abs(h0),
          tol.get("conservation.field_h_drift"), "<=", secs,
          fmt::format("H[l_0] = {:.17g}, H[l_T] = {:.17g}, dt = period/2000", h0, h1));
    s.add("escaped_energy_one_period", 0, tr.report.escaped_energy, 0.0, "==", secs);
    double worst = 0.0;
    for (std::size_t i = 0; i < e.particles.size(); ++i) {
      worst = std::max(worst, (tr.ensemble.particles[i].z.q - e.particles[i].z.q).norm());
    }
    s.add("particle_return_after_one_period", 0, worst, tol.get("conservation.return"), "<=", secs,
          "max |q(T) - q(0)| over 1e4 particles");
  } catch (const std::exception& e) {
    s.fail("field_hamiltonian_relative_drift_1e4_particles", 8, e);
  }
  return s.finish();
}

// ---------------------------------------------------------------------------

SuiteReport cosphere_suite(const ValidationTolerances& tol) {
  Suite s("cosphere");
  const Fisheye fe;
  const PhasePoint z0 = fe.launch();

  try {
    Stopwatch sw;
    const IntegratorConfig cfg = midpoint(fe.period / 1000.0);
    const FlowResult base = flow(fe.field, cfg, z0, fe.period);
    double dq = 0.0, dp = 0.0;
    for (double alpha : {0.5, 7.0}) {
      const FlowResult scaled = flow(fe.field, cfg, PhasePoint{z0.q, alpha * z0.p}, fe.period);
      if (scaled.samples.size() != base.samples.size()) {
        throw Error(ErrorCode::invalid_argument, "scaled trajectory has a different number of samples");
      }
      for (std::size_t k = 0; k < base.samples.size(); ++k) {
        const PhasePoint& a = base.samples[k].z;
        const PhasePoint& b = scaled.samples[k].z;
        dq = std::max(dq, (b.q - a.q).norm());
        dp = std::max(dp, (b.p - alpha * a.p).norm() / (alpha * a.p.norm()));
      }
    }
    const double secs = sw.seconds();
    s.add("momentum_scaling_q_deviation", 3, dq, tol.get("cosphere.equivariance"), "<=", secs,
          "max |q_alpha(t) - q_1(t)| for alpha in {0.5, 7}, one period");
    s.add("momentum_scaling_p_relative_deviation", 3, dp, tol.get("cosphere.equivariance"), "<=", secs,
          "max |p_alpha(t) - alpha p_1(t)| / (alpha |p_1(t)|)");
    s.add("momentum_scaling_runtime_seconds", 3, secs, tol.get("runtime.equivariance"), "<=", secs);
  } catch (const std::exception& e) {
    s.fail("momentum_scaling_q_deviation", 3, e);
  }

  try {
    Stopwatch sw;
    const IntegratorConfig cfg = midpoint(fe.period * 2e-5);
    const CospherePoint x0 = project(z0, fe.field);
    std::vector<ReducedFlow> runs;
    for (double alpha : {0.5, 1.0, 7.0}) runs.push_back(reduced_flow(fe.field, cfg, x0, fe.period, alpha));
    double rep = 0.0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
      for (std::size_t k = 0; k < runs[0].samples.size(); ++k) {
        const CospherePoint& a = runs[0].samples[k].x;
        const CospherePoint& b = runs[r].samples[k].x;
        rep = std::max({rep, (a.q - b.q).norm(), (a.direction - b.direction).norm(),
                        std::abs(a.omega - b.omega) / a.omega});
      }
    }
    const double secs = sw.seconds();
    s.add("reduced_flow_representative_independence", 0, rep, tol.get("cosphere.representative"), "<=", secs,
          "lifts at alpha in {0.5, 1, 7}");

    const ReducedFlow& canonical = runs[1];
    double freq = 0.0;
    for (const auto& sample : canonical.full.samples) {
      freq = std::max(freq, std::abs(hamiltonian(fe.field, sample.z) - x0.omega) / x0.omega);
    }
    s.add("reduced_flow_frequency_conservation", 0, freq, tol.get("cosphere.frequency"), "<=", secs,
          "dt = period*2e-5");
    const CospherePoint& end = canonical.samples.back().x;
    s.add("reduced_flow_closure", 0, std::max((end.q - x0.q).norm(), (end.direction - x0.direction).norm()),
          tol.get("cosphere.closure"), "<=", secs);

    const FlowResult full = flow(fe.field, cfg, lift(x0, fe.field), fe.period);
    double path = 0.0;
    for (std::size_t k = 0; k < full.samples.size(); ++k) {
      path = std::max(path, (full.samples[k].z.q - canonical.samples[k].x.q).norm());
    }
    s.add("reduced_flow_matches_full_flow_q_path", 0, path, tol.get("cosphere.reduction"), "<=", sw.seconds());
  } catch (const std::exception& e) {
    s.fail("reduced_flow_representative_independence", 0, e);
  }

  try {
    CounterRng rng(7, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double alpha = std::exp(8.0 * rng.uniform() - 4.0);
      const CospherePoint a = project(z0, fe.field);
      const CospherePoint b = project(PhasePoint{z0.q, alpha * z0.p}, fe.field);
      worst = std::max({worst, (a.q - b.q).norm(), (a.direction - b.direction).norm()});
    }
    s.add("projection_invariant_under_momentum_scaling", 0, worst, 1e-12, "<=", 0.0);
  } catch (const std::exception& e) {
    s.fail("projection_invariant_under_momentum_scaling", 0, e);
  }
  return s.finish();
}

// ---------------------------------------------------------------------------

double point_segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - x).norm();
}

// One-sided distance from the points of A to the polyline B. The search is
// restricted to a window of segments around the matching index, which can
// only overestimate the true distance.
double directed_distance(const std::vector<Vec3>& A, const std::vector<Vec3>& B, std::size_t window) {
  double worst = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    const std::size_t centre = i * (B.size() - 1) / std::max<std::size_t>(1, A.size() - 1);
    const std::size_t lo = centre > window ? centre - window : 0;
    const std::size_t hi = std::min(B.size() - 1, centre + window);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = lo; k < hi; ++k) best = std::min(best, point_segment_distance(A[i], B[k], B[k + 1]));
    worst = std::max(worst, best);
  }
  return worst;
}

SuiteReport fermat_suite(const ValidationTolerances& tol) {
  Suite s("fermat");
  const Fisheye fe;
  const PhasePoint z0 = fe.launch();
  try {
    Stopwatch sw;
    const double dt = fe.period * 1e-4;
    const FlowResult ray = flow(fe.field, midpoint(dt), z0, fe.period);
    const double closure = phase_distance(ray.final_sample().z, z0);

    const Vec3 v0 = vector_field(fe.field, z0).q_dot;
    const auto geo = fermat_geodesic(fe.field, z0.q, v0, fe.period, dt);
    std::vector<Vec3> a, b;
    for (const auto& smp : ray.samples) a.push_back(smp.z.q);
    for (const auto& g : geo) b.push_back(g.q);
    const double hausdorff = std::max(directed_distance(a, b, 64), directed_distance(b, a, 64));
    const double secs = sw.seconds();
    s.add("fisheye_ray_closure_one_period", 5, closure, tol.get("fermat.closure"), "<=", secs,
          "max(|q(T) - q(0)|, |p(T) - p(0)|), midpoint dt = period*1e-4");
    s.add("geodesic_vs_ray_hausdorff_distance", 5, hausdorff, tol.get("fermat.hausdorff"), "<=", secs,
          "optical-metric geodesic (8th order) vs Hamiltonian ray (midpoint)");
    s.add("fermat_runtime_seconds", 5, secs, tol.get("runtime.fermat"), "<=", secs);

    // The ray from (0.5, 0, 0) along y is the circle with centre (-0.75, 0, 0) and radius 1.25.
    const Vec3 centre(-0.75, 0.0, 0.0);
    double dev = 0.0;
    for (const auto& q : a) dev = std::max({dev, std::abs((q - centre).norm() - 1.25), std::abs(q.z())});
    s.add("fisheye_ray_on_analytic_circle", 0, dev, tol.get("fermat.closure"), "<=", secs);
  } catch (const std::exception& e) {
    s.fail("fisheye_ray_closure_one_period", 5, e);
  }
  return s.finish();
}

// ---------------------------------------------------------------------------

SuiteReport measure_suite(const ValidationTolerances& tol) {
  Suite s("measure");
  Stopwatch total;
  const double sigmas = tol.get("measure.sigmas");
  const RefractiveIndexField vacuum =
      RefractiveIndexField::homogeneous(1.0, Box{Vec3::Constant(-3.0), Vec3::Constant(3.0)});

  // Cosine law for a collimated beam along z through tilted unit patches.
  try {
    Stopwatch sw;
    ProductDensity beam;
    beam.spatial = UniformSpatial{1.0};
    beam.directions = VonMisesFisherDirections{Vec3::UnitZ(), 1000.0};
    beam.shell = MomentumShell{1.0, 1.1};
    const TimeDensity L = stationary(beam.as_analytic("collimated_beam"));
    EstimatorSpec spec;
    spec.n_time = 1;
    spec.n_area = 1;
    spec.n_polar = 128;
    spec.radial = FiberQuadratureSpec{1, 4, 1.0, 1.1};
    const auto flux_at = [&](double degrees) {
      const double th = degrees * kPi / 180.0;
      const Vec3 e1 = Vec3::UnitX();
      const Vec3 e2(0.0, std::cos(th), std::sin(th));
      const Surface patch(fmt::format("patch_{}", degrees), RectangleShape{-0.5 * (e1 + e2), e1, e2});
      return measure_energy(vacuum, L, patch, 0.0, 1.0, spec).E;
    };
    const double e0 = flux_at(0.0);
    const double r60 = flux_at(60.0) / e0;
    s.add("cosine_law_ratio_60deg", 6, std::abs(r60 - 0.5), tol.get("measure.cosine"), "<=", sw.seconds(),
          fmt::format("E(60)/E(0) = {:.9f}", r60));
    for (double deg : {30.0, 75.0}) {
      const double r = flux_at(deg) / e0;
      s.add(fmt::format("cosine_law_ratio_{:.0f}deg", deg), 0, std::abs(r - std::cos(deg * kPi / 180.0)),
            tol.get("measure.cosine"), "<=", sw.seconds(), fmt::format("ratio {:.9f}", r));
    }
  } catch (const std::exception& e) {
    s.fail("cosine_law_ratio_60deg", 6, e);
  }

  const IntegratorConfig free_rk4 = config(Scheme::rk4, 0.25);

  // Isotropic burst counted on concentric spheres.
  try {
    Stopwatch sw;
    ProductDensity burst;
    burst.spatial = GaussianSpatial{Vec3::Zero(), 0.05};
    burst.shell = MomentumShell{1.0, 1.2};
    const Ensemble e = sample_ensemble(burst, 100000, 424242);
    const MeasurementResult m1 =
        measure_ensemble_crossings(vacuum, free_rk4, e, Surface("sphere_r1", SphereShape{Vec3::Zero(), 1.0}), 0.0, 3.0);
    const MeasurementResult m2 =
        measure_ensemble_crossings(vacuum, free_rk4, e, Surface("sphere_r2", SphereShape{Vec3::Zero(), 2.0}), 0.0, 3.0);
    const double band = sigmas * std::hypot(m1.stddev, m2.stddev);
    s.add("concentric_sphere_particle_flux_difference", 6, std::abs(m1.E - m2.E), band, "<=", sw.seconds(),
          fmt::format("E(r=1) = {:.17g} +- {:.3g}, E(r=2) = {:.17g} +- {:.3g}, 1e5 particles", m1.E, m1.stddev, m2.E,
                      m2.stddev));
    const double emitted = e.total_energy();
    s.add("sphere_flux_equals_emitted_energy", 0, std::abs(m2.E - emitted), sigmas * m2.stddev, "<=", sw.seconds(),
          fmt::format("emitted {:.17g}", emitted));
  } catch (const std::exception& e) {
    s.fail("concentric_sphere_particle_flux_difference", 6, e);
  }

  // Stationary bright sphere measured by Monte Carlo on concentric spheres.
  try {
    Stopwatch sw;
    SphereSourceDensity src;
    src.radius = 0.1;
    src.radiance = 1.0;
    src.shell = MomentumShell{1.0, 1.1};
    EstimatorSpec spec;
    spec.kind = EstimatorSpec::Kind::monte_carlo;
    spec.mc_samples = 100000;
    spec.radial = FiberQuadratureSpec{1, 4, 1.0, 1.1};
    const TimeDensity L = stationary(src.as_analytic());
    spec.seed = 11;
    const MeasurementResult a = measure_energy(vacuum, L, Surface("sphere_r1", SphereShape{Vec3::Zero(), 1.0}), 0.0,
                                               1.0, spec);
    spec.seed = 12;
    const MeasurementResult b = measure_energy(vacuum, L, Surface("sphere_r2", SphereShape{Vec3::Zero(), 2.0}), 0.0,
                                               1.0, spec);
    s.add("concentric_sphere_monte_carlo_flux_difference", 6, std::abs(a.E - b.E), sigmas * std::hypot(a.stddev, b.stddev),
          "<=", sw.seconds(),
          fmt::format("E(r=1) = {:.6g} +- {:.3g}, E(r=2) = {:.6g} +- {:.3g}", a.E, a.stddev, b.E, b.stddev));
    const double exact = src.flux(1.0, 1.0);
    s.add("sphere_source_flux_vs_closed_form", 0, std::abs(b.E - exact), sigmas * b.stddev, "<=", sw.seconds(),
          fmt::format("closed form {:.6g}", exact));
  } catch (const std::exception& e) {
    s.fail("concentric_sphere_monte_carlo_flux_difference", 6, e);
  }

  // Quadrature of the transported density against particle counting.
  try {
    Stopwatch sw;
    ProductDensity blob;
    blob.spatial = GaussianSpatial{Vec3::Zero(), 0.2};
    blob.shell = MomentumShell{1.0, 1.2};
    const Ensemble e = sample_ensemble(blob, 100000, 777);
    const Surface sphere("sphere_r1", SphereShape{Vec3::Zero(), 1.0});
    const MeasurementResult particles =
        measure_ensemble_crossings(vacuum, config(Scheme::rk4, 0.1), e, sphere, 0.5, 1.0);
    EstimatorSpec spec;
    spec.n_time = 8;
    spec.n_area = 4;
    spec.n_polar = 32;
    spec.radial = FiberQuadratureSpec{1, 2, 1.0, 1.2};
    const IntegratorConfig one_step = config(Scheme::rk4, 10.0);
    const MeasurementResult quad =
        measure_energy(vacuum, transported(vacuum, one_step, blob.as_analytic("gaussian_burst")), sphere, 0.5, 1.0, spec);
    s.add("quadrature_vs_particle_estimator", 6, std::abs(quad.E - particles.E), sigmas * particles.stddev, "<=",
          sw.seconds(),
          fmt::format("quadrature {:.9g}, particles {:.9g} +- {:.3g}", quad.E, particles.E, particles.stddev));
  } catch (const std::exception& e) {
    s.fail("quadrature_vs_particle_estimator", 6, e);
  }

  const double secs = total.seconds();
  s.add("measure_runtime_seconds", 6, secs, tol.get("runtime.measure"), "<=", secs);
  return s.finish();
}

// ---------------------------------------------------------------------------

SuiteReport wigner_suite(const ValidationTolerances& tol) {
  Suite s("wigner");
  Stopwatch total;
  WkbSpec spec;
  spec.n = 4096;
  spec.q_min = -2.0;
  spec.q_max = 2.0;
  const double sigma = 0.1, k0 = 0.5, centre = -1.0;
  spec.amplitude = [=](double q) { return Complex(std::exp(-(q - centre) * (q - centre) / (2.0 * sigma * sigma))); };
  spec.phase = [=](double q) { return k0 * q; };
  spec.phase_derivative = [=](double) { return k0; };

  try {
    Stopwatch sw;
    const SampledField1D f = wkb_field(spec, 1e-2);
    const WignerGrid W = discrete_wigner(f);
    const std::vector<double> marg = marginal_position(W);
    double err = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) err = std::max(err, std::abs(marg[j] - std::norm(f.u[j])));
    s.add("marginal_identity_max_error", 7, err, tol.get("wigner.marginal"), "<=", sw.seconds(),
          "Gaussian packet, N = 4096, eps = 1e-2");
    s.add("wigner_imaginary_part_ratio", 0, W.max_imag_ratio, tol.get("wigner.realness"), "<=", sw.seconds());
    const double mass = f.mass();
    const double total_w = pairwise_sum(W.values) * W.dq * W.dp;
    s.add("wigner_parseval_relative_error", 0, std::abs(total_w - mass) / mass, tol.get("wigner.parseval"), "<=",
          sw.seconds());
  } catch (const std::exception& e) {
    s.fail("marginal_identity_max_error", 7, e);
  }

  try {
    Stopwatch sw;
    const std::vector<ConvergenceRow> rows = compare_liouville(spec, {4e-2, 2e-2, 1e-2}, 1.0);
    bool decreasing = true;
    double min_ratio = std::numeric_limits<double>::infinity();
    std::string detail = "L1 distances:";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail += fmt::format(" eps={:g}: {:.6e}", rows[i].eps, rows[i].L1_distance);
      if (i > 0) {
        decreasing = decreasing && rows[i].L1_distance < rows[i - 1].L1_distance;
        min_ratio = std::min(min_ratio, rows[i - 1].L1_distance / rows[i].L1_distance);
      }
    }
    s.add("liouville_distance_strictly_decreasing", 7, decreasing ? 1.0 : 0.0, 1.0, "==", sw.seconds(), detail);
    s.add("liouville_distance_min_adjacent_ratio", 7, min_ratio, tol.get("wigner.ladder_ratio"), ">=", sw.seconds(),
          detail);
  } catch (const std::exception& e) {
    s.fail("liouville_distance_min_adjacent_ratio", 7, e);
  }
  const double secs = total.seconds();
  s.add("wigner_runtime_seconds", 7, secs, tol.get("runtime.wigner"), "<=", secs);
  return s.finish();
}

}  // namespace

std::vector<SuiteReport> run_suite(const std::string& name, const ValidationTolerances& tolerances) {
  if (!is_suite_name(name)) throw Error(ErrorCode::invalid_argument, "unknown validation suite '" + name + "'");
  std::vector<SuiteReport> out;
  const auto want = [&](const char* s) { return name == "all" || name == s; };
  if (want("symplectic")) out.push_back(symplectic_suite(tolerances));
  if (want("conservation")) out.push_back(conservation_suite(tolerances));
  if (want("cosphere")) out.push_back(cosphere_suite(tolerances));
  if (want("fermat")) out.push_back(fermat_suite(tolerances));
  if (want("measure")) out.push_back(measure_suite(tolerances));
  if (want("wigner")) out.push_back(wigner_suite(tolerances));
  return out;
}

std::vector<CriterionStatus> criterion_summary(const std::vector<SuiteReport>& reports) {
  static const char* titles[] = {
      "",
      "symplecticity of the midpoint flow in the fish-eye over one period",
      "frequency conservation over 1e5 midpoint steps, rk4 drifting more",
      "momentum-scaling equivariance of the flow",
      "Liouville invariance of the density and of total energy",
      "fish-eye closure and the Fermat geodesic correspondence",
      "flux laws of the measurement functionals",
      "Wigner marginal identity and semiclassical convergence ladder",
      "field Hamiltonian conservation over one fish-eye period",
  };
  std::vector<CriterionStatus> out;
  for (int c = 1; c <= 8; ++c) {
    CriterionStatus st;
    st.criterion = c;
    st.title = titles[c];
    for (const auto& r : reports) {
      for (const auto& chk : r.checks) {
        if (chk.criterion == c) st.checks.push_back(&chk);
      }
    }
    st.pass = !st.checks.empty() &&
              std::all_of(st.checks.begin(), st.checks.end(), [](const CheckResult* k) { return k->pass; });
    if (!st.checks.empty()) out.push_back(std::move(st));
  }
  return out;
}

}  // namespace helios
