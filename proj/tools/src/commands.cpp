#include "helios/cli/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include "helios/cli/manifest.hpp"
#include "helios/cli/scenario.hpp"
#include "helios/cli/svg.hpp"
#include "helios/cosphere.hpp"
#include "helios/error.hpp"
#include "helios/hamiltonian.hpp"
#include "helios/transport.hpp"
#include "helios/validation.hpp"
#include "json.hpp"

namespace helios::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

/// A failure that already knows its exit code and message.
class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::non_power_of_two:
    case ErrorCode::unsupported_profile:
    case ErrorCode::degenerate_surface:
    case ErrorCode::non_positive_index:
    case ErrorCode::non_unit_direction:
    case ErrorCode::non_positive_frequency:
    case ErrorCode::resolution:
      return kUsage;
    default:
      return kNumerical;
  }
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

// NaN and infinities have no JSON spelling.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string config_hash(const std::string& canonical, const RunOptions& options) {
  std::string text = canonical;
  if (options.seed) text += fmt::format("\nseed={}", *options.seed);
  return sha1_hex(text);
}

OutputSet::Provenance provenance(const std::string& command, const Scenario& sc, const RunOptions& options) {
  return {command, config_hash(sc.canonical, options), sc.inputs};
}

template <typename Body>
void parallel_indexed(std::size_t n, Body&& body, std::vector<std::exception_ptr>& errors) {
  errors.assign(n, nullptr);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
}

[[noreturn]] void rethrow_labelled(const std::exception_ptr& error, const std::string& label) {
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    throw CommandError(exit_code_for(e.code()), label + ": " + e.what());
  } catch (const std::exception& e) {
    throw CommandError(kNumerical, label + ": " + e.what());
  }
}

std::string ensemble_xy_svg(const Ensemble& before, const Ensemble& after) {
  auto series = [](const Ensemble& e, const std::string& label) {
    PlotSeries s{label, {}, {}, true};
    const std::size_t stride = std::max<std::size_t>(1, e.particles.size() / 4000);
    for (std::size_t i = 0; i < e.particles.size(); i += stride) {
      s.x.push_back(e.particles[i].z.q.x());
      s.y.push_back(e.particles[i].z.q.y());
    }
    return s;
  };
  return render_plot({"ensemble positions (x-y)", "x", "y", false, false, true},
                     {series(before, fmt::format("t = {:g}", before.t)), series(after, fmt::format("t = {:g}", after.t))});
}

}  // namespace

int cmd_trace(const std::filesystem::path& path, const RunOptions& options) {
  const Scenario sc = load_scenario(path);
  const RefractiveIndexField& field = sc.field();
  if (sc.rays.empty()) throw SchemaError("trace needs at least one entry in 'rays'");
  if (!(sc.duration > 0.0)) throw SchemaError("trace needs a positive 'duration'");

  std::vector<FlowResult> flows(sc.rays.size());
  std::vector<std::exception_ptr> errors;
  parallel_indexed(
      sc.rays.size(),
      [&](std::size_t i) {
        const RaySpec& r = sc.rays[i];
        const PhasePoint z0{r.q0, wave_vector_from_direction(field, r.q0, r.direction, r.omega)};
        flows[i] = flow(field, sc.integrator, z0, sc.duration, {sc.record_stride});
      },
      errors);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) rethrow_labelled(errors[i], fmt::format("ray '{}'", sc.rays[i].id));
  }

  OutputSet out;
  ordered_json summary;
  summary["scenario"] = sc.name;
  summary["scheme"] = to_string(sc.integrator.scheme);
  summary["dt"] = sc.integrator.dt;
  summary["duration"] = sc.duration;
  summary["rays"] = ordered_json::array();
  std::vector<PlotSeries> plot;
  for (std::size_t i = 0; i < sc.rays.size(); ++i) {
    const FlowResult& f = flows[i];
    if (sc.wants("trajectories")) {
      std::string csv = "t,qx,qy,qz,px,py,pz,H\n";
      for (const RaySample& s : f.samples) {
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", g17(s.t), g17(s.z.q.x()), g17(s.z.q.y()), g17(s.z.q.z()),
                           g17(s.z.p.x()), g17(s.z.p.y()), g17(s.z.p.z()), g17(s.H));
      }
      out.add_text(fmt::format("trajectory_{}.csv", sc.rays[i].id), std::move(csv));
    }
    const RaySample& first = f.samples.front();
    const RaySample& last = f.final_sample();
    ordered_json ray;
    ray["id"] = sc.rays[i].id;
    ray["steps"] = f.steps_taken;
    ray["samples"] = f.samples.size();
    ray["t_final"] = last.t;
    ray["max_relative_H_drift"] = number(f.max_relative_drift());
    ray["closure_q"] = number((last.z.q - first.z.q).norm());
    ray["closure_p"] = number((last.z.p - first.z.p).norm());
    ray["max_newton_iterations"] = f.max_newton_iters_seen;
    if (f.exit_event) {
      ray["exit"] = {{"t", f.exit_event->t}, {"face", to_string(f.exit_event->face)}};
    } else {
      ray["exit"] = nullptr;
    }
    summary["rays"].push_back(std::move(ray));
    PlotSeries s{sc.rays[i].id, {}, {}, false};
    for (const RaySample& r : f.samples) {
      s.x.push_back(r.z.q.x());
      s.y.push_back(r.z.q.y());
    }
    plot.push_back(std::move(s));
  }
  if (sc.wants("summary")) out.add_text("trace_summary.json", summary.dump(2) + "\n");
  if (options.plot) out.add_text("trajectories.svg", render_plot({"ray paths (x-y)", "x", "y", false, false, true}, plot));
  out.commit(options.out_dir, provenance("trace", sc, options));
  return kOk;
}

int cmd_transport(const std::filesystem::path& path, const RunOptions& options) {
  const Scenario sc = load_scenario(path);
  const RefractiveIndexField& field = sc.field();
  if (!sc.ensemble) throw SchemaError("transport needs an 'ensemble'");
  const ProductDensity& density = *sc.ensemble->density.product();
  const std::uint64_t seed = options.seed.value_or(sc.ensemble->seed);

  const Ensemble initial = sample_ensemble(density, sc.ensemble->n_particles, seed);
  TransportOptions topts;
  topts.reference = density.as_analytic();
  TransportResult result;
  try {
    result = transport_ensemble(field, sc.integrator, initial, sc.duration, topts);
  } catch (const Error& e) {
    throw CommandError(exit_code_for(e.code()), e.what());
  }
  const TransportReport& r = result.report;
  const double h_before = field_hamiltonian(field, initial);
  double h_after = 0.0;
  {
    Ensemble inside = result.ensemble;
    std::erase_if(inside.particles, [](const Particle& p) { return p.exited; });
    h_after = inside.particles.empty() ? 0.0 : field_hamiltonian(field, inside);
  }

  OutputSet out;
  if (sc.wants("ensemble")) {
    out.add_file("ensemble_initial.csv", [initial](const std::filesystem::path& p) { write_ensemble_csv(initial, p); });
    out.add_file("ensemble_final.csv",
                 [fin = result.ensemble](const std::filesystem::path& p) { write_ensemble_csv(fin, p); });
  }
  if (sc.wants("report")) {
    ordered_json j;
    j["scenario"] = sc.name;
    j["n_particles"] = initial.particles.size();
    j["seed"] = seed;
    j["duration"] = sc.duration;
    j["scheme"] = to_string(sc.integrator.scheme);
    j["dt"] = sc.integrator.dt;
    j["total_energy_before"] = number(r.total_energy_before);
    j["total_energy_after"] = number(r.total_energy_after);
    j["escaped_energy"] = number(r.escaped_energy);
    j["escaped_particles"] = r.escaped_particles;
    j["casimir_samples"] = r.casimir_samples.size();
    j["max_casimir_drift"] = number(r.max_casimir_drift);
    j["field_hamiltonian_before"] = number(h_before);
    j["field_hamiltonian_after_inside"] = number(h_after);
    out.add_text("transport_report.json", j.dump(2) + "\n");
  }
  if (options.plot) out.add_text("ensemble.svg", ensemble_xy_svg(initial, result.ensemble));
  out.commit(options.out_dir, provenance("transport", sc, options));
  return kOk;
}

int cmd_measure(const std::filesystem::path& path, const RunOptions& options) {
  const Scenario sc = load_scenario(path);
  const RefractiveIndexField& field = sc.field();
  if (!sc.measure) throw SchemaError("measure needs a 'measure' section");
  if (sc.surfaces.empty()) throw SchemaError("measure needs at least one entry in 'surfaces'");
  const MeasureSpec& m = *sc.measure;

  std::vector<MeasurementResult> results;
  try {
    if (m.estimator == MeasureSpec::Estimator::particles) {
      if (!sc.ensemble) throw SchemaError("the particles estimator needs an 'ensemble'");
      const Ensemble ens = sample_ensemble(*sc.ensemble->density.product(), sc.ensemble->n_particles,
                                           options.seed.value_or(sc.ensemble->seed));
      for (const Surface& s : sc.surfaces) {
        results.push_back(measure_ensemble_crossings(field, sc.integrator, ens, s, m.t1, m.t2, m.hemisphere));
      }
    } else {
      const AnalyticDensity d = m.density->analytic();
      const TimeDensity td = m.transported ? transported(field, sc.integrator, d) : stationary(d);
      EstimatorSpec spec = m.settings;
      if (options.seed) spec.seed = *options.seed;
      for (const Surface& s : sc.surfaces) results.push_back(measure_energy(field, td, s, m.t1, m.t2, spec));
    }
  } catch (const Error& e) {
    throw CommandError(exit_code_for(e.code()), e.what());
  }

  std::string csv = "surface_id,t1,t2,E,stddev,samples\n";
  for (const auto& r : results) {
    if (!r.warning.empty()) std::cerr << fmt::format("warning: surface '{}': {}\n", r.surface_id, r.warning);
    csv += fmt::format("{},{},{},{},{},{}\n", r.surface_id, g17(r.t1), g17(r.t2), g17(r.E), g17(r.stddev),
                       r.samples_used);
  }
  OutputSet out;
  if (sc.wants("measurements")) out.add_text("measurements.csv", std::move(csv));
  out.commit(options.out_dir, provenance("measure", sc, options));
  return kOk;
}

int cmd_wigner(const std::filesystem::path& path, const RunOptions& options) {
  const Scenario sc = load_scenario(path);
  if (!sc.wigner) throw SchemaError("wigner needs a 'wigner' section");
  const WignerScenario& w = *sc.wigner;
  std::vector<ConvergenceRow> rows;
  try {
    rows = compare_liouville(w.wkb(), w.eps_ladder, w.T);
  } catch (const Error& e) {
    throw CommandError(exit_code_for(e.code()), e.what());
  }

  std::string csv = "eps,T,L1_distance,mass\n";
  ordered_json summary;
  summary["scenario"] = sc.name;
  summary["n"] = w.n;
  summary["rows"] = ordered_json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv += fmt::format("{},{},{},{}\n", g17(r.eps), g17(r.T), g17(r.L1_distance), g17(r.mass));
    ordered_json row{{"eps", r.eps}, {"L1_distance", number(r.L1_distance)}, {"mass", number(r.mass)}};
    if (i > 0) {
      row["ratio_to_previous"] = number(rows[i - 1].L1_distance / r.L1_distance);
      monotone = monotone && r.L1_distance < rows[i - 1].L1_distance;
    }
    summary["rows"].push_back(std::move(row));
  }
  summary["strictly_decreasing"] = monotone;

  OutputSet out;
  if (sc.wants("convergence")) out.add_text("convergence.csv", std::move(csv));
  if (sc.wants("summary")) out.add_text("wigner_summary.json", summary.dump(2) + "\n");
  if (options.plot) {
    PlotSeries s{"L1 distance", {}, {}, false};
    for (const auto& r : rows) {
      s.x.push_back(r.eps);
      s.y.push_back(r.L1_distance);
    }
    PlotSeries pts = s;
    pts.label = "rungs";
    pts.markers = true;
    out.add_text("convergence.svg",
                 render_plot({"wave vs Liouville transport", "eps", "L1 distance", true, true, false}, {s, pts}));
  }
  out.commit(options.out_dir, provenance("wigner", sc, options));
  return kOk;
}

int cmd_validate(const std::string& suite, const RunOptions& options) {
  if (!is_suite_name(suite)) {
    std::string names;
    for (const auto& n : suite_names()) names += n + ", ";
    throw CommandError(kUsage, fmt::format("unknown suite '{}' (expected one of {}all)", suite, names));
  }
  ValidationTolerances tol;
  std::vector<std::filesystem::path> inputs;
  std::string overrides;
  if (options.tolerances) {
    std::ifstream in(*options.tolerances);
    if (!in) throw SchemaError("cannot read tolerance file " + options.tolerances->string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed tolerance file: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("tolerance file must hold a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (!v.is_number()) throw SchemaError(fmt::format("tolerance '{}' must be a number", k));
      try {
        tol.set(k, v.get<double>());
      } catch (const Error& e) {
        throw SchemaError(e.what());
      }
    }
    inputs.push_back(*options.tolerances);
  }
  for (const auto& [k, v] : tol.values()) overrides += fmt::format("{}={}\n", k, g17(v));

  const std::vector<SuiteReport> reports = run_suite(suite, tol);

  ordered_json j;
  j["suite"] = suite;
  bool all_pass = true;
  double seconds = 0.0;
  j["suites"] = ordered_json::array();
  for (const auto& rep : reports) {
    ordered_json s;
    s["suite"] = rep.suite;
    s["pass"] = rep.pass();
    s["seconds"] = rep.seconds;
    s["checks"] = ordered_json::array();
    for (const auto& c : rep.checks) {
      s["checks"].push_back({{"name", c.name},
                             {"criterion", c.criterion},
                             {"value", number(c.value)},
                             {"comparison", c.comparison},
                             {"tolerance", number(c.tolerance)},
                             {"pass", c.pass},
                             {"seconds", c.seconds},
                             {"detail", c.detail}});
    }
    all_pass = all_pass && rep.pass();
    seconds += rep.seconds;
    j["suites"].push_back(std::move(s));
  }
  j["criteria"] = ordered_json::array();
  for (const auto& c : criterion_summary(reports)) {
    if (c.checks.empty()) continue;
    j["criteria"].push_back({{"criterion", c.criterion}, {"title", c.title}, {"pass", c.pass}});
  }
  j["pass"] = all_pass;
  j["seconds"] = seconds;

  for (const auto& rep : reports) {
    for (const auto& c : rep.checks) {
      std::cerr << fmt::format("[{}] {}/{}: {:.6g} {} {:.6g}\n", c.pass ? "PASS" : "FAIL", rep.suite, c.name,
                               c.value, c.comparison, c.tolerance);
    }
  }

  OutputSet out;
  out.add_text(fmt::format("validate_{}.json", suite), j.dump(2) + "\n");
  out.commit(options.out_dir, {"validate " + suite, sha1_hex(overrides), inputs});
  return all_pass ? kOk : kValidationFailure;
}

int run_command(const std::string& command, const std::string& argument, const RunOptions& options) {
  try {
    if (command == "trace") return cmd_trace(argument, options);
    if (command == "transport") return cmd_transport(argument, options);
    if (command == "measure") return cmd_measure(argument, options);
    if (command == "wigner") return cmd_wigner(argument, options);
    if (command == "validate") return cmd_validate(argument, options);
    std::cerr << fmt::format("error: unknown command '{}'\n", command);
    return kUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace helios::cli
