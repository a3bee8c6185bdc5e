#include "helios/cli/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "helios/error.hpp"
#include "json.hpp"

namespace helios::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

// View of a JSON object that knows its location in the document.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        fail(path_, fmt::format("unknown key '{}'", k));
      }
    }
  }

  bool has(const char* k) const { return j_.contains(k); }
  std::string at(const char* k) const { return path_.empty() ? k : path_ + "." + k; }
  const std::string& path() const { return path_; }

  const json& raw(const char* k) const {
    if (!has(k)) fail(path_.empty() ? "<root>" : path_, fmt::format("missing required key '{}'", k));
    return j_.at(k);
  }

  double number(const char* k) const {
    const json& v = raw(k);
    if (!v.is_number()) fail(at(k), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(k), "expected a finite number");
    return x;
  }
  double number(const char* k, double def) const { return has(k) ? number(k) : def; }

  double positive(const char* k) const {
    const double x = number(k);
    if (!(x > 0.0)) fail(at(k), "must be positive");
    return x;
  }
  double positive(const char* k, double def) const { return has(k) ? positive(k) : def; }

  std::uint64_t count(const char* k) const {
    const json& v = raw(k);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(at(k), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const char* k, std::uint64_t def) const { return has(k) ? count(k) : def; }

  std::string string(const char* k) const {
    const json& v = raw(k);
    if (!v.is_string()) fail(at(k), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const char* k, const std::string& def) const { return has(k) ? string(k) : def; }

  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_boolean()) fail(at(k), "expected true or false");
    return v.get<bool>();
  }

  Vec3 vec3(const char* k) const {
    const json& v = raw(k);
    if (!v.is_array() || v.size() != 3) fail(at(k), "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(at(k), "expected an array of 3 numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }
  Vec3 vec3(const char* k, const Vec3& def) const { return has(k) ? vec3(k) : def; }

  std::vector<double> numbers(const char* k) const {
    const json& v = raw(k);
    if (!v.is_array()) fail(at(k), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(at(k), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Obj object(const char* k) const { return Obj(raw(k), at(k)); }

  const json& array(const char* k) const {
    const json& v = raw(k);
    if (!v.is_array()) fail(at(k), "expected an array");
    return v;
  }

 private:
  const json& j_;
  std::string path_;
};

std::pair<double, double> pair_of(const Obj& o, const char* k) {
  const std::vector<double> v = o.numbers(k);
  if (v.size() != 2) fail(o.at(k), "expected [lo, hi]");
  return {v[0], v[1]};
}

void check_identifier(const std::string& id, const std::string& path) {
  if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
      })) {
    fail(path, fmt::format("identifier '{}' must be nonempty and use only letters, digits, '_', '-', '.'", id));
  }
}

Box parse_domain(const Obj& o) {
  o.allow_only({"lo", "hi"});
  Box b{o.vec3("lo"), o.vec3("hi")};
  if (!((b.hi - b.lo).array() > 0.0).all()) fail(o.path(), "domain needs lo < hi on every axis");
  return b;
}

RefractiveIndexField parse_medium(const Obj& o, const std::filesystem::path& base, std::vector<std::filesystem::path>& inputs) {
  const std::string kind = o.string("kind");
  const double c = o.positive("c", 1.0);
  if (kind == "grid") {
    o.allow_only({"kind", "c", "raw", "header", "interpolation"});
    const std::string interp = o.string("interpolation", "cubic");
    if (interp != "cubic" && interp != "linear") fail(o.at("interpolation"), "expected 'cubic' or 'linear'");
    const auto raw = base / o.string("raw");
    const auto header = base / o.string("header");
    inputs.push_back(raw);
    inputs.push_back(header);
    try {
      return RefractiveIndexField::grid(
          load_grid_medium(raw, header, interp == "cubic" ? Interpolation::cubic : Interpolation::linear), c);
    } catch (const Error& e) {
      fail(o.path(), e.what());
    }
  }
  const Box domain = parse_domain(o.object("domain"));
  try {
    if (kind == "homogeneous") {
      o.allow_only({"kind", "c", "domain", "n0"});
      return RefractiveIndexField::homogeneous(o.positive("n0"), domain, c);
    }
    if (kind == "linear") {
      o.allow_only({"kind", "c", "domain", "n0", "gradient"});
      return RefractiveIndexField::linear(o.positive("n0"), o.vec3("gradient"), domain, c);
    }
    if (kind == "fisheye") {
      o.allow_only({"kind", "c", "domain", "n0", "radius"});
      return RefractiveIndexField::fisheye(o.positive("n0"), o.positive("radius"), domain, c);
    }
    if (kind == "parabolic_grin") {
      o.allow_only({"kind", "c", "domain", "n0", "kappa", "axis", "origin"});
      ParabolicGrinMedium m{o.positive("n0"), o.positive("kappa"), o.vec3("axis", Vec3::UnitZ()),
                            o.vec3("origin", Vec3::Zero())};
      return RefractiveIndexField(MediumKind(m), domain, c);
    }
  } catch (const Error& e) {
    fail(o.path(), e.what());
  }
  fail(o.at("kind"), fmt::format("unknown medium kind '{}'", kind));
}

IntegratorConfig parse_integrator(const Obj& o) {
  o.allow_only({"scheme", "dt", "newton_tol", "newton_max_iter"});
  IntegratorConfig cfg;
  try {
    cfg.scheme = parse_scheme(o.string("scheme", "implicit_midpoint"));
  } catch (const Error& e) {
    fail(o.at("scheme"), e.what());
  }
  cfg.dt = o.positive("dt", cfg.dt);
  cfg.newton_tol = o.positive("newton_tol", cfg.newton_tol);
  cfg.newton_max_iter = static_cast<int>(o.count("newton_max_iter", static_cast<std::uint64_t>(cfg.newton_max_iter)));
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(o.path(), e.what());
  }
  return cfg;
}

MomentumShell parse_shell(const Obj& o) {
  const auto [a, b] = pair_of(o, "shell");
  if (!(a >= 0.0) || !(b > a)) fail(o.at("shell"), "expected [p_min, p_max] with 0 <= p_min < p_max");
  return {a, b};
}

DensitySpec parse_density(const Obj& o) {
  const std::string name = o.string("name");
  DensitySpec d;
  if (name == "zero") {
    o.allow_only({"name"});
    d.model = ZeroDensity{};
  } else if (name == "product") {
    o.allow_only({"name", "spatial", "directions", "shell", "energy"});
    ProductDensity p;
    const Obj sp = o.object("spatial");
    const std::string sk = sp.string("kind");
    if (sk == "gaussian") {
      sp.allow_only({"kind", "center", "sigma"});
      p.spatial = GaussianSpatial{sp.vec3("center", Vec3::Zero()), sp.positive("sigma")};
    } else if (sk == "ball") {
      sp.allow_only({"kind", "center", "radius"});
      p.spatial = BallSpatial{sp.vec3("center", Vec3::Zero()), sp.positive("radius")};
    } else if (sk == "uniform") {
      sp.allow_only({"kind", "value"});
      p.spatial = UniformSpatial{sp.number("value", 1.0)};
    } else {
      fail(sp.at("kind"), fmt::format("unknown spatial profile '{}'", sk));
    }
    if (o.has("directions")) {
      const Obj dir = o.object("directions");
      const std::string dk = dir.string("kind");
      if (dk == "isotropic") {
        dir.allow_only({"kind"});
        p.directions = IsotropicDirections{};
      } else if (dk == "vmf") {
        dir.allow_only({"kind", "mean", "kappa"});
        p.directions = VonMisesFisherDirections{dir.vec3("mean"), dir.positive("kappa")};
      } else {
        fail(dir.at("kind"), fmt::format("unknown direction profile '{}'", dk));
      }
    }
    p.shell = parse_shell(o);
    p.energy = o.number("energy", 1.0);
    try {
      p.validate();
    } catch (const Error& e) {
      fail(o.path(), e.what());
    }
    d.model = p;
  } else if (name == "sphere_source") {
    o.allow_only({"name", "center", "radius", "radiance", "shell"});
    SphereSourceDensity s;
    s.center = o.vec3("center", Vec3::Zero());
    s.radius = o.positive("radius");
    s.radiance = o.number("radiance", 1.0);
    if (s.radiance < 0.0) fail(o.at("radiance"), "must be nonnegative");
    s.shell = parse_shell(o);
    d.model = s;
  } else {
    fail(o.at("name"), fmt::format("unknown density '{}'", name));
  }
  return d;
}

Surface parse_surface(const Obj& o) {
  const std::string id = o.string("id");
  check_identifier(id, o.at("id"));
  const std::string kind = o.string("kind");
  try {
    if (kind == "rectangle") {
      o.allow_only({"id", "kind", "origin", "edge1", "edge2"});
      return Surface(id, RectangleShape{o.vec3("origin"), o.vec3("edge1"), o.vec3("edge2")});
    }
    if (kind == "disc") {
      o.allow_only({"id", "kind", "center", "normal", "radius"});
      return Surface(id, DiscShape{o.vec3("center"), o.vec3("normal"), o.positive("radius")});
    }
    if (kind == "sphere") {
      o.allow_only({"id", "kind", "center", "radius"});
      return Surface(id, SphereShape{o.vec3("center", Vec3::Zero()), o.positive("radius")});
    }
  } catch (const Error& e) {
    fail(o.path(), e.what());
  }
  fail(o.at("kind"), fmt::format("unknown surface kind '{}'", kind));
}

MeasureSpec parse_measure(const Obj& o) {
  o.allow_only({"window", "estimator", "hemisphere", "transported", "density", "n_time", "n_area", "n_polar", "radial",
                "mc_samples", "seed"});
  MeasureSpec m;
  std::tie(m.t1, m.t2) = pair_of(o, "window");
  if (!(m.t2 > m.t1)) fail(o.at("window"), "expected [t1, t2] with t2 > t1");
  const std::string est = o.string("estimator", "quadrature");
  if (est == "particles") {
    m.estimator = MeasureSpec::Estimator::particles;
  } else if (est == "quadrature") {
    m.estimator = MeasureSpec::Estimator::quadrature;
  } else if (est == "monte_carlo") {
    m.estimator = MeasureSpec::Estimator::monte_carlo;
  } else {
    fail(o.at("estimator"), fmt::format("unknown estimator '{}'", est));
  }
  try {
    m.hemisphere = parse_hemisphere(o.string("hemisphere", "along_normal"));
  } catch (const Error& e) {
    fail(o.at("hemisphere"), e.what());
  }
  m.transported = o.boolean("transported", false);
  if (o.has("density")) m.density = parse_density(o.object("density"));
  EstimatorSpec& s = m.settings;
  s.kind = m.estimator == MeasureSpec::Estimator::monte_carlo ? EstimatorSpec::Kind::monte_carlo
                                                                : EstimatorSpec::Kind::quadrature;
  s.hemisphere = m.hemisphere;
  s.n_time = static_cast<int>(o.count("n_time", 4));
  s.n_area = static_cast<int>(o.count("n_area", 8));
  s.n_polar = static_cast<int>(o.count("n_polar", 16));
  if (o.has("radial")) {
    const Obj r = o.object("radial");
    r.allow_only({"n_rad", "p_min", "p_max"});
    s.radial.n_rad = static_cast<int>(r.count("n_rad", 8));
    s.radial.p_min = r.number("p_min", 0.0);
    s.radial.p_max = r.positive("p_max");
  }
  s.mc_samples = o.count("mc_samples", s.mc_samples);
  s.seed = o.count("seed", s.seed);
  try {
    s.validate();
  } catch (const Error& e) {
    fail(o.path(), e.what());
  }
  if (m.estimator != MeasureSpec::Estimator::particles && !m.density) {
    fail(o.path(), "quadrature and monte_carlo estimators need a 'density'");
  }
  return m;
}

WignerScenario parse_wigner(const Obj& o) {
  o.allow_only({"n", "q_min", "q_max", "profile", "packet", "eps_ladder", "T"});
  WignerScenario w;
  w.n = o.count("n", w.n);
  w.q_min = o.number("q_min", w.q_min);
  w.q_max = o.number("q_max", w.q_max);
  if (!(w.q_max > w.q_min)) fail(o.path(), "needs q_max > q_min");
  if (o.has("profile")) {
    const Obj p = o.object("profile");
    p.allow_only({"kind", "n0", "gradient", "c"});
    const std::string k = p.string("kind", "homogeneous");
    if (k == "homogeneous") {
      w.profile.kind = IndexProfile1D::Kind::homogeneous;
    } else if (k == "linear") {
      w.profile.kind = IndexProfile1D::Kind::linear;
    } else {
      fail(p.at("kind"), fmt::format("unsupported 1-D profile '{}'", k));
    }
    w.profile.n0 = p.positive("n0", 1.0);
    w.profile.gradient = p.number("gradient", 0.0);
    w.profile.c = p.positive("c", 1.0);
  }
  if (o.has("packet")) {
    const Obj p = o.object("packet");
    p.allow_only({"center", "sigma", "k0", "curvature"});
    w.center = p.number("center", w.center);
    w.sigma = p.positive("sigma", w.sigma);
    w.k0 = p.number("k0", w.k0);
    w.curvature = p.number("curvature", w.curvature);
  }
  if (o.has("eps_ladder")) {
    w.eps_ladder = o.numbers("eps_ladder");
    if (w.eps_ladder.empty() ||
        std::any_of(w.eps_ladder.begin(), w.eps_ladder.end(), [](double e) { return !(e > 0.0); })) {
      fail(o.at("eps_ladder"), "expected a nonempty list of positive numbers");
    }
  }
  w.T = o.number("T", w.T);
  if (!(w.T >= 0.0)) fail(o.at("T"), "must be nonnegative");
  return w;
}

}  // namespace

std::string DensitySpec::name() const {
  if (std::holds_alternative<ProductDensity>(model)) return "product";
  if (std::holds_alternative<SphereSourceDensity>(model)) return "sphere_source";
  return "zero";
}

AnalyticDensity DensitySpec::analytic() const {
  if (const auto* p = std::get_if<ProductDensity>(&model)) return p->as_analytic();
  if (const auto* s = std::get_if<SphereSourceDensity>(&model)) return s->as_analytic();
  return zero_density();
}

WkbSpec WignerScenario::wkb() const {
  WkbSpec spec;
  spec.n = n;
  spec.q_min = q_min;
  spec.q_max = q_max;
  spec.profile = profile;
  const double c0 = center, s = sigma, k = k0, b = curvature;
  spec.amplitude = [c0, s](double q) { return Complex(std::exp(-(q - c0) * (q - c0) / (2.0 * s * s))); };
  spec.phase = [k, b](double q) { return k * q + 0.5 * b * q * q; };
  spec.phase_derivative = [k, b](double q) { return k + b * q; };
  return spec;
}

bool Scenario::wants(const std::string& product) const {
  return outputs.empty() || std::find(outputs.begin(), outputs.end(), product) != outputs.end();
}

const RefractiveIndexField& Scenario::field() const {
  if (!medium) throw SchemaError("scenario has no 'medium'");
  return *medium;
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  const Obj root(doc, "");
  root.allow_only({"schema", "name", "medium", "integrator", "duration", "record_stride", "rays", "ensemble", "surfaces",
                   "measure", "wigner", "outputs"});
  Scenario sc;
  const json& version = root.raw("schema");
  if (!version.is_number_integer() || version.get<int>() != 1) fail("schema", "only schema version 1 is supported");
  sc.name = root.string("name", "scenario");
  if (root.has("medium")) sc.medium = parse_medium(root.object("medium"), base_dir, sc.inputs);
  if (root.has("integrator")) sc.integrator = parse_integrator(root.object("integrator"));
  sc.duration = root.number("duration", 0.0);
  if (sc.duration < 0.0) fail("duration", "must be nonnegative");
  sc.record_stride = root.count("record_stride", 1);

  if (root.has("rays")) {
    std::set<std::string> seen;
    const json& rays = root.array("rays");
    for (std::size_t i = 0; i < rays.size(); ++i) {
      const Obj r(rays[i], fmt::format("rays[{}]", i));
      r.allow_only({"id", "q0", "direction", "omega"});
      RaySpec ray;
      ray.id = r.string("id", fmt::format("ray{}", i));
      check_identifier(ray.id, r.at("id"));
      if (!seen.insert(ray.id).second) fail(r.at("id"), fmt::format("duplicate ray id '{}'", ray.id));
      ray.q0 = r.vec3("q0");
      ray.direction = r.vec3("direction");
      ray.omega = r.positive("omega", 1.0);
      sc.rays.push_back(ray);
    }
  }
  if (root.has("ensemble")) {
    const Obj e = root.object("ensemble");
    e.allow_only({"density", "n_particles", "seed"});
    EnsembleSpec ens;
    ens.density = parse_density(e.object("density"));
    const ProductDensity* p = ens.density.product();
    if (p == nullptr || !p->normalizable()) {
      fail(e.at("density"), "ensembles are sampled from a 'product' density with a gaussian or ball spatial profile");
    }
    ens.n_particles = e.count("n_particles");
    ens.seed = e.count("seed", 1);
    sc.ensemble = std::move(ens);
  }
  if (root.has("surfaces")) {
    std::set<std::string> seen;
    const json& arr = root.array("surfaces");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Surface s = parse_surface(Obj(arr[i], fmt::format("surfaces[{}]", i)));
      if (!seen.insert(s.id()).second) fail(fmt::format("surfaces[{}].id", i), "duplicate surface id");
      sc.surfaces.push_back(std::move(s));
    }
  }
  if (root.has("measure")) sc.measure = parse_measure(root.object("measure"));
  if (root.has("wigner")) sc.wigner = parse_wigner(root.object("wigner"));
  if (root.has("outputs")) {
    static const std::set<std::string> known{"trajectories", "summary", "ensemble", "report", "measurements",
                                             "convergence"};
    for (const auto& v : root.array("outputs")) {
      if (!v.is_string() || known.count(v.get<std::string>()) == 0) {
        fail("outputs", fmt::format("unknown output product {}", v.dump()));
      }
      sc.outputs.push_back(v.get<std::string>());
    }
  }
  sc.canonical = doc.dump();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str(), path.parent_path());
  sc.inputs.insert(sc.inputs.begin(), path);
  return sc;
}

}  // namespace helios::cli
