#include "helios/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>
#include <fmt/format.h>

#include "helios/error.hpp"

namespace helios {
namespace {

using State = std::array<double, 6>;

State to_state(const PhasePoint& z) { return {z.q.x(), z.q.y(), z.q.z(), z.p.x(), z.p.y(), z.p.z()}; }
PhasePoint from_state(const State& s) { return {Vec3(s[0], s[1], s[2]), Vec3(s[3], s[4], s[5])}; }

struct OdeSystem {
  const RefractiveIndexField& field;
  Branch branch;
  void operator()(const State& x, State& dxdt, double /*t*/) const {
    const Vec6 v = vector_field(field, from_state(x), branch).packed();
    for (int i = 0; i < 6; ++i) dxdt[i] = v[i];
  }
};

StepInfo midpoint_step(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z,
                       double h) {
  const Vec6 z0 = z.packed();
  const double tol = cfg.newton_tol * std::max(1.0, z0.lpNorm<Eigen::Infinity>());
  Vec6 z1 = z0 + h * vector_field(field, z, cfg.branch).packed();
  bool damped = false;
  for (int iter = 0; iter <= cfg.newton_max_iter; ++iter) {
    const PhasePoint mid = PhasePoint::unpack(0.5 * (z0 + z1));
    const Vec6 residual = z1 - z0 - h * vector_field(field, mid, cfg.branch).packed();
    if (residual.lpNorm<Eigen::Infinity>() <= tol) return {PhasePoint::unpack(z1), iter};
    if (iter == cfg.newton_max_iter) break;
    if (!damped) {
      const Mat6 J = Mat6::Identity() - 0.5 * h * vector_field_jacobian(field, mid, cfg.branch);
      Eigen::PartialPivLU<Mat6> lu(J);
      if (lu.rcond() > 1e-12) {
        z1 -= lu.solve(residual);
        continue;
      }
      damped = true;
    }
    // Ill-conditioned Newton matrix: fall back to damped fixed-point updates.
    z1 -= 0.5 * residual;
  }
  throw Error(ErrorCode::newton_diverged, fmt::format("implicit midpoint did not converge in {} iterations",
                                                      cfg.newton_max_iter));
}

Face exit_face(const Box& box, const PhasePoint& z, const Vec3& velocity, double& tau) {
  tau = std::numeric_limits<double>::infinity();
  Face face = Face::x_min;
  for (int a = 0; a < 3; ++a) {
    if (velocity[a] > 0.0) {
      const double t = (box.hi[a] - z.q[a]) / velocity[a];
      if (t < tau) { tau = t; face = static_cast<Face>(2 * a + 1); }
    } else if (velocity[a] < 0.0) {
      const double t = (box.lo[a] - z.q[a]) / velocity[a];
      if (t < tau) { tau = t; face = static_cast<Face>(2 * a); }
    }
  }
  return face;
}

ExitEvent make_exit(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& last,
                    double t_last, double h) {
  ExitEvent ev;
  ev.last_inside = last;
  Vec3 v = Vec3::Zero();
  try {
    v = vector_field(field, last, cfg.branch).q_dot * (h < 0.0 ? -1.0 : 1.0);
  } catch (const Error&) {
  }
  double tau = 0.0;
  ev.face = exit_face(field.domain(), last, v, tau);
  tau = std::clamp(std::isfinite(tau) ? tau : 0.0, 0.0, std::abs(h));
  ev.t = t_last + (h < 0.0 ? -tau : tau);
  return ev;
}

std::size_t step_count(double T, double dt) {
  const double ratio = std::abs(T) / dt;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "implicit_midpoint") return Scheme::implicit_midpoint;
  if (name == "rk4") return Scheme::rk4;
  if (name == "reference_high_order") return Scheme::reference_high_order;
  throw Error(ErrorCode::invalid_argument, "unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::implicit_midpoint: return "implicit_midpoint";
    case Scheme::rk4: return "rk4";
    case Scheme::reference_high_order: return "reference_high_order";
  }
  return "?";
}

std::string to_string(Face face) {
  static const char* names[] = {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"};
  return names[static_cast<int>(face)];
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (!(newton_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "newton_tol must be positive");
  if (newton_max_iter < 1) throw Error(ErrorCode::invalid_argument, "newton_max_iter must be >= 1");
}

StepInfo step_with_info(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z,
                        double dt) {
  if (std::abs(dt) > cfg.dt * (1.0 + 1e-12)) {
    throw Error(ErrorCode::invalid_argument, fmt::format("step {} exceeds configured dt {}", dt, cfg.dt));
  }
  if (!(z.p.norm() > 0.0)) throw Error(ErrorCode::zero_momentum, "step from |p| = 0");
  switch (cfg.scheme) {
    case Scheme::implicit_midpoint:
      return midpoint_step(field, cfg, z, dt);
    case Scheme::rk4: {
      boost::numeric::odeint::runge_kutta4<State> stepper;
      State x = to_state(z);
      stepper.do_step(OdeSystem{field, cfg.branch}, x, 0.0, dt);
      return {from_state(x), 0};
    }
    case Scheme::reference_high_order: {
      boost::numeric::odeint::runge_kutta_fehlberg78<State> stepper;
      State x = to_state(z);
      const double sub = dt / 10.0;
      for (int i = 0; i < 10; ++i) stepper.do_step(OdeSystem{field, cfg.branch}, x, i * sub, sub);
      return {from_state(x), 0};
    }
  }
  return {z, 0};
}

PhasePoint step(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z,
                double dt) {
  return step_with_info(field, cfg, z, dt).z;
}

double FlowResult::max_relative_drift() const {
  if (samples.empty()) return 0.0;
  const double h0 = samples.front().H;
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, std::abs(s.H - h0) / h0);
  return worst;
}

FlowResult flow(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z0, double T,
                const FlowOptions& options) {
  cfg.validate();
  if (!(T > 0.0)) throw Error(ErrorCode::invalid_argument, "flow needs T > 0");
  const std::size_t n = step_count(T, cfg.dt);
  const double h = T / static_cast<double>(n);
  const double p0 = z0.p.norm();

  FlowResult result;
  if (options.record_stride > 0) result.samples.reserve(n / options.record_stride + 2);
  result.samples.push_back({0.0, z0, hamiltonian(field, z0)});
  PhasePoint z = z0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * h;
    StepInfo info;
    try {
      info = step_with_info(field, cfg, z, h);
      if (!field.contains(info.z.q)) throw Error(ErrorCode::out_of_domain, "step endpoint outside domain");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::out_of_domain) throw;
      if (result.samples.back().t != t) result.samples.push_back({t, z, hamiltonian(field, z)});
      result.exit_event = make_exit(field, cfg, z, t, h);
      return result;
    }
    z = info.z;
    if (z.p.norm() < 1e-12 * p0) throw Error(ErrorCode::zero_momentum, "|p| collapsed during flow");
    result.max_newton_iters_seen = std::max(result.max_newton_iters_seen, info.newton_iterations);
    ++result.steps_taken;
    const bool last = (i + 1 == n);
    if (last || (options.record_stride > 0 && (i + 1) % options.record_stride == 0)) {
      const double ti = last ? T : static_cast<double>(i + 1) * h;
      result.samples.push_back({ti, z, hamiltonian(field, z)});
    }
  }
  return result;
}

FlowEndpoint advance(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z0,
                     double t) {
  FlowEndpoint out{z0, std::nullopt, 0};
  if (t == 0.0) return out;
  const std::size_t n = step_count(t, cfg.dt);
  const double h = t / static_cast<double>(n);
  const double p0 = z0.p.norm();
  for (std::size_t i = 0; i < n; ++i) {
    try {
      PhasePoint next = step(field, cfg, out.z, h);
      if (!field.contains(next.q)) throw Error(ErrorCode::out_of_domain, "step endpoint outside domain");
      out.z = next;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::out_of_domain) throw;
      out.exit_event = make_exit(field, cfg, out.z, static_cast<double>(i) * h, h);
      return out;
    }
    if (out.z.p.norm() < 1e-12 * p0) throw Error(ErrorCode::zero_momentum, "|p| collapsed during flow");
    ++out.steps_taken;
  }
  return out;
}

Mat6 flow_jacobian(const RefractiveIndexField& field, const IntegratorConfig& cfg, const PhasePoint& z0,
                   double T, double h_fd) {
  if (T == 0.0) return Mat6::Identity();
  const Vec6 base = z0.packed();
  Mat6 J;
  for (int j = 0; j < 6; ++j) {
    const double h = h_fd * (1.0 + std::abs(base[j]));
    Vec6 plus = base, minus = base;
    plus[j] += h;
    minus[j] -= h;
    const FlowEndpoint fp = advance(field, cfg, PhasePoint::unpack(plus), T);
    const FlowEndpoint fm = advance(field, cfg, PhasePoint::unpack(minus), T);
    if (fp.exit_event || fm.exit_event) {
      throw Error(ErrorCode::boundary_hit, "a perturbed trajectory left the domain");
    }
    J.col(j) = (fp.z.packed() - fm.z.packed()) / (2.0 * h);
  }
  return J;
}

Mat6 symplectic_matrix() {
  Mat6 omega = Mat6::Zero();
  omega.block<3, 3>(0, 3) = Mat3::Identity();
  omega.block<3, 3>(3, 0) = -Mat3::Identity();
  return omega;
}

double symplecticity_defect(const Mat6& jacobian) {
  const Mat6 omega = symplectic_matrix();
  return (jacobian.transpose() * omega * jacobian - omega).cwiseAbs().maxCoeff();
}

std::vector<GeodesicSample> fermat_geodesic(const RefractiveIndexField& field, const Vec3& q0, const Vec3& v0,
                                            double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw Error(ErrorCode::invalid_argument, "geodesic needs dt > 0 and T >= 0");
  const auto rhs = [&field](const State& x, State& dxdt, double) {
    const Vec3 q(x[0], x[1], x[2]);
    const Vec3 v(x[3], x[4], x[5]);
    const Vec3 a = fermat_geodesic_rhs(field, q, v);
    dxdt = {v.x(), v.y(), v.z(), a.x(), a.y(), a.z()};
  };
  const std::size_t n = step_count(T, dt);
  const double h = T / static_cast<double>(n);
  boost::numeric::odeint::runge_kutta_fehlberg78<State> stepper;
  State x{q0.x(), q0.y(), q0.z(), v0.x(), v0.y(), v0.z()};
  std::vector<GeodesicSample> out;
  out.reserve(n + 1);
  out.push_back({0.0, q0, v0});
  for (std::size_t k = 1; k <= n; ++k) {
    stepper.do_step(rhs, x, static_cast<double>(k - 1) * h, h);
    out.push_back({static_cast<double>(k) * h, Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5])});
  }
  return out;
}

}  // namespace helios
