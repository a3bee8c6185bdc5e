// Independent reference computations used as expected values by the tests.
// Nothing here calls into the library's integrators or quadratures.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using V3 = Eigen::Vector3d;
constexpr double pi = 3.14159265358979323846;

struct Index {
  std::function<double(const V3&)> n;
  std::function<V3(const V3&)> grad;
};

inline Index fisheye(double n0, double a) {
  return {[=](const V3& q) { return n0 / (1.0 + q.squaredNorm() / (a * a)); },
          [=](const V3& q) {
            const double d = 1.0 + q.squaredNorm() / (a * a);
            return V3(-2.0 * n0 / (a * a * d * d) * q);
          }};
}

inline Index linear(double n0, const V3& g) {
  return {[=](const V3& q) { return n0 + g.dot(q); }, [=](const V3&) { return g; }};
}

inline Index parabolic(double n0, double kappa, const V3& axis) {
  const V3 u = axis.normalized();
  return {[=](const V3& q) {
            const V3 perp = q - u.dot(q) * u;
            return n0 * (1.0 - 0.5 * kappa * perp.squaredNorm());
          },
          [=](const V3& q) {
            const V3 perp = q - u.dot(q) * u;
            return V3(-n0 * kappa * perp);
          }};
}

struct State {
  V3 q;
  V3 p;
};

// Hamilton's equations for H = c |p| / n(q), written out by hand.
inline State rhs(const Index& m, double c, const State& z) {
  const double n = m.n(z.q);
  const double pn = z.p.norm();
  return {c / n * z.p / pn, c * pn / (n * n) * m.grad(z.q)};
}

// Classical fourth-order Runge-Kutta with `substeps` equal steps over [0, T].
inline State rk4(const Index& m, double c, State z, double T, int substeps) {
  const double h = T / substeps;
  auto axpy = [](const State& a, double s, const State& k) { return State{a.q + s * k.q, a.p + s * k.p}; };
  for (int i = 0; i < substeps; ++i) {
    const State k1 = rhs(m, c, z);
    const State k2 = rhs(m, c, axpy(z, h / 2, k1));
    const State k3 = rhs(m, c, axpy(z, h / 2, k2));
    const State k4 = rhs(m, c, axpy(z, h, k3));
    z.q += h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    z.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  }
  return z;
}

// Central difference of a scalar function along coordinate axis k.
inline double partial(const std::function<double(const V3&)>& f, const V3& x, int k, double h = 1e-6) {
  V3 a = x, b = x;
  a[k] += h;
  b[k] -= h;
  return (f(a) - f(b)) / (2.0 * h);
}

// The fish-eye ray from (x0, 0, 0) launched along +y is the circle through
// that point and its antipode -a^2/x0: centre (x0 - a^2/x0)/2, radius (x0 + a^2/x0)/2.
struct Circle {
  V3 centre;
  double radius;
};
inline Circle fisheye_circle(double x0, double a) {
  return {V3((x0 - a * a / x0) / 2.0, 0.0, 0.0), (x0 + a * a / x0) / 2.0};
}

}  // namespace oracle
