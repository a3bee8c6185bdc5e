#include <gtest/gtest.h>

#include <random>

#include "helios/error.hpp"
#include "helios/hamiltonian.hpp"
#include "oracles.hpp"

using namespace helios;

namespace {

const Box kBox{Vec3::Constant(-2.0), Vec3::Constant(2.0)};

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no helios::Error thrown";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(Hamiltonian, Examples) {
  const auto h2 = RefractiveIndexField::homogeneous(2.0, kBox);
  EXPECT_DOUBLE_EQ(hamiltonian(h2, {Vec3::Zero(), Vec3(4, 0, 0)}), 2.0);
  const auto fe = RefractiveIndexField::fisheye(2.0, 1.0, kBox);
  EXPECT_DOUBLE_EQ(hamiltonian(fe, {Vec3(1, 0, 0), Vec3(0, 3, 0)}), 3.0);
}

TEST(Hamiltonian, ZeroMomentumRejected) {
  const auto f = RefractiveIndexField::homogeneous(1.0, kBox);
  EXPECT_EQ(code_of([&] { hamiltonian(f, {Vec3::Zero(), Vec3::Zero()}); }), ErrorCode::zero_momentum);
  EXPECT_EQ(code_of([&] { hamiltonian(f, {Vec3(3, 0, 0), Vec3::UnitX()}); }), ErrorCode::out_of_domain);
}

TEST(Hamiltonian, DegreeOneHomogeneity) {
  const auto f = RefractiveIndexField::fisheye(2.0, 1.0, kBox);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5), a(0.1, 10.0);
  for (int i = 0; i < 200; ++i) {
    const PhasePoint z{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng))};
    const double alpha = a(rng);
    const PhasePoint s{z.q, alpha * z.p};
    EXPECT_NEAR(hamiltonian(f, s), alpha * hamiltonian(f, z), 1e-12 * alpha * hamiltonian(f, z));
    const PhaseVelocity v = vector_field(f, z), vs = vector_field(f, s);
    EXPECT_LE((vs.q_dot - v.q_dot).norm(), 1e-12 * v.q_dot.norm());
    EXPECT_LE((vs.p_dot - alpha * v.p_dot).norm(), 1e-12 * (1e-300 + alpha * v.p_dot.norm()));
  }
  EXPECT_EQ(hamiltonian(f, {Vec3(0.2, 0, 0), Vec3(2, 4, 6)}), 2.0 * hamiltonian(f, {Vec3(0.2, 0, 0), Vec3(1, 2, 3)}));
}

TEST(Hamiltonian, WaveVectorFromDirection) {
  const auto f = RefractiveIndexField::homogeneous(1.5, kBox);
  EXPECT_LE((wave_vector_from_direction(f, Vec3::Zero(), Vec3::UnitZ(), 2.0) - Vec3(0, 0, 3)).norm(), 1e-15);
  const auto fe = RefractiveIndexField::fisheye(2.0, 1.0, kBox);
  const Vec3 s = Vec3(1, 2, 2) / 3.0;
  const Vec3 q(0.3, -0.4, 0.1);
  const Vec3 p = wave_vector_from_direction(fe, q, s, 1.7);
  EXPECT_NEAR(hamiltonian(fe, {q, p}), 1.7, 1.7e-12);
  EXPECT_LE((p.normalized() - s).norm(), 1e-15);
}

TEST(Hamiltonian, WaveVectorInSiUnits) {
  const double c = 299792458.0, lambda = 500e-9;
  const auto f = RefractiveIndexField::homogeneous(1.0, kBox, c);
  const double omega = 2.0 * oracle::pi * c / lambda;
  const Vec3 p = wave_vector_from_direction(f, Vec3::Zero(), Vec3::UnitX(), omega);
  EXPECT_NEAR(p.norm(), 2.0 * oracle::pi / lambda, 1e-12 * p.norm());
  EXPECT_NEAR(p.norm(), 1.2566e7, 1e3);
}

TEST(Hamiltonian, WaveVectorPreconditions) {
  const auto f = RefractiveIndexField::homogeneous(1.0, kBox);
  EXPECT_EQ(code_of([&] { wave_vector_from_direction(f, Vec3::Zero(), Vec3(1, 1, 0), 1.0); }),
            ErrorCode::non_unit_direction);
  EXPECT_EQ(code_of([&] { wave_vector_from_direction(f, Vec3::Zero(), Vec3::UnitX(), 0.0); }),
            ErrorCode::non_positive_frequency);
}

TEST(Hamiltonian, FrequencyConversion) {
  EXPECT_DOUBLE_EQ(angular_frequency(1.0), 2.0 * oracle::pi);
  EXPECT_DOUBLE_EQ(ordinary_frequency(angular_frequency(3.5)), 3.5);
}

TEST(VectorField, Examples) {
  const auto h = RefractiveIndexField::homogeneous(1.0, kBox);
  const PhaseVelocity v = vector_field(h, {Vec3::Zero(), Vec3(1, 0, 0)});
  EXPECT_EQ(v.q_dot, Vec3(1, 0, 0));
  EXPECT_EQ(v.p_dot, Vec3::Zero());

  const auto l = RefractiveIndexField::linear(1.0, Vec3(0, 0.1, 0), Box{Vec3::Constant(-1), Vec3::Constant(1)});
  const PhaseVelocity w = vector_field(l, {Vec3::Zero(), Vec3(2, 0, 0)});
  EXPECT_LE((w.q_dot - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LE((w.p_dot - Vec3(0, 0.2, 0)).norm(), 1e-15);
}

TEST(VectorField, LightSpeedInMedium) {
  const auto f = RefractiveIndexField::fisheye(2.0, 1.0, kBox, 3.0);
  const PhasePoint z{Vec3(0.4, 0.1, -0.3), Vec3(0.2, -1.0, 0.7)};
  EXPECT_NEAR(vector_field(f, z).q_dot.norm(), 3.0 / f.n(z.q), 1e-14);
}

TEST(VectorField, MatchesFiniteDifferencesOfH) {
  const auto f = RefractiveIndexField::fisheye(2.0, 1.0, kBox);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint z{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)) + Vec3(2, 0, 0)};
    const PhaseVelocity v = vector_field(f, z);
    for (int k = 0; k < 3; ++k) {
      const double dHdp = oracle::partial([&](const Vec3& p) { return hamiltonian(f, {z.q, p}); }, z.p, k);
      const double dHdq = oracle::partial([&](const Vec3& q) { return hamiltonian(f, {q, z.p}); }, z.q, k);
      EXPECT_NEAR(v.q_dot[k], dHdp, 1e-6 * (1 + std::abs(dHdp)));
      EXPECT_NEAR(v.p_dot[k], -dHdq, 1e-6 * (1 + std::abs(dHdq)));
    }
    const auto o = oracle::rhs(oracle::fisheye(2.0, 1.0), 1.0, {z.q, z.p});
    EXPECT_LE((v.q_dot - o.q).norm(), 1e-14);
    EXPECT_LE((v.p_dot - o.p).norm(), 1e-13 * (1 + o.p.norm()));
  }
}

TEST(VectorField, JacobianMatchesFiniteDifferences) {
  const auto f = RefractiveIndexField::fisheye(2.0, 1.0, kBox);
  const PhasePoint z{Vec3(0.3, -0.2, 0.5), Vec3(0.4, 1.3, -0.2)};
  const Mat6 J = vector_field_jacobian(f, z);
  const double h = 1e-6;
  for (int k = 0; k < 6; ++k) {
    Vec6 a = z.packed(), b = z.packed();
    a[k] += h;
    b[k] -= h;
    const Vec6 col = (vector_field(f, PhasePoint::unpack(a)).packed() - vector_field(f, PhasePoint::unpack(b)).packed()) / (2 * h);
    EXPECT_LE((J.col(k) - col).cwiseAbs().maxCoeff(), 1e-7) << "column " << k;
  }
}

TEST(VectorField, NegativeBranchReversesTime) {
  const auto f = RefractiveIndexField::fisheye(2.0, 1.0, kBox);
  const PhasePoint z{Vec3(0.3, -0.2, 0.5), Vec3(0.4, 1.3, -0.2)};
  EXPECT_EQ(vector_field(f, z, Branch::negative).packed(), -vector_field(f, z).packed());
}

TEST(Fermat, HomogeneousIsStraight) {
  const auto f = RefractiveIndexField::homogeneous(1.7, kBox);
  EXPECT_EQ(fermat_geodesic_rhs(f, Vec3(0.1, 0.2, 0.3), Vec3(1, -2, 0.5)), Vec3::Zero());
}

TEST(Fermat, SatisfiesEulerLagrangeOfMetricLagrangian) {
  const double c = 1.3;
  for (const auto& f : {RefractiveIndexField::linear(1.0, Vec3(0, 0.2, 0), Box{Vec3::Constant(-1), Vec3::Constant(1)}, c),
                        RefractiveIndexField::fisheye(2.0, 1.0, kBox, c)}) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int i = 0; i < 20; ++i) {
      const Vec3 q(u(rng), u(rng), u(rng)), v(u(rng), u(rng), u(rng));
      const auto g = [&](const Vec3& x) { return f.n(x) * f.n(x) / (c * c); };
      Vec3 dg;
      for (int k = 0; k < 3; ++k) dg[k] = oracle::partial(g, q, k);
      const Vec3 a = fermat_geodesic_rhs(f, q, v);
      // d/dt (g v) - (1/2) |v|^2 grad g = 0
      const Vec3 residual = g(q) * a + dg.dot(v) * v - 0.5 * v.squaredNorm() * dg;
      EXPECT_LE(residual.norm(), 1e-6);
    }
  }
}
