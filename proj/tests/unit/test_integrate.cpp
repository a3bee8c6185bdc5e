#include <gtest/gtest.h>

#include "helios/error.hpp"
#include "helios/integrate.hpp"
#include "oracles.hpp"

using namespace helios;

namespace {

const Box kBox{Vec3::Constant(-4.0), Vec3::Constant(4.0)};
const double kPeriod = 2.0 * oracle::pi;  // fish-eye n0 = 2, a = 1, c = 1

IntegratorConfig config(Scheme s, double dt) {
  IntegratorConfig c;
  c.scheme = s;
  c.dt = dt;
  return c;
}

RefractiveIndexField fisheye() { return RefractiveIndexField::fisheye(2.0, 1.0, kBox); }

PhasePoint fisheye_launch(const RefractiveIndexField& f) {
  const Vec3 q(0.5, 0, 0);
  return {q, Vec3(0, f.n(q), 0)};
}

oracle::State to_state(const PhasePoint& z) { return {z.q, z.p}; }

}  // namespace

TEST(Step, HomogeneousIsExactForEveryScheme) {
  const auto f = RefractiveIndexField::homogeneous(1.0, kBox);
  for (Scheme s : {Scheme::implicit_midpoint, Scheme::rk4, Scheme::reference_high_order}) {
    const PhasePoint z = step(f, config(s, 0.5), {Vec3::Zero(), Vec3(1, 0, 0)}, 0.5);
    EXPECT_LE((z.q - Vec3(0.5, 0, 0)).norm(), 1e-15) << to_string(s);
    EXPECT_EQ(z.p, Vec3(1, 0, 0));
  }
}

TEST(Step, MidpointAgreesWithRk4Oracle) {
  const auto f = fisheye();
  const PhasePoint z0 = fisheye_launch(f);
  const PhasePoint z = step(f, config(Scheme::implicit_midpoint, 1e-3), z0, 1e-3);
  const auto ref = oracle::rk4(oracle::fisheye(2, 1), 1.0, to_state(z0), 1e-3, 100);
  EXPECT_LE((z.q - ref.q).norm(), 1e-8);
  EXPECT_LE((z.p - ref.p).norm(), 1e-8);
  const PhasePoint r = step(f, config(Scheme::reference_high_order, 1e-3), z0, 1e-3);
  EXPECT_LE((r.q - ref.q).norm(), 1e-14);
}

TEST(Step, MidpointIsTimeSymmetric) {
  const auto f = fisheye();
  const auto cfg = config(Scheme::implicit_midpoint, 0.05);
  const PhasePoint z0{Vec3(0.3, -0.2, 0.4), Vec3(0.5, 1.1, -0.3)};
  const PhasePoint back = step(f, cfg, step(f, cfg, z0, 0.05), -0.05);
  EXPECT_LE((back.packed() - z0.packed()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Step, RejectsOversizedStep) {
  const auto f = fisheye();
  EXPECT_THROW(step(f, config(Scheme::rk4, 0.01), fisheye_launch(f), 0.02), Error);
}

TEST(Step, NewtonFailureIsReported) {
  const auto f = fisheye();
  IntegratorConfig cfg = config(Scheme::implicit_midpoint, 1.0);
  cfg.newton_max_iter = 1;
  try {
    step(f, cfg, fisheye_launch(f), 1.0);
    FAIL() << "expected NewtonDiverged";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::newton_diverged);
  }
}

TEST(Config, Validation) {
  IntegratorConfig c;
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c.dt = 1e-3;
  c.newton_tol = -1;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_scheme("rk4"), Scheme::rk4);
  EXPECT_THROW(parse_scheme("leapfrog"), Error);
}

TEST(Flow, HomogeneousStraightLineWithoutDrift) {
  const auto f = RefractiveIndexField::homogeneous(1.5, kBox);
  const PhasePoint z0{Vec3::Zero(), Vec3(0.9, 1.2, 0.0)};
  const FlowResult r = flow(f, config(Scheme::implicit_midpoint, 0.01), z0, 2.0);
  EXPECT_EQ(r.steps_taken, 200u);
  EXPECT_EQ(r.max_relative_drift(), 0.0);
  for (const RaySample& s : r.samples) {
    EXPECT_EQ(s.z.p, z0.p);
    EXPECT_LE((s.z.q - s.t / 1.5 * z0.p.normalized()).norm(), 1e-13);
  }
  for (std::size_t i = 1; i < r.samples.size(); ++i) EXPECT_GT(r.samples[i].t, r.samples[i - 1].t);
}

TEST(Flow, FisheyeRayIsTheOracleCircleAndCloses) {
  const auto f = fisheye();
  const PhasePoint z0 = fisheye_launch(f);
  const FlowResult r = flow(f, config(Scheme::implicit_midpoint, kPeriod / 8000), z0, kPeriod);
  const auto circle = oracle::fisheye_circle(0.5, 1.0);
  double worst = 0.0;
  for (const RaySample& s : r.samples) {
    worst = std::max(worst, std::abs((s.z.q - circle.centre).norm() - circle.radius));
    worst = std::max(worst, std::abs(s.z.q.z()));
  }
  EXPECT_LE(worst, 1e-6);
  EXPECT_LE((r.final_sample().z.q - z0.q).norm(), 1e-6);
  EXPECT_FALSE(r.exit_event.has_value());
}

TEST(Flow, RecordStride) {
  const auto f = fisheye();
  const FlowResult r = flow(f, config(Scheme::rk4, 0.01), fisheye_launch(f), 1.0, {10});
  EXPECT_EQ(r.samples.size(), 11u);
  EXPECT_DOUBLE_EQ(r.final_sample().t, 1.0);
}

TEST(Flow, ParabolicGrinMatchesRk4Oracle) {
  const auto f = RefractiveIndexField::parabolic_grin(1.5, 0.5, Vec3::UnitZ(), Box{Vec3(-1, -1, -4), Vec3(1, 1, 4)});
  const Vec3 q0(0.05, 0, -3);
  const Vec3 s = Vec3(0.02, 0, 1).normalized();
  const PhasePoint z0{q0, f.n(q0) * s};
  const double T = 8.0;
  const FlowResult r = flow(f, config(Scheme::implicit_midpoint, 1e-3), z0, T, {100});
  const auto o = oracle::parabolic(1.5, 0.5, Vec3::UnitZ());
  double amp_err = 0.0;
  for (const RaySample& smp : r.samples) {
    const auto ref = oracle::rk4(o, 1.0, to_state(z0), smp.t, std::max(1, static_cast<int>(smp.t / 1e-3)));
    amp_err = std::max(amp_err, (smp.z.q - ref.q).norm());
  }
  EXPECT_LE(amp_err, 1e-4);
}

TEST(Flow, StopsAtDomainExit) {
  const auto f = RefractiveIndexField::homogeneous(1.0, Box{Vec3::Constant(-1), Vec3::Constant(1)});
  const FlowResult r = flow(f, config(Scheme::implicit_midpoint, 0.1), {Vec3::Zero(), Vec3::UnitX()}, 5.0);
  ASSERT_TRUE(r.exit_event.has_value());
  EXPECT_EQ(r.exit_event->face, Face::x_max);
  EXPECT_NEAR(r.exit_event->t, 1.0, 1e-6);
  EXPECT_TRUE(f.contains(r.final_sample().z.q));
}

TEST(Flow, SecondOrderConvergence) {
  const auto f = fisheye();
  const PhasePoint z0 = fisheye_launch(f);
  const double T = 1.0;
  const auto ref = oracle::rk4(oracle::fisheye(2, 1), 1.0, to_state(z0), T, 20000);
  const auto err = [&](double dt) {
    const PhasePoint z = advance(f, config(Scheme::implicit_midpoint, dt), z0, T).z;
    return (z.packed() - (Vec6() << ref.q, ref.p).finished()).norm();
  };
  const double ratio = err(0.02) / err(0.01);
  EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(Flow, MomentumScalingEquivariance) {
  const auto f = fisheye();
  const PhasePoint z0 = fisheye_launch(f);
  const auto cfg = config(Scheme::implicit_midpoint, kPeriod / 1000);
  const PhasePoint base = advance(f, cfg, z0, kPeriod / 3).z;
  for (double alpha : {0.5, 7.0}) {
    const PhasePoint s = advance(f, cfg, {z0.q, alpha * z0.p}, kPeriod / 3).z;
    EXPECT_LE((s.q - base.q).norm(), 1e-9);
    EXPECT_LE((s.p - alpha * base.p).norm(), 1e-9 * alpha * base.p.norm());
  }
}

TEST(Advance, NegativeTimeInvertsFlow) {
  const auto f = fisheye();
  const auto cfg = config(Scheme::implicit_midpoint, 1e-2);
  const PhasePoint z0 = fisheye_launch(f);
  const PhasePoint back = advance(f, cfg, advance(f, cfg, z0, 1.3).z, -1.3).z;
  EXPECT_LE((back.packed() - z0.packed()).norm(), 1e-9);
}

TEST(Jacobian, ZeroTimeIsIdentity) {
  const auto f = fisheye();
  EXPECT_LE((flow_jacobian(f, config(Scheme::implicit_midpoint, 1e-2), fisheye_launch(f), 0.0) - Mat6::Identity())
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Jacobian, FreeFlowMatchesHandDerivedFormula) {
  const double n = 1.5, c = 1.0, T = 0.7;
  const auto f = RefractiveIndexField::homogeneous(n, kBox, c);
  const PhasePoint z0{Vec3(0.1, 0.2, -0.3), Vec3(0.6, -1.2, 0.4)};
  const Mat6 J = flow_jacobian(f, config(Scheme::rk4, 0.1), z0, T);
  const double pn = z0.p.norm();
  const Vec3 ph = z0.p / pn;
  Mat6 expected = Mat6::Identity();
  expected.block<3, 3>(0, 3) = c * T / (n * pn) * (Mat3::Identity() - ph * ph.transpose());
  EXPECT_LE((J - expected).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Jacobian, FisheyeIsCanonicalAndVolumePreserving) {
  const auto f = fisheye();
  const Mat6 J = flow_jacobian(f, config(Scheme::implicit_midpoint, kPeriod / 500), fisheye_launch(f), kPeriod / 2);
  EXPECT_LE(symplecticity_defect(J), 1e-5);
  EXPECT_NEAR(J.determinant(), 1.0, 1e-5);
}

TEST(Jacobian, BoundaryHitIsReported) {
  const auto f = RefractiveIndexField::homogeneous(1.0, Box{Vec3::Constant(-1), Vec3::Constant(1)});
  try {
    flow_jacobian(f, config(Scheme::rk4, 0.1), {Vec3::Zero(), Vec3::UnitX()}, 2.0);
    FAIL() << "expected BoundaryHit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::boundary_hit);
  }
}

TEST(Symplecticity, DefectExamples) {
  EXPECT_EQ(symplecticity_defect(Mat6::Identity()), 0.0);
  EXPECT_EQ(symplecticity_defect(symplectic_matrix()), 0.0);
  Mat6 d = Mat6::Identity();
  d(0, 0) = 2.0;
  // J^T Omega J differs from Omega in entries (0,3) and (3,0), each by 1.
  EXPECT_EQ(symplecticity_defect(d), 1.0);
}

TEST(FermatGeodesic, FisheyeGeodesicLiesOnOracleCircle) {
  const auto f = fisheye();
  const Vec3 q0(0.5, 0, 0);
  const auto path = fermat_geodesic(f, q0, Vec3(0, 1.0 / f.n(q0), 0), kPeriod, kPeriod / 2000);
  const auto circle = oracle::fisheye_circle(0.5, 1.0);
  double worst = 0.0;
  for (const auto& s : path) worst = std::max(worst, std::abs((s.q - circle.centre).norm() - circle.radius));
  EXPECT_LE(worst, 1e-6);
}
