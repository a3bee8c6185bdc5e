#include <gtest/gtest.h>

#include "helios/error.hpp"
#include "helios/wigner.hpp"
#include "oracles.hpp"

using namespace helios;

namespace {

SampledField1D grid_field(std::size_t n, double length, double eps) {
  SampledField1D f;
  f.u.assign(n, Complex(0.0));
  f.q_min = -length / 2;
  f.dq = length / n;
  f.eps = eps;
  return f;
}

std::size_t row_argmax(const WignerGrid& W, std::size_t j) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < W.n; ++k) {
    if (W.at(j, k) > W.at(j, best)) best = k;
  }
  return best;
}

WkbSpec gaussian_packet(std::size_t n, double centre, double sigma, double k0) {
  WkbSpec s;
  s.n = n;
  s.q_min = -2.0;
  s.q_max = 2.0;
  s.amplitude = [=](double q) { return Complex(std::exp(-(q - centre) * (q - centre) / (2 * sigma * sigma))); };
  s.phase = [=](double q) { return k0 * q; };
  s.phase_derivative = [=](double) { return k0; };
  return s;
}

}  // namespace

TEST(Wigner, PlaneWavePeaksAtItsWavenumber) {
  const std::size_t n = 256;
  const double eps = 0.05;
  SampledField1D f = grid_field(n, 4.0, eps);
  const double dp = 2 * oracle::pi * eps / (n * f.dq);
  const double k0 = 20 * dp;
  for (std::size_t j = 0; j < n; ++j) f.u[j] = std::exp(Complex(0, k0 * f.q(j) / eps));
  const WignerGrid W = discrete_wigner(f);
  EXPECT_NEAR(W.dp, dp, 1e-15);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = row_argmax(W, j);
    EXPECT_NEAR(W.p(k), k0, 0.5 * W.dp) << j;
  }
  const std::vector<double> m = marginal_position(W);
  for (double v : m) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Wigner, GaussianPacketMatchesClosedForm) {
  const std::size_t n = 512;
  const double eps = 0.02, sigma = 0.15;
  SampledField1D f = grid_field(n, 4.0, eps);
  const double dp = 2 * oracle::pi * eps / (n * f.dq);
  const double k0 = 40 * dp;
  for (std::size_t j = 0; j < n; ++j) {
    const double q = f.q(j);
    f.u[j] = std::exp(-q * q / (2 * sigma * sigma)) * std::exp(Complex(0, k0 * q / eps));
  }
  const WignerGrid W = discrete_wigner(f);
  const auto closed = [&](double q, double p) {
    return sigma / (std::sqrt(oracle::pi) * eps) * std::exp(-q * q / (sigma * sigma) - sigma * sigma * (p - k0) * (p - k0) / (eps * eps));
  };
  const std::size_t j0 = n / 2;
  const std::size_t k0i = row_argmax(W, j0);
  ASSERT_NEAR(W.q(j0), 0.0, 1e-15);
  ASSERT_NEAR(W.p(k0i), k0, 1e-12);
  EXPECT_NEAR(W.at(j0, k0i), closed(0.0, k0), 1e-6 * closed(0.0, k0));
  const double peak = closed(0.0, k0);
  double worst = 0.0, most_negative = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      worst = std::max(worst, std::abs(W.at(j, k) - closed(W.q(j), W.p(k))));
      most_negative = std::min(most_negative, W.at(j, k));
    }
  }
  EXPECT_LE(worst, 1e-6 * peak);
  EXPECT_GE(most_negative, -1e-10 * peak);
  EXPECT_LE(W.max_imag_ratio, 1e-12);
}

TEST(Wigner, ZeroFieldGivesZero) {
  const WignerGrid W = discrete_wigner(grid_field(64, 1.0, 0.1));
  for (double v : W.values) EXPECT_EQ(v, 0.0);
  for (double v : marginal_position(W)) EXPECT_EQ(v, 0.0);
}

TEST(Wigner, NonPowerOfTwoRejected) {
  try {
    discrete_wigner(grid_field(100, 1.0, 0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_power_of_two);
  }
}

TEST(Wigner, MarginalParsevalAndRealness) {
  const SampledField1D f = wkb_field(gaussian_packet(1024, -0.3, 0.2, 0.7), 1e-2);
  const WignerGrid W = discrete_wigner(f);
  const std::vector<double> m = marginal_position(W);
  for (std::size_t j = 0; j < f.size(); ++j) EXPECT_NEAR(m[j], std::norm(f.u[j]), 1e-10);
  double total = 0.0;
  for (double v : W.values) total += v;
  total *= W.dq * W.dp;
  EXPECT_NEAR(total, f.mass(), 1e-10 * f.mass());
  EXPECT_LE(W.max_imag_ratio, 1e-12);
}

TEST(Wkb, ResolutionErrorForCoarseGrid) {
  try {
    wkb_field(gaussian_packet(64, 0.0, 0.2, 5.0), 1e-2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::resolution);
  }
}

TEST(Wkb, ChirpConcentratesOnTheLagrangianLine) {
  // S = q^2 / 2, so the Wigner function concentrates on p = q.
  const auto spec_for = [](double eps) {
    WkbSpec s;
    s.n = 2048;
    s.q_min = -2.0;
    s.q_max = 2.0;
    // Amplitude width proportional to sqrt(eps) makes the momentum spread scale as sqrt(eps).
    const double sigma = 2.0 * std::sqrt(eps);
    s.amplitude = [=](double q) { return Complex(std::exp(-q * q / (2 * sigma * sigma))); };
    s.phase = [](double q) { return 0.5 * q * q; };
    s.phase_derivative = [](double q) { return q; };
    return s;
  };
  const auto conc = [&](double eps) {
    const WkbSpec s = spec_for(eps);
    return wkb_concentration(discrete_wigner(wkb_field(s, eps)), s.phase_derivative, 5.0 * std::sqrt(eps));
  };
  const Concentration a = conc(1e-2);
  const Concentration b = conc(5e-3);
  EXPECT_GE(a.fraction, 0.9);
  EXPECT_GE(b.fraction, 0.9);
  EXPECT_NEAR(a.rms_width / b.rms_width, std::sqrt(2.0), 0.2 * std::sqrt(2.0));
}

TEST(Propagation, PlaneWaveOnlyChangesPhase) {
  const std::size_t n = 256;
  const double eps = 0.05;
  SampledField1D f = grid_field(n, 4.0, eps);
  const double k0 = 16 * 2 * oracle::pi * eps / (n * f.dq);
  for (std::size_t j = 0; j < n; ++j) f.u[j] = std::exp(Complex(0, k0 * f.q(j) / eps));
  f.profile.n0 = 1.5;
  const SampledField1D g = propagate_semiclassical(f, 0.7);
  const Complex phase = std::exp(Complex(0, -k0 * 0.7 / (1.5 * eps)));
  for (std::size_t j = 0; j < n; ++j) {
    EXPECT_NEAR(std::abs(g.u[j]), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(g.u[j] - f.u[j] * phase), 0.0, 1e-10);
  }
}

TEST(Propagation, PacketMovesAtGroupVelocity) {
  WkbSpec s = gaussian_packet(2048, -1.0, 0.1, 0.5);
  s.profile.n0 = 1.25;
  s.profile.c = 1.0;
  const SampledField1D f = wkb_field(s, 1e-2);
  const double T = 1.0;
  const SampledField1D g = propagate_semiclassical(f, T);
  double m0 = 0, c0 = 0, m1 = 0, c1 = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    m0 += std::norm(f.u[j]);
    c0 += f.q(j) * std::norm(f.u[j]);
    m1 += std::norm(g.u[j]);
    c1 += g.q(j) * std::norm(g.u[j]);
  }
  EXPECT_NEAR(c1 / m1 - c0 / m0, T / 1.25, f.dq);
  EXPECT_NEAR(g.mass(), f.mass(), 1e-10 * f.mass());
}

TEST(Propagation, LinearProfilePreservesNorm) {
  WkbSpec s = gaussian_packet(512, -0.5, 0.15, 0.5);
  s.profile.kind = IndexProfile1D::Kind::linear;
  s.profile.n0 = 1.5;
  s.profile.gradient = 0.1;
  const SampledField1D f = wkb_field(s, 4e-2);
  const SampledField1D g = propagate_semiclassical(f, 0.5);
  EXPECT_NEAR(g.mass(), f.mass(), 1e-10 * f.mass());
}

TEST(Liouville, ZeroTimeDistanceVanishes) {
  const SampledField1D f = wkb_field(gaussian_packet(1024, -1.0, 0.1, 0.5), 2e-2);
  EXPECT_NEAR(liouville_distance(f, 0.0).L1_distance, 0.0, 1e-10);
}

TEST(Liouville, HomogeneousLadderDecreases) {
  const auto rows = compare_liouville(gaussian_packet(2048, -1.0, 0.1, 0.5), {4e-2, 2e-2, 1e-2}, 1.0);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].L1_distance, rows[i - 1].L1_distance);
    EXPECT_GE(rows[i - 1].L1_distance / rows[i].L1_distance, 1.2);
  }
}

TEST(Liouville, LinearLadderDecreases) {
  WkbSpec s = gaussian_packet(1024, -0.8, 0.15, 0.5);
  s.profile.kind = IndexProfile1D::Kind::linear;
  s.profile.n0 = 1.5;
  s.profile.gradient = 0.2;
  const auto rows = compare_liouville(s, {4e-2, 2e-2, 1e-2}, 0.8);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].L1_distance, rows[i - 1].L1_distance);
}
