#include "helios/numerics.hpp"

#include <cmath>
#include <omp.h>

#include "helios/error.hpp"

namespace helios {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::out_of_domain: return "OutOfDomain";
    case ErrorCode::non_positive_index: return "NonPositiveIndex";
    case ErrorCode::zero_momentum: return "ZeroMomentum";
    case ErrorCode::non_unit_direction: return "NonUnitDirection";
    case ErrorCode::non_positive_frequency: return "NonPositiveFrequency";
    case ErrorCode::newton_diverged: return "NewtonDiverged";
    case ErrorCode::boundary_hit: return "BoundaryHit";
    case ErrorCode::degenerate_surface: return "DegenerateSurface";
    case ErrorCode::ambiguous_crossing: return "AmbiguousCrossing";
    case ErrorCode::non_power_of_two: return "NonPowerOfTwo";
    case ErrorCode::resolution: return "ResolutionError";
    case ErrorCode::unsupported_profile: return "UnsupportedProfile";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  // Box-Muller; the second variate is discarded to keep draws stateless.
  const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
  return r * std::cos(2.0 * kPi * uniform());
}

Vec3 CounterRng::unit_vector() {
  const double mu = 2.0 * uniform() - 1.0;
  const double phi = 2.0 * kPi * uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  return {s * std::cos(phi), s * std::sin(phi), mu};
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "gauss_legendre needs n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 t1 = n.cross(helper).normalized();
  Vec3 t2 = n.cross(t1);
  return {t1, t2};
}

namespace {
int g_threads = 0;
}

void set_thread_count(int threads) {
  g_threads = threads < 0 ? 0 : threads;
  if (g_threads > 0) omp_set_num_threads(g_threads);
}

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

}  // namespace helios
