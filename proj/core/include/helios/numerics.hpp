#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "helios/types.hpp"

namespace helios {

/// Pairwise (cascade) summation. The association order depends only on the
/// length of the input, so results are reproducible regardless of how the
/// terms were produced.
double pairwise_sum(std::span<const double> values);

/// Counter-based random stream. Draw k of stream (seed, index) is a pure
/// function of (seed, index, k), so ensembles do not depend on thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  double normal();
  Vec3 unit_vector();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Gauss-Legendre nodes and weights on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Two orthonormal vectors completing n to a right-handed frame.
std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& n);

/// Number of worker threads used by parallel loops; 0 means the OpenMP default.
void set_thread_count(int threads);
int thread_count();

}  // namespace helios
