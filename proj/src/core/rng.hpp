#pragma once

#include <cstdint>
#include <random>

#include "core/types.hpp"

namespace kronmtl {

// Deterministic generator. Uniforms come straight off mt19937_64 (53-bit
// mantissa) and normals are computed by Box-Muller, so the stream of values
// for a given seed does not depend on the standard library's distribution
// implementations. Matrices fill in storage (column-major) order.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // (0, 1]
  double uniform_open0() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // One N(0,1) draw; consumes exactly two engine values.
  double normal() {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal();
    return out;
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace kronmtl
