#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lumio/geometry.hpp"

namespace lumio {

/// Seedable generator with a fully specified algorithm so fixtures are
/// reproducible across platforms and language ports: std::mt19937_64 for
/// the bit stream, doubles from the top 53 bits, Gaussians via Box-Muller.
/// std::*_distribution is deliberately avoided (implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in (0, 1].
  double uniform01() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  Vec3 gaussian_vec3(double sigma) {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = gaussian(sigma);
    return v;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lumio
