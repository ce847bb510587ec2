#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nsdf {

using Vec2i = Eigen::Vector2i;
using Vec3d = Eigen::Vector3d;
using Vec3f = Eigen::Vector3f;
using Mat3d = Eigen::Matrix3d;
using Mat4d = Eigen::Matrix4d;

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat3X = Eigen::Matrix<S, 3, Eigen::Dynamic>;
template <class S>
using Vec3 = Eigen::Matrix<S, 3, 1>;

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  return splitmix64(s);
}

// Seeded generator with fixed draw algorithms. std:: distributions are
// implementation-defined, so sampling goes through these canonical draws to
// keep runs byte-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) by rejection.
  uint64_t uniform_index(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n == 0");
    const uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform_index(static_cast<uint64_t>(hi - lo) + 1));
  }

  // One Box-Muller draw; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent child stream.
  Rng fork(uint64_t stream_id) {
    uint64_t s = mix_seed(eng_(), stream_id);
    return Rng(s);
  }

 private:
  std::mt19937_64 eng_;
};

// Numerically stable softplus and its first two derivatives.
template <class S>
inline S softplus(S z) {
  return std::max(z, S(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <class S>
inline S logistic(S z) {
  return S(1) / (S(1) + std::exp(-z));
}

struct Degrees {
  double value;
};

inline double deg2rad(double d) { return d * M_PI / 180.0; }

}  // namespace nsdf
