#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "bcfb/util.hpp"

namespace bcfb {

// Deterministic random stream. One master seed; every independent unit of
// work (trial, codebook draw, chunk, ...) gets its own stream derived from
// the master seed and a counter path, so results do not depend on execution
// order. The uniform and normal transforms are spelled out here instead of
// using std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives the stream for counter path {a, b, ...} under `master`.
  static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = master;
    splitmix64(state);
    for (std::uint64_t p : path) {
      state ^= 0x510e527fade682d1ull + p;
      splitmix64(state);
    }
    std::uint64_t s = state;
    return Rng(splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  // Standard real normal N(0, 1), Box-Muller.
  double normal() {
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  // Circularly symmetric complex normal CN(0, 1): E|z|^2 = 1,
  // real and imaginary parts each N(0, 1/2).
  std::complex<double> complex_normal() {
    double r = std::sqrt(-std::log(uniform_pos()));
    double phi = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  // Uniform integer in [0, n), n >= 1. Unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t t = (-n) % n;
    for (;;) {
      __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
      if (static_cast<std::uint64_t>(m) >= t) return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bcfb
