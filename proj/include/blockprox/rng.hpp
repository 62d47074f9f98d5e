// rng.hpp - seeded random streams with a fixed-draw-count contract
//
// Every run derives its randomness from one master seed. A stream is
// identified by (master seed, node id, purpose tag) so that each node owns
// an independent sequence and two runs with the same seed replay bit-for-bit.
//
// Draw-count contract (all helpers consume a fixed number of engine outputs):
//   u64, uniform01, bounded, bernoulli : 1 output
//   normal                             : 2 outputs (Box-Muller, no caching)
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace blockprox {

// One splitmix64 step; used only to expand and mix seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream purpose tags. Values are part of the reproducibility contract:
// changing them changes every derived stream.
namespace stream {
constexpr std::uint64_t graph = 0x11;
constexpr std::uint64_t ground_truth = 0x12;
constexpr std::uint64_t data = 0x13;
constexpr std::uint64_t noise = 0x14;
constexpr std::uint64_t component_sample = 0x21;
constexpr std::uint64_t edge_sample = 0x22;
constexpr std::uint64_t walker = 0x23;
constexpr std::uint64_t mc_comm = 0x24;
constexpr std::uint64_t instance = 0x31;
constexpr std::uint64_t run = 0x32;
constexpr std::uint64_t probe = 0x41;
}  // namespace stream

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t node,
                                 std::uint64_t purpose) {
  std::uint64_t s = master;
  std::uint64_t m0 = splitmix64_next(s);
  s ^= node * 0x9E3779B97F4A7C15ull;
  std::uint64_t m1 = splitmix64_next(s);
  s ^= purpose * 0xBF58476D1CE4E5B9ull;
  std::uint64_t m2 = splitmix64_next(s);
  return m0 ^ (m1 << 1) ^ m2;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1} via the multiply-shift map. Exactly one draw;
  // bias is below 2^-40 for any n this library samples from.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::bounded: n must be >= 1");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller. Consumes two draws per call and keeps
  // no state, so the draw count per call is always two.
  double normal() {
    double u1 = static_cast<double>((u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline Rng make_stream(std::uint64_t master, std::uint64_t node,
                       std::uint64_t purpose) {
  return Rng(derive_seed(master, node, purpose));
}

}  // namespace blockprox
