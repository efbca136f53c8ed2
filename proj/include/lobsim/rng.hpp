#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lobsim {

// Substream tags so different consumers of one seed never share draws.
enum class StreamTag : std::uint32_t { FastPath = 1, OraclePath = 2, FirstCycle = 3, Study = 4, Lln = 5 };

// Independent generator for (seed, tag, index). Streams depend only on these
// three values, so work split across threads reproduces the serial draws.
class Rng {
 public:
  Rng(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
  }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lobsim
