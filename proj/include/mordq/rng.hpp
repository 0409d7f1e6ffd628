#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace mordq {

// Seed for an independent named stream split off a master seed. Streams are
// keyed by name so enabling one feature never shifts another feature's draws.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) noexcept;

// mt19937_64 with hand-written distribution transforms; draws are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view stream) : engine_(derive_seed(master, stream)) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n); n must be positive.
  std::size_t below(std::size_t n);
  // Standard exponential, rate 1.
  double exponential();
  // Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace mordq
