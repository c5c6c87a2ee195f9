#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gripsim {

// Seeded generator. Child streams are derived from the seed and a label only,
// so forking never depends on how much of the parent stream was consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng fork(std::string_view label) const;
  Rng fork(std::string_view label, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);
  bool coin();
  std::uint64_t next();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);

}  // namespace gripsim
