#include "tezo/rng.hpp"

#include <cmath>
#include <numbers>

namespace tezo {

double GaussianStream::uniform_at(std::uint64_t j) const {
  // splitmix64 step j of the stream keyed by seed_; value in (0, 1].
  const std::uint64_t bits = splitmix_finalize(seed_ + (j + 1) * kGoldenGamma);
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

double GaussianStream::normal_at(std::uint64_t i) const {
  // Box-Muller pair p covers draws 2p and 2p+1. u1 is in (0,1] so the log
  // is finite; both outputs are consumed so replay is index-exact.
  const std::uint64_t p = i / 2;
  const double u1 = uniform_at(2 * p);
  const double u2 = uniform_at(2 * p + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (i % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

}  // namespace tezo
