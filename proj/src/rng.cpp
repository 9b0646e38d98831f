#include "csic/rng.hpp"

#include <cmath>
#include <numbers>

namespace csic {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

namespace {
double box_muller(std::uint64_t a, std::uint64_t b) {
  // (0, 1] for the log argument.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}
}  // namespace

double Rng::normal() {
  const std::uint64_t a = next_u64();
  const std::uint64_t b = next_u64();
  return box_muller(a, b);
}

double Rng::normal_at(std::uint64_t i) const { return box_muller(at(2 * i), at(2 * i + 1)); }

}  // namespace csic
