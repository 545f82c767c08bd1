#include "gbst/rng.hpp"

#include <cmath>
#include <numbers>

namespace gbst {

std::pair<double, double> CounterRng::normal_pair(std::uint64_t pair_index) const {
  const double u1 = uniform(2 * pair_index);
  const double u2 = uniform(2 * pair_index + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double CounterRng::normal(std::uint64_t j) const {
  const auto [a, b] = normal_pair(j / 2);
  return j % 2 == 0 ? a : b;
}

}  // namespace gbst
