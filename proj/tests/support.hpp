#pragma once

#include <random>
#include <vector>

#include "swexp/prob.hpp"

namespace swexp::test {

/// The binary-input, ternary-output source used throughout the numerical examples.
inline Source ternary_source() {
  return Source(Pmf({0.2, 0.8}), CondPmf({{0.8, 0.15, 0.05}, {0.05, 0.15, 0.8}}));
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double floor = 0.02) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> v(k);
  double s = 0.0;
  for (double& x : v) {
    x = g(rng) + floor;
    s += x;
  }
  for (double& x : v) x /= s;
  return v;
}

inline Source random_source(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
  std::vector<std::vector<double>> rows;
  for (std::size_t x = 0; x < nx; ++x) rows.push_back(random_simplex(rng, ny));
  return Source(Pmf(random_simplex(rng, nx, 0.1)), CondPmf(rows));
}

}  // namespace swexp::test
