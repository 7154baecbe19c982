#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdyn/integrators.hpp"

namespace sdyn::test {

// Inertial OU defaults.
inline GenModelParams ou_params() {
  GenModelParams p;
  p.mass = 0.1;
  p.stiffness = 1.5;
  p.gamma = 3.2;
  p.kbt = 0.1;
  p.dt = 1e-3;
  p.n_steps = 18;
  p.dim = 3;
  p.const_force.assign(3, 0.0);
  return p;
}

inline double rel_err(double got, double want, double floor = 1e-300) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

// Largest componentwise error relative to the reference vector's max norm.
inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    scale = std::max(scale, std::abs(want[i]));
    err = std::max(err, std::abs(got[i] - want[i]));
  }
  return scale == 0.0 ? err : err / scale;
}

}  // namespace sdyn::test
