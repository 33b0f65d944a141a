#pragma once

#include "wasn/flownet.hpp"

namespace wasn::fixture {

// Three sensors forwarding to one FC with fractional ratios.
inline NormalizedFlowMatrix example_routing() {
  Matrix s(3, 4);
  s << 0, 0.5, 0.5, 0,
       0, 0, 0.4, 0.6,
       0, 0, 0, 1;
  return {3, 1, s};
}

inline NodeDeployment example_positions() { return {3, 1, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}}; }

inline Vector example_rates() { return (Vector(3) << 1, 1, 2).finished(); }

inline PhysicalParams unit_params() { return {1.0, 1.0, 4.0}; }

}  // namespace wasn::fixture
