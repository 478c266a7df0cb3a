#pragma once

#include "flowbp/network.hpp"

namespace flowbp::instances {

// Triangle 1->2->3 plus a direct arc 1->3; one unit from 1 to 3.
inline RawNetwork t1_raw(Int direct_cost = 3) {
  RawNetwork raw;
  raw.nodes = {{1, 1}, {2, 0}, {3, -1}};
  raw.arcs = {{1, 1, 2, 2, linear_cost(1, 2)},
              {2, 2, 3, 2, linear_cost(1, 2)},
              {3, 1, 3, 2, linear_cost(direct_cost, 2)}};
  return raw;
}

inline FlowNetwork t1(Int direct_cost = 3) { return validate(t1_raw(direct_cost)); }

// Same triangle with costs D, D and 2D - 1 on unit capacities. The direct
// arc is cheaper by one, which BP only notices after a number of rounds
// growing linearly in D.
inline FlowNetwork fig6(Int d) {
  RawNetwork raw;
  raw.nodes = {{1, 1}, {2, 0}, {3, -1}};
  raw.arcs = {{1, 1, 2, 1, linear_cost(d, 1)},
              {2, 2, 3, 1, linear_cost(d, 1)},
              {3, 1, 3, 1, linear_cost(2 * d - 1, 1)}};
  return validate(std::move(raw));
}

}  // namespace flowbp::instances
