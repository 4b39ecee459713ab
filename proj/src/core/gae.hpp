#pragma once

#include <cstdint>
#include <vector>

#include "core/error.hpp"
#include "core/nets.hpp"

namespace flores {

// Standard recursive generalized advantage estimation over one trajectory.
// done[t] marks a terminal transition: no bootstrap flows past it.
template <typename Scalar>
void gae(const nets::Vec<Scalar>& rewards, const nets::Vec<Scalar>& values,
         Scalar bootstrap_value, const std::vector<uint8_t>& done, Scalar gamma, Scalar lambda,
         nets::Vec<Scalar>* advantages, nets::Vec<Scalar>* returns) {
  const auto n = rewards.size();
  if (values.size() != n || static_cast<Eigen::Index>(done.size()) != n)
    throw_invalid("gae: input lengths must match");
  advantages->resize(n);
  returns->resize(n);
  Scalar next_advantage = Scalar(0);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Scalar not_done = done[static_cast<size_t>(t)] ? Scalar(0) : Scalar(1);
    const Scalar next_value = (t + 1 < n) ? values[t + 1] : bootstrap_value;
    const Scalar delta = rewards[t] + gamma * not_done * next_value - values[t];
    next_advantage = delta + gamma * lambda * not_done * next_advantage;
    (*advantages)[t] = next_advantage;
    (*returns)[t] = next_advantage + values[t];
  }
}

}  // namespace flores
