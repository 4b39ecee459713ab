#include "core/policy.hpp"

namespace flores {

nets::Vec<double> default_observation_scale(const NetDims& dims) {
  nets::Vec<double> s = nets::Vec<double>::Ones(dims.obs);
  if (dims.obs == kObsDim) {
    s.segment(0, 3).setConstant(0.25);   // base angular velocity
    s.segment(3, 3).setConstant(1.0);    // gravity
    s[6] = 2.0;                          // vx command
    s[7] = 2.0;                          // vy command
    s[8] = 0.25;                         // wz command
    s.segment(9, 12).setConstant(1.0);   // joint position errors
    s.segment(21, 16).setConstant(0.05); // joint velocities (wheels spin fast)
    s.segment(37, 16).setConstant(1.0);  // previous action
  }
  return s;
}

}  // namespace flores
