#pragma once

#include <Eigen/Core>

namespace hjnav {

/// Per-input affine normalization feeding the sine network:
/// net_x[i] = clamp((phys_x[i] - offset[i]) / scale[i]).
/// Sine networks need O(1) inputs; the clamp saturates out-of-box queries
/// (virtual padding slots, far pairs) at a value distinct from any real one.
struct InputScaler {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;
  double clamp_lo = -2.0;
  double clamp_hi = 2.0;

  Eigen::VectorXd normalize(const Eigen::Ref<const Eigen::VectorXd>& phys) const {
    Eigen::VectorXd out = ((phys - offset).array() / scale.array())
                              .cwiseMax(clamp_lo)
                              .cwiseMin(clamp_hi);
    return out;
  }

  /// d(net_x[i])/d(phys_x[i]); zero where the clamp is active.
  double jacobian_entry(int i, double phys_value) const {
    const double raw = (phys_value - offset[i]) / scale[i];
    if (raw <= clamp_lo || raw >= clamp_hi) return 0.0;
    return 1.0 / scale[i];
  }

  bool operator==(const InputScaler& o) const {
    return offset == o.offset && scale == o.scale && clamp_lo == o.clamp_lo &&
           clamp_hi == o.clamp_hi;
  }
};

}  // namespace hjnav
