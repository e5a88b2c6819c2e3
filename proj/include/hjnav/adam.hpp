#pragma once

#include "hjnav/mlp.hpp"

namespace hjnav {

struct AdamConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates shaped like the parameters.
struct AdamState {
  AdamConfig config;
  GradBuffers m;
  GradBuffers v;
  long step = 0;

  static AdamState create(const AdamConfig& cfg, const NetParams& params) {
    AdamState s;
    s.config = cfg;
    s.m.init_like(params);
    s.v.init_like(params);
    return s;
  }
};

/// Standard Adam update with bias correction, in place. Throws
/// std::invalid_argument on shape mismatch.
void adam_step(AdamState& state, NetParams& params, const GradBuffers& gradient);

}  // namespace hjnav
