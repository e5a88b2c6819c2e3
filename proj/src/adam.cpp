#include "hjnav/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hjnav {

namespace {

template <class Mat>
void update_block(Mat& p, Mat& m, Mat& v, const Mat& g, double b1, double b2, double bc1,
                  double bc2, double lr, double eps) {
  m = b1 * m + (1.0 - b1) * g;
  v = (b2 * v.array() + (1.0 - b2) * g.array().square()).matrix();
  p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

}  // namespace

void adam_step(AdamState& state, NetParams& params, const GradBuffers& gradient) {
  if (gradient.weights.size() != params.weights.size() ||
      state.m.weights.size() != params.weights.size())
    throw std::invalid_argument("adam_step: layer count mismatch");
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (gradient.weights[l].rows() != params.weights[l].rows() ||
        gradient.weights[l].cols() != params.weights[l].cols() ||
        gradient.biases[l].size() != params.biases[l].size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
  }

  state.step += 1;
  const double b1 = state.config.beta1;
  const double b2 = state.config.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update_block(params.weights[l], state.m.weights[l], state.v.weights[l],
                 gradient.weights[l], b1, b2, bc1, bc2, state.config.lr, state.config.eps);
    update_block(params.biases[l], state.m.biases[l], state.v.biases[l], gradient.biases[l],
                 b1, b2, bc1, bc2, state.config.lr, state.config.eps);
  }
}

}  // namespace hjnav
