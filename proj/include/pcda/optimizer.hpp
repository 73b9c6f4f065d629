#pragma once

#include <cmath>
#include <cstddef>

#include "pcda/nn.hpp"

namespace pcda {

/// SGD with momentum and the annealed rate eta(p) = eta0 / (1 + alpha p)^gamma.
struct OptimizerSchedule {
  double eta0 = 0.01;
  double alpha = 10.0;
  double gamma = 0.75;
  double momentum = 0.9;
  /// Multiplier on the rate of the feature extractor only.
  double feature_lr_scale = 0.1;

  double learning_rate(double progress) const {
    return eta0 / std::pow(1.0 + alpha * progress, gamma);
  }
};

/// v <- momentum v + g;  w <- w - lr v.
inline void sgd_step(AffineLayer& layer, double lr, double momentum) {
  auto& w = layer.weight.data();
  auto& vw = layer.velocity_weight.data();
  const auto& gw = layer.grad_weight.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    vw[i] = momentum * vw[i] + gw[i];
    w[i] -= lr * vw[i];
  }
  for (std::size_t j = 0; j < layer.bias.size(); ++j) {
    layer.velocity_bias[j] = momentum * layer.velocity_bias[j] + layer.grad_bias[j];
    layer.bias[j] -= lr * layer.velocity_bias[j];
  }
}

inline void sgd_step(Mlp& net, double lr, double momentum) {
  net.for_each_affine([&](AffineLayer& l) { sgd_step(l, lr, momentum); });
}

/// One optimizer step at training progress p in [0, 1].
inline void sgd_step(NetworkParams& params, const OptimizerSchedule& sched, double progress) {
  const double lr = sched.learning_rate(progress);
  sgd_step(params.feature_extractor, lr * sched.feature_lr_scale, sched.momentum);
  sgd_step(params.source_classifier, lr, sched.momentum);
  sgd_step(params.target_classifier, lr, sched.momentum);
  sgd_step(params.discriminator, lr, sched.momentum);
}

}  // namespace pcda
