#pragma once

#include <cmath>

#include "logxlate/nn/config.hpp"
#include "logxlate/nn/tensor.hpp"

namespace logxlate {

// Adam with bias correction. Moments mirror the parameter store shape.
template <class S>
class Adam {
 public:
  Adam(const OptimizerConfig& cfg, const TensorStore<S>& params)
      : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

  void step(TensorStore<S>& params, const TensorStore<S>& grads) {
    ++t_;
    const S b1 = static_cast<S>(cfg_.beta1);
    const S b2 = static_cast<S>(cfg_.beta2);
    const S eps = static_cast<S>(cfg_.epsilon);
    const S corr1 = S(1) - static_cast<S>(std::pow(cfg_.beta1, t_));
    const S corr2 = S(1) - static_cast<S>(std::pow(cfg_.beta2, t_));
    const S alpha = static_cast<S>(cfg_.learning_rate);
    for (const auto& name : params.names()) {
      Mat<S>& p = params.at(name);
      const Mat<S>& g = grads.at(name);
      Mat<S>& m = m_.at(name);
      Mat<S>& v = v_.at(name);
      m.array() = b1 * m.array() + (S(1) - b1) * g.array();
      v.array() = b2 * v.array() + (S(1) - b2) * g.array().square();
      p.array() -= alpha * (m.array() / corr1) /
                   ((v.array() / corr2).sqrt() + eps);
    }
  }

  long step_count() const { return t_; }

 private:
  OptimizerConfig cfg_;
  TensorStore<S> m_, v_;
  long t_ = 0;
};

}  // namespace logxlate
