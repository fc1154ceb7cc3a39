#pragma once

#include <cmath>
#include <map>
#include <string>

#include "paga/nn.hpp"
#include "paga/tensor.hpp"

namespace paga {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam update of a single tensor. t is the 1-based step count.
inline void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                        long t, const AdamConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v)) {
    throw ShapeError("adam_update: shape mismatch");
  }
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

// Optimizer state over a whole ParamStore. Moments are zero-initialized and
// the step counter increments once per adam_step call.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return t_; }

  void step(nn::ParamStore& params, const std::map<std::string, Tensor>& grads) {
    ++t_;
    for (auto& [name, p] : params.items()) {
      auto git = grads.find(name);
      if (git == grads.end()) {
        throw ContractError("AdamState: missing gradient for " + name);
      }
      if (m_.find(name) == m_.end()) {
        m_.emplace(name, Tensor::zeros(p.shape()));
        v_.emplace(name, Tensor::zeros(p.shape()));
      }
      adam_update(p, git->second, m_.at(name), v_.at(name), t_, cfg_);
    }
  }

 private:
  AdamConfig cfg_;
  std::map<std::string, Tensor> m_, v_;
  long t_ = 0;
};

inline void adam_step(nn::ParamStore& params,
                      const std::map<std::string, Tensor>& grads,
                      AdamState& state) {
  state.step(params, grads);
}

}  // namespace paga
