#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "paga/autodiff.hpp"
#include "paga/random.hpp"
#include "paga/tensor.hpp"

#include "json.hpp"

namespace paga::nn {

// Named parameter tensors. std::map keeps iteration order deterministic,
// which the optimizer and serialization rely on.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor init) {
    auto [it, inserted] = items_.emplace(name, std::move(init));
    if (!inserted) throw ContractError("ParamStore: duplicate parameter " + name);
    return it->second;
  }

  Tensor& get(const std::string& name) {
    auto it = items_.find(name);
    if (it == items_.end()) throw ContractError("ParamStore: unknown parameter " + name);
    return it->second;
  }

  const Tensor& get(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) throw ContractError("ParamStore: unknown parameter " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return items_.count(name) != 0; }

  std::map<std::string, Tensor>& items() { return items_; }
  const std::map<std::string, Tensor>& items() const { return items_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, t] : items_) {
      j[name] = {{"shape", t.shape()}, {"values", t.values()}};
    }
    return j;
  }

  static ParamStore from_json(const nlohmann::json& j) {
    ParamStore s;
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::vector<std::size_t> shape =
          it.value().at("shape").get<std::vector<std::size_t>>();
      std::vector<double> values =
          it.value().at("values").get<std::vector<double>>();
      s.add(it.key(), Tensor(std::move(shape), std::move(values)));
    }
    return s;
  }

 private:
  std::map<std::string, Tensor> items_;
};

// Per-tape view of a ParamStore: every parameter becomes a leaf Var so that
// backward() leaves its gradient accessible by name.
class BoundParams {
 public:
  static BoundParams bind(ad::Tape& tape, const ParamStore& store) {
    BoundParams b;
    for (const auto& [name, t] : store.items()) {
      b.vars_.emplace(name, tape.leaf(t));
    }
    return b;
  }

  ad::Var operator[](const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw ContractError("BoundParams: unknown parameter " + name);
    return it->second;
  }

  std::map<std::string, Tensor> grads() const {
    std::map<std::string, Tensor> g;
    for (const auto& [name, v] : vars_) g.emplace(name, v.grad());
    return g;
  }

 private:
  std::map<std::string, ad::Var> vars_;
};

// Uniform in [-s, s] with s = 1/sqrt(fan_in); biases are zero-initialized.
inline Tensor uniform_init(Rng& rng, std::vector<std::size_t> shape,
                           std::size_t fan_in) {
  double s = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  Tensor t = Tensor::zeros(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-s, s);
  return t;
}

// One-layer LSTM cell operating on a batch of rows. Gate order i, f, g, o.
struct LstmCell {
  std::size_t input_width = 1;
  std::size_t hidden_width = 1;
  std::string prefix = "lstm";

  void init_params(ParamStore& store, Rng& rng) const {
    store.add(prefix + ".w_x",
              uniform_init(rng, {input_width, 4 * hidden_width}, input_width));
    store.add(prefix + ".w_h",
              uniform_init(rng, {hidden_width, 4 * hidden_width}, hidden_width));
    store.add(prefix + ".bias", Tensor::zeros({4 * hidden_width}));
  }

  // x: [n, input_width]; h, c: [n, hidden_width]. Returns (h', c').
  std::pair<ad::Var, ad::Var> step(const BoundParams& params, ad::Var x,
                                   ad::Var h, ad::Var c) const {
    using namespace ad;
    Var z = add_bias(add(matmul(x, params[prefix + ".w_x"]),
                         matmul(h, params[prefix + ".w_h"])),
                     params[prefix + ".bias"]);
    const std::size_t hw = hidden_width;
    Var gi = sigmoid(slice_cols(z, 0, hw));
    Var gf = sigmoid(slice_cols(z, hw, hw));
    Var gg = tanh(slice_cols(z, 2 * hw, hw));
    Var go = sigmoid(slice_cols(z, 3 * hw, hw));
    Var c_next = add(mul(gf, c), mul(gi, gg));
    Var h_next = mul(go, tanh(c_next));
    return {h_next, c_next};
  }
};

}  // namespace paga::nn
