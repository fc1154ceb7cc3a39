#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "paga/autodiff.hpp"
#include "paga/nn.hpp"
#include "paga/random.hpp"

namespace paga {

// Edge-sequence feature extractor forms. Recurrent and concatenation are
// order-sensitive; summation is permutation-invariant by construction.
enum class PhiKind { kRecurrent, kSummation, kConcatenation };

inline const char* phi_kind_name(PhiKind k) {
  switch (k) {
    case PhiKind::kRecurrent: return "recurrent";
    case PhiKind::kSummation: return "summation";
    case PhiKind::kConcatenation: return "concatenation";
  }
  return "?";
}

inline PhiKind phi_kind_from_name(const std::string& s) {
  if (s == "recurrent" || s == "lstm") return PhiKind::kRecurrent;
  if (s == "summation" || s == "sum") return PhiKind::kSummation;
  if (s == "concatenation" || s == "concat") return PhiKind::kConcatenation;
  throw std::invalid_argument("unknown phi kind: " + s);
}

// Maps a sequence of edge-feature vectors (length 1..lambda) to n_head gate
// values. All variants process a batch of same-length sequences at once:
// steps[t] is the [n, input_width] matrix of the t-th edge features.
struct PhiExtractor {
  PhiKind kind = PhiKind::kRecurrent;
  std::size_t input_width = 1;   // C_e
  std::size_t hidden = 16;       // LSTM state / summation intermediate width
  std::size_t n_head = 1;
  int lambda = 2;
  std::string prefix = "phi";

  void init_params(nn::ParamStore& store, Rng& rng) const {
    switch (kind) {
      case PhiKind::kRecurrent: {
        cell().init_params(store, rng);
        store.add(prefix + ".head.weight",
                  nn::uniform_init(rng, {hidden, n_head}, hidden));
        store.add(prefix + ".head.bias", Tensor::zeros({n_head}));
        break;
      }
      case PhiKind::kSummation: {
        store.add(prefix + ".edge.weight",
                  nn::uniform_init(rng, {input_width, hidden}, input_width));
        store.add(prefix + ".edge.bias", Tensor::zeros({hidden}));
        store.add(prefix + ".head.weight",
                  nn::uniform_init(rng, {hidden, n_head}, hidden));
        store.add(prefix + ".head.bias", Tensor::zeros({n_head}));
        break;
      }
      case PhiKind::kConcatenation: {
        std::size_t slots = static_cast<std::size_t>(lambda) * input_width;
        store.add(prefix + ".slot.weight",
                  nn::uniform_init(rng, {slots, n_head}, slots));
        store.add(prefix + ".slot.bias", Tensor::zeros({n_head}));
        break;
      }
    }
  }

  // steps: l matrices [n, input_width], 1 <= l <= lambda. Returns [n, n_head].
  ad::Var apply_batch(ad::Tape& tape, const nn::BoundParams& params,
                      const std::vector<ad::Var>& steps) const {
    if (steps.empty()) {
      throw std::invalid_argument(
          "phi: empty sequence (self attention is the self-gate's job)");
    }
    if (steps.size() > static_cast<std::size_t>(lambda)) {
      throw std::invalid_argument("phi: sequence longer than lambda");
    }
    const std::size_t n = steps[0].value().rows();
    for (const ad::Var& s : steps) {
      if (s.value().rank() != 2 || s.value().cols() != input_width ||
          s.value().rows() != n) {
        throw ShapeError("phi: step features must be [n, input_width]");
      }
    }
    using namespace ad;
    switch (kind) {
      case PhiKind::kRecurrent: {
        Var h = tape.constant(Tensor::zeros({n, hidden}));
        Var c = tape.constant(Tensor::zeros({n, hidden}));
        for (const Var& x : steps) {
          auto [h2, c2] = cell().step(params, x, h, c);
          h = h2;
          c = c2;
        }
        return add_bias(matmul(h, params[prefix + ".head.weight"]),
                        params[prefix + ".head.bias"]);
      }
      case PhiKind::kSummation: {
        Var z = add_bias(matmul(steps[0], params[prefix + ".edge.weight"]),
                         params[prefix + ".edge.bias"]);
        for (std::size_t t = 1; t < steps.size(); ++t) {
          z = add(z, add_bias(matmul(steps[t], params[prefix + ".edge.weight"]),
                              params[prefix + ".edge.bias"]));
        }
        return add_bias(matmul(z, params[prefix + ".head.weight"]),
                        params[prefix + ".head.bias"]);
      }
      case PhiKind::kConcatenation: {
        std::vector<Var> slots = steps;
        std::size_t pad = static_cast<std::size_t>(lambda) - steps.size();
        if (pad > 0) {
          slots.push_back(
              tape.constant(Tensor::zeros({n, pad * input_width})));
        }
        return add_bias(matmul(concat_cols(slots), params[prefix + ".slot.weight"]),
                        params[prefix + ".slot.bias"]);
      }
    }
    throw std::logic_error("phi: unreachable");
  }

  nn::LstmCell cell() const {
    return nn::LstmCell{input_width, hidden, prefix + ".lstm"};
  }
};

// Single-sequence convenience: gate values for one edge-feature sequence.
inline ad::Var phi_apply(ad::Tape& tape, const nn::BoundParams& params,
                         const PhiExtractor& phi,
                         const std::vector<std::vector<double>>& seq) {
  std::vector<ad::Var> steps;
  steps.reserve(seq.size());
  for (const auto& f : seq) {
    if (f.size() != phi.input_width) {
      throw ShapeError("phi_apply: feature width " + std::to_string(f.size()) +
                       " != input width " + std::to_string(phi.input_width));
    }
    steps.push_back(tape.constant(Tensor({1, f.size()}, f)));
  }
  ad::Var gates = phi.apply_batch(tape, params, steps);  // [1, n_head]
  return ad::reshape(gates, {phi.n_head});
}

}  // namespace paga
