#pragma once

#include <cmath>
#include <vector>

#include "paga/autodiff.hpp"
#include "paga/graph.hpp"
#include "paga/nn.hpp"

namespace paga {

// Renormalized Laplacian D^{-1/2} (A + I) D^{-1/2}. Edge directions are
// dropped and parallel edges collapse into a single adjacency entry; a
// self-edge is added for every vertex.
inline Tensor gcn_laplacian(const HeteroGraph& g) {
  const std::size_t n = g.num_vertices();
  Tensor a = Tensor::zeros({n, n});
  for (const Edge& e : g.edges()) {
    if (e.source == e.target) continue;  // the I term covers self-loops
    a.at(e.source, e.target) = 1.0;
    a.at(e.target, e.source) = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) a.at(i, i) = 1.0;
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a.at(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
  }
  Tensor l = Tensor::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      l.at(i, j) = inv_sqrt_deg[i] * a.at(i, j) * inv_sqrt_deg[j];
    }
  }
  return l;
}

// Stacked propagation x <- L (x W) per layer, no nonlinearities.
inline ad::Var gcn_forward(ad::Var laplacian, ad::Var x,
                           const std::vector<ad::Var>& layer_weights) {
  ad::Var h = x;
  for (const ad::Var& w : layer_weights) {
    h = ad::matmul(laplacian, ad::matmul(h, w));
  }
  return h;
}

// Linear GCN in spectral-polynomial form: y = sum_k c_k L^k x. This is the
// exact function class of a depth-k linear GCN with per-layer passthrough,
// parameterized by the polynomial coefficients directly so the training
// objective is convex. Matches the feature family the least-squares oracle
// fits.
struct LinearGcn {
  int depth = 2;
  Tensor laplacian;
  std::vector<Tensor> powers;  // L^0 .. L^depth
  nn::ParamStore params;       // "coef" [depth + 1]

  static LinearGcn create(const HeteroGraph& g, int depth, Rng& rng) {
    LinearGcn m;
    m.depth = depth;
    m.laplacian = gcn_laplacian(g);
    Tensor p = Tensor::identity(g.num_vertices());
    for (int k = 0; k <= depth; ++k) {
      m.powers.push_back(p);
      p = matmul_values(p, m.laplacian);
    }
    m.params.add("coef", nn::uniform_init(rng, {static_cast<std::size_t>(depth) + 1}, 1));
    return m;
  }

  // x: [V, B] columns of examples (scalar vertex signals).
  ad::Var forward_columns(ad::Tape& tape, const nn::BoundParams& bound,
                          ad::Var x) const {
    using namespace ad;
    Var coef = bound["coef"];
    std::optional<Var> prop;  // sum_k c_k L^k
    for (int k = 0; k <= depth; ++k) {
      Var term = mul_scalar(tape.constant(powers[k]), pick(coef, k));
      prop = prop ? add(*prop, term) : term;
    }
    return matmul(*prop, x);
  }

  // The propagation matrix implied by the current coefficients.
  Tensor propagation() const {
    const Tensor& c = params.get("coef");
    Tensor p = Tensor::zeros(laplacian.shape());
    for (int k = 0; k <= depth; ++k) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += c[k] * powers[k][i];
    }
    return p;
  }
};

}  // namespace paga
