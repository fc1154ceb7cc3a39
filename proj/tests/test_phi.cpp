#include <cmath>

#include "doctest.h"
#include "fd_check.hpp"
#include "paga/phi.hpp"
#include "paga/random.hpp"

using namespace paga;
using namespace paga::ad;

namespace {

std::vector<std::vector<double>> random_sequence(Rng& rng, std::size_t len,
                                                 std::size_t width) {
  std::vector<std::vector<double>> seq(len, std::vector<double>(width));
  for (auto& row : seq) {
    for (double& v : row) v = rng.normal();
  }
  return seq;
}

Tensor gates_of(const PhiExtractor& phi, const nn::ParamStore& params,
                const std::vector<std::vector<double>>& seq) {
  Tape tape;
  nn::BoundParams bp = nn::BoundParams::bind(tape, params);
  return phi_apply(tape, bp, phi, seq).value();
}

}  // namespace

TEST_CASE("summation phi is invariant to reversing the sequence") {
  Rng rng(101);
  PhiExtractor phi{PhiKind::kSummation, 4, 6, 3, 3};
  nn::ParamStore params;
  phi.init_params(params, rng);
  for (int trial = 0; trial < 5; ++trial) {
    auto seq = random_sequence(rng, 3, 4);
    auto rev = seq;
    std::reverse(rev.begin(), rev.end());
    Tensor a = gates_of(phi, params, seq);
    Tensor b = gates_of(phi, params, rev);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("recurrent phi distinguishes a sequence from its reversal") {
  Rng rng(102);
  PhiExtractor phi{PhiKind::kRecurrent, 4, 6, 2, 2};
  nn::ParamStore params;
  phi.init_params(params, rng);
  auto seq = random_sequence(rng, 2, 4);
  auto rev = seq;
  std::reverse(rev.begin(), rev.end());
  Tensor a = gates_of(phi, params, seq);
  Tensor b = gates_of(phi, params, rev);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
  }
  CHECK(max_diff > 1e-9);
}

TEST_CASE("concatenation phi on a short sequence equals the padded linear map") {
  Rng rng(103);
  PhiExtractor phi{PhiKind::kConcatenation, 3, 1, 2, 2};
  nn::ParamStore params;
  phi.init_params(params, rng);
  auto seq = random_sequence(rng, 1, 3);
  Tensor got = gates_of(phi, params, seq);
  // Manual evaluation: gates_h = sum_j w[j,h] * (seq ++ zeros)[j] + b[h].
  const Tensor& w = params.get("phi.slot.weight");  // [6, 2]
  const Tensor& b = params.get("phi.slot.bias");
  for (std::size_t h = 0; h < 2; ++h) {
    double expect = b[h];
    for (std::size_t j = 0; j < 3; ++j) expect += seq[0][j] * w.at(j, h);
    CHECK(got[h] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("phi output width is n_head for every admissible length") {
  Rng rng(104);
  for (PhiKind kind :
       {PhiKind::kRecurrent, PhiKind::kSummation, PhiKind::kConcatenation}) {
    PhiExtractor phi{kind, 3, 5, 4, 3};
    nn::ParamStore params;
    phi.init_params(params, rng);
    for (std::size_t len = 1; len <= 3; ++len) {
      Tensor g = gates_of(phi, params, random_sequence(rng, len, 3));
      CHECK(g.rank() == 1);
      CHECK(g.length() == 4);
    }
  }
}

TEST_CASE("phi rejects empty and over-length sequences") {
  Rng rng(105);
  PhiExtractor phi{PhiKind::kRecurrent, 3, 4, 1, 2};
  nn::ParamStore params;
  phi.init_params(params, rng);
  Tape tape;
  nn::BoundParams bp = nn::BoundParams::bind(tape, params);
  CHECK_THROWS_AS(phi_apply(tape, bp, phi, {}), std::invalid_argument);
  CHECK_THROWS_AS(phi_apply(tape, bp, phi, random_sequence(rng, 3, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(phi_apply(tape, bp, phi, random_sequence(rng, 1, 5)),
                  ShapeError);
}

TEST_CASE("every phi variant passes finite-difference checks") {
  Rng rng(106);
  for (PhiKind kind :
       {PhiKind::kRecurrent, PhiKind::kSummation, PhiKind::kConcatenation}) {
    CAPTURE(phi_kind_name(kind));
    PhiExtractor phi{kind, 3, 4, 2, 2};
    nn::ParamStore params;
    phi.init_params(params, rng);
    // Random direction keeps the scalarized loss sensitive to both heads.
    Tensor dir = Tensor::zeros({2});
    dir[0] = rng.normal();
    dir[1] = rng.normal();
    auto seq = random_sequence(rng, 2, 3);

    auto loss_fn = [&](Tape& tape, const nn::BoundParams& bp) {
      Var gates = phi_apply(tape, bp, phi, seq);
      return sum(mul(gates, tape.constant(dir)));
    };
    std::map<std::string, Tensor> grads;
    {
      Tape tape;
      nn::BoundParams bp = nn::BoundParams::bind(tape, params);
      Var loss = loss_fn(tape, bp);
      tape.backward(loss);
      grads = bp.grads();
    }
    auto eval = [&]() {
      Tape tape;
      nn::BoundParams bp = nn::BoundParams::bind(tape, params);
      return loss_fn(tape, bp).value().item();
    };
    CHECK(test::check_all_grads(params, grads, eval) == 0);
  }
}
