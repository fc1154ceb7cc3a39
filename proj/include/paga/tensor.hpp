#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace paga {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violations of API contracts (wrong tape, lambda mismatch, non-scalar loss).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Dense row-major tensor of doubles. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) are the cases used throughout.
class Tensor {
 public:
  Tensor() : shape_{}, values_(1, 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (count(shape_) != values_.size()) {
      throw ShapeError("Tensor: shape does not match value count");
    }
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  static Tensor zeros(std::vector<std::size_t> shape) {
    std::size_t n = count(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<std::size_t> shape, double v) {
    std::size_t n = count(shape);
    return Tensor(std::move(shape), std::vector<double>(n, v));
  }

  static Tensor identity(std::size_t n) {
    Tensor t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  std::size_t rows() const {
    require_rank(2, "rows");
    return shape_[0];
  }
  std::size_t cols() const {
    require_rank(2, "cols");
    return shape_[1];
  }
  std::size_t length() const {
    require_rank(1, "length");
    return shape_[0];
  }

  double item() const {
    if (values_.size() != 1) throw ShapeError("Tensor::item: not a scalar");
    return values_[0];
  }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double& at(std::size_t r, std::size_t c) {
    require_rank(2, "at");
    return values_[r * shape_[1] + c];
  }
  double at(std::size_t r, std::size_t c) const {
    require_rank(2, "at");
    return values_[r * shape_[1] + c];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void fill(double v) { values_.assign(values_.size(), v); }

  Tensor transposed() const {
    require_rank(2, "transposed");
    Tensor out = zeros({shape_[1], shape_[0]});
    for (std::size_t r = 0; r < shape_[0]; ++r) {
      for (std::size_t c = 0; c < shape_[1]; ++c) out.at(c, r) = at(r, c);
    }
    return out;
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

 private:
  void require_rank(std::size_t r, const char* what) const {
    if (shape_.size() != r) {
      throw ShapeError(std::string("Tensor::") + what + ": rank " +
                       std::to_string(shape_.size()) + ", expected " +
                       std::to_string(r));
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// C = A * B for rank-2 tensors, ikj loop order.
inline Tensor matmul_values(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes");
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c = Tensor::zeros({m, n});
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* pc = c.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

}  // namespace paga
