#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "paga/tensor.hpp"

namespace paga::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
};

// Record of primitive operations in creation (= topological) order.
// Usage pattern: fresh tape per training step; leaves for parameters and
// inputs, ops build the forward graph, backward() runs once.
class Tape {
 public:
  Var leaf(Tensor value) { return push(std::move(value), {}, nullptr); }

  Var constant(Tensor value) { return push(std::move(value), {}, nullptr); }

  std::size_t size() const { return nodes_.size(); }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }

  // Seeds d(loss)/d(loss) = 1 and pulls gradients back through every node
  // exactly once, in reverse creation order.
  void backward(const Var& loss) {
    if (loss.tape != this) throw ContractError("backward: var from another tape");
    if (nodes_[loss.id].value.size() != 1) {
      throw ContractError("backward: loss must be scalar");
    }
    nodes_[loss.id].grad.fill(1.0);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (nodes_[i].pull) nodes_[i].pull(*this);
    }
  }

  // --- internal, used by the op implementations ---
  Var push(Tensor value, std::vector<std::size_t> parents,
           std::function<void(Tape&)> pull) {
    Node n;
    n.grad = Tensor::zeros(value.shape());
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
  }

  Tensor& grad_ref(std::size_t id) { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> parents;
    std::function<void(Tape&)> pull;
  };
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }
inline const Tensor& Var::grad() const { return tape->grad(id); }

namespace detail {

inline Tape& same_tape(const Var& a, const Var& b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw ContractError(std::string(op) + ": vars from different tapes");
  }
  return *a.tape;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

}  // namespace detail

// ---- elementwise ----

inline Var add(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "add");
  detail::require(a.value().same_shape(b.value()), "add: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return t.push(std::move(out), {a.id, b.id}, [a, b, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gb = tp.grad_ref(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

inline Var sub(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "sub");
  detail::require(a.value().same_shape(b.value()), "sub: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return t.push(std::move(out), {a.id, b.id}, [a, b, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gb = tp.grad_ref(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

inline Var mul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "mul");
  detail::require(a.value().same_shape(b.value()), "mul: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return t.push(std::move(out), {a.id, b.id}, [a, b, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    const Tensor& av = tp.value(a.id);
    const Tensor& bv = tp.value(b.id);
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gb = tp.grad_ref(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * bv[i];
      gb[i] += g[i] * av[i];
    }
  });
}

inline Var div(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "div");
  detail::require(a.value().same_shape(b.value()), "div: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= b.value()[i];
  return t.push(std::move(out), {a.id, b.id}, [a, b, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    const Tensor& av = tp.value(a.id);
    const Tensor& bv = tp.value(b.id);
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gb = tp.grad_ref(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] / bv[i];
      gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
    }
  });
}

inline Var scale(Var a, double c) {
  Tape& t = *a.tape;
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return t.push(std::move(out), {a.id}, [a, c, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

inline Var neg(Var a) { return scale(a, -1.0); }

namespace detail {

template <typename F, typename DF>
Var unary(Var a, F f, DF df, const char* /*name*/) {
  Tape& t = *a.tape;
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(out[i]);
  return t.push(std::move(out), {a.id}, [a, df, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    const Tensor& x = tp.value(a.id);
    const Tensor& y = tp.value(id);
    Tensor& ga = tp.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace detail

inline Var tanh(Var a) {
  return detail::unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; }, "tanh");
}

inline Var sigmoid(Var a) {
  return detail::unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

inline Var exp(Var a) {
  return detail::unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; }, "exp");
}

inline Var leaky_relu(Var a, double slope = 0.2) {
  return detail::unary(
      a, [slope](double x) { return x >= 0.0 ? x : slope * x; },
      [slope](double x, double) { return x >= 0.0 ? 1.0 : slope; },
      "leaky_relu");
}

// ---- matrix ops ----

inline Var matmul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  if (a.value().rank() != 2 || b.value().rank() != 2 ||
      a.value().cols() != b.value().rows()) {
    throw ShapeError("matmul: incompatible shapes");
  }
  Tensor out = matmul_values(a.value(), b.value());
  return t.push(std::move(out), {a.id, b.id}, [a, b, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    // dA = g * B^T, dB = A^T * g
    Tensor da = matmul_values(g, tp.value(b.id).transposed());
    Tensor db = matmul_values(tp.value(a.id).transposed(), g);
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gb = tp.grad_ref(b.id);
    for (std::size_t i = 0; i < da.size(); ++i) ga[i] += da[i];
    for (std::size_t i = 0; i < db.size(); ++i) gb[i] += db[i];
  });
}

// [r,c] + [c] row-broadcast (the only broadcast in the engine).
inline Var add_bias(Var m, Var b) {
  Tape& t = detail::same_tape(m, b, "add_bias");
  if (m.value().rank() != 2 || b.value().rank() != 1 ||
      m.value().cols() != b.value().length()) {
    throw ShapeError("add_bias: expected [r,c] and [c]");
  }
  Tensor out = m.value();
  const std::size_t r = out.rows(), c = out.cols();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += b.value()[j];
  }
  return t.push(std::move(out), {m.id, b.id}, [m, b, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& gm = tp.grad_ref(m.id);
    Tensor& gb = tp.grad_ref(b.id);
    const std::size_t r = g.rows(), c = g.cols();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        gm[i * c + j] += g[i * c + j];
        gb[j] += g[i * c + j];
      }
    }
  });
}

// Broadcast multiply / divide by a rank-0 scalar node.
inline Var mul_scalar(Var a, Var s) {
  Tape& t = detail::same_tape(a, s, "mul_scalar");
  detail::require(s.value().size() == 1, "mul_scalar: s must be scalar");
  const double sv = s.value()[0];
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sv;
  return t.push(std::move(out), {a.id, s.id}, [a, s, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    const Tensor& av = tp.value(a.id);
    const double sv = tp.value(s.id)[0];
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gs = tp.grad_ref(s.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * sv;
      gs[0] += g[i] * av[i];
    }
  });
}

inline Var div_scalar(Var a, Var s) {
  Tape& t = detail::same_tape(a, s, "div_scalar");
  detail::require(s.value().size() == 1, "div_scalar: s must be scalar");
  const double sv = s.value()[0];
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sv;
  return t.push(std::move(out), {a.id, s.id}, [a, s, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    const Tensor& av = tp.value(a.id);
    const double sv = tp.value(s.id)[0];
    Tensor& ga = tp.grad_ref(a.id);
    Tensor& gs = tp.grad_ref(s.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] / sv;
      gs[0] -= g[i] * av[i] / (sv * sv);
    }
  });
}

// M[i,j] / d[j], columnwise broadcast over rows.
inline Var div_rowwise(Var m, Var d) {
  Tape& t = detail::same_tape(m, d, "div_rowwise");
  if (m.value().rank() != 2 || d.value().rank() != 1 ||
      m.value().cols() != d.value().length()) {
    throw ShapeError("div_rowwise: expected [r,c] and [c]");
  }
  Tensor out = m.value();
  const std::size_t r = out.rows(), c = out.cols();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= d.value()[j];
  }
  return t.push(std::move(out), {m.id, d.id}, [m, d, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    const Tensor& mv = tp.value(m.id);
    const Tensor& dv = tp.value(d.id);
    Tensor& gm = tp.grad_ref(m.id);
    Tensor& gd = tp.grad_ref(d.id);
    const std::size_t r = g.rows(), c = g.cols();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        gm[i * c + j] += g[i * c + j] / dv[j];
        gd[j] -= g[i * c + j] * mv[i * c + j] / (dv[j] * dv[j]);
      }
    }
  });
}

// M + s * I for square M and scalar s.
inline Var add_scaled_identity(Var m, Var s) {
  Tape& t = detail::same_tape(m, s, "add_scaled_identity");
  if (m.value().rank() != 2 || m.value().rows() != m.value().cols()) {
    throw ShapeError("add_scaled_identity: M must be square");
  }
  detail::require(s.value().size() == 1, "add_scaled_identity: s must be scalar");
  Tensor out = m.value();
  const std::size_t n = out.rows();
  for (std::size_t i = 0; i < n; ++i) out[i * n + i] += s.value()[0];
  return t.push(std::move(out), {m.id, s.id}, [m, s, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& gm = tp.grad_ref(m.id);
    Tensor& gs = tp.grad_ref(s.id);
    const std::size_t n = g.rows();
    for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    for (std::size_t i = 0; i < n; ++i) gs[0] += g[i * n + i];
  });
}

// ---- reductions ----

inline Var sum(Var a) {
  Tape& t = *a.tape;
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value()[i];
  return t.push(Tensor::scalar(s), {a.id}, [a, id = t.size()](Tape& tp) {
    const double g = tp.grad(id)[0];
    Tensor& ga = tp.grad_ref(a.id);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

inline Var mean(Var a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

// Column sums: [r,c] -> [c].
inline Var sum_rows(Var m) {
  Tape& t = *m.tape;
  detail::require(m.value().rank() == 2, "sum_rows: expected rank-2");
  const std::size_t r = m.value().rows(), c = m.value().cols();
  Tensor out = Tensor::zeros({c});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j] += m.value()[i * c + j];
  }
  return t.push(std::move(out), {m.id}, [m, r, c, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& gm = tp.grad_ref(m.id);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) gm[i * c + j] += g[j];
    }
  });
}

// Sum rows of [n,k] into [n_groups,k] buckets given a group id per row.
inline Var group_sum_rows(Var m, std::vector<std::size_t> group,
                          std::size_t n_groups) {
  Tape& t = *m.tape;
  detail::require(m.value().rank() == 2, "group_sum_rows: expected rank-2");
  const std::size_t n = m.value().rows(), k = m.value().cols();
  if (group.size() != n) {
    throw ShapeError("group_sum_rows: one group id per row required");
  }
  Tensor out = Tensor::zeros({n_groups, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out[group[i] * k + j] += m.value()[i * k + j];
    }
  }
  return t.push(std::move(out), {m.id},
                [m, group = std::move(group), k, id = t.size()](Tape& tp) {
                  const Tensor& g = tp.grad(id);
                  Tensor& gm = tp.grad_ref(m.id);
                  for (std::size_t i = 0; i < group.size(); ++i) {
                    for (std::size_t j = 0; j < k; ++j) {
                      gm[i * k + j] += g[group[i] * k + j];
                    }
                  }
                });
}

// ---- structural ops ----

inline Var reshape(Var a, std::vector<std::size_t> shape) {
  Tape& t = *a.tape;
  if (Tensor::count(shape) != a.value().size()) {
    throw ShapeError("reshape: element count mismatch");
  }
  Tensor out(std::move(shape), a.value().values());
  return t.push(std::move(out), {a.id}, [a, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    Tensor& ga = tp.grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

// Concatenate along the last axis. All rank-1, or all rank-2 with equal rows.
inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape& t = *parts[0].tape;
  const std::size_t rank = parts[0].value().rank();
  if (rank != 1 && rank != 2) throw ShapeError("concat: rank must be 1 or 2");
  std::size_t rows = rank == 2 ? parts[0].value().rows() : 1;
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    detail::same_tape(parts[0], p, "concat");
    if (p.value().rank() != rank ||
        (rank == 2 && p.value().rows() != rows)) {
      throw ShapeError("concat: incompatible shapes");
    }
    std::size_t w = rank == 2 ? p.value().cols() : p.value().length();
    widths.push_back(w);
    ids.push_back(p.id);
    total += w;
  }
  Tensor out = rank == 2 ? Tensor::zeros({rows, total}) : Tensor::zeros({total});
  std::size_t off = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Tensor& v = parts[pi].value();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < widths[pi]; ++j) {
        out[i * total + off + j] = v[i * widths[pi] + j];
      }
    }
    off += widths[pi];
  }
  return t.push(std::move(out), ids,
                [ids, widths, rows, total, id = t.size()](Tape& tp) {
                  const Tensor& g = tp.grad(id);
                  std::size_t off = 0;
                  for (std::size_t pi = 0; pi < ids.size(); ++pi) {
                    Tensor& gp = tp.grad_ref(ids[pi]);
                    for (std::size_t i = 0; i < rows; ++i) {
                      for (std::size_t j = 0; j < widths[pi]; ++j) {
                        gp[i * widths[pi] + j] += g[i * total + off + j];
                      }
                    }
                    off += widths[pi];
                  }
                });
}

// Stack rank-2 blocks with equal column count on top of each other.
inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = *parts[0].tape;
  const std::size_t cols = parts[0].value().cols();
  std::size_t total = 0;
  std::vector<std::size_t> heights, ids;
  for (const Var& p : parts) {
    detail::same_tape(parts[0], p, "concat_rows");
    if (p.value().rank() != 2 || p.value().cols() != cols) {
      throw ShapeError("concat_rows: incompatible shapes");
    }
    heights.push_back(p.value().rows());
    ids.push_back(p.id);
    total += p.value().rows();
  }
  Tensor out = Tensor::zeros({total, cols});
  std::size_t off = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Tensor& v = parts[pi].value();
    for (std::size_t i = 0; i < v.size(); ++i) out[off * cols + i] = v[i];
    off += heights[pi];
  }
  return t.push(std::move(out), ids,
                [ids, heights, cols, id = t.size()](Tape& tp) {
                  const Tensor& g = tp.grad(id);
                  std::size_t off = 0;
                  for (std::size_t pi = 0; pi < ids.size(); ++pi) {
                    Tensor& gp = tp.grad_ref(ids[pi]);
                    for (std::size_t i = 0; i < heights[pi] * cols; ++i) {
                      gp[i] += g[off * cols + i];
                    }
                    off += heights[pi];
                  }
                });
}

// Row lookup: out[i, :] = table[rows[i], :]. Duplicated rows accumulate
// gradient, which is what embedding lookups need.
inline Var gather_rows(Var table, std::vector<std::size_t> rows) {
  Tape& t = *table.tape;
  detail::require(table.value().rank() == 2, "gather_rows: expected rank-2");
  const std::size_t c = table.value().cols();
  for (std::size_t r : rows) {
    if (r >= table.value().rows()) {
      throw ShapeError("gather_rows: row index out of range");
    }
  }
  Tensor out = Tensor::zeros({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = table.value()[rows[i] * c + j];
    }
  }
  return t.push(std::move(out), {table.id},
                [table, rows = std::move(rows), c, id = t.size()](Tape& tp) {
                  const Tensor& g = tp.grad(id);
                  Tensor& gt = tp.grad_ref(table.id);
                  for (std::size_t i = 0; i < rows.size(); ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                      gt[rows[i] * c + j] += g[i * c + j];
                    }
                  }
                });
}

inline Var slice_cols(Var m, std::size_t from, std::size_t count) {
  Tape& t = *m.tape;
  detail::require(m.value().rank() == 2, "slice_cols: expected rank-2");
  const std::size_t r = m.value().rows(), c = m.value().cols();
  if (from + count > c) throw ShapeError("slice_cols: range out of bounds");
  Tensor out = Tensor::zeros({r, count});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      out[i * count + j] = m.value()[i * c + from + j];
    }
  }
  return t.push(std::move(out), {m.id},
                [m, from, count, r, c, id = t.size()](Tape& tp) {
                  const Tensor& g = tp.grad(id);
                  Tensor& gm = tp.grad_ref(m.id);
                  for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < count; ++j) {
                      gm[i * c + from + j] += g[i * count + j];
                    }
                  }
                });
}

inline Var pick(Var m, std::size_t r, std::size_t c) {
  Tape& t = *m.tape;
  detail::require(m.value().rank() == 2, "pick: expected rank-2");
  if (r >= m.value().rows() || c >= m.value().cols()) {
    throw ShapeError("pick: index out of range");
  }
  const std::size_t flat = r * m.value().cols() + c;
  return t.push(Tensor::scalar(m.value()[flat]), {m.id},
                [m, flat, id = t.size()](Tape& tp) {
                  tp.grad_ref(m.id)[flat] += tp.grad(id)[0];
                });
}

inline Var pick(Var v, std::size_t i) {
  Tape& t = *v.tape;
  detail::require(v.value().rank() == 1, "pick: expected rank-1");
  if (i >= v.value().length()) throw ShapeError("pick: index out of range");
  return t.push(Tensor::scalar(v.value()[i]), {v.id},
                [v, i, id = t.size()](Tape& tp) {
                  tp.grad_ref(v.id)[i] += tp.grad(id)[0];
                });
}

inline Var stack_scalars(const std::vector<Var>& scalars) {
  if (scalars.empty()) throw ShapeError("stack_scalars: no inputs");
  Tape& t = *scalars[0].tape;
  Tensor out = Tensor::zeros({scalars.size()});
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    detail::same_tape(scalars[0], scalars[i], "stack_scalars");
    detail::require(scalars[i].value().size() == 1,
                    "stack_scalars: inputs must be scalar");
    out[i] = scalars[i].value()[0];
    ids.push_back(scalars[i].id);
  }
  return t.push(std::move(out), ids, [ids, id = t.size()](Tape& tp) {
    const Tensor& g = tp.grad(id);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      tp.grad_ref(ids[i])[0] += g[i];
    }
  });
}

// Scatter a rank-1 vector into a square [dim,dim] matrix at given (row, col)
// positions; repeated positions accumulate.
inline Var scatter_pairs(Var v,
                         std::vector<std::pair<std::size_t, std::size_t>> pos,
                         std::size_t dim) {
  Tape& t = *v.tape;
  detail::require(v.value().rank() == 1, "scatter_pairs: expected rank-1");
  if (pos.size() != v.value().length()) {
    throw ShapeError("scatter_pairs: one position per value required");
  }
  Tensor out = Tensor::zeros({dim, dim});
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i].first >= dim || pos[i].second >= dim) {
      throw ShapeError("scatter_pairs: position out of range");
    }
    out[pos[i].first * dim + pos[i].second] += v.value()[i];
  }
  return t.push(std::move(out), {v.id},
                [v, pos = std::move(pos), dim, id = t.size()](Tape& tp) {
                  const Tensor& g = tp.grad(id);
                  Tensor& gv = tp.grad_ref(v.id);
                  for (std::size_t i = 0; i < pos.size(); ++i) {
                    gv[i] += g[pos[i].first * dim + pos[i].second];
                  }
                });
}

// Mean of squared differences over all elements.
inline Var mse_loss(Var pred, Var target) {
  detail::same_tape(pred, target, "mse_loss");
  if (!pred.value().same_shape(target.value())) {
    throw ShapeError("mse_loss: shape mismatch");
  }
  Var d = sub(pred, target);
  return mean(mul(d, d));
}

}  // namespace paga::ad
