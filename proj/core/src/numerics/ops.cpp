#include "disent/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "disent/numerics/errors.hpp"
#include "gemm.hpp"

namespace disent::ops {
namespace {

using detail::gemm;

void same_tape(const Var& a, const Var& b, const char* op) {
  if (&a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands recorded on different tapes");
  }
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.str() + " and " +
                       b.str());
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  same_tape(a, b, op);
  if (!(a.shape() == b.shape())) mismatch(op, a.shape(), b.shape());
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  same_tape(a, b, "matmul");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 2 || sb.rank() != 2 || sa[1] != sb[0]) mismatch("matmul", sa, sb);
  const std::size_t m = sa[0], k = sa[1], n = sb[1];

  Tensor out(Shape{m, n});
  gemm(false, false, m, n, k, a.value().data(), b.value().data(), out.data(), false);

  return a.tape().record("matmul", std::move(out), {a, b},
                         [a, b, m, k, n](const Tensor&, std::span<const double> g) {
                           if (a.requires_grad()) {
                             gemm(false, true, m, k, n, g.data(), b.value().data(), a.grad().data(), true);
                           }
                           if (b.requires_grad()) {
                             gemm(true, false, k, n, m, a.value().data(), g.data(), b.grad().data(), true);
                           }
                         });
}

Var batched_matmul(const Var& a, const Var& b) {
  same_tape(a, b, "batched_matmul");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 3 || sb.rank() != 3 || sa[0] != sb[0] || sa[2] != sb[1]) {
    mismatch("batched_matmul", sa, sb);
  }
  const std::size_t batch = sa[0], m = sa[1], k = sa[2], n = sb[2];

  Tensor out(Shape{batch, m, n});
  for (std::size_t s = 0; s < batch; ++s) {
    gemm(false, false, m, n, k, a.value().data() + s * m * k, b.value().data() + s * k * n,
         out.data() + s * m * n, false);
  }

  return a.tape().record(
      "batched_matmul", std::move(out), {a, b}, [a, b, batch, m, k, n](const Tensor&, std::span<const double> g) {
        for (std::size_t s = 0; s < batch; ++s) {
          const double* dc = g.data() + s * m * n;
          if (a.requires_grad()) {
            gemm(false, true, m, k, n, dc, b.value().data() + s * k * n, a.grad().data() + s * m * k, true);
          }
          if (b.requires_grad()) {
            gemm(true, false, k, n, m, a.value().data() + s * m * k, dc, b.grad().data() + s * k * n, true);
          }
        }
      });
}

Var batched_matmul_transposed(const Var& a, const Var& b) {
  same_tape(a, b, "batched_matmul_transposed");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 3 || sb.rank() != 3 || sa[0] != sb[0] || sa[2] != sb[2]) {
    mismatch("batched_matmul_transposed", sa, sb);
  }
  const std::size_t batch = sa[0], m = sa[1], k = sa[2], n = sb[1];

  Tensor out(Shape{batch, m, n});
  for (std::size_t s = 0; s < batch; ++s) {
    gemm(false, true, m, n, k, a.value().data() + s * m * k, b.value().data() + s * n * k,
         out.data() + s * m * n, false);
  }

  return a.tape().record(
      "batched_matmul_transposed", std::move(out), {a, b},
      [a, b, batch, m, k, n](const Tensor&, std::span<const double> g) {
        for (std::size_t s = 0; s < batch; ++s) {
          const double* dc = g.data() + s * m * n;
          if (a.requires_grad()) {
            gemm(false, false, m, k, n, dc, b.value().data() + s * n * k, a.grad().data() + s * m * k, true);
          }
          if (b.requires_grad()) {
            gemm(true, false, n, k, m, dc, a.value().data() + s * m * k, b.grad().data() + s * n * k, true);
          }
        }
      });
}

Var softmax_rows(const Var& a) {
  const Shape& shape = a.shape();
  if (shape.rank() == 0) throw DimensionError("softmax_rows: needs rank >= 1");
  const std::size_t rows = shape.leading(), cols = shape.back();
  const double* x = a.value().data();

  Tensor out(shape);
  double* y = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    const double peak = *std::max_element(xr, xr + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - peak);
      total += yr[c];
    }
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= total;
  }

  return a.tape().record("softmax_rows", std::move(out), {a},
                         [a, rows, cols](const Tensor& y, std::span<const double> g) {
                           double* dx = a.grad().data();
                           for (std::size_t r = 0; r < rows; ++r) {
                             const double* yr = y.data() + r * cols;
                             const double* gr = g.data() + r * cols;
                             double dot = 0.0;
                             for (std::size_t c = 0; c < cols; ++c) dot += gr[c] * yr[c];
                             for (std::size_t c = 0; c < cols; ++c) {
                               dx[r * cols + c] += yr[c] * (gr[c] - dot);
                             }
                           }
                         });
}

Var leaky_relu(const Var& a, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ContractError("leaky_relu: slope must lie in (0, 1), got " + std::to_string(slope));
  }
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];

  return a.tape().record("leaky_relu", std::move(out), {a},
                         [a, slope](const Tensor&, std::span<const double> g) {
                           const Tensor& x = a.value();
                           double* dx = a.grad().data();
                           for (std::size_t i = 0; i < x.size(); ++i) {
                             dx[i] += x[i] > 0.0 ? g[i] : slope * g[i];
                           }
                         });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  same_tape(x, weight, "linear");
  same_tape(x, bias, "linear");
  const Shape& sx = x.shape();
  const Shape& sw = weight.shape();
  if (sx.rank() == 0 || sw.rank() != 2 || sx.back() != sw[0]) mismatch("linear", sx, sw);
  if (bias.shape().rank() != 1 || bias.shape()[0] != sw[1]) {
    mismatch("linear", sw, bias.shape());
  }
  const std::size_t rows = sx.leading(), p = sw[0], q = sw[1];

  std::vector<std::size_t> extents;
  for (std::size_t axis = 0; axis + 1 < sx.rank(); ++axis) extents.push_back(sx[axis]);
  extents.push_back(q);
  Tensor out{Shape(std::span<const std::size_t>(extents))};

  gemm(false, false, rows, q, p, x.value().data(), weight.value().data(), out.data(), false);
  const double* bv = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* y = out.data() + r * q;
    for (std::size_t j = 0; j < q; ++j) y[j] += bv[j];
  }

  return x.tape().record(
      "linear", std::move(out), {x, weight, bias},
      [x, weight, bias, rows, p, q](const Tensor&, std::span<const double> g) {
        if (x.requires_grad()) {
          gemm(false, true, rows, p, q, g.data(), weight.value().data(), x.grad().data(), true);
        }
        if (weight.requires_grad()) {
          gemm(true, false, p, q, rows, x.value().data(), g.data(), weight.grad().data(), true);
        }
        if (bias.requires_grad()) {
          std::vector<double> db(q, 0.0);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < q; ++j) db[j] += g[r * q + j];
          }
          double* bg = bias.grad().data();
          for (std::size_t j = 0; j < q; ++j) bg[j] += db[j];
        }
      });
}

Var affine(const Var& a, double scale, double shift) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i] + shift;
  return a.tape().record("affine", std::move(out), {a},
                         [a, scale](const Tensor&, std::span<const double> g) {
                           double* dx = a.grad().data();
                           for (std::size_t i = 0; i < g.size(); ++i) dx[i] += scale * g[i];
                         });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return a.tape().record("add", std::move(out), {a, b},
                         [a, b](const Tensor&, std::span<const double> g) {
                           for (const Var* v : {&a, &b}) {
                             if (!v->requires_grad()) continue;
                             double* d = v->grad().data();
                             for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                           }
                         });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return a.tape().record("sum", Tensor::scalar(total), {a},
                         [a](const Tensor&, std::span<const double> g) {
                           for (double& d : a.grad()) d += g[0];
                         });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return a.tape().record("mean", Tensor::scalar(total / n), {a},
                         [a, n](const Tensor&, std::span<const double> g) {
                           for (double& d : a.grad()) d += g[0] / n;
                         });
}

Var mse(const Var& a, const Var& b) {
  require_same_shape("mse", a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    total += d * d;
  }
  return a.tape().record("mse", Tensor::scalar(total / n), {a, b},
                         [a, b, n](const Tensor&, std::span<const double> g) {
                           const Tensor& x = a.value();
                           const Tensor& y = b.value();
                           const double c = 2.0 * g[0] / n;
                           for (std::size_t i = 0; i < x.size(); ++i) {
                             const double d = c * (x[i] - y[i]);
                             if (a.requires_grad()) a.grad()[i] += d;
                             if (b.requires_grad()) b.grad()[i] -= d;
                           }
                         });
}

namespace {

struct CosineParts {
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  double value() const { return dot / (norm_a * norm_b); }
};

CosineParts cosine_parts(const double* a, const double* b, std::size_t n, const char* op) {
  CosineParts parts;
  double aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    parts.dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  parts.norm_a = std::sqrt(aa);
  parts.norm_b = std::sqrt(bb);
  if (parts.norm_a == 0.0 || parts.norm_b == 0.0) {
    throw DegenerateInputError(std::string(op) + ": zero-norm operand");
  }
  return parts;
}

// d cos / d a = b / (|a||b|) - cos * a / |a|^2, scaled by the upstream gradient.
void cosine_backward(const double* a, const double* b, double* da, double* db, std::size_t n,
                     const CosineParts& parts, double upstream) {
  const double c = parts.value();
  const double inv_ab = upstream / (parts.norm_a * parts.norm_b);
  const double ca = upstream * c / (parts.norm_a * parts.norm_a);
  const double cb = upstream * c / (parts.norm_b * parts.norm_b);
  for (std::size_t i = 0; i < n; ++i) {
    if (da) da[i] += inv_ab * b[i] - ca * a[i];
    if (db) db[i] += inv_ab * a[i] - cb * b[i];
  }
}

}  // namespace

Var cosine_sim(const Var& a, const Var& b) {
  require_same_shape("cosine_sim", a, b);
  const std::size_t n = a.value().size();
  const CosineParts parts = cosine_parts(a.value().data(), b.value().data(), n, "cosine_sim");
  return a.tape().record(
      "cosine_sim", Tensor::scalar(parts.value()), {a, b},
      [a, b, n, parts](const Tensor&, std::span<const double> g) {
        cosine_backward(a.value().data(), b.value().data(),
                        a.requires_grad() ? a.grad().data() : nullptr,
                        b.requires_grad() ? b.grad().data() : nullptr, n, parts, g[0]);
      });
}

Var batched_cosine_sim(const Var& a, const Var& b) {
  require_same_shape("batched_cosine_sim", a, b);
  if (a.shape().rank() < 2) {
    throw DimensionError("batched_cosine_sim: needs rank >= 2, got " + a.shape().str());
  }
  const std::size_t batch = a.shape()[0];
  const std::size_t per = a.value().size() / batch;

  std::vector<CosineParts> parts(batch);
  Tensor out(Shape{batch});
  for (std::size_t s = 0; s < batch; ++s) {
    parts[s] = cosine_parts(a.value().data() + s * per, b.value().data() + s * per, per,
                            "batched_cosine_sim");
    out[s] = parts[s].value();
  }
  return a.tape().record(
      "batched_cosine_sim", std::move(out), {a, b},
      [a, b, batch, per, parts = std::move(parts)](const Tensor&, std::span<const double> g) {
        for (std::size_t s = 0; s < batch; ++s) {
          const std::size_t off = s * per;
          cosine_backward(a.value().data() + off, b.value().data() + off,
                          a.requires_grad() ? a.grad().data() + off : nullptr,
                          b.requires_grad() ? b.grad().data() + off : nullptr, per, parts[s],
                          g[s]);
        }
      });
}

}  // namespace disent::ops
