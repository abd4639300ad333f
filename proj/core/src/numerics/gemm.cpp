#include "gemm.hpp"

#include <cstring>
#include <vector>

namespace disent::detail {
namespace {

constexpr std::size_t kRows = 4;
constexpr std::size_t kWidth = 8;
constexpr std::size_t kCols = 2 * kWidth;

// Eight lanes of plain multiply-then-add; each lane rounds exactly like the
// scalar loop.
using Lanes = double __attribute__((vector_size(kWidth * sizeof(double))));

inline Lanes load(const double* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store(double* out, double value, bool accumulate) {
  *out = accumulate ? *out + value : value;
}

}  // namespace

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate) {
  // The kernels walk rows of op(B); materialize it row-major.
  std::vector<double> b_rows;
  if (trans_b) {
    b_rows.resize(k * n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t p = 0; p < k; ++p) b_rows[p * n + j] = b[j * k + p];
    }
    b = b_rows.data();
  }
  auto a_at = [&](std::size_t i, std::size_t p) { return trans_a ? a[p * m + i] : a[i * k + p]; };

  // Four rows of op(A), interleaved by k.
  std::vector<double> panel(kRows * k);
  std::size_t i0 = 0;
  for (; i0 + kRows <= m; i0 += kRows) {
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t r = 0; r < kRows; ++r) panel[p * kRows + r] = a_at(i0 + r, p);
    }
    std::size_t j0 = 0;
    for (; j0 + kCols <= n; j0 += kCols) {
      Lanes acc[kRows][2] = {};
      for (std::size_t p = 0; p < k; ++p) {
        const double* ap = panel.data() + p * kRows;
        const Lanes b0 = load(b + p * n + j0);
        const Lanes b1 = load(b + p * n + j0 + kWidth);
        for (std::size_t r = 0; r < kRows; ++r) {
          acc[r][0] += ap[r] * b0;
          acc[r][1] += ap[r] * b1;
        }
      }
      for (std::size_t r = 0; r < kRows; ++r) {
        for (std::size_t j = 0; j < kCols; ++j) {
          store(c + (i0 + r) * n + j0 + j, acc[r][j / kWidth][j % kWidth], accumulate);
        }
      }
    }
    for (; j0 < n; ++j0) {
      double acc[kRows] = {};
      for (std::size_t p = 0; p < k; ++p) {
        const double bp = b[p * n + j0];
        for (std::size_t r = 0; r < kRows; ++r) acc[r] += panel[p * kRows + r] * bp;
      }
      for (std::size_t r = 0; r < kRows; ++r) store(c + (i0 + r) * n + j0, acc[r], accumulate);
    }
  }
  for (; i0 < m; ++i0) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a_at(i0, p) * b[p * n + j];
      store(c + i0 * n + j, acc, accumulate);
    }
  }
}

}  // namespace disent::detail
