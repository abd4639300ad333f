#pragma once

#include <cstddef>

namespace disent::detail {

// Row-major C[m x n] = op(A) . op(B), or C += op(A) . op(B) when `accumulate`.
// op(A) is m x k (A stored k x m when trans_a); op(B) is k x n (B stored n x k
// when trans_b). Every product entry is summed over k in increasing order,
// starting from zero, before it is written or added to C.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate);

}  // namespace disent::detail
