// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace tslu::kernels {

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapMat = Eigen::Map<RowMat<Real>>;
template <typename Real>
using ConstMapMat = Eigen::Map<const RowMat<Real>>;

// c[m,n] (+)= a[m,k] * b[n,k]^T
template <typename Real>
void matmul_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
  ConstMapMat<Real> A(a, m, k);
  ConstMapMat<Real> B(b, n, k);
  MapMat<Real> C(c, m, n);
  if (accumulate) {
    C.noalias() += A * B.transpose();
  } else {
    C.noalias() = A * B.transpose();
  }
}

// Same product as matmul_nt, but every entry is reduced over k in one fixed
// order, so c[i,j] is independent of m and n.
template <typename Real>
void matmul_nt_fixed(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
                     std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const Real* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const Real* bj = b + j * k;
      Real acc[4] = {0, 0, 0, 0};
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        acc[0] += ai[p] * bj[p];
        acc[1] += ai[p + 1] * bj[p + 1];
        acc[2] += ai[p + 2] * bj[p + 2];
        acc[3] += ai[p + 3] * bj[p + 3];
      }
      Real sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
      for (; p < k; ++p) sum += ai[p] * bj[p];
      c[i * n + j] = accumulate ? c[i * n + j] + sum : sum;
    }
  }
}

// c[m,n] (+)= a[m,k] * b[k,n]
template <typename Real>
void matmul_nn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
  ConstMapMat<Real> A(a, m, k);
  ConstMapMat<Real> B(b, k, n);
  MapMat<Real> C(c, m, n);
  if (accumulate) {
    C.noalias() += A * B;
  } else {
    C.noalias() = A * B;
  }
}

// c[m,n] (+)= a[k,m]^T * b[k,n]
template <typename Real>
void matmul_tn(const Real* a, const Real* b, Real* c, std::size_t k, std::size_t m,
               std::size_t n, bool accumulate) {
  ConstMapMat<Real> A(a, k, m);
  ConstMapMat<Real> B(b, k, n);
  MapMat<Real> C(c, m, n);
  if (accumulate) {
    C.noalias() += A.transpose() * B;
  } else {
    C.noalias() = A.transpose() * B;
  }
}

template <typename Real>
inline Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

}  // namespace tslu::kernels
