// Small hand-made and random rate tensors shared by the test binaries.
#pragma once

#include "hetnet/hetnet.hpp"

#include <random>
#include <vector>

namespace testing_instances {

using hetnet::PatternSet;
using hetnet::RateTensor;

/// B = 2, K = 2, I = 3 with the rate table
///   r111 = 10, r211 = 6, r122 = 8, r222 = 12,
///   r113 = 5, r123 = 3, r213 = 2, r223 = 7   (1-based k, b, i).
inline RateTensor m1() {
  RateTensor r(2, 2, 3);
  r.at(0, 0, 0) = 10;
  r.at(1, 0, 0) = 6;
  r.at(0, 1, 1) = 8;
  r.at(1, 1, 1) = 12;
  r.at(0, 0, 2) = 5;
  r.at(0, 1, 2) = 3;
  r.at(1, 0, 2) = 2;
  r.at(1, 1, 2) = 7;
  return r;
}

/// Random tensor over all 2^B patterns: r_kbi = 0 when BS b is off in
/// pattern i, otherwise a draw that decreases with the number of active
/// interferers.
inline RateTensor random_tensor(std::mt19937_64& rng, std::size_t K, std::size_t B) {
  const PatternSet A = hetnet::enumerate_all(B);
  RateTensor r(K, B, A.num_patterns());
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<std::vector<double>> base(K, std::vector<double>(B));
  for (auto& row : base)
    for (auto& v : row) v = u(rng) * 10.0;
  for (std::size_t i = 0; i < A.num_patterns(); ++i)
    for (std::size_t b = 0; b < B; ++b) {
      if (!A.active(i, b)) continue;
      for (std::size_t k = 0; k < K; ++k) {
        double interference = 0.0;
        for (std::size_t l = 0; l < B; ++l)
          if (l != b && A.active(i, l)) interference += base[k][l];
        r.at(k, b, i) = 1e6 * std::log2(1.0 + base[k][b] / (0.5 + interference));
      }
    }
  return r;
}

/// Random tensor with arbitrary sparsity, for the inner-problem checks.
inline RateTensor random_dense(std::mt19937_64& rng, std::size_t K, std::size_t B, std::size_t I) {
  RateTensor r(K, B, I);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < I; ++i) r.at(k, b, i) = u(rng) < 0.3 ? 0.0 : u(rng) * 20.0;
  return r;
}

}  // namespace testing_instances
