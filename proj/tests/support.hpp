#pragma once

#include <random>

#include "krcd/kernel.hpp"

namespace testing {

inline krcd::RowMatrix uniform_rows(Eigen::Index rows, Eigen::Index cols, unsigned seed,
                                    double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  krcd::RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
  }
  return m;
}

inline krcd::Vector uniform_vector(Eigen::Index n, unsigned seed, double lo = 0.0, double hi = 1.0) {
  return uniform_rows(n, 1, seed, lo, hi).col(0);
}

inline krcd::RowMatrix unit_norm_rows(krcd::RowMatrix m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i).normalize();
  return m;
}

}  // namespace testing
