#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a plain serial
// counterpart in crbkit::serial that the tests use as a reference and the
// benchmark compares against.
//
// Parallel reductions run over fixed-size blocks of draw indices and merge the
// block partials in index order, so results are bit-identical for any worker
// count.

#include <cmath>
#include <cstddef>
#include <vector>

#include <omp.h>

#include "crbkit/linalg.hpp"

namespace crbkit {

/// Per-entry sample mean and standard error of a matrix-valued statistic.
struct EntryMoments {
  MatrixXd mean;
  MatrixXd std_error;
  std::size_t count = 0;
};

constexpr std::size_t kReductionBlock = 512;

/// Sets the OpenMP worker count used by every kernel (n <= 0 keeps the default).
void set_workers(int n);
int workers();

namespace detail {

struct BlockAccumulator {
  std::size_t n = 0;
  MatrixXd mean;
  MatrixXd m2;

  void init(Index rows, Index cols) {
    n = 0;
    mean = MatrixXd::Zero(rows, cols);
    m2 = MatrixXd::Zero(rows, cols);
  }

  void push(const MatrixXd& x) {
    ++n;
    const MatrixXd delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2.array() += delta.array() * (x - mean).array();
  }

  void merge(const BlockAccumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double total = na + nb;
    const MatrixXd delta = o.mean - mean;
    mean += delta * (nb / total);
    m2.array() += o.m2.array() + delta.array().square() * (na * nb / total);
    n += o.n;
  }
};

EntryMoments finish(const BlockAccumulator& acc);

}  // namespace detail

/// Mean and standard error of fill(i, out) over i in [0, count). `fill` writes a
/// rows x cols matrix into `out` and must be safe to call concurrently.
template <class Fill>
EntryMoments entry_moments(std::size_t count, Index rows, Index cols, Fill&& fill) {
  const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  std::vector<detail::BlockAccumulator> partial(blocks);
#pragma omp parallel
  {
    MatrixXd scratch(rows, cols);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
      auto& acc = partial[static_cast<std::size_t>(b)];
      acc.init(rows, cols);
      const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
      const std::size_t hi = std::min(count, lo + kReductionBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        fill(i, scratch);
        acc.push(scratch);
      }
    }
  }
  detail::BlockAccumulator total;
  total.init(rows, cols);
  for (const auto& p : partial) total.merge(p);
  return detail::finish(total);
}

/// Distance from each point (row) to its k-th nearest other point, Euclidean.
/// n = 1 uses a sorted scan, n >= 2 a kd-tree; queries run in parallel.
VectorXd knn_distances(const RowMatrix& points, int k);

/// Deterministic parallel sum of a vector (fixed blocks, ordered merge).
double block_sum(const VectorXd& v);

namespace serial {

/// Two-pass textbook mean / standard error with a single accumulator.
template <class Fill>
EntryMoments entry_moments(std::size_t count, Index rows, Index cols, Fill&& fill) {
  MatrixXd scratch(rows, cols);
  MatrixXd sum = MatrixXd::Zero(rows, cols);
  for (std::size_t i = 0; i < count; ++i) {
    fill(i, scratch);
    sum += scratch;
  }
  const double n = static_cast<double>(count);
  EntryMoments out;
  out.count = count;
  out.mean = sum / n;
  MatrixXd ss = MatrixXd::Zero(rows, cols);
  for (std::size_t i = 0; i < count; ++i) {
    fill(i, scratch);
    ss.array() += (scratch - out.mean).array().square();
  }
  out.std_error = count > 1 ? MatrixXd((ss / (n - 1.0) / n).cwiseSqrt()) : MatrixXd::Zero(rows, cols);
  return out;
}

/// O(N^2) brute force k-NN distances.
VectorXd knn_distances(const RowMatrix& points, int k);

}  // namespace serial

}  // namespace crbkit
