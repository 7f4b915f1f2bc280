#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <random>

#include "crbkit/kernels.hpp"
#include "crbkit/linalg.hpp"
#include "crbkit/rng.hpp"

using namespace crbkit;

namespace {

RowMatrix gaussian_points(std::uint64_t seed, Index rows, Index cols) {
  RowMatrix p(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    Substream g(seed, StreamDomain::noise, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> nd;
    for (Index j = 0; j < cols; ++j) p(i, j) = nd(g);
  }
  return p;
}

struct WorkerGuard {
  int saved = workers();
  ~WorkerGuard() { set_workers(saved); }
};

}  // namespace

TEST(Substream, SameKeySameStream) {
  Substream a(7, StreamDomain::noise, 3), b(7, StreamDomain::noise, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Substream, KeysGiveDistinctStreams) {
  Substream base(7, StreamDomain::noise, 3);
  Substream other_seed(8, StreamDomain::noise, 3);
  Substream other_domain(7, StreamDomain::additive, 3);
  Substream other_index(7, StreamDomain::noise, 4);
  const auto x = base();
  EXPECT_NE(x, other_seed());
  EXPECT_NE(x, other_domain());
  EXPECT_NE(x, other_index());
}

TEST(Substream, UniformInUnitInterval) {
  Substream g(1, StreamDomain::trial, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(EntryMoments, MatchesSerialReference) {
  const RowMatrix p = gaussian_points(3, 5000, 2);
  auto fill = [&](std::size_t i, MatrixXd& out) {
    const Eigen::Vector2d v = p.row(static_cast<Index>(i)).transpose();
    out = v * v.transpose();
  };
  const EntryMoments par = entry_moments(5000, 2, 2, fill);
  const EntryMoments ser = serial::entry_moments(5000, 2, 2, fill);
  EXPECT_EQ(par.count, 5000u);
  EXPECT_LE((par.mean - ser.mean).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((par.std_error - ser.std_error).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EntryMoments, BitIdenticalAcrossWorkerCounts) {
  WorkerGuard guard;
  const RowMatrix p = gaussian_points(4, 20000, 3);
  auto fill = [&](std::size_t i, MatrixXd& out) { out = p.row(static_cast<Index>(i)).transpose(); };
  set_workers(1);
  const EntryMoments one = entry_moments(20000, 3, 1, fill);
  for (int w : {2, 3, 8}) {
    set_workers(w);
    const EntryMoments many = entry_moments(20000, 3, 1, fill);
    EXPECT_EQ(one.mean, many.mean) << "workers=" << w;
    EXPECT_EQ(one.std_error, many.std_error) << "workers=" << w;
  }
}

TEST(EntryMoments, PartialLastBlock) {
  auto fill = [](std::size_t i, MatrixXd& out) { out(0, 0) = static_cast<double>(i); };
  const EntryMoments m = entry_moments(kReductionBlock + 3, 1, 1, fill);
  EXPECT_DOUBLE_EQ(m.mean(0, 0), static_cast<double>(kReductionBlock + 2) / 2.0);
}

TEST(BlockSum, DeterministicAndAccurate) {
  WorkerGuard guard;
  VectorXd v(3001);
  for (Index i = 0; i < v.size(); ++i) v(i) = 1.0 / static_cast<double>(i + 1);
  set_workers(1);
  const double a = block_sum(v);
  set_workers(4);
  EXPECT_EQ(a, block_sum(v));
  EXPECT_NEAR(a, v.sum(), 1e-12);
}

TEST(Knn, LineScanMatchesBruteForce) {
  const RowMatrix p = gaussian_points(5, 2000, 1);
  for (int k : {1, 4}) {
    const VectorXd fast = knn_distances(p, k);
    const VectorXd ref = serial::knn_distances(p, k);
    EXPECT_LE((fast - ref).cwiseAbs().maxCoeff(), 1e-14) << "k=" << k;
  }
}

TEST(Knn, TreeMatchesBruteForce) {
  for (Index dim : {2, 3, 5}) {
    const RowMatrix p = gaussian_points(6 + static_cast<std::uint64_t>(dim), 1500, dim);
    const VectorXd fast = knn_distances(p, 4);
    const VectorXd ref = serial::knn_distances(p, 4);
    EXPECT_LE((fast - ref).cwiseAbs().maxCoeff(), 1e-12) << "dim=" << dim;
  }
}

TEST(Knn, HandExample) {
  RowMatrix p(4, 1);
  p << 0.0, 1.0, 3.0, 7.0;
  const VectorXd d = knn_distances(p, 1);
  EXPECT_DOUBLE_EQ(d(0), 1.0);
  EXPECT_DOUBLE_EQ(d(1), 1.0);
  EXPECT_DOUBLE_EQ(d(2), 2.0);
  EXPECT_DOUBLE_EQ(d(3), 4.0);
}

TEST(Knn, RejectsTooFewPoints) {
  RowMatrix p(3, 1);
  p << 0.0, 1.0, 2.0;
  EXPECT_THROW(knn_distances(p, 4), std::invalid_argument);
}

TEST(Linalg, FormatDoubleRoundTrips) {
  Substream g(9, StreamDomain::trial, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = (g.uniform() - 0.5) * std::pow(10.0, static_cast<int>(g.uniform() * 40) - 20);
    const std::string s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(back, x) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
}

TEST(Linalg, SqrtAndInverseSqrt) {
  MatrixXd s(2, 2);
  s << 2.0, 1.0, 1.0, 2.0;
  const MatrixXd r = sqrt_psd(s);
  EXPECT_LE((r * r - s).norm(), 1e-12);
  const MatrixXd ri = inverse_sqrt_spd(s);
  EXPECT_LE((ri * s * ri - MatrixXd::Identity(2, 2)).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(eigmin(s), 1.0);
  EXPECT_DOUBLE_EQ(eigmax(s), 3.0);
}

TEST(Linalg, RequireSpdRejects) {
  MatrixXd s(2, 2);
  s << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(require_spd(s, "s"), std::invalid_argument);
  EXPECT_THROW(require_psd(s, "s"), std::invalid_argument);
  MatrixXd z = MatrixXd::Zero(2, 2);
  EXPECT_NO_THROW(require_psd(z, "z"));
  EXPECT_THROW(require_spd(z, "z"), std::invalid_argument);
}
