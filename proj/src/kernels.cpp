#include "crbkit/kernels.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace crbkit {

void set_workers(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int workers() { return omp_get_max_threads(); }

namespace detail {

EntryMoments finish(const BlockAccumulator& acc) {
  EntryMoments out;
  out.count = acc.n;
  out.mean = acc.mean;
  if (acc.n > 1) {
    const double n = static_cast<double>(acc.n);
    out.std_error = (acc.m2.cwiseMax(0.0) / (n - 1.0) / n).cwiseSqrt();
  } else {
    out.std_error = MatrixXd::Zero(acc.mean.rows(), acc.mean.cols());
  }
  return out;
}

}  // namespace detail

double block_sum(const VectorXd& v) {
  const std::size_t count = static_cast<std::size_t>(v.size());
  const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(count, lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v(static_cast<Index>(i));
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

namespace {

void check_knn_input(const RowMatrix& points, int k) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (points.rows() <= k) throw std::invalid_argument("knn: need more than k points");
  if (points.cols() < 1) throw std::invalid_argument("knn: points have zero dimension");
}

VectorXd knn_sorted_line(const RowMatrix& points, int k) {
  const Index n = points.rows();
  std::vector<double> x(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = points(i, 0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return x[static_cast<std::size_t>(a)] < x[static_cast<std::size_t>(b)];
  });
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Index p = 0; p < n; ++p) sorted[static_cast<std::size_t>(p)] = x[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];

  VectorXd dist(n);
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < n; ++p) {
    const double c = sorted[static_cast<std::size_t>(p)];
    Index lo = p - 1, hi = p + 1;
    double d = 0.0;
    for (int step = 0; step < k; ++step) {
      const double dl = lo >= 0 ? c - sorted[static_cast<std::size_t>(lo)] : std::numeric_limits<double>::infinity();
      const double dh = hi < n ? sorted[static_cast<std::size_t>(hi)] - c : std::numeric_limits<double>::infinity();
      if (dl <= dh) {
        d = dl;
        --lo;
      } else {
        d = dh;
        ++hi;
      }
    }
    dist(order[static_cast<std::size_t>(p)]) = d;
  }
  return dist;
}

class KdTree {
 public:
  KdTree(const RowMatrix& pts, int leaf_size) : pts_(pts), leaf_size_(leaf_size) {
    index_.resize(static_cast<std::size_t>(pts.rows()));
    std::iota(index_.begin(), index_.end(), Index{0});
    nodes_.reserve(2 * static_cast<std::size_t>(pts.rows() / leaf_size + 1));
    build(0, pts.rows());
  }

  // Squared distance to the k-th nearest neighbour of point `self`.
  double kth_sq_distance(Index self, int k) const {
    std::priority_queue<double> heap;
    search(0, self, k, heap);
    return heap.top();
  }

 private:
  struct Node {
    Index begin, end;
    int dim = -1;
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(Index begin, Index end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= leaf_size_) return id;
    const Index d = pts_.cols();
    int best_dim = 0;
    double best_spread = -1.0;
    for (Index j = 0; j < d; ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Index i = begin; i < end; ++i) {
        const double v = pts_(index_[static_cast<std::size_t>(i)], j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = static_cast<int>(j);
      }
    }
    const Index mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](Index a, Index b) { return pts_(a, best_dim) < pts_(b, best_dim); });
    const double split = pts_(index_[static_cast<std::size_t>(mid)], best_dim);
    const int l = build(begin, mid);
    const int r = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.dim = best_dim;
    node.split = split;
    node.left = l;
    node.right = r;
    return id;
  }

  void search(int id, Index self, int k, std::priority_queue<double>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.dim < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index j = index_[static_cast<std::size_t>(i)];
        if (j == self) continue;
        const double d2 = (pts_.row(j) - pts_.row(self)).squaredNorm();
        if (static_cast<int>(heap.size()) < k) {
          heap.push(d2);
        } else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      return;
    }
    const double diff = pts_(self, node.dim) - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, self, k, heap);
    if (static_cast<int>(heap.size()) < k || diff * diff < heap.top()) search(far, self, k, heap);
  }

  const RowMatrix& pts_;
  Index leaf_size_;
  std::vector<Index> index_;
  std::vector<Node> nodes_;
};

}  // namespace

VectorXd knn_distances(const RowMatrix& points, int k) {
  check_knn_input(points, k);
  if (points.cols() == 1) return knn_sorted_line(points, k);
  const KdTree tree(points, 16);
  VectorXd dist(points.rows());
#pragma omp parallel for schedule(dynamic, 256)
  for (Index i = 0; i < points.rows(); ++i) dist(i) = std::sqrt(tree.kth_sq_distance(i, k));
  return dist;
}

namespace serial {

VectorXd knn_distances(const RowMatrix& points, int k) {
  check_knn_input(points, k);
  const Index n = points.rows();
  VectorXd dist(n);
  std::vector<double> d2(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) d2[c++] = (points.row(j) - points.row(i)).squaredNorm();
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    dist(i) = std::sqrt(d2[static_cast<std::size_t>(k - 1)]);
  }
  return dist;
}

}  // namespace serial

}  // namespace crbkit
