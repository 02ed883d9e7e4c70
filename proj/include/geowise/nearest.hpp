#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace geowise {

template <typename Scalar>
struct Neighbor {
    Eigen::Index index = -1;
    Scalar squared_distance = std::numeric_limits<Scalar>::infinity();

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.squared_distance < b.squared_distance ||
               (a.squared_distance == b.squared_distance && a.index < b.index);
    }
};

// Exact k-nearest-neighbour index over the rows of a dense matrix.
//
// Squared distances are accumulated dimension by dimension in column order,
// so results are bit-identical to an exhaustive scan that does the same.
// Equal distances are ordered by lower row index.
template <typename Scalar>
class KdTree {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    explicit KdTree(Matrix points, Eigen::Index leaf_size = 12)
        : points_(std::move(points)), leaf_size_(std::max<Eigen::Index>(1, leaf_size)) {
        order_.resize(static_cast<std::size_t>(points_.rows()));
        std::iota(order_.begin(), order_.end(), Eigen::Index{0});
        if (points_.rows() > 0) root_ = build(0, points_.rows());
    }

    Eigen::Index size() const { return points_.rows(); }
    Eigen::Index dims() const { return points_.cols(); }
    const Matrix& points() const { return points_; }

    // The k nearest rows sorted by (distance, index). When `exclude` is a
    // valid row index that row is skipped.
    template <typename Derived>
    std::vector<Neighbor<Scalar>> knn(const Eigen::MatrixBase<Derived>& query, Eigen::Index k,
                                      Eigen::Index exclude = -1) const {
        if (query.size() != dims()) throw std::invalid_argument("KdTree: query dimension mismatch");
        std::vector<Neighbor<Scalar>> best;
        if (k <= 0 || root_ < 0) return best;
        best.reserve(static_cast<std::size_t>(k) + 1);
        RowVector q(dims());
        for (Eigen::Index d = 0; d < dims(); ++d) q(d) = query(d);
        search(root_, q, k, exclude, best);
        return best;
    }

    template <typename Derived>
    Neighbor<Scalar> nearest(const Eigen::MatrixBase<Derived>& query, Eigen::Index exclude = -1) const {
        auto hits = knn(query, 1, exclude);
        return hits.empty() ? Neighbor<Scalar>{} : hits.front();
    }

private:
    struct Node {
        Eigen::Index begin = 0, end = 0;
        Eigen::Index dim = -1;  // -1 marks a leaf
        Scalar split = 0;
        Eigen::Index left = -1, right = -1;
    };

    Eigen::Index build(Eigen::Index begin, Eigen::Index end) {
        const auto id = static_cast<Eigen::Index>(nodes_.size());
        nodes_.push_back(Node{begin, end});
        if (end - begin <= leaf_size_ || dims() == 0) return id;

        Eigen::Index best_dim = 0;
        Scalar best_spread = -1;
        for (Eigen::Index d = 0; d < dims(); ++d) {
            Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = -lo;
            for (Eigen::Index i = begin; i < end; ++i) {
                const Scalar v = points_(order_[static_cast<std::size_t>(i)], d);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = d;
            }
        }
        if (best_spread <= 0) return id;

        const Eigen::Index mid = begin + (end - begin) / 2;
        auto first = order_.begin() + begin;
        std::nth_element(first, order_.begin() + mid, order_.begin() + end,
                         [&](Eigen::Index a, Eigen::Index b) { return points_(a, best_dim) < points_(b, best_dim); });
        const Scalar split = points_(order_[static_cast<std::size_t>(mid)], best_dim);
        const Eigen::Index left = build(begin, mid);
        const Eigen::Index right = build(mid, end);
        Node& node = nodes_[static_cast<std::size_t>(id)];
        node.dim = best_dim;
        node.split = split;
        node.left = left;
        node.right = right;
        return id;
    }

    Scalar squared_distance(const RowVector& q, Eigen::Index row) const {
        Scalar acc = 0;
        for (Eigen::Index d = 0; d < dims(); ++d) {
            const Scalar diff = q(d) - points_(row, d);
            acc += diff * diff;
        }
        return acc;
    }

    void offer(std::vector<Neighbor<Scalar>>& best, Eigen::Index k, Neighbor<Scalar> cand) const {
        if (static_cast<Eigen::Index>(best.size()) == k && !(cand < best.back())) return;
        auto pos = std::upper_bound(best.begin(), best.end(), cand);
        best.insert(pos, cand);
        if (static_cast<Eigen::Index>(best.size()) > k) best.pop_back();
    }

    void search(Eigen::Index node_id, const RowVector& q, Eigen::Index k, Eigen::Index exclude,
                std::vector<Neighbor<Scalar>>& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        if (node.dim < 0) {
            for (Eigen::Index i = node.begin; i < node.end; ++i) {
                const Eigen::Index row = order_[static_cast<std::size_t>(i)];
                if (row == exclude) continue;
                offer(best, k, {row, squared_distance(q, row)});
            }
            return;
        }
        const Scalar diff = q(node.dim) - node.split;
        const bool go_left = diff < 0;
        search(go_left ? node.left : node.right, q, k, exclude, best);
        const Scalar bound = diff * diff;
        if (static_cast<Eigen::Index>(best.size()) < k || bound <= best.back().squared_distance)
            search(go_left ? node.right : node.left, q, k, exclude, best);
    }

    Matrix points_;
    Eigen::Index leaf_size_;
    std::vector<Eigen::Index> order_;
    std::vector<Node> nodes_;
    Eigen::Index root_ = -1;
};

}  // namespace geowise
