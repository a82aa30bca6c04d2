#ifndef GNNSTAB_GRAPH_HPP_
#define GNNSTAB_GRAPH_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gnnstab/linalg.hpp"

namespace gnnstab {

struct RatingMatrix;  // data.hpp

enum class GsoKind { adjacency, knn_similarity, custom };

// Symmetric N x N graph shift operator. The matrix is validated symmetric
// (1e-12 relative) and exactly symmetrized at construction, then never
// mutated. The eigendecomposition is computed on first use and memoized;
// the memoization is safe under concurrent readers.
class GraphShiftOperator {
  public:
    GraphShiftOperator() = default;
    explicit GraphShiftOperator(Matrix m, GsoKind kind = GsoKind::custom);

    // Construction with a known eigendecomposition (e.g. a dilation, which
    // shares the source's eigenvectors). The caller is responsible for the
    // pair being consistent.
    GraphShiftOperator(Matrix m, GsoKind kind, EigenSystem eig);

    std::size_t size() const { return matrix_.rows(); }
    const Matrix& matrix() const { return matrix_; }
    GsoKind kind() const { return kind_; }

    const EigenSystem& eig() const;

  private:
    struct EigCache {
        std::once_flag once;
        EigenSystem sys;
    };

    Matrix matrix_;
    GsoKind kind_ = GsoKind::custom;
    std::shared_ptr<EigCache> cache_;
};

// Bijection on [0, N). mapping[i] = j means entry i of the permuted vector
// takes the value of entry j of the original, i.e. permute_signal computes
// x_hat = P^T x with [P]_{i j} = 1 iff mapping[j] = i.
class Permutation {
  public:
    explicit Permutation(std::vector<std::size_t> mapping);

    static Permutation identity(std::size_t n);

    std::size_t size() const { return mapping_.size(); }
    std::size_t operator[](std::size_t i) const { return mapping_[i]; }
    const std::vector<std::size_t>& mapping() const { return mapping_; }

    Permutation inverse() const;
    Matrix to_matrix() const;

  private:
    std::vector<std::size_t> mapping_;
};

// S_hat = P^T S P (a relabeling of the nodes).
GraphShiftOperator permute_gso(const GraphShiftOperator& s, const Permutation& p);

// x_hat = P^T x.
Vector permute_signal(const Vector& x, const Permutation& p);

// Uniform random bijection, Fisher-Yates over a seeded generator.
Permutation random_permutation(std::size_t n, std::uint64_t seed);

struct PearsonDiagnostics {
    std::size_t low_overlap_pairs = 0;    // fewer than 2 common raters
    std::size_t zero_variance_pairs = 0;  // constant ratings on the overlap
};

// Pairwise item-item Pearson correlation computed over users who rated both
// items. Pairs with fewer than 2 common raters (or zero variance on the
// overlap) get correlation 0 and are counted in the diagnostics. Diagonal is
// 0: the graphs built from this carry no self-loops.
Matrix pearson_correlation(const RatingMatrix& ratings, PearsonDiagnostics* diag = nullptr);

// Keeps, per node, the k largest-similarity neighbors (ties: lowest index),
// then symmetrizes with the union rule: edge (i, j) survives if it was
// selected from i or from j, with the original symmetric weight.
GraphShiftOperator build_knn_graph(const Matrix& similarity, std::size_t k);

// Seeded random weighted graph: each edge present with probability
// `density`, weights uniform on [0.5, 1.5]. Handy test and demo support.
GraphShiftOperator random_weighted_graph(std::size_t n, double density, std::uint64_t seed);

// Combinatorial Laplacian D - W of the given graph. Its spectrum is
// nonnegative and the top eigenvector is oscillatory (mixed signs), which is
// the natural shift operator for high-frequency demonstrations.
GraphShiftOperator laplacian(const GraphShiftOperator& s);

}  // namespace gnnstab

#endif  // GNNSTAB_GRAPH_HPP_
