#include "gnnstab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "gnnstab/data.hpp"
#include "gnnstab/error.hpp"
#include "gnnstab/rng.hpp"

namespace gnnstab {

namespace {

Matrix symmetrized(Matrix m) {
    if (m.rows() != m.cols()) {
        std::ostringstream msg;
        msg << "graph shift operator must be square, got " << m.rows() << "x" << m.cols();
        throw ValidationError(msg.str());
    }
    const double tol = 1e-12 * std::max(1.0, max_abs(m));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                std::ostringstream msg;
                msg << "graph shift operator asymmetric at (" << i << ", " << j << "): " << m(i, j)
                    << " vs " << m(j, i);
                throw ValidationError(msg.str());
            }
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

}  // namespace

GraphShiftOperator::GraphShiftOperator(Matrix m, GsoKind kind)
    : matrix_(symmetrized(std::move(m))), kind_(kind), cache_(std::make_shared<EigCache>()) {}

GraphShiftOperator::GraphShiftOperator(Matrix m, GsoKind kind, EigenSystem eig)
    : matrix_(symmetrized(std::move(m))), kind_(kind), cache_(std::make_shared<EigCache>()) {
    std::call_once(cache_->once, [&] { cache_->sys = std::move(eig); });
}

const EigenSystem& GraphShiftOperator::eig() const {
    std::call_once(cache_->once, [&] { cache_->sys = sym_eig(matrix_); });
    return cache_->sys;
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (std::size_t i = 0; i < mapping_.size(); ++i) {
        if (mapping_[i] >= mapping_.size() || seen[mapping_[i]]) {
            std::ostringstream msg;
            msg << "permutation mapping is not a bijection at index " << i;
            throw ValidationError(msg.str());
        }
        seen[mapping_[i]] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(mapping_.size());
    for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
    return Permutation(std::move(inv));
}

Matrix Permutation::to_matrix() const {
    Matrix p(size(), size());
    for (std::size_t j = 0; j < size(); ++j) p(mapping_[j], j) = 1.0;
    return p;
}

GraphShiftOperator permute_gso(const GraphShiftOperator& s, const Permutation& p) {
    if (s.size() != p.size()) {
        std::ostringstream msg;
        msg << "permute_gso size mismatch: graph has " << s.size() << " nodes, permutation "
            << p.size();
        throw ValidationError(msg.str());
    }
    const std::size_t n = s.size();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = s.matrix()(p[i], p[j]);
    return GraphShiftOperator(std::move(out), s.kind());
}

Vector permute_signal(const Vector& x, const Permutation& p) {
    if (x.size() != p.size()) {
        std::ostringstream msg;
        msg << "permute_signal length mismatch: signal " << x.size() << ", permutation "
            << p.size();
        throw ValidationError(msg.str());
    }
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[p[i]];
    return out;
}

Permutation random_permutation(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("random_permutation: n must be at least 1");
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), 0);
    Rng rng(seed);
    rng.shuffle(m);
    return Permutation(std::move(m));
}

Matrix pearson_correlation(const RatingMatrix& ratings, PearsonDiagnostics* diag) {
    const std::size_t n = ratings.n_items;

    // Ratings grouped by user so every co-rated pair is visited once.
    std::vector<std::vector<std::pair<std::size_t, double>>> by_user(ratings.n_users);
    for (const Rating& r : ratings.entries) by_user[r.user].emplace_back(r.item, r.value);

    // Upper-triangle accumulators of co-rating statistics.
    const std::size_t n_pairs = n * (n + 1) / 2;
    std::vector<double> sx(n_pairs, 0.0), sy(n_pairs, 0.0), sxx(n_pairs, 0.0), syy(n_pairs, 0.0),
        sxy(n_pairs, 0.0);
    std::vector<std::uint32_t> cnt(n_pairs, 0);
    auto tri = [n](std::size_t i, std::size_t j) {  // i <= j
        return i * n - i * (i - 1) / 2 + (j - i);
    };

    for (auto& items : by_user) {
        std::sort(items.begin(), items.end());
        for (std::size_t a = 0; a < items.size(); ++a) {
            for (std::size_t b = a + 1; b < items.size(); ++b) {
                const std::size_t idx = tri(items[a].first, items[b].first);
                const double x = items[a].second;
                const double y = items[b].second;
                sx[idx] += x;
                sy[idx] += y;
                sxx[idx] += x * x;
                syy[idx] += y * y;
                sxy[idx] += x * y;
                cnt[idx] += 1;
            }
        }
    }

    PearsonDiagnostics local;
    Matrix corr(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t idx = tri(i, j);
            const std::uint32_t c = cnt[idx];
            if (c < 2) {
                ++local.low_overlap_pairs;
                continue;
            }
            const double num = sxy[idx] - sx[idx] * sy[idx] / c;
            const double varx = sxx[idx] - sx[idx] * sx[idx] / c;
            const double vary = syy[idx] - sy[idx] * sy[idx] / c;
            if (varx <= 0.0 || vary <= 0.0) {
                ++local.zero_variance_pairs;
                continue;
            }
            double r = num / std::sqrt(varx * vary);
            r = std::clamp(r, -1.0, 1.0);
            corr(i, j) = r;
            corr(j, i) = r;
        }
    }
    if (diag != nullptr) *diag = local;
    return corr;
}

GraphShiftOperator build_knn_graph(const Matrix& similarity, std::size_t k) {
    const std::size_t n = similarity.rows();
    if (similarity.cols() != n) throw ValidationError("build_knn_graph: similarity must be square");
    if (k >= n) {
        std::ostringstream msg;
        msg << "build_knn_graph: k = " << k << " must be smaller than n = " << n;
        throw ValidationError(msg.str());
    }

    Matrix out(n, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        // Largest similarity first; ties keep the lowest index (stable sort
        // over an index sequence that is already ascending).
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return similarity(i, a) > similarity(i, b);
        });
        std::size_t kept = 0;
        for (std::size_t pos = 0; pos < n && kept < k; ++pos) {
            const std::size_t j = order[pos];
            if (j == i) continue;
            out(i, j) = similarity(i, j);
            ++kept;
        }
    }
    // Union symmetrization: an edge selected from either endpoint survives
    // with the original symmetric weight.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (out(i, j) != 0.0 || out(j, i) != 0.0) {
                const double w = similarity(i, j);
                out(i, j) = w;
                out(j, i) = w;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 0.0;
    return GraphShiftOperator(std::move(out), GsoKind::knn_similarity);
}

GraphShiftOperator random_weighted_graph(std::size_t n, double density, std::uint64_t seed) {
    if (n == 0) throw ValidationError("random_weighted_graph: n must be at least 1");
    if (!(density > 0.0) || density > 1.0) {
        throw ValidationError("random_weighted_graph: density must be in (0, 1]");
    }
    Rng rng(seed);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < density) {
                const double w = rng.uniform(0.5, 1.5);
                m(i, j) = w;
                m(j, i) = w;
            }
        }
    }
    return GraphShiftOperator(std::move(m), GsoKind::adjacency);
}

GraphShiftOperator laplacian(const GraphShiftOperator& s) {
    const std::size_t n = s.size();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            degree += s.matrix()(i, j);
            l(i, j) = -s.matrix()(i, j);
        }
        l(i, i) = degree;
    }
    return GraphShiftOperator(std::move(l), GsoKind::custom);
}

}  // namespace gnnstab
