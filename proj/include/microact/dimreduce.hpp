#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "microact/types.hpp"

namespace microact {

enum class ReducerKind { variance_linear, neighbor_manifold };

struct ReducerSpec {
    ReducerKind kind = ReducerKind::variance_linear;
    Eigen::Index target_dim = 2;
    Eigen::Index n_neighbors = 15; // manifold only
    std::uint64_t seed = 0;

    void validate() const {
        if (target_dim < 1) throw ValidationError("reducer: target_dim must be >= 1");
        if (n_neighbors < 2) throw ValidationError("reducer: n_neighbors must be >= 2");
    }
};

/// Immutable after fit; safe for concurrent transform calls.
struct FittedReducer {
    ReducerSpec spec;
    Eigen::Index input_dim = 0;
    bool rank_deficient_flag = false;

    // variance_linear state
    Vector mean;
    Matrix components;        // input_dim x d, orthonormal columns
    Vector explained_variance; // d

    // neighbor_manifold state: training anchors and their embedded coordinates
    Matrix anchors;   // m x input_dim
    Matrix embedding; // m x d

    Matrix transform(const Matrix& rows) const;
};

namespace detail {

inline void orient_components(Matrix& components) {
    // orient each component so its largest-magnitude coordinate is positive
    for (Eigen::Index c = 0; c < components.cols(); ++c) {
        Eigen::Index arg = 0;
        components.col(c).cwiseAbs().maxCoeff(&arg);
        if (components(arg, c) < 0.0) components.col(c) = -components.col(c);
    }
}

inline FittedReducer fit_variance_linear(const ReducerSpec& spec, const Matrix& rows) {
    FittedReducer fr;
    fr.spec = spec;
    fr.input_dim = rows.cols();
    fr.mean = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - fr.mean.transpose();
    const Matrix cov =
        centered.transpose() * centered / static_cast<double>(rows.rows() - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success)
        throw ValidationError("variance_linear: eigendecomposition failed");

    const Eigen::Index d = spec.target_dim;
    fr.components.resize(rows.cols(), d);
    fr.explained_variance.resize(d);
    // eigenvalues ascending; take the top d in descending order
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Index src = rows.cols() - 1 - j;
        fr.components.col(j) = solver.eigenvectors().col(src);
        fr.explained_variance(j) = std::max(0.0, solver.eigenvalues()(src));
        if (fr.explained_variance(j) < 1e-12) fr.rank_deficient_flag = true;
    }
    orient_components(fr.components);
    return fr;
}

inline std::vector<std::vector<Eigen::Index>> knn_graph(const Matrix& rows,
                                                        Eigen::Index k) {
    const Eigen::Index m = rows.rows();
    std::vector<std::vector<Eigen::Index>> nn(static_cast<std::size_t>(m));
    std::vector<std::pair<double, Eigen::Index>> dists;
    for (Eigen::Index i = 0; i < m; ++i) {
        dists.clear();
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i) dists.emplace_back((rows.row(i) - rows.row(j)).squaredNorm(), j);
        const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), dists.size());
        std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(kk),
                          dists.end());
        for (std::size_t t = 0; t < kk; ++t)
            nn[static_cast<std::size_t>(i)].push_back(dists[t].second);
    }
    return nn;
}

inline FittedReducer fit_neighbor_manifold(const ReducerSpec& spec, const Matrix& rows) {
    FittedReducer fr;
    fr.spec = spec;
    fr.input_dim = rows.cols();
    fr.anchors = rows;

    const Eigen::Index m = rows.rows();
    const Eigen::Index k = std::min<Eigen::Index>(spec.n_neighbors, m - 1);
    const auto nn = knn_graph(rows, k);

    // fuzzy membership weights: w = exp(-(d - rho)/sigma) with sigma tuned so
    // the weights sum to log2(1+k)
    Matrix w = Matrix::Zero(m, m);
    const double target = std::log2(1.0 + static_cast<double>(k));
    for (Eigen::Index i = 0; i < m; ++i) {
        std::vector<double> d;
        for (const auto j : nn[static_cast<std::size_t>(i)])
            d.push_back((rows.row(i) - rows.row(j)).norm());
        const double rho = *std::min_element(d.begin(), d.end());
        double lo = 1e-6, hi = 1e6;
        for (int it = 0; it < 64; ++it) {
            const double sigma = 0.5 * (lo + hi);
            double s = 0.0;
            for (const double dd : d) s += std::exp(-std::max(0.0, dd - rho) / sigma);
            (s > target ? hi : lo) = sigma;
        }
        const double sigma = 0.5 * (lo + hi);
        for (std::size_t t = 0; t < d.size(); ++t)
            w(i, nn[static_cast<std::size_t>(i)][t]) =
                std::exp(-std::max(0.0, d[t] - rho) / sigma);
    }
    // symmetrize: a + b - ab
    Matrix graph = w + w.transpose() - w.cwiseProduct(w.transpose());

    // deterministic init: variance_linear projection scaled to unit spread
    ReducerSpec init_spec = spec;
    init_spec.kind = ReducerKind::variance_linear;
    Matrix emb;
    if (rows.cols() >= spec.target_dim) {
        const auto pca = fit_variance_linear(init_spec, rows);
        emb = pca.transform(rows);
    } else {
        emb = Matrix::Zero(m, spec.target_dim);
        emb.leftCols(rows.cols()) = rows;
    }
    const double spread = std::sqrt(emb.array().square().mean());
    if (spread > 1e-12) emb /= spread;

    // SGD on graph cross-entropy with negative sampling
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
    struct Edge {
        Eigen::Index i, j;
        double w;
    };
    std::vector<Edge> edges;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            if (graph(i, j) > 1e-9) edges.push_back({i, j, graph(i, j)});

    const int n_epochs = 200;
    const int n_negative = 5;
    for (int epoch = 0; epoch < n_epochs; ++epoch) {
        const double lr = 1.0 * (1.0 - static_cast<double>(epoch) / n_epochs);
        for (const auto& e : edges) {
            Vector diff = emb.row(e.i) - emb.row(e.j);
            const double d2 = diff.squaredNorm();
            // attractive gradient of -log(1/(1+d^2))
            const double att = -2.0 * e.w / (1.0 + d2);
            emb.row(e.i) += lr * att * diff.transpose();
            emb.row(e.j) -= lr * att * diff.transpose();
            for (int neg = 0; neg < n_negative; ++neg) {
                const Eigen::Index j = pick(rng);
                if (j == e.i) continue;
                Vector nd = emb.row(e.i) - emb.row(j);
                const double nd2 = nd.squaredNorm();
                const double rep = 2.0 * e.w / ((0.01 + nd2) * (1.0 + nd2));
                emb.row(e.i) += lr * rep * nd.transpose();
            }
        }
    }
    fr.embedding = emb;
    return fr;
}

} // namespace detail

inline Matrix FittedReducer::transform(const Matrix& rows) const {
    if (rows.cols() != input_dim)
        throw ValidationError("transform: expected " + std::to_string(input_dim) +
                              " columns, got " + std::to_string(rows.cols()));
    if (spec.kind == ReducerKind::variance_linear)
        return (rows.rowwise() - mean.transpose()) * components;

    // out-of-sample rows map to the embedding of the nearest anchor
    Matrix out(rows.rows(), spec.target_dim);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        Eigen::Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < anchors.rows(); ++a) {
            const double d = (rows.row(i) - anchors.row(a)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = a;
            }
        }
        out.row(i) = embedding.row(best);
    }
    return out;
}

inline FittedReducer fit(const ReducerSpec& spec, const Matrix& rows) {
    spec.validate();
    if (spec.target_dim > rows.cols())
        throw ValidationError("fit: target_dim exceeds input dimension");
    if (rows.rows() < spec.target_dim + 1)
        throw ValidationError("fit: need at least target_dim+1 rows");
    if (!rows.allFinite()) throw ValidationError("fit: non-finite values");
    return spec.kind == ReducerKind::variance_linear
               ? detail::fit_variance_linear(spec, rows)
               : detail::fit_neighbor_manifold(spec, rows);
}

struct LabelWiseResult {
    std::map<std::string, FittedReducer> per_label;
    FittedReducer global;
    Matrix pooled;                    // each group transformed by its own reducer
    std::vector<std::string> labels;  // per pooled row
    std::vector<std::string> fallback_labels; // groups that used the global reducer
};

/// One reducer per label, fitted on that label's rows; groups too small for a
/// fit fall back to the global reducer, flagged.
inline LabelWiseResult fit_label_wise(const ReducerSpec& spec,
                                      const std::map<std::string, Matrix>& groups) {
    if (groups.empty()) throw ValidationError("fit_label_wise: empty group set");
    Eigen::Index total = 0, cols = 0;
    for (const auto& [label, rows] : groups) {
        total += rows.rows();
        cols = rows.cols();
    }
    Matrix all(total, cols);
    Eigen::Index at = 0;
    for (const auto& [label, rows] : groups) {
        all.middleRows(at, rows.rows()) = rows;
        at += rows.rows();
    }

    LabelWiseResult out;
    out.global = fit(spec, all);
    out.pooled.resize(total, spec.target_dim);
    at = 0;
    for (const auto& [label, rows] : groups) {
        const FittedReducer* reducer = &out.global;
        if (rows.rows() >= spec.target_dim + 1) {
            out.per_label[label] = fit(spec, rows);
            reducer = &out.per_label[label];
        } else {
            out.fallback_labels.push_back(label);
        }
        out.pooled.middleRows(at, rows.rows()) = reducer->transform(rows);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) out.labels.push_back(label);
        at += rows.rows();
    }
    return out;
}

} // namespace microact
