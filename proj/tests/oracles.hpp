#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive (scalar loops, unpruned scans) so they share no code
// path with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include <microact/types.hpp>
#include <microact/zeroshot.hpp>

namespace oracles {

using microact::Matrix;
using microact::Vector;

/// Scalar-loop per-window averaging of raw samples, one unit/axis at a time.
/// Empty windows are linearly interpolated, ends clamped.
inline std::vector<double> naive_window_means(const std::vector<std::int64_t>& ts_us,
                                              const std::vector<double>& values,
                                              double window_s, std::size_t n_bins) {
    std::vector<double> sums(n_bins, 0.0);
    std::vector<int> counts(n_bins, 0);
    for (std::size_t i = 0; i < ts_us.size(); ++i) {
        const auto bin = static_cast<std::size_t>(
            std::floor(static_cast<double>(ts_us[i]) / (window_s * 1e6)));
        if (bin < n_bins) {
            sums[bin] += values[i];
            ++counts[bin];
        }
    }
    std::vector<double> out(n_bins, 0.0);
    std::ptrdiff_t prev = -1;
    for (std::size_t k = 0; k < n_bins; ++k) {
        if (counts[k] == 0) continue;
        out[k] = sums[k] / counts[k];
        if (prev < 0) {
            for (std::size_t j = 0; j < k; ++j) out[j] = out[k];
        } else {
            for (std::ptrdiff_t j = prev + 1; j < static_cast<std::ptrdiff_t>(k); ++j)
                out[static_cast<std::size_t>(j)] =
                    out[static_cast<std::size_t>(prev)] +
                    (out[k] - out[static_cast<std::size_t>(prev)]) *
                        static_cast<double>(j - prev) /
                        static_cast<double>(static_cast<std::ptrdiff_t>(k) - prev);
        }
        prev = static_cast<std::ptrdiff_t>(k);
    }
    if (prev >= 0)
        for (std::size_t j = static_cast<std::size_t>(prev) + 1; j < n_bins; ++j)
            out[j] = out[static_cast<std::size_t>(prev)];
    return out;
}

/// Brute-force chunk means over a single series.
inline std::vector<double> chunk_means(const std::vector<double>& series, std::size_t chunk) {
    std::vector<double> out;
    for (std::size_t start = 0; start + chunk <= series.size(); start += chunk) {
        double s = 0.0;
        for (std::size_t i = 0; i < chunk; ++i) s += series[start + i];
        out.push_back(s / static_cast<double>(chunk));
    }
    return out;
}

/// Cyclic Jacobi eigensolver for symmetric matrices; returns (eigenvalues
/// descending, eigenvectors as columns).
inline std::pair<Vector, Matrix> jacobi_eigen(Matrix a) {
    const Eigen::Index n = a.rows();
    Matrix v = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
    Vector evals(n);
    Matrix evecs(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        evals(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        evecs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return {evals, evecs};
}

/// Confusion-count micro F1 by direct enumeration.
inline double brute_micro_f1(const std::vector<microact::AttributeVector>& pred,
                             const std::vector<microact::AttributeVector>& truth,
                             const microact::AttributeSchema& schema) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        for (std::size_t j = 0; j < schema.dimension(); ++j) {
            const auto& attr = schema.attributes[j];
            const int p = pred[i].values[j], t = truth[i].values[j];
            if (attr.kind == microact::AttributeKind::binary) {
                tp += (p == 1 && t == 1);
                fp += (p == 1 && t == 0);
                fn += (p == 0 && t == 1);
            } else {
                for (int level = 0; level < attr.levels; ++level) {
                    tp += (p == level && t == level);
                    fp += (p == level && t != level);
                    fn += (p != level && t == level);
                }
            }
        }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 1.0 : 2.0 * tp / denom;
}

/// Piecewise-constant test signal with known change points.
struct PiecewiseSignal {
    Matrix data;
    std::vector<Eigen::Index> true_changes;
};

inline PiecewiseSignal random_piecewise_signal(std::mt19937_64& rng, Eigen::Index n,
                                               int n_changes, Eigen::Index dims,
                                               double level_gap, double noise_sigma,
                                               Eigen::Index min_gap = 20) {
    PiecewiseSignal sig;
    std::uniform_int_distribution<Eigen::Index> pos(min_gap, n - min_gap - 1);
    std::vector<Eigen::Index> changes;
    int guard = 0;
    while (static_cast<int>(changes.size()) < n_changes && guard++ < 10000) {
        const auto c = pos(rng);
        bool ok = true;
        for (const auto e : changes)
            if (std::abs(e - c) < min_gap) ok = false;
        if (ok) changes.push_back(c);
    }
    std::sort(changes.begin(), changes.end());
    sig.true_changes = changes;

    std::normal_distribution<double> noise(0.0, noise_sigma);
    std::uniform_real_distribution<double> shift(level_gap, 2.0 * level_gap);
    std::uniform_int_distribution<int> sign(0, 1);
    sig.data.resize(n, dims);
    Vector level = Vector::Zero(dims);
    std::size_t next = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (next < changes.size() && i == changes[next]) {
            for (Eigen::Index d = 0; d < dims; ++d)
                level(d) += (sign(rng) ? 1.0 : -1.0) * shift(rng);
            ++next;
        }
        for (Eigen::Index d = 0; d < dims; ++d) sig.data(i, d) = level(d) + noise(rng);
    }
    return sig;
}

} // namespace oracles
