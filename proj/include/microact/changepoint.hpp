#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "microact/types.hpp"

namespace microact {

/// Change indices: a boundary at i splits between sample i-1 and i.
struct Segmentation {
    std::vector<Eigen::Index> boundaries;
    Eigen::Index n_samples = 0;

    std::size_t n_segments() const { return boundaries.size() + 1; }

    void validate(Eigen::Index min_segment_length = 1) const {
        Eigen::Index prev = 0;
        for (const auto b : boundaries) {
            if (b <= 0 || b >= n_samples)
                throw ValidationError("boundary out of range: " + std::to_string(b));
            if (b - prev < min_segment_length)
                throw ValidationError("segment shorter than min_segment_length");
            prev = b;
        }
        if (n_samples - prev < min_segment_length)
            throw ValidationError("trailing segment shorter than min_segment_length");
    }
};

enum class CpdAlgorithm { pelt, kernel, rulsif };
enum class CostFunction { l2, linear_kernel };

struct CpdConfig {
    CpdAlgorithm algorithm = CpdAlgorithm::pelt;
    double penalty = 100.0;
    double alpha = 0.01;             // RuLSIF relative-divergence parameter
    Eigen::Index rulsif_window = 200;
    Eigen::Index rulsif_step = 50;
    Eigen::Index min_segment_length = 100;

    void validate() const {
        if (penalty < 0.0) throw ValidationError("penalty must be >= 0");
        if (alpha < 0.0 || alpha >= 1.0) throw ValidationError("alpha must be in [0,1)");
        if (min_segment_length < 1) throw ValidationError("min_segment_length must be >= 1");
        if (rulsif_window < 2) throw ValidationError("rulsif_window must be >= 2");
        if (rulsif_step < 1) throw ValidationError("rulsif_step must be >= 1");
    }
};

/// Divergence estimates at sample positions.
struct ScoreSeries {
    std::vector<Eigen::Index> positions;
    std::vector<double> scores;
    bool degenerate_flag = false; // set when some window had zero variance
};

namespace detail {

/// Prefix sums for O(1) segment cost. For both supported costs the segment
/// cost over (s, t] is sum_i ||x_i||^2 - ||sum_i x_i||^2 / len.
struct SegmentCost {
    Matrix prefix_sum;            // (n+1) x d
    std::vector<double> prefix_sq; // n+1

    explicit SegmentCost(const Matrix& signal) {
        const Eigen::Index n = signal.rows(), d = signal.cols();
        prefix_sum = Matrix::Zero(n + 1, d);
        prefix_sq.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            prefix_sum.row(i + 1) = prefix_sum.row(i) + signal.row(i);
            prefix_sq[static_cast<std::size_t>(i) + 1] =
                prefix_sq[static_cast<std::size_t>(i)] + signal.row(i).squaredNorm();
        }
    }

    double operator()(Eigen::Index s, Eigen::Index t) const {
        const double len = static_cast<double>(t - s);
        const double sq = prefix_sq[static_cast<std::size_t>(t)] -
                          prefix_sq[static_cast<std::size_t>(s)];
        const double lin = (prefix_sum.row(t) - prefix_sum.row(s)).squaredNorm();
        return sq - lin / len;
    }
};

inline void check_signal(const Matrix& signal, Eigen::Index min_segment_length) {
    if (signal.rows() < 2 * min_segment_length)
        throw ValidationError("signal too short: need at least 2*min_segment_length samples");
    if (!signal.allFinite()) throw ValidationError("signal contains non-finite values");
}

inline std::vector<Eigen::Index> backtrack(const std::vector<Eigen::Index>& last_change,
                                           Eigen::Index n) {
    std::vector<Eigen::Index> boundaries;
    Eigen::Index t = n;
    while (t > 0) {
        const Eigen::Index s = last_change[static_cast<std::size_t>(t)];
        if (s > 0) boundaries.push_back(s);
        t = s;
    }
    std::reverse(boundaries.begin(), boundaries.end());
    return boundaries;
}

} // namespace detail

/// Exact penalized segmentation with cost-based pruning. Minimizes
/// sum of segment costs + penalty * (#segments - 1). Ties go to the
/// smaller split index.
inline Segmentation pelt(const Matrix& signal, double penalty,
                         CostFunction /*cost*/ = CostFunction::l2,
                         Eigen::Index min_segment_length = 1) {
    detail::check_signal(signal, min_segment_length);
    const Eigen::Index n = signal.rows();
    const detail::SegmentCost cost(signal);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> F(static_cast<std::size_t>(n) + 1, inf);
    std::vector<Eigen::Index> last_change(static_cast<std::size_t>(n) + 1, 0);
    F[0] = -penalty;

    std::vector<Eigen::Index> candidates{0};
    for (Eigen::Index t = min_segment_length; t <= n; ++t) {
        double best = inf;
        Eigen::Index best_s = 0;
        for (const Eigen::Index s : candidates) {
            if (t - s < min_segment_length) continue;
            const double total = F[static_cast<std::size_t>(s)] + cost(s, t) + penalty;
            if (total < best) {
                best = total;
                best_s = s;
            }
        }
        F[static_cast<std::size_t>(t)] = best;
        last_change[static_cast<std::size_t>(t)] = best_s;

        // prune candidates that can never be optimal for any future t
        std::vector<Eigen::Index> kept;
        kept.reserve(candidates.size() + 1);
        for (const Eigen::Index s : candidates) {
            if (t - s < min_segment_length ||
                F[static_cast<std::size_t>(s)] + cost(s, t) <= best)
                kept.push_back(s);
        }
        kept.push_back(t);
        candidates = std::move(kept);
    }

    Segmentation seg;
    seg.n_samples = n;
    seg.boundaries = detail::backtrack(last_change, n);
    seg.validate(min_segment_length);
    return seg;
}

/// Unpruned O(n^2) penalized DP; test oracle for pelt.
inline Segmentation brute_force_segment(const Matrix& signal, double penalty,
                                        CostFunction /*cost*/ = CostFunction::l2,
                                        Eigen::Index min_segment_length = 1) {
    if (signal.rows() > 2000)
        throw ValidationError("brute_force_segment: quadratic DP limited to n <= 2000");
    detail::check_signal(signal, min_segment_length);
    const Eigen::Index n = signal.rows();
    const detail::SegmentCost cost(signal);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> F(static_cast<std::size_t>(n) + 1, inf);
    std::vector<Eigen::Index> last_change(static_cast<std::size_t>(n) + 1, 0);
    F[0] = -penalty;
    for (Eigen::Index t = min_segment_length; t <= n; ++t) {
        double best = inf;
        Eigen::Index best_s = 0;
        for (Eigen::Index s = 0; s + min_segment_length <= t; ++s) {
            if (s != 0 && s < min_segment_length) continue;
            const double total = F[static_cast<std::size_t>(s)] + cost(s, t) + penalty;
            if (total < best) {
                best = total;
                best_s = s;
            }
        }
        F[static_cast<std::size_t>(t)] = best;
        last_change[static_cast<std::size_t>(t)] = best_s;
    }

    Segmentation seg;
    seg.n_samples = n;
    seg.boundaries = detail::backtrack(last_change, n);
    seg.validate(min_segment_length);
    return seg;
}

/// Penalized kernel segmentation. With the linear kernel the segment cost
/// coincides with the L2 cost, so the same exact DP applies.
inline Segmentation kernel_cpd(const Matrix& signal, double penalty,
                               Eigen::Index min_segment_length = 1) {
    return pelt(signal, penalty, CostFunction::linear_kernel, min_segment_length);
}

/// Two-cluster 1-d k-means on score values; positions in the higher-mean
/// cluster become candidate changes, runs closer than min_segment_length are
/// merged to their max-score representative.
inline Segmentation binarize_scores(const ScoreSeries& scores, Eigen::Index min_segment_length,
                                    Eigen::Index n_samples) {
    if (scores.positions.size() != scores.scores.size())
        throw ValidationError("binarize_scores: positions/scores length mismatch");
    if (scores.scores.size() < 2)
        throw ValidationError("binarize_scores: need at least 2 score points");

    Segmentation seg;
    seg.n_samples = n_samples;

    std::vector<double> sorted(scores.scores);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) return seg; // all identical: no boundaries

    // exact 2-means on sorted values: best split minimizes within-cluster SSE
    const std::size_t m = sorted.size();
    std::vector<double> pre(m + 1, 0.0), pre_sq(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        pre[i + 1] = pre[i] + sorted[i];
        pre_sq[i + 1] = pre_sq[i] + sorted[i] * sorted[i];
    }
    auto sse = [&](std::size_t lo, std::size_t hi) {
        const double len = static_cast<double>(hi - lo);
        const double s = pre[hi] - pre[lo];
        return (pre_sq[hi] - pre_sq[lo]) - s * s / len;
    };
    std::size_t best_split = 1;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < m; ++k) {
        const double v = sse(0, k) + sse(k, m);
        if (v < best_sse) {
            best_sse = v;
            best_split = k;
        }
    }
    const double threshold = sorted[best_split]; // scores >= this are "high"

    struct Candidate {
        Eigen::Index pos;
        double score;
    };
    std::vector<Candidate> merged;
    for (std::size_t i = 0; i < scores.scores.size(); ++i) {
        if (scores.scores[i] < threshold) continue;
        const Candidate c{scores.positions[i], scores.scores[i]};
        if (!merged.empty() && c.pos - merged.back().pos < min_segment_length) {
            if (c.score > merged.back().score) merged.back() = c;
        } else {
            merged.push_back(c);
        }
    }
    for (const auto& c : merged)
        if (c.pos > 0 && c.pos < n_samples) seg.boundaries.push_back(c.pos);
    return seg;
}

/// Absolute difference between true and estimated boundary counts.
inline std::size_t annotation_error(const Segmentation& truth, const Segmentation& estimate) {
    if (truth.n_samples != estimate.n_samples)
        throw ValidationError("annotation_error: sample counts differ");
    const auto a = truth.boundaries.size(), b = estimate.boundaries.size();
    return a > b ? a - b : b - a;
}

struct BoundaryMae {
    double seconds = 0.0;
    bool empty_estimate_flag = false;
};

/// Mean over true boundaries of the time gap to the nearest estimated
/// boundary. An empty estimate falls back to the distance to the interval
/// endpoints, flagged.
inline BoundaryMae boundary_mae(const Segmentation& truth, const Segmentation& estimate,
                                double rate_hz) {
    if (truth.n_samples != estimate.n_samples)
        throw ValidationError("boundary_mae: sample counts differ");
    if (truth.boundaries.empty())
        throw ValidationError("boundary_mae: truth segmentation has no boundaries");

    BoundaryMae out;
    std::vector<Eigen::Index> ref = estimate.boundaries;
    if (ref.empty()) {
        out.empty_estimate_flag = true;
        ref = {0, truth.n_samples};
    }
    double total = 0.0;
    for (const auto t : truth.boundaries) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto e : ref)
            nearest = std::min(nearest, std::abs(static_cast<double>(t - e)));
        total += nearest;
    }
    out.seconds = total / (static_cast<double>(truth.boundaries.size()) * rate_hz);
    return out;
}

} // namespace microact
