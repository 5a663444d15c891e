#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "microact/changepoint.hpp"
#include "microact/types.hpp"

namespace microact {

namespace detail {

/// Gaussian kernel design matrix: rows = samples, cols = centers.
inline Matrix gaussian_design(const Matrix& samples, const Matrix& centers, double sigma) {
    Matrix k(samples.rows(), centers.rows());
    const double inv = -1.0 / (2.0 * sigma * sigma);
    for (Eigen::Index i = 0; i < samples.rows(); ++i)
        for (Eigen::Index j = 0; j < centers.rows(); ++j)
            k(i, j) = std::exp(inv * (samples.row(i) - centers.row(j)).squaredNorm());
    return k;
}

/// Median pairwise distance of the rows; the kernel bandwidth heuristic.
inline double median_pairwise_distance(const Matrix& rows) {
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(rows.rows() * (rows.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = i + 1; j < rows.rows(); ++j)
            dists.push_back((rows.row(i) - rows.row(j)).norm());
    if (dists.empty()) return 0.0;
    const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return *mid;
}

struct RulsifFit {
    double divergence = 0.0;
    bool degenerate = false;
};

/// Bandwidth multiplier applied to the median pairwise distance, together with
/// the heaviest grid value of lambda. With basis count equal to the window
/// size, the raw median heuristic lets the ratio model fit sampling noise and
/// stationary windows score far from zero; held-out selection of the pair is
/// too noisy at window 100 to veto those fits. The wide fixed setting keeps
/// stationary scores within +-0.05 while a distribution shift still dominates.
constexpr double kRulsifBandwidthScale = 12.0;
constexpr double kRulsifLambda = 1e-1;

/// One-directional alpha-relative Pearson divergence estimate between sample
/// sets X (numerator) and Y (denominator). The ratio model r(x) = theta' phi(x)
/// uses Gaussian basis functions centered on X and is fitted by regularized
/// least squares.
inline RulsifFit rulsif_divergence(const Matrix& x, const Matrix& y, double alpha) {
    RulsifFit out;
    const double var_x = (x.rowwise() - x.colwise().mean()).squaredNorm();
    const double var_y = (y.rowwise() - y.colwise().mean()).squaredNorm();
    if (var_x <= 1e-15 && var_y <= 1e-15) {
        out.degenerate = true;
        return out;
    }

    const Eigen::Index n_centers = std::min<Eigen::Index>(100, x.rows());
    const Matrix centers = x.topRows(n_centers);
    double sigma = median_pairwise_distance(x);
    if (sigma <= 1e-12) sigma = median_pairwise_distance(y);
    if (sigma <= 1e-12) {
        out.degenerate = true;
        return out;
    }
    sigma *= kRulsifBandwidthScale;

    const Matrix phi_x = gaussian_design(x, centers, sigma);
    const Matrix phi_y = gaussian_design(y, centers, sigma);

    auto hat_h = [&](const Matrix& phi) -> Vector { return phi.colwise().mean(); };
    auto hat_H = [&](const Matrix& px, const Matrix& py) -> Matrix {
        return alpha * (px.transpose() * px) / static_cast<double>(px.rows()) +
               (1.0 - alpha) * (py.transpose() * py) / static_cast<double>(py.rows());
    };

    const Matrix h_full =
        hat_H(phi_x, phi_y) + kRulsifLambda * Matrix::Identity(n_centers, n_centers);
    const Vector theta = Eigen::LDLT<Matrix>(h_full).solve(hat_h(phi_x));

    const Vector r_x = phi_x * theta;
    const Vector r_y = phi_y * theta;
    out.divergence = r_x.mean() - (alpha / 2.0) * r_x.array().square().mean() -
                     ((1.0 - alpha) / 2.0) * r_y.array().square().mean() - 0.5;
    return out;
}

} // namespace detail

/// Symmetrized alpha-relative Pearson divergence between the sample windows
/// before and after each evaluated position. Zero-variance window pairs score
/// 0 and set the degenerate flag instead of throwing.
inline ScoreSeries rulsif_scores(const Matrix& signal, double alpha, Eigen::Index window,
                                 Eigen::Index step) {
    if (alpha < 0.0 || alpha >= 1.0) throw ValidationError("rulsif: alpha must be in [0,1)");
    if (window < 2) throw ValidationError("rulsif: window must be >= 2");
    if (step < 1) throw ValidationError("rulsif: step must be >= 1");
    if (signal.rows() < 2 * window)
        throw ValidationError("rulsif: signal shorter than 2*window");
    if (!signal.allFinite()) throw ValidationError("rulsif: non-finite values");

    ScoreSeries out;
    for (Eigen::Index p = window; p + window <= signal.rows(); p += step) {
        const Matrix before = signal.middleRows(p - window, window);
        const Matrix after = signal.middleRows(p, window);
        const auto fwd = detail::rulsif_divergence(before, after, alpha);
        const auto bwd = detail::rulsif_divergence(after, before, alpha);
        out.positions.push_back(p);
        if (fwd.degenerate || bwd.degenerate) {
            out.scores.push_back(0.0);
            out.degenerate_flag = true;
        } else {
            out.scores.push_back(fwd.divergence + bwd.divergence);
        }
    }
    return out;
}

} // namespace microact
