#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "microact/types.hpp"

namespace microact {

struct SvmSpec {
    double C = 1.0;
    double gamma = 0.0; // <= 0 means 1/(d * feature variance) at train time
    double tol = 1e-3;
    int max_passes = 10;

    void validate() const {
        if (C <= 0.0) throw ValidationError("svm: C must be positive");
    }
};

/// Binary RBF-kernel maximum-margin classifier trained by sequential minimal
/// optimization. Falls back to a constant when only one class is present.
struct SvmRbf {
    SvmSpec spec;
    double gamma = 1.0;
    Matrix support_vectors;        // rows
    std::vector<double> alpha_y;   // alpha_i * y_i per support vector
    double bias = 0.0;
    bool constant_flag = false;
    int constant_label = 0;
    int label_neg = 0, label_pos = 1; // original class values mapped to -1/+1

    double decision(const Vector& row) const {
        double f = bias;
        for (Eigen::Index i = 0; i < support_vectors.rows(); ++i)
            f += alpha_y[static_cast<std::size_t>(i)] *
                 std::exp(-gamma * (support_vectors.row(i).transpose() - row).squaredNorm());
        return f;
    }

    int predict(const Vector& row) const {
        if (constant_flag) return constant_label;
        return decision(row) >= 0.0 ? label_pos : label_neg;
    }
};

inline SvmRbf svm_train(const SvmSpec& spec, const Matrix& features,
                        const std::vector<int>& targets) {
    spec.validate();
    if (static_cast<std::size_t>(features.rows()) != targets.size())
        throw ValidationError("svm_train: feature/target row mismatch");
    if (!features.allFinite()) throw ValidationError("svm_train: non-finite features");

    SvmRbf model;
    model.spec = spec;

    const std::set<int> classes(targets.begin(), targets.end());
    if (classes.size() < 2) {
        model.constant_flag = true;
        model.constant_label = targets.empty() ? 0 : targets.front();
        return model;
    }
    if (classes.size() > 2)
        throw ValidationError("svm_train: exactly 2 classes required");
    model.label_neg = *classes.begin();
    model.label_pos = *std::next(classes.begin());

    const Eigen::Index m = features.rows();
    const double var = (features.rowwise() - features.colwise().mean())
                           .squaredNorm() /
                       static_cast<double>(m * features.cols());
    model.gamma = spec.gamma > 0.0
                      ? spec.gamma
                      : 1.0 / (static_cast<double>(features.cols()) * std::max(var, 1e-12));

    std::vector<double> y(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        y[static_cast<std::size_t>(i)] = targets[static_cast<std::size_t>(i)] == model.label_pos
                                             ? 1.0
                                             : -1.0;

    Matrix kernel(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j)
            kernel(i, j) = kernel(j, i) =
                std::exp(-model.gamma * (features.row(i) - features.row(j)).squaredNorm());

    std::vector<double> alpha(static_cast<std::size_t>(m), 0.0);
    double b = 0.0;
    auto f_of = [&](Eigen::Index i) {
        double f = b;
        for (Eigen::Index j = 0; j < m; ++j)
            f += alpha[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)] *
                 kernel(i, j);
        return f;
    };

    std::mt19937_64 rng(12345);
    int passes = 0;
    while (passes < spec.max_passes) {
        int changed = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double ei = f_of(i) - y[static_cast<std::size_t>(i)];
            const double ai = alpha[static_cast<std::size_t>(i)];
            if (!((y[static_cast<std::size_t>(i)] * ei < -spec.tol && ai < spec.C) ||
                  (y[static_cast<std::size_t>(i)] * ei > spec.tol && ai > 0.0)))
                continue;
            Eigen::Index j = static_cast<Eigen::Index>(
                std::uniform_int_distribution<Eigen::Index>(0, m - 2)(rng));
            if (j >= i) ++j;
            const double ej = f_of(j) - y[static_cast<std::size_t>(j)];
            const double aj = alpha[static_cast<std::size_t>(j)];

            double lo, hi;
            if (y[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(j)]) {
                lo = std::max(0.0, aj - ai);
                hi = std::min(spec.C, spec.C + aj - ai);
            } else {
                lo = std::max(0.0, ai + aj - spec.C);
                hi = std::min(spec.C, ai + aj);
            }
            if (lo >= hi) continue;
            const double eta = 2.0 * kernel(i, j) - kernel(i, i) - kernel(j, j);
            if (eta >= 0.0) continue;

            double aj_new =
                aj - y[static_cast<std::size_t>(j)] * (ei - ej) / eta;
            aj_new = std::clamp(aj_new, lo, hi);
            if (std::abs(aj_new - aj) < 1e-5) continue;
            const double ai_new =
                ai + y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] *
                         (aj - aj_new);

            const double b1 = b - ei -
                              y[static_cast<std::size_t>(i)] * (ai_new - ai) * kernel(i, i) -
                              y[static_cast<std::size_t>(j)] * (aj_new - aj) * kernel(i, j);
            const double b2 = b - ej -
                              y[static_cast<std::size_t>(i)] * (ai_new - ai) * kernel(i, j) -
                              y[static_cast<std::size_t>(j)] * (aj_new - aj) * kernel(j, j);
            if (ai_new > 0.0 && ai_new < spec.C)
                b = b1;
            else if (aj_new > 0.0 && aj_new < spec.C)
                b = b2;
            else
                b = 0.5 * (b1 + b2);

            alpha[static_cast<std::size_t>(i)] = ai_new;
            alpha[static_cast<std::size_t>(j)] = aj_new;
            ++changed;
        }
        passes = changed == 0 ? passes + 1 : 0;
    }

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < m; ++i)
        if (alpha[static_cast<std::size_t>(i)] > 1e-9) sv.push_back(i);
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), features.cols());
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<Eigen::Index>(k)) = features.row(sv[k]);
        model.alpha_y.push_back(alpha[static_cast<std::size_t>(sv[k])] *
                                y[static_cast<std::size_t>(sv[k])]);
    }
    model.bias = b;
    return model;
}

inline int svm_predict(const SvmRbf& model, const Vector& row) { return model.predict(row); }

} // namespace microact
