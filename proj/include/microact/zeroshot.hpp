#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "microact/forest.hpp"
#include "microact/svm.hpp"
#include "microact/types.hpp"

namespace microact {

enum class AttributeKind { binary, ordinal };

struct AttributeDef {
    std::string name;
    AttributeKind kind = AttributeKind::binary;
    int levels = 2; // value range [0, levels)
    std::string group;
};

struct AttributeSchema {
    std::vector<AttributeDef> attributes;

    std::size_t dimension() const { return attributes.size(); }

    void validate() const {
        if (attributes.empty()) throw ValidationError("schema: needs at least one attribute");
        std::set<std::string> names;
        for (const auto& a : attributes) {
            if (!names.insert(a.name).second)
                throw ValidationError("schema: duplicate attribute name '" + a.name + "'");
            if (a.kind == AttributeKind::ordinal && a.levels < 2)
                throw ValidationError("schema: ordinal attribute '" + a.name +
                                      "' needs >= 2 levels");
            if (a.kind == AttributeKind::binary && a.levels != 2)
                throw ValidationError("schema: binary attribute '" + a.name +
                                      "' must have 2 levels");
        }
    }
};

struct AttributeVector {
    std::vector<int> values; // one per schema attribute

    void validate(const AttributeSchema& schema) const {
        if (values.size() != schema.dimension())
            throw ValidationError("attribute vector: expected " +
                                  std::to_string(schema.dimension()) + " values, got " +
                                  std::to_string(values.size()));
        for (std::size_t j = 0; j < values.size(); ++j)
            if (values[j] < 0 || values[j] >= schema.attributes[j].levels)
                throw ValidationError("attribute '" + schema.attributes[j].name +
                                      "': value " + std::to_string(values[j]) +
                                      " outside [0," +
                                      std::to_string(schema.attributes[j].levels) + ")");
    }

    bool operator==(const AttributeVector&) const = default;
};

enum class ClassifierKind { random_forest, svm_rbf };

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::random_forest;
    ForestSpec forest;
    SvmSpec svm;
};

/// One fitted predictor per attribute dimension. SVMs only handle binary
/// attributes; ordinal attributes always get a forest.
struct AttributeClassifier {
    std::variant<RandomForest, SvmRbf> impl;

    int predict(const Vector& row) const {
        return std::visit([&](const auto& c) { return c.predict(row); }, impl);
    }
    bool is_constant() const {
        return std::visit([](const auto& c) { return c.constant_flag; }, impl);
    }
};

struct ZeroShotModel {
    AttributeSchema schema;
    std::vector<AttributeClassifier> per_attribute;
    ClassifierSpec config;

    void validate() const {
        if (per_attribute.size() != schema.dimension())
            throw ValidationError("zero-shot model: classifier count != schema dimension");
    }
};

/// Fit one classifier per attribute column. Constant columns yield constant
/// classifiers, flagged in the returned index list.
inline ZeroShotModel train_zeroshot(const AttributeSchema& schema, const Matrix& features,
                                    const std::vector<AttributeVector>& attribute_rows,
                                    const ClassifierSpec& spec,
                                    std::vector<std::size_t>* constant_attributes = nullptr,
                                    unsigned n_threads = 1) {
    schema.validate();
    if (features.rows() == 0) throw ValidationError("train_zeroshot: no training rows");
    if (static_cast<std::size_t>(features.rows()) != attribute_rows.size())
        throw ValidationError("train_zeroshot: feature/attribute row mismatch");
    for (const auto& row : attribute_rows) row.validate(schema);

    ZeroShotModel model;
    model.schema = schema;
    model.config = spec;
    model.per_attribute.resize(schema.dimension());

    const auto n = schema.dimension();
    auto train_one = [&](std::size_t j) {
        std::vector<int> targets;
        targets.reserve(attribute_rows.size());
        for (const auto& row : attribute_rows) targets.push_back(row.values[j]);

        const bool use_svm = spec.kind == ClassifierKind::svm_rbf &&
                             schema.attributes[j].kind == AttributeKind::binary;
        if (use_svm) {
            model.per_attribute[j].impl = svm_train(spec.svm, features, targets);
        } else {
            ForestSpec fs = spec.forest;
            fs.seed = spec.forest.seed + static_cast<std::uint64_t>(j) * 1000003ULL;
            model.per_attribute[j].impl = rf_train(fs, features, targets);
        }
    };

    // per-attribute trainings are independent; result slots are preallocated
    const unsigned workers = std::min<unsigned>(std::max(1u, n_threads),
                                                static_cast<unsigned>(n));
    if (workers <= 1) {
        for (std::size_t j = 0; j < n; ++j) train_one(j);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t j = next.fetch_add(1); j < n; j = next.fetch_add(1))
                    train_one(j);
            });
        for (auto& t : pool) t.join();
    }

    if (constant_attributes) {
        constant_attributes->clear();
        for (std::size_t j = 0; j < n; ++j)
            if (model.per_attribute[j].is_constant()) constant_attributes->push_back(j);
    }
    return model;
}

inline AttributeVector predict_attributes(const ZeroShotModel& model, const Vector& row) {
    AttributeVector out;
    out.values.reserve(model.per_attribute.size());
    for (const auto& clf : model.per_attribute) out.values.push_back(clf.predict(row));
    out.validate(model.schema);
    return out;
}

/// Micro-averaged F1 over all attribute decisions. Binary attributes pool
/// only the positive class; ordinal attributes pool one-vs-rest per level.
inline double micro_f1(const std::vector<AttributeVector>& predicted,
                       const std::vector<AttributeVector>& truth,
                       const AttributeSchema& schema) {
    if (predicted.empty()) throw ValidationError("micro_f1: empty input");
    if (predicted.size() != truth.size())
        throw ValidationError("micro_f1: prediction/truth length mismatch");

    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        predicted[i].validate(schema);
        truth[i].validate(schema);
        for (std::size_t j = 0; j < schema.dimension(); ++j) {
            const int p = predicted[i].values[j], t = truth[i].values[j];
            if (schema.attributes[j].kind == AttributeKind::binary) {
                if (t == 1 && p == 1) ++tp;
                if (t == 0 && p == 1) ++fp;
                if (t == 1 && p == 0) ++fn;
            } else {
                for (int level = 0; level < schema.attributes[j].levels; ++level) {
                    if (t == level && p == level) ++tp;
                    if (t != level && p == level) ++fp;
                    if (t == level && p != level) ++fn;
                }
            }
        }
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 1.0 : 2.0 * tp / denom;
}

} // namespace microact
