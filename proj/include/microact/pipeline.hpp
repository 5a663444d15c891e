#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "microact/changepoint.hpp"
#include "microact/config.hpp"
#include "microact/dimreduce.hpp"
#include "microact/embedding.hpp"
#include "microact/ingest.hpp"
#include "microact/rulsif.hpp"
#include "microact/schemas.hpp"
#include "microact/synth.hpp"
#include "microact/types.hpp"
#include "microact/zeroshot.hpp"

namespace microact {

/// The persisted artifact: everything needed to decompose new recordings.
struct PipelineModel {
    PipelineConfig config;
    AttributeSchema schema;
    FittedReducer reducer; // global reducer (consistent mode); also the
                           // fallback in paper-faithful mode
    ZeroShotModel zeroshot;
};

struct TrainingReport {
    std::map<std::string, std::size_t> rows_per_label;
    std::vector<std::size_t> constant_attributes;
    std::vector<std::string> reducer_fallback_labels;
    std::size_t n_training_intervals = 0;
    std::size_t n_decompose_intervals = 0;
};

struct ReportSegment {
    double start_s = 0.0, end_s = 0.0;
    AttributeVector attributes;
    std::vector<VerbMatch> verb_matches;
};

struct MicroActivityReport {
    std::string subject_id;
    std::string macro_label;
    LabeledInterval interval;
    std::vector<ReportSegment> segments;
    bool single_segment_flag = false; // interval too short for detection
};

namespace detail {

struct IntervalSamples {
    Eigen::Index start = 0, count = 0;
};

inline IntervalSamples interval_samples(const SyncedStream& stream,
                                        const LabeledInterval& iv) {
    IntervalSamples out;
    out.start = static_cast<Eigen::Index>(
        std::llround((iv.start_s - stream.epoch_s) * stream.rate_hz));
    const auto end = static_cast<Eigen::Index>(
        std::llround((iv.end_s - stream.epoch_s) * stream.rate_hz));
    out.start = std::clamp<Eigen::Index>(out.start, 0, stream.data.rows());
    out.count = std::clamp<Eigen::Index>(end, out.start, stream.data.rows()) - out.start;
    return out;
}

/// Feature rows for one segment of a magnitude matrix; a segment shorter than
/// one window contributes its mean as a single row.
inline Matrix segment_feature_rows(const Matrix& mags, Eigen::Index seg_start,
                                   Eigen::Index seg_len, const PipelineConfig& config,
                                   double rate_hz) {
    const Matrix block = mags.middleRows(seg_start, seg_len);
    const auto win = static_cast<Eigen::Index>(std::llround(config.feature_window_s * rate_hz));
    if (seg_len < win) {
        Matrix row(1, mags.cols());
        row.row(0) = block.colwise().mean();
        return row;
    }
    const auto rows =
        window_features(block, config.feature_window_s, rate_hz, config.keep_partial_window);
    Matrix out(static_cast<Eigen::Index>(rows.size()), mags.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index c = 0; c < mags.cols(); ++c)
            out(static_cast<Eigen::Index>(i), c) = rows[i].values[static_cast<std::size_t>(c)];
    return out;
}

inline Segmentation run_cpd(const Matrix& mags, const PipelineConfig& config) {
    switch (config.cpd.algorithm) {
    case CpdAlgorithm::pelt:
        return pelt(mags, config.cpd.penalty, CostFunction::l2, config.cpd.min_segment_length);
    case CpdAlgorithm::kernel:
        return kernel_cpd(mags, config.cpd.penalty, config.cpd.min_segment_length);
    case CpdAlgorithm::rulsif: {
        const auto scores = rulsif_scores(mags, config.cpd.alpha, config.cpd.rulsif_window,
                                          config.cpd.rulsif_step);
        return binarize_scores(scores, config.cpd.min_segment_length, mags.rows());
    }
    }
    throw ValidationError("unknown cpd algorithm");
}

inline AttributeVector majority_vector(const std::vector<AttributeVector>& rows,
                                       const AttributeSchema& schema) {
    AttributeVector out;
    for (std::size_t j = 0; j < schema.dimension(); ++j) {
        std::map<int, int> counts;
        for (const auto& r : rows) ++counts[r.values[j]];
        int best_value = counts.begin()->first, best = -1;
        for (const auto& [value, c] : counts)
            if (c > best) { // ties resolve to the smallest value
                best = c;
                best_value = value;
            }
        out.values.push_back(best_value);
    }
    return out;
}

} // namespace detail

/// segregate -> window features -> reducer fit -> per-attribute training.
/// label_attributes maps every training label to its semantic vector.
inline std::pair<PipelineModel, TrainingReport>
train_pipeline(const std::vector<Recording>& recordings,
               const std::map<std::string, AttributeVector>& label_attributes,
               const AttributeSchema& schema, const PipelineConfig& config) {
    config.validate();
    schema.validate();

    std::map<std::string, Matrix> groups;
    TrainingReport report;
    for (const auto& rec : recordings) {
        rec.validate();
        const auto [training, decompose_part] = segregate(rec, config.threshold_T_s);
        report.n_decompose_intervals += decompose_part.size();
        const Matrix mags = magnitude(rec.stream);
        for (const auto& iv : training) {
            const auto span = detail::interval_samples(rec.stream, iv);
            if (span.count < 1) continue;
            ++report.n_training_intervals;
            const auto it = label_attributes.find(iv.label);
            if (it == label_attributes.end())
                throw ValidationError("no attribute vector for training label '" + iv.label +
                                      "'");
            it->second.validate(schema);
            const Matrix rows = detail::segment_feature_rows(mags, span.start, span.count,
                                                             config, rec.stream.rate_hz);
            auto& g = groups[iv.label];
            const Eigen::Index old = g.rows();
            g.conservativeResize(old + rows.rows(), rows.cols());
            g.bottomRows(rows.rows()) = rows;
        }
    }
    if (groups.empty())
        throw ValidationError("no atomic activities under T: nothing to train on");

    PipelineModel model;
    model.config = config;
    model.schema = schema;

    Matrix features;
    std::vector<std::string> row_labels;
    if (config.mode == PipelineMode::paper_faithful) {
        const auto lw = fit_label_wise(config.reducer, groups);
        model.reducer = lw.global;
        features = lw.pooled;
        row_labels = lw.labels;
        report.reducer_fallback_labels = lw.fallback_labels;
    } else {
        Eigen::Index total = 0, cols = 0;
        for (const auto& [label, rows] : groups) {
            total += rows.rows();
            cols = rows.cols();
        }
        Matrix all(total, cols);
        Eigen::Index at = 0;
        for (const auto& [label, rows] : groups) {
            all.middleRows(at, rows.rows()) = rows;
            for (Eigen::Index i = 0; i < rows.rows(); ++i) row_labels.push_back(label);
            at += rows.rows();
        }
        model.reducer = fit(config.reducer, all);
        features = model.reducer.transform(all);
    }
    for (const auto& [label, rows] : groups)
        report.rows_per_label[label] = static_cast<std::size_t>(rows.rows());

    std::vector<AttributeVector> attribute_rows;
    attribute_rows.reserve(row_labels.size());
    for (const auto& label : row_labels) attribute_rows.push_back(label_attributes.at(label));

    model.zeroshot = train_zeroshot(schema, features, attribute_rows, config.classifier,
                                    &report.constant_attributes, config.threads);
    return {std::move(model), std::move(report)};
}

/// CPD inside the interval -> per-segment features -> reduction -> attribute
/// prediction -> nearest verbs. Pass a corpus to fill verb matches.
inline MicroActivityReport decompose(const PipelineModel& model, const Recording& recording,
                                     const LabeledInterval& interval,
                                     const VerbCorpus* corpus = nullptr) {
    const auto& config = model.config;
    const auto span = detail::interval_samples(recording.stream, interval);
    if (span.count < 1) throw ValidationError("decompose: interval contains no samples");

    const Matrix mags = magnitude(recording.stream).middleRows(span.start, span.count);

    MicroActivityReport report;
    report.subject_id = recording.subject_id;
    report.macro_label = interval.label;
    report.interval = interval;

    Segmentation seg;
    seg.n_samples = span.count;
    if (span.count < 2 * config.cpd.min_segment_length) {
        report.single_segment_flag = true;
    } else {
        seg = detail::run_cpd(mags, config);
    }

    std::vector<Eigen::Index> starts{0};
    for (const auto b : seg.boundaries) starts.push_back(b);
    starts.push_back(span.count);

    // collect feature rows per segment
    std::vector<Matrix> seg_rows;
    for (std::size_t s = 0; s + 1 < starts.size(); ++s)
        seg_rows.push_back(detail::segment_feature_rows(
            mags, starts[s], starts[s + 1] - starts[s], config, recording.stream.rate_hz));

    // reduce: one shared space by default; a fresh per-interval fit with
    // n_neighbors=2 in paper-faithful mode
    Eigen::Index total = 0;
    for (const auto& m : seg_rows) total += m.rows();
    Matrix pooled(total, mags.cols());
    Eigen::Index at = 0;
    for (const auto& m : seg_rows) {
        pooled.middleRows(at, m.rows()) = m;
        at += m.rows();
    }
    Matrix reduced;
    if (config.mode == PipelineMode::paper_faithful &&
        total >= config.reducer.target_dim + 1) {
        ReducerSpec fresh = config.reducer;
        fresh.n_neighbors = 2;
        reduced = fit(fresh, pooled).transform(pooled);
    } else {
        reduced = model.reducer.transform(pooled);
    }

    at = 0;
    for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
        const Eigen::Index n_rows = seg_rows[s].rows();
        std::vector<AttributeVector> predictions;
        for (Eigen::Index i = 0; i < n_rows; ++i)
            predictions.push_back(
                predict_attributes(model.zeroshot, reduced.row(at + i).transpose()));
        at += n_rows;

        ReportSegment out;
        out.start_s = interval.start_s + static_cast<double>(starts[s]) / recording.stream.rate_hz;
        out.end_s =
            interval.start_s + static_cast<double>(starts[s + 1]) / recording.stream.rate_hz;
        out.attributes = detail::majority_vector(predictions, model.schema);
        if (corpus && !corpus->entries.empty())
            out.verb_matches = nearest_verbs(*corpus, out.attributes, config.top_k);
        report.segments.push_back(std::move(out));
    }
    return report;
}

struct IntervalMetrics {
    std::string subject_id;
    std::string macro_label;
    std::size_t annotation_error = 0;
    double boundary_mae_s = 0.0;
    bool mae_fallback_flag = false;
    double micro_f1 = 0.0;
};

struct MetricsBundle {
    std::vector<IntervalMetrics> per_interval;
    double overall_micro_f1 = 0.0;

    double median_mae() const { return median_of(&IntervalMetrics::boundary_mae_s); }
    double median_ae() const {
        std::vector<double> v;
        for (const auto& m : per_interval) v.push_back(static_cast<double>(m.annotation_error));
        return median(v);
    }
    double median_f1() const { return median_of(&IntervalMetrics::micro_f1); }

    static double median(std::vector<double> v) {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        const auto n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

private:
    double median_of(double IntervalMetrics::*field) const {
        std::vector<double> v;
        for (const auto& m : per_interval) v.push_back(m.*field);
        return median(v);
    }
};

/// Compare reports with ground truth: boundary metrics per interval, truth
/// vectors aligned to predicted segments by maximal temporal overlap, micro-F1
/// pooled over all aligned pairs.
inline MetricsBundle evaluate_run(const std::vector<MicroActivityReport>& reports,
                                  const std::vector<TruthInterval>& truth,
                                  const AttributeSchema& schema, double rate_hz) {
    if (reports.size() != truth.size())
        throw ValidationError("evaluate_run: report/truth count mismatch");

    MetricsBundle bundle;
    std::vector<AttributeVector> all_predicted, all_truth;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& report = reports[i];
        const auto& t = truth[i];

        Segmentation estimate;
        estimate.n_samples = t.segmentation.n_samples;
        for (const auto& s : report.segments) {
            const auto b = static_cast<Eigen::Index>(
                std::llround((s.start_s - report.interval.start_s) * rate_hz));
            if (b > 0 && b < estimate.n_samples) estimate.boundaries.push_back(b);
        }

        IntervalMetrics m;
        m.subject_id = report.subject_id;
        m.macro_label = report.macro_label;
        m.annotation_error = annotation_error(t.segmentation, estimate);
        if (t.segmentation.boundaries.empty()) {
            m.boundary_mae_s = 0.0;
        } else {
            const auto mae = boundary_mae(t.segmentation, estimate, rate_hz);
            m.boundary_mae_s = mae.seconds;
            m.mae_fallback_flag = mae.empty_estimate_flag;
        }

        // align each predicted segment with the truth segment it overlaps most
        std::vector<AttributeVector> predicted, aligned;
        for (const auto& s : report.segments) {
            double best_overlap = -1.0;
            const TruthSegment* best = nullptr;
            for (const auto& ts : t.segments) {
                const double overlap =
                    std::min(s.end_s, ts.end_s) - std::max(s.start_s, ts.start_s);
                if (overlap > best_overlap) {
                    best_overlap = overlap;
                    best = &ts;
                }
            }
            if (!best) throw ValidationError("evaluate_run: truth has no segments");
            predicted.push_back(s.attributes);
            aligned.push_back(best->attributes);
        }
        m.micro_f1 = micro_f1(predicted, aligned, schema);
        all_predicted.insert(all_predicted.end(), predicted.begin(), predicted.end());
        all_truth.insert(all_truth.end(), aligned.begin(), aligned.end());
        bundle.per_interval.push_back(std::move(m));
    }
    bundle.overall_micro_f1 = micro_f1(all_predicted, all_truth, schema);
    return bundle;
}

} // namespace microact
