#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace microact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown on malformed inputs, broken invariants, and bad file contents.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on I/O failures and format/version mismatches.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct RawSample {
    std::int64_t timestamp_us = 0;
    double ax = 0.0, ay = 0.0, az = 0.0;
};

/// Asynchronous tri-axial samples from one inertial unit.
struct RawSensorStream {
    std::string unit_id;
    std::vector<RawSample> samples;

    void validate() const {
        if (samples.empty())
            throw ValidationError("unit '" + unit_id + "' has no samples");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (samples[i].timestamp_us <= samples[i - 1].timestamp_us)
                throw ValidationError("unit '" + unit_id +
                                      "': timestamps not strictly increasing at sample " +
                                      std::to_string(i));
    }
};

/// Uniform-rate multi-unit stream: one row per timestep, 3 columns per unit (x,y,z).
struct SyncedStream {
    double rate_hz = 0.0;
    std::vector<std::string> units;
    Matrix data;          // n x (3*|units|)
    double epoch_s = 0.0; // start time of row 0

    Eigen::Index n_samples() const { return data.rows(); }
    double duration_s() const { return static_cast<double>(data.rows()) / rate_hz; }

    void validate() const {
        if (rate_hz <= 0.0) throw ValidationError("rate_hz must be positive");
        if (data.cols() != static_cast<Eigen::Index>(3 * units.size()))
            throw ValidationError("column count must equal 3 x number of units");
        if (!data.allFinite()) throw ValidationError("synced stream contains non-finite cells");
    }
};

/// Coarse activity label over [start_s, end_s] relative to the stream epoch.
struct LabeledInterval {
    std::string label;
    double start_s = 0.0;
    double end_s = 0.0;

    double duration_s() const { return end_s - start_s; }
};

struct Recording {
    SyncedStream stream;
    std::vector<LabeledInterval> intervals;
    std::string subject_id;

    void validate() const {
        stream.validate();
        const double extent = stream.epoch_s + stream.duration_s();
        for (const auto& iv : intervals) {
            if (iv.start_s >= iv.end_s)
                throw ValidationError("interval '" + iv.label + "' has start >= end");
            if (iv.start_s < stream.epoch_s - 1e-9 || iv.end_s > extent + 1e-9)
                throw ValidationError("interval '" + iv.label + "' lies outside the stream extent");
        }
        // pairwise overlap check; interval lists are short in practice
        for (std::size_t i = 0; i < intervals.size(); ++i)
            for (std::size_t j = i + 1; j < intervals.size(); ++j) {
                const auto& a = intervals[i];
                const auto& b = intervals[j];
                if (a.start_s < b.end_s - 1e-9 && b.start_s < a.end_s - 1e-9)
                    throw ValidationError("intervals '" + a.label + "' and '" + b.label +
                                          "' overlap");
            }
    }
};

/// One window of per-unit magnitude means.
struct FeatureRow {
    double window_start_s = 0.0;
    std::vector<double> values; // length |units|
};

} // namespace microact
