#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "microact/types.hpp"

namespace microact {

/// Bin asynchronous per-unit samples onto one uniform time base by per-window
/// averaging. Output rate = 1/window. Windows with no samples for a unit are
/// filled by linear interpolation between neighboring non-empty windows;
/// leading/trailing gaps take the nearest value.
inline SyncedStream resample_sync(const std::vector<RawSensorStream>& streams,
                                  double window_s) {
    if (streams.empty()) throw ValidationError("resample_sync: empty stream set");
    if (window_s <= 0.0) throw ValidationError("resample_sync: window must be positive");
    for (const auto& s : streams) s.validate();

    const double window_us = window_s * 1e6;
    std::int64_t max_ts = 0;
    for (const auto& s : streams)
        max_ts = std::max(max_ts, s.samples.back().timestamp_us);
    const auto n_bins =
        static_cast<Eigen::Index>(std::floor(static_cast<double>(max_ts) / window_us)) + 1;

    SyncedStream out;
    out.rate_hz = 1.0 / window_s;
    out.epoch_s = 0.0;
    out.data.resize(n_bins, static_cast<Eigen::Index>(3 * streams.size()));

    std::vector<double> sum(static_cast<std::size_t>(n_bins));
    std::vector<std::int64_t> count(static_cast<std::size_t>(n_bins));
    for (std::size_t u = 0; u < streams.size(); ++u) {
        out.units.push_back(streams[u].unit_id);
        for (int axis = 0; axis < 3; ++axis) {
            std::fill(sum.begin(), sum.end(), 0.0);
            std::fill(count.begin(), count.end(), 0);
            for (const auto& sample : streams[u].samples) {
                const auto bin = static_cast<std::size_t>(
                    std::floor(static_cast<double>(sample.timestamp_us) / window_us));
                const double v = axis == 0 ? sample.ax : axis == 1 ? sample.ay : sample.az;
                if (!std::isfinite(v))
                    throw ValidationError("unit '" + streams[u].unit_id +
                                          "' contains a non-finite sample value");
                sum[bin] += v;
                ++count[bin];
            }
            // fill gaps: interpolate between non-empty bins, clamp at the ends
            std::vector<double> col(static_cast<std::size_t>(n_bins));
            std::ptrdiff_t prev = -1;
            for (std::ptrdiff_t k = 0; k < n_bins; ++k) {
                if (count[static_cast<std::size_t>(k)] == 0) continue;
                const double mean = sum[static_cast<std::size_t>(k)] /
                                    static_cast<double>(count[static_cast<std::size_t>(k)]);
                col[static_cast<std::size_t>(k)] = mean;
                if (prev < 0) {
                    for (std::ptrdiff_t j = 0; j < k; ++j) col[static_cast<std::size_t>(j)] = mean;
                } else {
                    const double lo = col[static_cast<std::size_t>(prev)];
                    for (std::ptrdiff_t j = prev + 1; j < k; ++j)
                        col[static_cast<std::size_t>(j)] =
                            lo + (mean - lo) * static_cast<double>(j - prev) /
                                     static_cast<double>(k - prev);
                }
                prev = k;
            }
            if (prev < 0)
                throw ValidationError("unit '" + streams[u].unit_id + "' has no samples");
            for (std::ptrdiff_t j = prev + 1; j < n_bins; ++j)
                col[static_cast<std::size_t>(j)] = col[static_cast<std::size_t>(prev)];
            for (Eigen::Index k = 0; k < n_bins; ++k)
                out.data(k, static_cast<Eigen::Index>(3 * u + static_cast<std::size_t>(axis))) =
                    col[static_cast<std::size_t>(k)];
        }
    }
    out.validate();
    return out;
}

/// Per-unit magnitude sqrt(x^2+y^2+z^2), one column per unit.
inline Matrix magnitude(const SyncedStream& stream) {
    const auto n_units = static_cast<Eigen::Index>(stream.units.size());
    Matrix mags(stream.data.rows(), n_units);
    for (Eigen::Index u = 0; u < n_units; ++u) {
        const auto x = stream.data.col(3 * u).array();
        const auto y = stream.data.col(3 * u + 1).array();
        const auto z = stream.data.col(3 * u + 2).array();
        mags.col(u) = (x * x + y * y + z * z).sqrt();
    }
    return mags;
}

/// Mean of each magnitude column over consecutive fixed-length windows.
/// The trailing partial window is dropped unless keep_partial is set.
inline std::vector<FeatureRow> window_features(const Matrix& magnitudes, double window_s,
                                               double rate_hz, bool keep_partial = false,
                                               double t0_s = 0.0) {
    if (window_s <= 0.0) throw ValidationError("window_features: window must be positive");
    if (magnitudes.rows() == 0) throw ValidationError("window_features: empty magnitude series");
    const auto win = static_cast<Eigen::Index>(std::llround(window_s * rate_hz));
    if (win < 1)
        throw ValidationError("window_features: window shorter than one sample period");

    std::vector<FeatureRow> rows;
    const Eigen::Index n = magnitudes.rows();
    for (Eigen::Index start = 0; start + win <= n; start += win) {
        FeatureRow row;
        row.window_start_s = t0_s + static_cast<double>(start) / rate_hz;
        const Vector mean = magnitudes.middleRows(start, win).colwise().mean();
        row.values.assign(mean.data(), mean.data() + mean.size());
        rows.push_back(std::move(row));
    }
    const Eigen::Index rem = n % win;
    if (keep_partial && rem > 0) {
        FeatureRow row;
        row.window_start_s = t0_s + static_cast<double>(n - rem) / rate_hz;
        const Vector mean = magnitudes.bottomRows(rem).colwise().mean();
        row.values.assign(mean.data(), mean.data() + mean.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Split intervals by duration: < T goes to training, >= T to decompose.
inline std::pair<std::vector<LabeledInterval>, std::vector<LabeledInterval>>
segregate(const Recording& recording, double threshold_T_s) {
    if (threshold_T_s <= 0.0) throw ValidationError("segregate: threshold must be positive");
    std::vector<LabeledInterval> training, decompose;
    for (const auto& iv : recording.intervals) {
        if (iv.duration_s() < threshold_T_s)
            training.push_back(iv);
        else
            decompose.push_back(iv);
    }
    return {training, decompose};
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& s, const std::string& file, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(file + ":" + std::to_string(line_no) + ": bad numeric field '" + s +
                              "'");
    }
}

inline std::int64_t parse_int64(const std::string& s, const std::string& file,
                                std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(file + ":" + std::to_string(line_no) + ": bad integer field '" + s +
                              "'");
    }
}

} // namespace detail

/// Load one unit CSV: header `timestamp_us,ax,ay,az`.
inline RawSensorStream load_unit_csv(const std::filesystem::path& path,
                                     const std::string& unit_id) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    RawSensorStream stream;
    stream.unit_id = unit_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "timestamp_us,ax,ay,az")
                throw ValidationError(path.string() + ":1: expected header 'timestamp_us,ax,ay,az'");
            continue;
        }
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 4)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 4 fields, got " + std::to_string(f.size()));
        RawSample s;
        s.timestamp_us = detail::parse_int64(f[0], path.string(), line_no);
        s.ax = detail::parse_double(f[1], path.string(), line_no);
        s.ay = detail::parse_double(f[2], path.string(), line_no);
        s.az = detail::parse_double(f[3], path.string(), line_no);
        if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az))
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": non-finite sample value");
        stream.samples.push_back(s);
    }
    stream.validate();
    return stream;
}

/// Load a recording directory: meta.json naming units and subject, one CSV per
/// unit, and labels.csv with `label,start_s,end_s`.
inline Recording load_recording(const std::filesystem::path& dir, double resample_window_s) {
    const auto meta_path = dir / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw IoError("cannot open " + meta_path.string());
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(meta_path.string() + ": " + e.what());
    }
    if (!meta.contains("units") || !meta["units"].is_array() || meta["units"].empty())
        throw ValidationError(meta_path.string() + ": manifest must name at least one unit");

    Recording rec;
    rec.subject_id = meta.value("subject_id", "unknown");

    std::vector<RawSensorStream> streams;
    for (const auto& unit : meta["units"]) {
        const auto unit_id = unit.get<std::string>();
        streams.push_back(load_unit_csv(dir / (unit_id + ".csv"), unit_id));
    }
    rec.stream = resample_sync(streams, resample_window_s);

    const auto labels_path = dir / "labels.csv";
    std::ifstream labels_in(labels_path);
    if (!labels_in) throw IoError("cannot open " + labels_path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(labels_in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "label,start_s,end_s")
                throw ValidationError(labels_path.string() +
                                      ":1: expected header 'label,start_s,end_s'");
            continue;
        }
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 3)
            throw ValidationError(labels_path.string() + ":" + std::to_string(line_no) +
                                  ": expected 3 fields, got " + std::to_string(f.size()));
        LabeledInterval iv;
        iv.label = f[0];
        iv.start_s = detail::parse_double(f[1], labels_path.string(), line_no);
        iv.end_s = detail::parse_double(f[2], labels_path.string(), line_no);
        rec.intervals.push_back(iv);
    }
    rec.validate();
    return rec;
}

/// Write a synced stream as `t_s,<unit>_x,<unit>_y,<unit>_z,...` for inspection.
inline void write_synced_csv(const SyncedStream& stream, std::ostream& out) {
    out << "t_s";
    for (const auto& u : stream.units) out << ',' << u << "_x," << u << "_y," << u << "_z";
    out << '\n';
    out.precision(12);
    for (Eigen::Index i = 0; i < stream.data.rows(); ++i) {
        out << stream.epoch_s + static_cast<double>(i) / stream.rate_hz;
        for (Eigen::Index c = 0; c < stream.data.cols(); ++c) out << ',' << stream.data(i, c);
        out << '\n';
    }
}

} // namespace microact
