#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "microact/changepoint.hpp"
#include "microact/types.hpp"
#include "microact/zeroshot.hpp"

namespace microact {

/// Per-unit signal regime of one micro-activity: baseline + sinusoid.
struct SynthRegime {
    double mean = 1.0;
    double osc_amplitude = 0.0;
    double osc_freq_hz = 0.0;
};

struct SynthMicro {
    std::string name;
    AttributeVector attributes;
    std::vector<SynthRegime> per_unit;
};

struct SynthScriptItem {
    std::string micro;
    double duration_s = 0.0;
};

struct SynthScript {
    std::string name; // becomes the macro label
    std::vector<SynthScriptItem> items;
};

struct SynthSpec {
    int n_units = 3;
    double rate_hz = 100.0;
    std::vector<SynthMicro> library;
    std::vector<SynthScript> scripts;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;
    int atomic_repeats = 3;        // short labeled occurrences of each micro
    double atomic_duration_s = 6.0;

    void validate() const {
        if (n_units < 1) throw ValidationError("synth: n_units must be >= 1");
        if (rate_hz <= 0.0) throw ValidationError("synth: rate_hz must be positive");
        if (library.empty()) throw ValidationError("synth: library must be nonempty");
        if (noise_sigma < 0.0) throw ValidationError("synth: noise_sigma must be >= 0");
        if (atomic_duration_s <= 0.0)
            throw ValidationError("synth: atomic_duration must be positive");
        for (const auto& m : library)
            if (m.per_unit.size() != static_cast<std::size_t>(n_units))
                throw ValidationError("synth: micro '" + m.name +
                                      "' regime count != n_units");
        for (const auto& s : scripts)
            for (const auto& item : s.items) {
                if (item.duration_s <= 0.0)
                    throw ValidationError("synth: script durations must be positive");
                if (!find_micro_ptr(item.micro))
                    throw ValidationError("synth: unknown micro '" + item.micro + "'");
            }
    }

    const SynthMicro* find_micro_ptr(const std::string& name) const {
        for (const auto& m : library)
            if (m.name == name) return &m;
        return nullptr;
    }

    const SynthMicro& find_micro(const std::string& name) const {
        const auto* p = find_micro_ptr(name);
        if (!p) throw ValidationError("synth: unknown micro '" + name + "'");
        return *p;
    }

    std::map<std::string, AttributeVector> label_attributes() const {
        std::map<std::string, AttributeVector> out;
        for (const auto& m : library) out[m.name] = m.attributes;
        return out;
    }
};

struct TruthSegment {
    double start_s = 0.0, end_s = 0.0;
    AttributeVector attributes;
};

struct TruthInterval {
    std::size_t interval_index = 0; // into Recording::intervals
    Segmentation segmentation;      // boundaries relative to the interval start
    std::vector<TruthSegment> segments;
};

struct SynthResult {
    Recording recording;
    std::vector<TruthInterval> truth; // one per interval, same order
};

/// Deterministic recording: the atomic occurrences of every library micro
/// followed by the scripted macro intervals, back to back on one stream.
/// Truth boundaries sit at the script transitions.
inline SynthResult synth_generate(const SynthSpec& spec) {
    spec.validate();

    struct Block {
        std::string label;
        std::vector<SynthScriptItem> items;
    };
    std::vector<Block> blocks;
    for (int r = 0; r < spec.atomic_repeats; ++r)
        for (const auto& m : spec.library)
            blocks.push_back({m.name, {{m.name, spec.atomic_duration_s}}});
    for (const auto& s : spec.scripts) blocks.push_back({s.name, s.items});

    Eigen::Index total_samples = 0;
    for (const auto& b : blocks)
        for (const auto& item : b.items)
            total_samples += static_cast<Eigen::Index>(std::llround(item.duration_s * spec.rate_hz));

    SynthResult out;
    auto& stream = out.recording.stream;
    stream.rate_hz = spec.rate_hz;
    stream.epoch_s = 0.0;
    for (int u = 0; u < spec.n_units; ++u) stream.units.push_back("unit" + std::to_string(u));
    stream.data = Matrix::Zero(total_samples, 3 * spec.n_units);
    out.recording.subject_id = "synth";

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);

    Eigen::Index at = 0;
    for (const auto& block : blocks) {
        TruthInterval truth;
        truth.interval_index = out.recording.intervals.size();
        const Eigen::Index block_start = at;
        for (const auto& item : block.items) {
            const auto& micro = spec.find_micro(item.micro);
            const auto n =
                static_cast<Eigen::Index>(std::llround(item.duration_s * spec.rate_hz));
            if (at != block_start)
                truth.segmentation.boundaries.push_back(at - block_start);
            TruthSegment seg;
            seg.start_s = static_cast<double>(at) / spec.rate_hz;
            seg.end_s = static_cast<double>(at + n) / spec.rate_hz;
            seg.attributes = micro.attributes;
            truth.segments.push_back(seg);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double t = static_cast<double>(at + i) / spec.rate_hz;
                for (int u = 0; u < spec.n_units; ++u) {
                    const auto& regime = micro.per_unit[static_cast<std::size_t>(u)];
                    double v = regime.mean +
                               regime.osc_amplitude *
                                   std::sin(2.0 * std::numbers::pi * regime.osc_freq_hz * t);
                    if (spec.noise_sigma > 0.0) v += noise(rng);
                    stream.data(at + i, 3 * u) = v;
                }
            }
            at += n;
        }
        truth.segmentation.n_samples = at - block_start;
        out.recording.intervals.push_back(
            {block.label, static_cast<double>(block_start) / spec.rate_hz,
             static_cast<double>(at) / spec.rate_hz});
        out.truth.push_back(std::move(truth));
    }
    out.recording.validate();
    return out;
}

/// Benchmark spec: a small micro library with well-separated signal regimes
/// and n_scripts two-part macro scripts exercising 5-sigma mean shifts.
inline SynthSpec make_benchmark_spec(const AttributeSchema& schema, int n_scripts,
                                     double noise_sigma, std::uint64_t seed) {
    SynthSpec spec;
    spec.n_units = 3;
    spec.rate_hz = 100.0;
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    spec.atomic_repeats = 3;
    spec.atomic_duration_s = 6.0;

    // regime means spaced by >= 5 sigma at the default noise level
    const double step = 5.0 * std::max(noise_sigma, 0.1);
    std::mt19937_64 rng(seed ^ 0xa5a5a5a5ULL);
    const int n_micros = 4;
    for (int k = 0; k < n_micros; ++k) {
        SynthMicro m;
        m.name = "micro" + std::to_string(k);
        m.attributes.values.assign(schema.dimension(), 0);
        // give each micro a distinct schema-valid attribute pattern
        for (std::size_t j = 0; j < schema.dimension(); ++j)
            m.attributes.values[j] =
                static_cast<int>((j + static_cast<std::size_t>(k)) %
                                 static_cast<std::size_t>(schema.attributes[j].levels));
        for (int u = 0; u < spec.n_units; ++u) {
            SynthRegime r;
            r.mean = 1.0 + step * static_cast<double>((k + u) % n_micros);
            r.osc_amplitude = 0.0;
            r.osc_freq_hz = 0.0;
            m.per_unit.push_back(r);
        }
        spec.library.push_back(std::move(m));
    }

    std::uniform_int_distribution<int> pick(0, n_micros - 1);
    for (int s = 0; s < n_scripts; ++s) {
        const int a = pick(rng);
        int b = pick(rng);
        if (b == a) b = (a + 1) % n_micros;
        SynthScript script;
        script.name = "script" + std::to_string(s);
        script.items = {{"micro" + std::to_string(a), 8.0},
                        {"micro" + std::to_string(b), 8.0}};
        spec.scripts.push_back(std::move(script));
    }
    return spec;
}

} // namespace microact
