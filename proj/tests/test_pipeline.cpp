#include <doctest.h>

#include <microact/microact.hpp>

using namespace microact;

namespace {

AttributeSchema tiny_schema() {
    AttributeSchema s;
    s.attributes = {{"held", AttributeKind::binary, 2, "object"},
                    {"moving", AttributeKind::binary, 2, "motion"},
                    {"intensity", AttributeKind::ordinal, 3, "motion"}};
    return s;
}

PipelineConfig fast_config() {
    auto config = profile_defaults(Profile::kitchen);
    config.classifier.forest.n_trees = 10;
    config.schema_name = "custom";
    return config;
}

struct Bench {
    SynthSpec spec;
    SynthResult synth;
    PipelineModel model;
    TrainingReport report;
};

Bench run_bench(double noise_sigma, std::uint64_t seed, const PipelineConfig& config,
                int n_scripts = 4) {
    Bench b;
    b.spec = make_benchmark_spec(tiny_schema(), n_scripts, noise_sigma, seed);
    b.synth = synth_generate(b.spec);
    auto [model, report] = train_pipeline({b.synth.recording}, b.spec.label_attributes(),
                                          tiny_schema(), config);
    b.model = std::move(model);
    b.report = std::move(report);
    return b;
}

// decompose every interval longer than T and pair it with its truth entry
std::pair<std::vector<MicroActivityReport>, std::vector<TruthInterval>>
decompose_long_intervals(const Bench& b) {
    std::vector<MicroActivityReport> reports;
    std::vector<TruthInterval> truths;
    for (std::size_t i = 0; i < b.synth.recording.intervals.size(); ++i) {
        const auto& iv = b.synth.recording.intervals[i];
        if (iv.end_s - iv.start_s <= b.model.config.threshold_T_s) continue;
        reports.push_back(decompose(b.model, b.synth.recording, iv));
        truths.push_back(b.synth.truth[i]);
    }
    return {std::move(reports), std::move(truths)};
}

} // namespace

TEST_CASE("train_pipeline: segregates and reports training shape") {
    const auto b = run_bench(0.1, 1, fast_config());
    // 4 micros x 3 repeats of atomic blocks, plus 4 scripts above T
    CHECK(b.report.n_training_intervals == 12);
    CHECK(b.report.n_decompose_intervals == 4);
    CHECK(b.report.rows_per_label.size() == 4);
    for (const auto& [label, rows] : b.report.rows_per_label) CHECK(rows == 18); // 3 x 6 s
    CHECK(b.model.reducer.input_dim == 3);
    CHECK(b.model.zeroshot.per_attribute.size() == 3);
}

TEST_CASE("decompose: zero noise recovers boundaries and attributes exactly") {
    const auto b = run_bench(0.0, 2, fast_config());
    const auto [reports, truths] = decompose_long_intervals(b);
    REQUIRE_FALSE(reports.empty());
    const auto metrics = evaluate_run(reports, truths, tiny_schema(), 100.0);
    for (const auto& m : metrics.per_interval) {
        CHECK(m.annotation_error == 0);
        CHECK(m.boundary_mae_s == doctest::Approx(0.0));
        CHECK(m.micro_f1 == doctest::Approx(1.0));
    }
    CHECK(metrics.overall_micro_f1 == doctest::Approx(1.0));

    for (const auto& r : reports) {
        REQUIRE(r.segments.size() == 2);
        CHECK(r.segments.front().start_s == doctest::Approx(r.interval.start_s));
        CHECK(r.segments.back().end_s == doctest::Approx(r.interval.end_s));
        CHECK_FALSE(r.single_segment_flag);
    }
}

TEST_CASE("decompose: default noise stays accurate") {
    const auto b = run_bench(0.1, 3, fast_config());
    const auto [reports, truths] = decompose_long_intervals(b);
    const auto metrics = evaluate_run(reports, truths, tiny_schema(), 100.0);
    CHECK(metrics.median_ae() == doctest::Approx(0.0));
    CHECK(metrics.median_mae() < 1.0);
    CHECK(metrics.median_f1() > 0.75);
}

TEST_CASE("decompose: verb matches are attached when a corpus is given") {
    const auto schema = verb_schema();
    auto config = fast_config();
    config.schema_name = "verb";
    auto spec = make_benchmark_spec(schema, 2, 0.1, 4);
    const auto synth = synth_generate(spec);
    auto [model, report] =
        train_pipeline({synth.recording}, spec.label_attributes(), schema, config);

    const auto corpus = demo_verb_corpus();
    for (std::size_t i = 0; i < synth.recording.intervals.size(); ++i) {
        const auto& iv = synth.recording.intervals[i];
        if (iv.end_s - iv.start_s <= config.threshold_T_s) continue;
        const auto rep = decompose(model, synth.recording, iv, &corpus);
        for (const auto& seg : rep.segments) {
            REQUIRE(seg.verb_matches.size() == static_cast<std::size_t>(config.top_k));
            for (std::size_t k = 1; k < seg.verb_matches.size(); ++k) {
                CHECK(seg.verb_matches[k].distance >= seg.verb_matches[k - 1].distance);
                CHECK(seg.verb_matches[k].rank == static_cast<int>(k) + 1);
            }
        }
        break;
    }
}

TEST_CASE("decompose: short interval falls back to a single flagged segment") {
    const auto b = run_bench(0.1, 5, fast_config());
    LabeledInterval iv{"short", 0.0, 1.5}; // 150 samples < 2 x min_segment_length
    const auto rep = decompose(b.model, b.synth.recording, iv);
    CHECK(rep.single_segment_flag);
    REQUIRE(rep.segments.size() == 1);
    CHECK(rep.segments[0].start_s == doctest::Approx(0.0));
    CHECK(rep.segments[0].end_s == doctest::Approx(1.5));

    LabeledInterval empty{"empty", 0.0, 0.0};
    CHECK_THROWS_AS(decompose(b.model, b.synth.recording, empty), ValidationError);
}

TEST_CASE("train_pipeline: error paths") {
    const auto schema = tiny_schema();
    auto spec = make_benchmark_spec(schema, 1, 0.1, 6);
    const auto synth = synth_generate(spec);

    auto labels = spec.label_attributes();
    labels.erase("micro2");
    bool used_micro2 = false;
    for (const auto& iv : synth.recording.intervals) used_micro2 |= iv.label == "micro2";
    REQUIRE(used_micro2);
    CHECK_THROWS_WITH_AS(
        train_pipeline({synth.recording}, labels, schema, fast_config()),
        doctest::Contains("micro2"), ValidationError);

    auto tiny_T = fast_config();
    tiny_T.threshold_T_s = 0.5; // every interval exceeds T, nothing to train on
    CHECK_THROWS_WITH_AS(
        train_pipeline({synth.recording}, spec.label_attributes(), schema, tiny_T),
        doctest::Contains("nothing to train"), ValidationError);
}

TEST_CASE("paper-faithful mode trains and decomposes") {
    auto config = fast_config();
    config.mode = PipelineMode::paper_faithful;
    const auto b = run_bench(0.0, 7, config);
    CHECK(b.report.reducer_fallback_labels.empty());
    const auto [reports, truths] = decompose_long_intervals(b);
    REQUIRE_FALSE(reports.empty());
    for (const auto& r : reports) CHECK(r.segments.size() >= 1);
}

TEST_CASE("evaluate_run: input validation and medians") {
    CHECK_THROWS_AS(
        evaluate_run({MicroActivityReport{}}, {}, tiny_schema(), 100.0),
        ValidationError);
    CHECK(MetricsBundle::median({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
    CHECK(MetricsBundle::median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
    CHECK(MetricsBundle::median({}) == doctest::Approx(0.0));
}

TEST_CASE("synth_generate: deterministic and shaped as specified") {
    const auto spec = make_benchmark_spec(tiny_schema(), 2, 0.1, 9);
    const auto a = synth_generate(spec);
    const auto b = synth_generate(spec);
    CHECK(a.recording.stream.data == b.recording.stream.data);
    CHECK(a.recording.intervals.size() == 4 * 3 + 2);
    CHECK(a.truth.size() == a.recording.intervals.size());
    for (const auto& t : a.truth) {
        CHECK(t.segments.size() == t.segmentation.boundaries.size() + 1);
        for (const auto& s : t.segments) CHECK(s.end_s > s.start_s);
    }
    // y and z axes carry no signal, magnitude equals |x|
    CHECK(a.recording.stream.data.col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.recording.stream.data.col(2).cwiseAbs().maxCoeff() == 0.0);
}
