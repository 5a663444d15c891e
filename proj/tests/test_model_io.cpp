#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <microact/microact.hpp>

using namespace microact;

namespace {

namespace fs = std::filesystem;

AttributeSchema tiny_schema() {
    AttributeSchema s;
    s.attributes = {{"held", AttributeKind::binary, 2, "object"},
                    {"moving", AttributeKind::binary, 2, "motion"},
                    {"intensity", AttributeKind::ordinal, 3, "motion"}};
    return s;
}

PipelineModel make_model(ClassifierKind kind) {
    const auto schema = tiny_schema();
    auto config = profile_defaults(Profile::custom);
    config.classifier.kind = kind;
    config.classifier.forest.n_trees = 8;
    config.threshold_T_s = 10.0;
    config.schema_name = "custom";

    auto spec = make_benchmark_spec(schema, 2, 0.1, 5);
    const auto synth = synth_generate(spec);
    auto [model, report] = train_pipeline({synth.recording}, spec.label_attributes(), schema,
                                          config);
    return model;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("save/load: loaded model predicts identically") {
    const auto dir = fs::temp_directory_path() / "microact_model_test";
    fs::create_directories(dir);
    for (const auto kind : {ClassifierKind::random_forest, ClassifierKind::svm_rbf}) {
        const auto model = make_model(kind);
        const auto path = dir / "model.bin";
        save_model(model, path);
        const auto loaded = load_model(path);

        CHECK(config_entries(loaded.config) == config_entries(model.config));
        CHECK(loaded.schema.dimension() == model.schema.dimension());
        CHECK(loaded.reducer.mean == model.reducer.mean);
        CHECK(loaded.reducer.components == model.reducer.components);

        std::mt19937_64 rng(3);
        std::normal_distribution<double> dist(1.5, 1.0);
        for (int t = 0; t < 200; ++t) {
            Vector raw(model.reducer.input_dim);
            for (Eigen::Index d = 0; d < raw.size(); ++d) raw(d) = dist(rng);
            Matrix row(1, raw.size());
            row.row(0) = raw.transpose();
            const Vector a = model.reducer.transform(row).row(0).transpose();
            const Vector b = loaded.reducer.transform(row).row(0).transpose();
            CHECK(a == b);
            CHECK(predict_attributes(model.zeroshot, a) ==
                  predict_attributes(loaded.zeroshot, b));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("save: byte-identical across repeated saves") {
    const auto dir = fs::temp_directory_path() / "microact_model_test2";
    fs::create_directories(dir);
    const auto model = make_model(ClassifierKind::random_forest);
    save_model(model, dir / "a.bin");
    save_model(model, dir / "b.bin");
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
    fs::remove_all(dir);
}

TEST_CASE("load: corruption and format errors") {
    const auto dir = fs::temp_directory_path() / "microact_model_test3";
    fs::create_directories(dir);
    const auto model = make_model(ClassifierKind::random_forest);
    const auto path = dir / "model.bin";
    save_model(model, path);

    SUBCASE("flipped byte fails the checksum") {
        auto bytes = slurp(path);
        bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
        std::ofstream(path, std::ios::binary).write(bytes.data(),
                                                    static_cast<std::streamsize>(bytes.size()));
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("checksum"), IoError);
    }
    SUBCASE("bad magic") {
        std::ofstream(path, std::ios::binary) << "not a model at all, clearly";
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("magic"), IoError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_model(dir / "nope.bin"), IoError); }
    SUBCASE("schema mismatch against the expected schema") {
        auto other = tiny_schema();
        other.attributes[0].name = "renamed";
        CHECK_THROWS_WITH_AS(load_model(path, &other), doctest::Contains("mismatch"),
                             IoError);
        const auto expected = tiny_schema();
        CHECK_NOTHROW(load_model(path, &expected));
    }
    fs::remove_all(dir);
}

TEST_CASE("crc32: known vector") {
    CHECK(detail::crc32("123456789") == 0xcbf43926u);
    CHECK(detail::crc32("") == 0u);
}

TEST_CASE("schema hash: sensitive to names, kinds and levels") {
    const auto base = tiny_schema();
    auto renamed = base, rekind = base, releveled = base;
    renamed.attributes[0].name = "other";
    rekind.attributes[1].kind = AttributeKind::ordinal;
    releveled.attributes[2].levels = 4;
    const auto h = detail::schema_hash(base);
    CHECK(h == detail::schema_hash(tiny_schema()));
    CHECK(h != detail::schema_hash(renamed));
    CHECK(h != detail::schema_hash(rekind));
    CHECK(h != detail::schema_hash(releveled));
}
