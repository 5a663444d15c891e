#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <microact/ingest.hpp>

#include "oracles.hpp"

using namespace microact;

namespace {

RawSensorStream make_stream(const std::string& id, double rate_hz, double duration_s,
                            std::mt19937_64* rng = nullptr) {
    RawSensorStream s;
    s.unit_id = id;
    std::normal_distribution<double> dist(0.0, 1.0);
    const auto n = static_cast<std::int64_t>(duration_s * rate_hz);
    for (std::int64_t i = 0; i < n; ++i) {
        RawSample sample;
        sample.timestamp_us = static_cast<std::int64_t>(1e6 * i / rate_hz);
        if (rng) {
            sample.ax = dist(*rng);
            sample.ay = dist(*rng);
            sample.az = dist(*rng);
        } else {
            sample.ax = sample.ay = sample.az = 1.0;
        }
        s.samples.push_back(sample);
    }
    return s;
}

} // namespace

TEST_CASE("resample_sync: constant stream stays constant") {
    const auto synced = resample_sync({make_stream("u0", 200.0, 1.0)}, 0.010);
    CHECK(synced.units == std::vector<std::string>{"u0"});
    for (Eigen::Index i = 0; i < synced.data.rows(); ++i)
        for (Eigen::Index c = 0; c < synced.data.cols(); ++c)
            CHECK(synced.data(i, c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("resample_sync: 125 Hz input with 10 ms window gives 100 Hz") {
    const auto synced = resample_sync({make_stream("u0", 125.0, 2.0)}, 0.010);
    CHECK(synced.rate_hz == doctest::Approx(100.0));
    // 2 s of data -> about 200 output rows
    CHECK(synced.data.rows() >= 199);
    CHECK(synced.data.rows() <= 201);
}

TEST_CASE("resample_sync: per-window means match the scalar-loop oracle") {
    std::mt19937_64 rng(42);
    std::vector<RawSensorStream> streams;
    for (int u = 0; u < 5; ++u)
        streams.push_back(make_stream("u" + std::to_string(u), 125.0, 1.5, &rng));
    const auto synced = resample_sync(streams, 0.010);

    for (std::size_t u = 0; u < streams.size(); ++u) {
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<std::int64_t> ts;
            std::vector<double> vals;
            for (const auto& s : streams[u].samples) {
                ts.push_back(s.timestamp_us);
                vals.push_back(axis == 0 ? s.ax : axis == 1 ? s.ay : s.az);
            }
            const auto expected = oracles::naive_window_means(
                ts, vals, 0.010, static_cast<std::size_t>(synced.data.rows()));
            for (Eigen::Index i = 0; i < synced.data.rows(); ++i)
                CHECK(synced.data(i, static_cast<Eigen::Index>(3 * u) + axis) ==
                      doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-9));
        }
    }
}

TEST_CASE("resample_sync: idempotent on already-uniform input at the window period") {
    std::mt19937_64 rng(7);
    const auto stream = make_stream("u0", 100.0, 1.0, &rng);
    const auto once = resample_sync({stream}, 0.010);
    // rebuild raw samples from the synced output and resample again
    RawSensorStream rebuilt;
    rebuilt.unit_id = "u0";
    for (Eigen::Index i = 0; i < once.data.rows(); ++i)
        rebuilt.samples.push_back({static_cast<std::int64_t>(1e4 * i), once.data(i, 0),
                                   once.data(i, 1), once.data(i, 2)});
    const auto twice = resample_sync({rebuilt}, 0.010);
    REQUIRE(twice.data.rows() == once.data.rows());
    CHECK((twice.data - once.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("resample_sync: commutes with per-axis affine scaling") {
    std::mt19937_64 rng(11);
    const auto stream = make_stream("u0", 130.0, 1.0, &rng);
    RawSensorStream scaled = stream;
    for (auto& s : scaled.samples) s.ax = 2.5 * s.ax - 0.75;
    const auto base = resample_sync({stream}, 0.010);
    const auto shifted = resample_sync({scaled}, 0.010);
    for (Eigen::Index i = 0; i < base.data.rows(); ++i)
        CHECK(shifted.data(i, 0) ==
              doctest::Approx(2.5 * base.data(i, 0) - 0.75).epsilon(1e-9));
}

TEST_CASE("resample_sync: gap fill interpolates between non-empty windows") {
    RawSensorStream s;
    s.unit_id = "u0";
    s.samples.push_back({0, 1.0, 0.0, 0.0});
    s.samples.push_back({30'000, 4.0, 0.0, 0.0}); // bins 1 and 2 are empty
    const auto synced = resample_sync({s}, 0.010);
    REQUIRE(synced.data.rows() == 4);
    CHECK(synced.data(0, 0) == doctest::Approx(1.0));
    CHECK(synced.data(1, 0) == doctest::Approx(2.0));
    CHECK(synced.data(2, 0) == doctest::Approx(3.0));
    CHECK(synced.data(3, 0) == doctest::Approx(4.0));
}

TEST_CASE("resample_sync: rejects empty inputs naming the unit") {
    CHECK_THROWS_AS(resample_sync({}, 0.010), ValidationError);
    RawSensorStream empty;
    empty.unit_id = "left_wrist";
    CHECK_THROWS_WITH_AS(resample_sync({empty}, 0.010),
                         doctest::Contains("left_wrist"), ValidationError);
}

TEST_CASE("magnitude: known values") {
    SyncedStream s;
    s.rate_hz = 100.0;
    s.units = {"a", "b"};
    s.data.resize(2, 6);
    s.data << 0, 0, 0, 3, 4, 0, 1, 2, 2, 0, 0, 5;
    const auto m = magnitude(s);
    CHECK(m(0, 0) == doctest::Approx(0.0));
    CHECK(m(0, 1) == doctest::Approx(5.0));
    CHECK(m(1, 0) == doctest::Approx(3.0));
    CHECK(m(1, 1) == doctest::Approx(5.0));
}

TEST_CASE("magnitude: matches element-wise recomputation on random data") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    SyncedStream s;
    s.rate_hz = 100.0;
    s.units = {"a", "b", "c"};
    s.data.resize(50, 9);
    for (Eigen::Index i = 0; i < s.data.size(); ++i) s.data.data()[i] = dist(rng);
    const auto m = magnitude(s);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index u = 0; u < 3; ++u) {
            const double expect = std::sqrt(s.data(i, 3 * u) * s.data(i, 3 * u) +
                                            s.data(i, 3 * u + 1) * s.data(i, 3 * u + 1) +
                                            s.data(i, 3 * u + 2) * s.data(i, 3 * u + 2));
            CHECK(m(i, u) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("window_features: 250 samples at 100 Hz and 1 s windows") {
    Matrix mags = Matrix::Constant(250, 2, 3.5);
    const auto rows = window_features(mags, 1.0, 100.0);
    CHECK(rows.size() == 2);
    for (const auto& r : rows)
        for (const double v : r.values) CHECK(v == doctest::Approx(3.5));

    const auto with_partial = window_features(mags, 1.0, 100.0, true);
    CHECK(with_partial.size() == 3);
}

TEST_CASE("window_features: equals brute-force chunk means") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(2.0, 0.5);
    Matrix mags(537, 1);
    std::vector<double> series;
    for (Eigen::Index i = 0; i < mags.rows(); ++i) {
        mags(i, 0) = dist(rng);
        series.push_back(mags(i, 0));
    }
    const auto rows = window_features(mags, 1.0, 100.0);
    const auto expected = oracles::chunk_means(series, 100);
    REQUIRE(rows.size() == expected.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].values[0] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("window_features: window shorter than one sample period") {
    Matrix mags = Matrix::Ones(10, 1);
    CHECK_THROWS_AS(window_features(mags, 0.001, 100.0), ValidationError);
}

TEST_CASE("segregate: partitions by the duration threshold") {
    Recording rec;
    rec.stream.rate_hz = 100.0;
    rec.stream.units = {"u0"};
    rec.stream.data = Matrix::Zero(3000, 3);
    rec.intervals = {{"a", 0.0, 4.0}, {"b", 4.0, 13.0}, {"c", 13.0, 25.0}};
    const auto [training, decompose] = segregate(rec, 10.0);
    REQUIRE(training.size() == 2);
    REQUIRE(decompose.size() == 1);
    CHECK(training[0].label == "a");
    CHECK(training[1].label == "b");
    CHECK(decompose[0].label == "c");
    CHECK(training.size() + decompose.size() == rec.intervals.size());

    const auto [all_train, none] = segregate(rec, 100.0);
    CHECK(none.empty());
    CHECK(all_train.size() == 3);
}

TEST_CASE("load_recording: round trip through the directory format") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "microact_ingest_test";
    fs::create_directories(dir);
    {
        std::ofstream meta(dir / "meta.json");
        meta << R"({"units":["u0","u1"],"subject_id":"S01","native_rate_hz":125})";
        for (const auto* unit : {"u0", "u1"}) {
            std::ofstream csv(dir / (std::string(unit) + ".csv"));
            csv << "timestamp_us,ax,ay,az\n";
            for (int i = 0; i < 250; ++i)
                csv << i * 8000 << ",1.0,2.0,2.0\n";
        }
        std::ofstream labels(dir / "labels.csv");
        labels << "label,start_s,end_s\nwalk,0.0,1.0\nstand,1.0,1.9\n";
    }
    const auto rec = load_recording(dir, 0.010);
    CHECK(rec.subject_id == "S01");
    CHECK(rec.stream.units.size() == 2);
    CHECK(rec.intervals.size() == 2);
    CHECK(magnitude(rec.stream)(0, 0) == doctest::Approx(3.0));

    SUBCASE("malformed row reports the line number") {
        std::ofstream csv(dir / "u0.csv");
        csv << "timestamp_us,ax,ay,az\n0,1.0,2.0,2.0\n8000,oops,2.0,2.0\n";
        csv.close();
        CHECK_THROWS_WITH_AS(load_recording(dir, 0.010), doctest::Contains(":3"),
                             ValidationError);
    }
    SUBCASE("overlapping intervals are a load error") {
        std::ofstream labels(dir / "labels.csv");
        labels << "label,start_s,end_s\nwalk,0.0,1.2\nstand,1.0,1.9\n";
        labels.close();
        CHECK_THROWS_WITH_AS(load_recording(dir, 0.010), doctest::Contains("overlap"),
                             ValidationError);
    }
    SUBCASE("interval outside the stream extent is rejected") {
        std::ofstream labels(dir / "labels.csv");
        labels << "label,start_s,end_s\nwalk,0.0,50.0\n";
        labels.close();
        CHECK_THROWS_AS(load_recording(dir, 0.010), ValidationError);
    }
    fs::remove_all(dir);
}
