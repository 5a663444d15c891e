#include <doctest.h>

#include <random>

#include <microact/changepoint.hpp>

#include "oracles.hpp"

using namespace microact;

TEST_CASE("pelt: constant signal has no boundaries") {
    const Matrix signal = Matrix::Constant(300, 1, 4.2);
    const auto seg = pelt(signal, 100.0);
    CHECK(seg.boundaries.empty());
    CHECK(seg.n_samples == 300);
}

TEST_CASE("pelt: single mean shift is found near the true index") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 0.1);
    Matrix signal(200, 1);
    for (Eigen::Index i = 0; i < 200; ++i)
        signal(i, 0) = (i < 100 ? 0.0 : 5.0) + noise(rng);
    const auto seg = pelt(signal, 10.0);
    REQUIRE(seg.boundaries.size() == 1);
    CHECK(std::abs(seg.boundaries[0] - 100) <= 2);

    const auto oracle = brute_force_segment(signal, 10.0);
    CHECK(seg.boundaries == oracle.boundaries);
}

TEST_CASE("brute_force_segment: two-step signal recovers both steps") {
    Matrix signal(150, 1);
    for (Eigen::Index i = 0; i < 150; ++i)
        signal(i, 0) = i < 50 ? 0.0 : i < 100 ? 6.0 : -3.0;
    const auto seg = brute_force_segment(signal, 5.0);
    CHECK(seg.boundaries == std::vector<Eigen::Index>{50, 100});
}

TEST_CASE("brute_force_segment: rejects oversized input") {
    const Matrix signal = Matrix::Zero(2001, 1);
    CHECK_THROWS_AS(brute_force_segment(signal, 1.0), ValidationError);
}

TEST_CASE("pelt equals the unpruned DP on random piecewise signals") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> n_changes(1, 4);
    for (int trial = 0; trial < 40; ++trial) {
        const auto sig =
            oracles::random_piecewise_signal(rng, 400, n_changes(rng), 2, 2.0, 0.3);
        const auto fast = pelt(sig.data, 20.0);
        const auto slow = brute_force_segment(sig.data, 20.0);
        CHECK(fast.boundaries == slow.boundaries);
    }
}

TEST_CASE("pelt: penalty monotonicity in boundary count") {
    std::mt19937_64 rng(123);
    const auto sig = oracles::random_piecewise_signal(rng, 500, 3, 1, 2.0, 0.3);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (const double penalty : {1.0, 5.0, 20.0, 100.0, 500.0}) {
        const auto seg = pelt(sig.data, penalty);
        CHECK(seg.boundaries.size() <= prev);
        prev = seg.boundaries.size();
    }
}

TEST_CASE("pelt: translation invariance of the L2 cost") {
    std::mt19937_64 rng(55);
    const auto sig = oracles::random_piecewise_signal(rng, 300, 2, 1, 2.0, 0.3);
    const auto base = pelt(sig.data, 15.0);
    const Matrix shifted = sig.data.array() + 1234.5;
    const auto moved = pelt(shifted, 15.0);
    CHECK(base.boundaries == moved.boundaries);
}

TEST_CASE("pelt: honors min_segment_length") {
    std::mt19937_64 rng(31);
    const auto sig = oracles::random_piecewise_signal(rng, 400, 3, 1, 3.0, 0.2);
    const auto seg = pelt(sig.data, 1.0, CostFunction::l2, 40);
    Eigen::Index prev = 0;
    for (const auto b : seg.boundaries) {
        CHECK(b - prev >= 40);
        prev = b;
    }
    CHECK(seg.n_samples - prev >= 40);
}

TEST_CASE("pelt: input validation") {
    CHECK_THROWS_AS(pelt(Matrix::Zero(1, 1), 1.0), ValidationError);
    Matrix bad = Matrix::Zero(100, 1);
    bad(50, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(pelt(bad, 1.0), ValidationError);
}

TEST_CASE("kernel_cpd: linear kernel equals the L2 cost result") {
    const Matrix constant = Matrix::Constant(200, 2, 1.0);
    CHECK(kernel_cpd(constant, 50.0).boundaries.empty());

    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sig = oracles::random_piecewise_signal(rng, 300, 2, 3, 2.0, 0.25);
        const auto kernel = kernel_cpd(sig.data, 50.0);
        const auto l2 = pelt(sig.data, 50.0, CostFunction::l2);
        const auto oracle = brute_force_segment(sig.data, 50.0);
        CHECK(kernel.boundaries == l2.boundaries);
        CHECK(kernel.boundaries == oracle.boundaries);
    }
}

TEST_CASE("binarize_scores: clear bimodality") {
    ScoreSeries scores;
    scores.positions = {100, 200, 300, 400, 500, 600};
    scores.scores = {0, 0, 0, 10, 0, 0};
    const auto seg = binarize_scores(scores, 50, 700);
    CHECK(seg.boundaries == std::vector<Eigen::Index>{400});
}

TEST_CASE("binarize_scores: all-equal scores give no boundaries") {
    ScoreSeries scores;
    scores.positions = {100, 200, 300};
    scores.scores = {1.5, 1.5, 1.5};
    CHECK(binarize_scores(scores, 50, 400).boundaries.empty());
}

TEST_CASE("binarize_scores: plateau merges to the max-score representative") {
    ScoreSeries scores;
    scores.positions = {100, 150, 180, 400, 600};
    scores.scores = {8.0, 9.0, 8.5, 0.1, 0.2};
    // candidates 100,150,180 lie within min_segment_length=200 of each other
    const auto seg = binarize_scores(scores, 200, 700);
    CHECK(seg.boundaries == std::vector<Eigen::Index>{150});
}

TEST_CASE("annotation_error: definition") {
    Segmentation truth{{100, 200, 300}, 400};
    Segmentation est{{100, 150, 200, 250, 300}, 400};
    CHECK(annotation_error(truth, est) == 2);
    CHECK(annotation_error(truth, truth) == 0);
    Segmentation none{{}, 400};
    CHECK(annotation_error(none, none) == 0);
}

TEST_CASE("boundary_mae: arithmetic from the definition") {
    Segmentation truth{{1000, 2000}, 3000};
    Segmentation est{{1050, 1900}, 3000};
    const auto mae = boundary_mae(truth, est, 100.0);
    CHECK(mae.seconds == doctest::Approx(0.75));
    CHECK_FALSE(mae.empty_estimate_flag);

    CHECK(boundary_mae(truth, truth, 100.0).seconds == doctest::Approx(0.0));

    Segmentation empty{{}, 3000};
    const auto fallback = boundary_mae(truth, empty, 100.0);
    CHECK(fallback.empty_estimate_flag);
    // nearest endpoints: 1000 -> 0 (10 s), 2000 -> 3000 (10 s)
    CHECK(fallback.seconds == doctest::Approx(10.0));
}
