#include <doctest.h>

#include <random>

#include <microact/rulsif.hpp>

using namespace microact;

namespace {

Matrix gaussian_signal(std::mt19937_64& rng, Eigen::Index n, double mean, double sigma) {
    std::normal_distribution<double> dist(mean, sigma);
    Matrix m(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) m(i, 0) = dist(rng);
    return m;
}

} // namespace

TEST_CASE("rulsif: identical distributions score near zero") {
    std::mt19937_64 rng(2024);
    const Matrix signal = gaussian_signal(rng, 300, 0.0, 1.0);
    const auto scores = rulsif_scores(signal, 0.01, 100, 50);
    REQUIRE_FALSE(scores.scores.empty());
    for (const double s : scores.scores) CHECK(std::abs(s) < 0.05);
}

TEST_CASE("rulsif: 5-sigma mean shift dominates stationary scores") {
    int wins = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(1000 + static_cast<unsigned>(t));
        Matrix signal(400, 1);
        signal.topRows(200) = gaussian_signal(rng, 200, 0.0, 1.0);
        signal.bottomRows(200) = gaussian_signal(rng, 200, 5.0, 1.0);
        const auto scores = rulsif_scores(signal, 0.01, 100, 25);

        double at_change = -1e9, elsewhere = -1e9;
        for (std::size_t i = 0; i < scores.positions.size(); ++i) {
            if (std::abs(scores.positions[i] - 200) <= 25)
                at_change = std::max(at_change, scores.scores[i]);
            else if (std::abs(scores.positions[i] - 200) >= 100)
                elsewhere = std::max(elsewhere, scores.scores[i]);
        }
        if (at_change > elsewhere) ++wins;
    }
    CHECK(wins >= 19); // >= 95% of seeds
}

TEST_CASE("rulsif: degenerate zero-variance windows flag instead of throwing") {
    const Matrix signal = Matrix::Constant(300, 1, 2.0);
    const auto scores = rulsif_scores(signal, 0.01, 100, 50);
    CHECK(scores.degenerate_flag);
    for (const double s : scores.scores) CHECK(s == 0.0);
}

TEST_CASE("rulsif: input validation") {
    const Matrix ok = Matrix::Random(100, 1);
    CHECK_THROWS_AS(rulsif_scores(ok, 1.0, 20, 10), ValidationError);  // alpha
    CHECK_THROWS_AS(rulsif_scores(ok, 0.01, 60, 10), ValidationError); // too short
    CHECK_THROWS_AS(rulsif_scores(ok, 0.01, 1, 10), ValidationError);  // window
}

TEST_CASE("rulsif: positions advance by the step") {
    std::mt19937_64 rng(8);
    const Matrix signal = gaussian_signal(rng, 350, 0.0, 1.0);
    const auto scores = rulsif_scores(signal, 0.01, 100, 25);
    REQUIRE(scores.positions.size() >= 2);
    for (std::size_t i = 1; i < scores.positions.size(); ++i)
        CHECK(scores.positions[i] - scores.positions[i - 1] == 25);
    CHECK(scores.positions.front() == 100);
}
