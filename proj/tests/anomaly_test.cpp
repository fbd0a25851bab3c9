#include "fits/anomaly.hpp"
#include "fits/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace fits;
using namespace fits::anomaly;

namespace {

std::vector<bool> bits(const std::string& s) {
    std::vector<bool> out;
    for (char c : s) out.push_back(c == '1');
    return out;
}

RealMatrix random_series(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RealMatrix m(rows, cols);
    const auto v = fits::test::random_vector(rows * cols, rng);
    std::copy(v.begin(), v.end(), m.data().begin());
    return m;
}

} // namespace

TEST_CASE("downsample") {
    RealMatrix x(8, 1);
    for (std::size_t i = 0; i < 8; ++i) x(i, 0) = static_cast<double>(i);
    const auto d = downsample(x, 2);
    REQUIRE(d.rows() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(d(i, 0) == 2.0 * static_cast<double>(i));
    CHECK(downsample(x, 1) == x);
    CHECK(downsample(downsample(x, 2), 2) == downsample(x, 4));
    CHECK_THROWS_AS(downsample(x, 3), InvalidArgument);
    CHECK_THROWS_AS(downsample(x, 0), InvalidArgument);
}

TEST_CASE("scoring window placement") {
    CHECK(scoring_starts(400, 200) == std::vector<std::size_t>{0, 200});
    CHECK(scoring_starts(500, 200) == std::vector<std::size_t>{0, 200, 300});
    CHECK(scoring_starts(200, 200) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(scoring_starts(199, 200), InvalidArgument);
}

TEST_CASE("score_series") {
    const auto cfg = model::FitsConfig::reconstruction(200, 4, 2);
    const auto layer = model::init_params(cfg, 3);
    const auto series = random_series(500, 2, 4);
    const auto scores = score_series(cfg, layer, series, 200, 4);
    REQUIRE(scores.scores.size() == 500);
    CHECK(std::all_of(scores.coverage.begin(), scores.coverage.end(), [](bool b) { return b; }));

    // Recompute from explicit window reconstructions; rows 300..399 average two windows.
    auto window_error = [&](std::size_t start, std::size_t t) {
        const auto target = data::slice_rows(series, {start, start + 200});
        const auto recon = model::fits_forward(downsample(target, 4), cfg, layer);
        double e = 0.0;
        for (std::size_t c = 0; c < 2; ++c) e += (recon(t, c) - target(t, c)) * (recon(t, c) - target(t, c));
        return e / 2.0;
    };
    CHECK(scores.scores[10] == doctest::Approx(window_error(0, 10)));
    CHECK(scores.scores[250] == doctest::Approx(window_error(200, 50)));
    CHECK(scores.scores[350] == doctest::Approx(0.5 * (window_error(200, 150) + window_error(300, 50))));
    CHECK(scores.scores[450] == doctest::Approx(window_error(300, 150)));

    CHECK_THROWS_AS(score_series(cfg, layer, random_series(150, 2, 1), 200, 4), InvalidArgument);
    CHECK_THROWS_AS(score_series(cfg, layer, series, 200, 3), InvalidArgument);
    CHECK_THROWS_AS(score_series(cfg, layer, series, 400, 4), ShapeError);
}

TEST_CASE("score_series with a perfect reconstruction model") {
    const auto cfg = model::FitsConfig::reconstruction(200, 1, 1);
    model::ComplexLinear identity(cfg.n_in, cfg.n_out);
    for (std::size_t i = 0; i < cfg.n_in; ++i) identity.weight(i, i) = 1.0;
    const auto scores = score_series(cfg, identity, random_series(430, 1, 9), 200, 1);
    for (double s : scores.scores) CHECK(s <= 1e-18);
}

TEST_CASE("score_series is channel-permutation equivariant") {
    const auto cfg = model::FitsConfig::reconstruction(200, 4, 3);
    const auto layer = model::init_params(cfg, 5);
    const auto series = random_series(400, 3, 6);
    RealMatrix permuted(400, 3);
    for (std::size_t t = 0; t < 400; ++t)
        for (std::size_t c = 0; c < 3; ++c) permuted(t, c) = series(t, (c + 1) % 3);
    const auto a = score_series(cfg, layer, series);
    const auto b = score_series(cfg, layer, permuted);
    for (std::size_t t = 0; t < 400; ++t) CHECK(a.scores[t] == doctest::Approx(b.scores[t]).epsilon(1e-12));
}

TEST_CASE("point_adjust") {
    CHECK(point_adjust(bits("0010000"), bits("0111100")) == bits("0111100"));
    CHECK(point_adjust(bits("0000000"), bits("0111100")) == bits("0000000"));
    CHECK(point_adjust(bits("1000001"), bits("0110110")) == bits("1000001"));
    CHECK(point_adjust(bits("0001000"), bits("1101111")) == bits("0001111"));
    CHECK_THROWS_AS(point_adjust(bits("01"), bits("011")), ShapeError);

    std::mt19937_64 rng(123);
    std::bernoulli_distribution sparse(0.1);
    std::bernoulli_distribution dense(0.4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<bool> pred(50);
        std::vector<bool> labels(50);
        for (std::size_t i = 0; i < 50; ++i) {
            pred[i] = sparse(rng);
            labels[i] = dense(rng);
        }
        const auto adjusted = point_adjust(pred, labels);
        CHECK(adjusted == fits::test::brute_force_adjust(pred, labels));
        if (std::any_of(labels.begin(), labels.end(), [](bool b) { return b; }))
            CHECK(prf1(adjusted, labels).f1 >= prf1(pred, labels).f1);
    }
}

TEST_CASE("prf1") {
    auto r = prf1(bits("0110"), bits("0110"));
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.accuracy == 1.0);

    r = prf1(bits("0000"), bits("0110"));
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);

    r = prf1(bits("1100"), bits("1010"));
    CHECK(r.precision == 0.5);
    CHECK(r.recall == 0.5);
    CHECK(r.f1 == 0.5);
    CHECK(r.accuracy == 0.5);

    CHECK_THROWS_AS(prf1(bits("1"), bits("10")), ShapeError);
}

TEST_CASE("select_threshold") {
    SUBCASE("single spike") {
        const std::vector<double> scores{0.1, 0.9, 0.1};
        const auto r = select_threshold(scores, bits("010"));
        CHECK(r.f1 == 1.0);
        CHECK(r.threshold > 0.1);
        CHECK(r.threshold <= 0.9);
        CHECK(r.adjusted);
    }
    SUBCASE("monotone scores with the top-k labeled") {
        std::vector<double> scores(40);
        for (std::size_t i = 0; i < 40; ++i) scores[i] = static_cast<double>(i);
        std::vector<bool> labels(40, false);
        for (std::size_t i = 35; i < 40; ++i) labels[i] = true;
        const auto r = select_threshold(scores, labels);
        CHECK(r.f1 == 1.0);
        CHECK(r.threshold == 39.0); // every labeled score ties at F1 = 1, the highest wins
        CHECK(point_adjust(apply_threshold(scores, r.threshold), labels) == labels);
    }
    SUBCASE("no positives") { CHECK_THROWS_AS(select_threshold(std::vector<double>{1, 2}, bits("00")), InvalidArgument); }
}

TEST_CASE("select_threshold matches an exhaustive sweep") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution start_segment(0.08);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(30);
        std::vector<bool> labels(30, false);
        for (std::size_t i = 0; i < 30; ++i) {
            scores[i] = std::round(u(rng) * 20.0) / 20.0; // ties on purpose
            if (start_segment(rng))
                for (std::size_t j = i; j < std::min<std::size_t>(30, i + 3); ++j) labels[j] = true;
        }
        if (std::none_of(labels.begin(), labels.end(), [](bool b) { return b; })) labels[7] = true;

        const double best = fits::test::exhaustive_best_f1(scores, labels);

        const auto r = select_threshold(scores, labels);
        CHECK(r.f1 == doctest::Approx(best).epsilon(1e-12));
        // Reported metrics agree with an independent recomputation at the chosen threshold.
        const auto again = prf1(point_adjust(apply_threshold(scores, r.threshold), labels), labels);
        CHECK(again.f1 == r.f1);
        CHECK(again.precision == r.precision);
        CHECK(again.recall == r.recall);
        // Ties resolve to the highest threshold.
        for (double thr : std::set<double>(scores.begin(), scores.end()))
            if (thr > r.threshold)
                CHECK(prf1(point_adjust(apply_threshold(scores, thr), labels), labels).f1 < r.f1);
    }
}

TEST_CASE("select_threshold caps the candidate count") {
    std::vector<double> scores(50000);
    std::vector<bool> labels(50000, false);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = static_cast<double>(i % 997) / 997.0;
    scores[123] = 5.0;
    labels[123] = true;
    const auto r = select_threshold(scores, labels);
    CHECK(r.f1 == 1.0);
    CHECK(r.threshold == 5.0);
}
