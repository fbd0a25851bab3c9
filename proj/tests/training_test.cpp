#include "fits/error.hpp"
#include "fits/training.hpp"
#include "lsq_oracle.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fits;
using namespace fits::training;
using model::FitsConfig;
using model::Supervision;

namespace {

// Two-channel mixture of tones plus noise.
std::shared_ptr<const RealMatrix> tiny_series(std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    auto m = std::make_shared<RealMatrix>(rows, 2);
    for (std::size_t t = 0; t < rows; ++t) {
        const double x = static_cast<double>(t);
        (*m)(t, 0) = std::sin(2 * std::numbers::pi * x / 8.0) + 0.5 * std::cos(2 * std::numbers::pi * x / 5.0) + noise(rng);
        (*m)(t, 1) = 2.0 + std::sin(2 * std::numbers::pi * x / 12.0 + 1.0) + noise(rng);
    }
    return m;
}

double full_loss(const model::ComplexLinear& layer, const data::WindowSource& windows, const FitsConfig& cfg) {
    std::vector<RealMatrix> xs;
    std::vector<RealMatrix> ys;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        auto w = windows.at(i);
        xs.push_back(std::move(w.input));
        ys.push_back(std::move(w.target));
    }
    return model::fits_backward(xs, ys, cfg, layer).loss;
}

} // namespace

TEST_CASE("adam_step") {
    TrainSpec spec;
    spec.learning_rate = 0.1;

    SUBCASE("zero gradient leaves parameters alone") {
        std::vector<double> p{1.0, -2.0};
        AdamState st;
        adam_step(p, std::vector<double>{0.0, 0.0}, st, spec);
        CHECK(p == std::vector<double>{1.0, -2.0});
        CHECK(st.t == 1);
    }

    SUBCASE("matches a scalar trace") {
        std::vector<double> p{0.5, 0.5};
        AdamState st;
        const std::vector<std::vector<double>> grads{{0.2, -3.0}, {0.1, 1.0}, {-0.4, 0.0}};
        double m0 = 0, v0 = 0, x0 = 0.5;
        for (std::size_t step = 0; step < grads.size(); ++step) {
            adam_step(p, grads[step], st, spec);
            const double g = grads[step][0];
            m0 = 0.9 * m0 + 0.1 * g;
            v0 = 0.999 * v0 + 0.001 * g * g;
            const double k = static_cast<double>(step + 1);
            x0 -= 0.1 * (m0 / (1 - std::pow(0.9, k))) / (std::sqrt(v0 / (1 - std::pow(0.999, k))) + 1e-8);
            CHECK(p[0] == doctest::Approx(x0).epsilon(1e-14));
        }
        // First step moves by almost exactly lr against the gradient sign.
        std::vector<double> q{0.0};
        AdamState fresh;
        adam_step(q, std::vector<double>{-7.0}, fresh, spec);
        CHECK(q[0] == doctest::Approx(0.1).epsilon(1e-8));
    }

    SUBCASE("deterministic") {
        std::vector<double> a{1.0, 2.0};
        std::vector<double> b{1.0, 2.0};
        AdamState sa;
        AdamState sb;
        adam_step(a, std::vector<double>{0.3, -0.2}, sa, spec);
        adam_step(b, std::vector<double>{0.3, -0.2}, sb, spec);
        CHECK(a == b);
    }

    SUBCASE("shape mismatch") {
        std::vector<double> p{1.0};
        AdamState st;
        CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0, 2.0}, st, spec), ShapeError);
    }
}

TEST_CASE("train on an all-zero problem stops after patience epochs") {
    const auto cfg = FitsConfig::forecasting(16, 8, 4, 0, Supervision::BackcastAndForecast, 1);
    const auto values = std::make_shared<const RealMatrix>(60, 1, 0.0);
    const data::SlidingWindows windows(values, {0, 60}, 16, 8, Supervision::BackcastAndForecast);
    TrainSpec spec;
    spec.patience = 3;
    const auto result = train(model::ComplexLinear(cfg.n_in, cfg.n_out), windows, windows, cfg, spec);
    CHECK(result.history.size() == 4);
    for (const auto& h : result.history) {
        CHECK(h.train_mse == 0.0);
        CHECK(h.val_mse == 0.0);
    }
    CHECK(result.best_epoch == 1);
}

TEST_CASE("train errors") {
    const auto cfg = FitsConfig::forecasting(16, 8, 4, 0, Supervision::BackcastAndForecast, 1);
    const data::WindowList empty;
    const auto values = std::make_shared<const RealMatrix>(60, 1, 1.0);
    const data::SlidingWindows windows(values, {0, 60}, 16, 8, Supervision::BackcastAndForecast);
    CHECK_THROWS_AS(train(model::init_params(cfg, 1), empty, windows, cfg, {}), InvalidArgument);
    CHECK_THROWS_AS(train(model::init_params(cfg, 1), windows, empty, cfg, {}), InvalidArgument);

    TrainSpec bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(train(model::init_params(cfg, 1), windows, windows, cfg, bad), InvalidArgument);

    // A huge learning rate on a spiky series diverges and must abort, not continue.
    auto spiky = std::make_shared<RealMatrix>(60, 1);
    for (std::size_t t = 0; t < 60; ++t) (*spiky)(t, 0) = (t % 7 == 0) ? 1e150 : -1e150 * static_cast<double>(t % 3);
    const data::SlidingWindows wild(spiky, {0, 60}, 16, 8, Supervision::BackcastAndForecast);
    TrainSpec reckless;
    reckless.learning_rate = 1e300;
    CHECK_THROWS_AS(train(model::init_params(cfg, 1), wild, wild, cfg, reckless), NumericError);
}

TEST_CASE("train learns a pure tone") {
    // Period 24 in a 96-step window is bin 4; in the 120-step output it is bin 5.
    auto values = std::make_shared<RealMatrix>(1200, 1);
    for (std::size_t t = 0; t < 1200; ++t)
        (*values)(t, 0) = 3.0 + 2.0 * std::sin(2 * std::numbers::pi * static_cast<double>(t) / 24.0 + 0.3);
    const auto cfg = FitsConfig::forecasting(96, 24, 24, 1, Supervision::BackcastAndForecast, 1);
    const data::SlidingWindows train_w(values, {0, 800}, 96, 24, Supervision::BackcastAndForecast);
    const data::SlidingWindows val_w(values, {800, 1200}, 96, 24, Supervision::BackcastAndForecast);
    TrainSpec spec;
    spec.learning_rate = 1e-2;
    spec.max_epochs = 60;
    spec.patience = 10;
    spec.seed = 4;
    const auto result = train(model::init_params(cfg, 4), train_w, val_w, cfg, spec);
    MESSAGE("tone val mse " << result.best_val_mse << " after " << result.history.size() << " epochs");
    CHECK(result.best_val_mse < 1e-3);
    CHECK(result.history.size() <= spec.max_epochs);
    double min_val = result.history.front().val_mse;
    for (const auto& h : result.history) min_val = std::min(min_val, h.val_mse);
    CHECK(result.best_val_mse == min_val);
    CHECK(std::abs(evaluate(result.layer, val_w, cfg).mse - result.best_val_mse) <= 1e-12);
}

TEST_CASE("train is deterministic and never returns a worse-than-best epoch") {
    const auto values = tiny_series(200, 3);
    const auto cfg = FitsConfig::forecasting(16, 8, 4, 0, Supervision::ForecastOnly, 2);
    const data::SlidingWindows train_w(values, {0, 140}, 16, 8, Supervision::ForecastOnly);
    const data::SlidingWindows val_w(values, {124, 200}, 16, 8, Supervision::ForecastOnly);
    TrainSpec spec;
    spec.learning_rate = 2e-2;
    spec.batch_size = 16;
    spec.max_epochs = 40;
    spec.patience = 2;
    spec.seed = 11;
    const auto a = train(model::init_params(cfg, 1), train_w, val_w, cfg, spec);
    const auto b = train(model::init_params(cfg, 1), train_w, val_w, cfg, spec);
    CHECK(a.layer == b.layer);
    CHECK(a.history.size() == b.history.size());
    CHECK(evaluate(a.layer, val_w, cfg).mse <= a.best_val_mse + 1e-12);
    for (const auto& h : a.history) CHECK(a.best_val_mse <= h.val_mse + 1e-12);
}

TEST_CASE("training loss is non-increasing for small steps") {
    const auto values = tiny_series(60, 5);
    const auto cfg = FitsConfig::forecasting(16, 8, 4, 0, Supervision::BackcastAndForecast, 2);
    const data::SlidingWindows windows(values, {0, 60}, 16, 8, Supervision::BackcastAndForecast);
    TrainSpec spec;
    spec.learning_rate = 1e-5;
    spec.batch_size = windows.size();
    spec.max_epochs = 30;
    spec.patience = 30;
    const auto result = train(model::init_params(cfg, 2), windows, windows, cfg, spec);
    REQUIRE(result.history.size() == 30);
    for (std::size_t i = 1; i < result.history.size(); ++i)
        CHECK(result.history[i].train_mse <= result.history[i - 1].train_mse);
}

TEST_CASE("training approaches the least-squares optimum") {
    const auto values = tiny_series(16 + 8 + 31, 7);
    const auto cfg = FitsConfig::forecasting(16, 8, 4, 0, Supervision::BackcastAndForecast, 2);
    const data::SlidingWindows windows(values, {0, values->rows()}, 16, 8, Supervision::BackcastAndForecast);
    REQUIRE(windows.size() == 32);
    const double optimum = fits::test::least_squares_optimum(windows, cfg);

    TrainSpec spec;
    spec.learning_rate = 1e-2;
    spec.batch_size = 8;
    spec.max_epochs = 500;
    spec.patience = 500;
    const auto result = train(model::init_params(cfg, 1), windows, windows, cfg, spec);
    const double trained = full_loss(result.layer, windows, cfg);
    MESSAGE("least-squares optimum " << optimum << ", trained " << trained);
    CHECK(trained >= optimum * (1 - 1e-9));
    CHECK(trained <= 1.05 * optimum);
}

TEST_CASE("select_row") {
    std::vector<GridRow> rows{
        {90, 2, Supervision::BackcastAndForecast, 0.30, 0.31, 700, 5},
        {720, 2, Supervision::BackcastAndForecast, 0.25, 0.27, 5913, 9},
        {360, 2, Supervision::BackcastAndForecast, 0.25, 0.26, 2279, 7},
        {180, 4, Supervision::BackcastAndForecast, 0.25, 0.26, 2279, 7},
    };
    CHECK(select_row(rows) == 3); // tie on val and size -> shorter look-back
    rows[3].val_mse = 0.26;
    CHECK(select_row(rows) == 2); // tie on val -> fewer parameters
    CHECK_THROWS_AS(select_row(std::vector<GridRow>{}), InvalidArgument);
}

TEST_CASE("grid_search") {
    auto values = std::make_shared<RealMatrix>(*tiny_series(400, 9));
    const ForecastDataset dataset{values, data::chrono_split(400, {"tiny", 8, data::SplitRule::Ratio70_10_20}), 8};
    TrainSpec spec;
    spec.learning_rate = 1e-2;
    spec.max_epochs = 5;
    spec.seeds_for_reporting = {1, 2};

    GridSpec single{{16}, {1}, {Supervision::BackcastAndForecast}, 8, 1};
    const auto one = grid_search(dataset, single, spec);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.selected == 0);

    GridSpec grid{{16, 32}, {1, 2}, {Supervision::BackcastAndForecast}, 8, 2};
    std::size_t trained = 0;
    const auto full = grid_search(dataset, grid, spec, {}, [&](const GridRow&) { ++trained; });
    CHECK(full.rows.size() == 4);
    CHECK(trained == 4);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < full.rows.size(); ++i)
        if (full.rows[i].val_mse < full.rows[argmin].val_mse) argmin = i;
    CHECK(full.rows[full.selected].val_mse == full.rows[argmin].val_mse);

    // Single-threaded rerun is identical, and cached rows are not retrained.
    grid.threads = 1;
    const auto again = grid_search(dataset, grid, spec);
    for (std::size_t i = 0; i < 4; ++i) CHECK(again.rows[i].val_mse == full.rows[i].val_mse);
    trained = 0;
    std::vector<GridRow> cached(full.rows.begin(), full.rows.begin() + 3);
    const auto resumed = grid_search(dataset, grid, spec, cached, [&](const GridRow&) { ++trained; });
    CHECK(trained == 1);
    CHECK(resumed.rows[3].val_mse == full.rows[3].val_mse);
}
