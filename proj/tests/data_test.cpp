#include "fits/data.hpp"
#include "fits/error.hpp"
#include "fits/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

using namespace fits;
using namespace fits::data;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / ("fits_data_" + name);
    std::ofstream(path) << contents;
    return path;
}

RealMatrix ramp(std::size_t rows, std::size_t cols) {
    RealMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = static_cast<double>(r * 10 + c);
    return m;
}

} // namespace

TEST_CASE("load_csv") {
    SUBCASE("plain numeric body") {
        const auto path = write_file("plain.csv", "a,b\n1,2\n3.5,-4e-2\n5,6\n");
        const auto f = load_csv(path, false);
        CHECK(f.length() == 3);
        CHECK(f.channels() == 2);
        CHECK(f.channel_names == std::vector<std::string>{"a", "b"});
        CHECK(f.values(1, 0) == 3.5);
        CHECK(f.values(1, 1) == -4e-2);
        CHECK(!f.timestamps);
    }
    SUBCASE("timestamp column") {
        const auto path = write_file("ts.csv", "date,HUFL,OT\r\n2016-07-01 00:00:00,5.827,30.531\r\n"
                                               "2016-07-01 01:00:00,5.693,27.787\r\n");
        const auto f = load_csv(path, true);
        CHECK(f.channels() == 2);
        CHECK(f.channel_names == std::vector<std::string>{"HUFL", "OT"});
        REQUIRE(f.timestamps);
        CHECK(f.timestamps->at(1) == "2016-07-01 01:00:00");
        CHECK(f.values(0, 1) == 30.531);
    }
    SUBCASE("errors name the row and column") {
        try {
            load_csv(write_file("ragged.csv", "a,b\n1,2\n3\n"), false);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        }
        try {
            load_csv(write_file("nonnum.csv", "a,b\n1,2\n3,x\n"), false);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("column 'b'") != std::string::npos);
        }
        CHECK_THROWS_AS(load_csv(write_file("empty.csv", ""), false), ParseError);
        CHECK_THROWS_AS(load_csv(write_file("header.csv", "a,b\n"), false), ParseError);
        CHECK_THROWS_AS(load_csv(write_file("nan.csv", "a\nnan\n"), false), ParseError);
        CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", false), ParseError);
    }
}

TEST_CASE("ETTh1 shape when the dataset is available") {
    const char* root = std::getenv("FITS_DATA_ROOT");
    if (!root || !std::filesystem::exists(std::filesystem::path(root) / "ETTh1.csv")) {
        MESSAGE("FITS_DATA_ROOT/ETTh1.csv not present; shape check not run");
        return;
    }
    const auto f = load_csv(std::filesystem::path(root) / "ETTh1.csv", true);
    CHECK(f.length() == 17420);
    CHECK(f.channels() == 7);
}

TEST_CASE("labels") {
    CHECK(load_labels(write_file("labels.txt", "0\n1\n1\n0\n")) == std::vector<bool>{false, true, true, false});
    CHECK(load_labels(write_file("labels_hdr.csv", "label\n0\n1\n")) == std::vector<bool>{false, true});
    CHECK_THROWS_AS(load_labels(write_file("labels_bad.txt", "0\nfoo\n")), ParseError);

    auto f = load_csv(write_file("with_label.csv", "x,label,y\n1,0,2\n3,1,4\n"), false);
    const auto labels = take_label_column(f, "label");
    CHECK(labels == std::vector<bool>{false, true});
    CHECK(f.channel_names == std::vector<std::string>{"x", "y"});
    CHECK(f.values(1, 1) == 4.0);
}

TEST_CASE("profiles") {
    CHECK(find_profile("ETTh2")->period == 24);
    CHECK(find_profile("ettm1")->period == 96);
    CHECK(find_profile("weather")->period == 144);
    CHECK(find_profile("Electricity")->split_rule == SplitRule::Ratio70_10_20);
    CHECK(!find_profile("m4"));
}

TEST_CASE("chrono_split") {
    const DatasetProfile ratio{"custom", 24, SplitRule::Ratio70_10_20};
    const auto s = chrono_split(100, ratio);
    CHECK(s.train == RowRange{0, 70});
    CHECK(s.val == RowRange{70, 80});
    CHECK(s.test == RowRange{80, 100});

    const auto etth = chrono_split(17420, *find_profile("etth1"));
    CHECK(etth.train.size() == 8640);
    CHECK(etth.val == RowRange{8640, 11520});
    CHECK(etth.test == RowRange{11520, 14400});

    const auto ettm = chrono_split(69680, *find_profile("ettm2"));
    CHECK(ettm.train.size() == 34560);
    CHECK(ettm.test.end == 57600);

    CHECK_THROWS_AS(chrono_split(10000, *find_profile("etth1")), InvalidArgument);
    CHECK_THROWS_AS(chrono_split(2, ratio), InvalidArgument);

    // The extended test range lets the first forecast start on the split's first row.
    const auto ext = window_range(s.test, 16);
    CHECK(ext == RowRange{64, 100});
    CHECK(window_range(s.test, 96) == RowRange{0, 100});
}

TEST_CASE("standardize uses train rows only") {
    RealMatrix v(10, 2);
    for (std::size_t r = 0; r < 10; ++r) {
        v(r, 0) = static_cast<double>(r);
        v(r, 1) = r < 6 ? 1.0 + 0.5 * static_cast<double>(r % 2) : 100.0;
    }
    const SeriesFrame frame{v, {"a", "b"}, std::nullopt};
    const auto [z, st] = standardize(frame, {0, 6});
    CHECK(st.mean[0] == doctest::Approx(2.5));
    CHECK(st.mean[1] == doctest::Approx(1.25));
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < 6; ++r) mean += z.values(r, c);
        CHECK(std::abs(mean / 6.0) <= 1e-9);
    }
    // Leaking rows past the train split changes the statistics.
    const auto [z_leak, st_leak] = standardize(frame, {0, 8});
    CHECK(st_leak.mean[1] != doctest::Approx(st.mean[1]));
    CHECK(z_leak.values(0, 1) != doctest::Approx(z.values(0, 1)));

    const auto back = st.invert(z.values);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(back.data()[i] - v.data()[i]) <= 1e-9);

    // Constant channel falls back to the epsilon std.
    const SeriesFrame flat{RealMatrix(4, 1, 3.0), {"c"}, std::nullopt};
    CHECK(standardize(flat, {0, 4}).second.std[0] == kStandardizeEps);
}

TEST_CASE("make_windows") {
    const auto values = ramp(10, 2);
    const auto w = make_windows(values, {0, 10}, 4, 2, model::Supervision::ForecastOnly);
    REQUIRE(w.size() == 5);
    const auto first = w.at(0);
    CHECK(first.input == slice_rows(values, {0, 4}));
    CHECK(first.target == slice_rows(values, {4, 6}));

    const auto bf = make_windows(values, {0, 10}, 4, 2, model::Supervision::BackcastAndForecast);
    for (std::size_t i = 0; i < bf.size(); ++i) {
        const auto win = bf.at(i);
        const auto fo = w.at(i);
        // input followed by horizon is the contiguous slice, which is the B+F target
        RealMatrix joined(6, 2);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 2; ++c) joined(r, c) = fo.input(r, c);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) joined(4 + r, c) = fo.target(r, c);
        CHECK(joined == slice_rows(values, {i, i + 6}));
        CHECK(win.target == joined);
    }

    CHECK_THROWS_AS(make_windows(values, {0, 5}, 4, 2, model::Supervision::ForecastOnly), InvalidArgument);
    CHECK_THROWS_AS(w.at(5), InvalidArgument);
}

TEST_CASE("window extraction is exhaustive and respects split borders") {
    const auto values = ramp(100, 1);
    const auto splits = chrono_split(100, {"x", 24, SplitRule::Ratio70_10_20});
    const auto train = make_windows(values, splits.train, 8, 4, model::Supervision::BackcastAndForecast);
    // Inputs at stride 1 cover every train row that can start a window.
    std::vector<bool> seen(100, false);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto win = train.at(i);
        for (std::size_t r = 0; r < win.input.rows(); ++r) seen[static_cast<std::size_t>(win.input(r, 0) / 10)] = true;
        // No supervised row of a train window lies beyond the train split.
        CHECK(win.target(win.target.rows() - 1, 0) < 10.0 * static_cast<double>(splits.train.end));
    }
    for (std::size_t r = 0; r < splits.train.end - 4; ++r) CHECK(seen[r]);

    const auto test = make_windows(values, window_range(splits.test, 8), 8, 4, model::Supervision::ForecastOnly);
    CHECK(test.at(0).target(0, 0) == 10.0 * static_cast<double>(splits.test.begin));
    CHECK(test.size() == splits.test.size() - 4 + 1);
}

TEST_CASE("synth_anomaly") {
    SynthSpec spec;
    spec.seed = 5;
    spec.channels = 2;
    const auto a = synth_anomaly(spec);
    const auto b = synth_anomaly(spec);
    CHECK(a.series.values == b.series.values);
    CHECK(a.series.labels == b.series.labels);
    CHECK(a.series.values.rows() == 4000);
    CHECK(a.train_len == 2500);

    for (std::size_t t = 0; t < 2500; ++t) CHECK_FALSE(a.series.labels[t]);

    // Per channel injection stops once the 5% budget of the 1500 test rows is reached;
    // segments are never cut short, so the overshoot is below one segment.
    for (std::size_t c = 0; c < 2; ++c) {
        std::size_t rows = 0;
        for (const auto& o : a.outliers) {
            if (o.channel != c) continue;
            rows += o.rows.size();
            const bool point = o.kind == OutlierKind::GlobalPoint || o.kind == OutlierKind::ContextualPoint;
            CHECK(o.rows.size() == (point ? 1u : 30u));
        }
        CHECK(rows >= 75);
        CHECK(rows < 75 + 30);
    }
    const auto labeled = static_cast<std::size_t>(std::count(a.series.labels.begin(), a.series.labels.end(), true));
    CHECK(labeled >= 75);
    CHECK(labeled < 2 * (75 + 30));

    // Every kind appears, rotating from the channel index.
    std::set<OutlierKind> kinds;
    for (const auto& o : a.outliers) kinds.insert(o.kind);
    CHECK(kinds.size() == 5);

    spec.seed = 6;
    CHECK(!(synth_anomaly(spec).series.values == a.series.values));
}

TEST_CASE("synth_anomaly without outliers is a clean tone") {
    SynthSpec spec;
    spec.rate = 0.0;
    spec.seed = 1;
    const auto d = synth_anomaly(spec);
    CHECK(std::none_of(d.series.labels.begin(), d.series.labels.end(), [](bool v) { return v; }));
    CHECK(d.outliers.empty());

    const auto s = spectral::rfft(d.series.values.column(0));
    const std::size_t tone = 4000 / 50;
    double near = 0.0;
    double total = 0.0;
    for (std::size_t k = 1; k < s.bins.size(); ++k) {
        const double e = std::norm(s.bins[k]);
        total += e;
        if (k + 1 >= tone && k <= tone + 1) near += e;
    }
    CHECK(near / total > 0.95);

    spec.length = 50;
    CHECK_THROWS_AS(synth_anomaly(spec), InvalidArgument);
}
