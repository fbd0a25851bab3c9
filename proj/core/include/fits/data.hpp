#pragma once

#include "fits/matrix.hpp"
#include "fits/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fits::data {

struct SeriesFrame {
    RealMatrix values; ///< T x C
    std::vector<std::string> channel_names;
    std::optional<std::vector<std::string>> timestamps;

    std::size_t length() const noexcept { return values.rows(); }
    std::size_t channels() const noexcept { return values.cols(); }
};

/// Half-open row range [begin, end).
struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    bool operator==(const RowRange&) const = default;
};

enum class SplitRule : std::uint8_t {
    EttH,          ///< 8640 / 2880 / 2880 rows (12/4/4 months of hourly data)
    EttM,          ///< 34560 / 11520 / 11520 rows (same months, 15-minute data)
    Ratio70_10_20, ///< floor(0.7 T) train, floor(0.2 T) test, the rest validation
};

struct DatasetProfile {
    std::string name;
    std::size_t period = 1; ///< timesteps per dominant cycle
    SplitRule split_rule = SplitRule::Ratio70_10_20;
};

/// Known benchmark profiles (case-insensitive): etth1, etth2, ettm1, ettm2, weather,
/// electricity, traffic, exchange. Unknown names yield nullopt.
std::optional<DatasetProfile> find_profile(std::string_view name);

struct LabeledSeries {
    RealMatrix values;         ///< T x C
    std::vector<bool> labels;  ///< T entries, true = anomalous
};

/// Reads a comma-separated file with a header row. With `has_timestamp_column` the first
/// column is kept verbatim as timestamps and excluded from the values.
SeriesFrame load_csv(const std::filesystem::path& path, bool has_timestamp_column);

/// Loads 0/1 labels: one integer per line (an optional non-numeric header line is skipped).
std::vector<bool> load_labels(const std::filesystem::path& path);

/// Extracts a named column of a frame as labels (nonzero = anomalous) and removes it.
std::vector<bool> take_label_column(SeriesFrame& frame, std::string_view column);

struct SplitRanges {
    RowRange train;
    RowRange val;
    RowRange test;
};

SplitRanges chrono_split(std::size_t length, const DatasetProfile& profile);

/// Range to draw windows from for a split evaluated with look-back `lookback`: the split
/// extended backward by `lookback` rows (clamped at row 0) so that the first forecast
/// lands on the split's first row.
RowRange window_range(RowRange split, std::size_t lookback);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;

    RealMatrix apply(const RealMatrix& values) const;
    RealMatrix invert(const RealMatrix& values) const;
};

inline constexpr double kStandardizeEps = 1e-8;

/// Fits per-channel mean/std on `train` rows only and transforms the whole frame.
std::pair<SeriesFrame, Standardizer> standardize(const SeriesFrame& frame, RowRange train);

struct Window {
    RealMatrix input;
    RealMatrix target;
};

/// Random-access source of training windows, materialized on demand.
class WindowSource {
public:
    virtual ~WindowSource() = default;
    virtual std::size_t size() const = 0;
    virtual Window at(std::size_t i) const = 0;
};

/// Stride-1 forecasting windows over a row range of a series. Window i has input rows
/// [begin+i, begin+i+L_in) and a target of the next H rows (forecast-only) or the whole
/// L_in+H segment (backcast+forecast).
class SlidingWindows final : public WindowSource {
public:
    SlidingWindows(std::shared_ptr<const RealMatrix> values, RowRange range, std::size_t lookback,
                   std::size_t horizon, model::Supervision supervision);

    std::size_t size() const override { return count_; }
    Window at(std::size_t i) const override;
    std::size_t start_row(std::size_t i) const noexcept { return range_.begin + i; }

private:
    std::shared_ptr<const RealMatrix> values_;
    RowRange range_;
    std::size_t lookback_;
    std::size_t horizon_;
    model::Supervision supervision_;
    std::size_t count_;
};

/// Already materialized windows.
class WindowList final : public WindowSource {
public:
    WindowList() = default;
    explicit WindowList(std::vector<Window> windows) : windows_(std::move(windows)) {}
    std::size_t size() const override { return windows_.size(); }
    Window at(std::size_t i) const override { return windows_.at(i); }
    void push_back(Window w) { windows_.push_back(std::move(w)); }

private:
    std::vector<Window> windows_;
};

/// Convenience wrapper building SlidingWindows over a copy of `values`.
SlidingWindows make_windows(const RealMatrix& values, RowRange range, std::size_t lookback, std::size_t horizon,
                            model::Supervision supervision);

/// Copies rows [range.begin, range.end) of a matrix.
RealMatrix slice_rows(const RealMatrix& values, RowRange range);

struct SynthSpec {
    std::size_t length = 4000;
    std::size_t channels = 1;
    double rate = 0.05;            ///< minimum labeled fraction of test timesteps per channel
    std::size_t train_len = 2500;  ///< rows [0, train_len) stay anomaly-free
    std::uint64_t seed = 0;
    std::size_t period = 50;
    double noise_std = 0.05;
    std::size_t segment_len = 30;
};

enum class OutlierKind : std::uint8_t { GlobalPoint, ContextualPoint, Seasonal, Trend, Shapelet };

struct InjectedOutlier {
    OutlierKind kind;
    std::size_t channel;
    RowRange rows;
};

struct SynthDataset {
    LabeledSeries series;
    std::size_t train_len = 0;
    std::vector<InjectedOutlier> outliers;
};

/// Sinusoid-plus-noise channels with outliers of five kinds injected in rotation into the
/// rows after train_len.
SynthDataset synth_anomaly(const SynthSpec& spec);

std::string_view to_string(OutlierKind kind);

} // namespace fits::data
