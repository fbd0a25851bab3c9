#include "fits/data.hpp"

#include "fits/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace fits::data {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::optional<DatasetProfile> find_profile(std::string_view name) {
    const std::string key = lower(name);
    if (key == "etth1" || key == "etth2") return DatasetProfile{key, 24, SplitRule::EttH};
    if (key == "ettm1" || key == "ettm2") return DatasetProfile{key, 96, SplitRule::EttM};
    if (key == "weather") return DatasetProfile{key, 144, SplitRule::Ratio70_10_20};
    if (key == "electricity" || key == "ecl") return DatasetProfile{"electricity", 24, SplitRule::Ratio70_10_20};
    if (key == "traffic") return DatasetProfile{key, 24, SplitRule::Ratio70_10_20};
    return std::nullopt;
}

SeriesFrame load_csv(const std::filesystem::path& path, bool has_timestamp_column) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_csv: cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        for (auto f : split_fields(line)) names.emplace_back(f);
        have_header = true;
        break;
    }
    if (!have_header) throw ParseError("load_csv: " + path.string() + " is empty");

    const std::size_t first_value = has_timestamp_column ? 1 : 0;
    if (names.size() <= first_value) throw ParseError("load_csv: " + path.string() + " has no value columns");

    SeriesFrame frame;
    frame.channel_names.assign(names.begin() + static_cast<std::ptrdiff_t>(first_value), names.end());
    if (has_timestamp_column) frame.timestamps.emplace();
    const std::size_t channels = frame.channel_names.size();

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != names.size())
            throw ParseError("load_csv: " + path.string() + " row " + std::to_string(line_no) + ": expected " +
                             std::to_string(names.size()) + " columns, got " + std::to_string(fields.size()));
        if (has_timestamp_column) frame.timestamps->emplace_back(fields[0]);
        for (std::size_t c = first_value; c < fields.size(); ++c) {
            const auto v = parse_double(fields[c]);
            if (!v || !std::isfinite(*v))
                throw ParseError("load_csv: " + path.string() + " row " + std::to_string(line_no) + ", column '" +
                                 names[c] + "': not a finite number: '" + std::string(fields[c]) + "'");
            values.push_back(*v);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("load_csv: " + path.string() + " has a header but no data rows");

    frame.values = RealMatrix(rows, channels);
    std::copy(values.begin(), values.end(), frame.values.data().begin());
    return frame;
}

std::vector<bool> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_labels: cannot open " + path.string());
    std::vector<bool> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto field = trim(line);
        if (field.empty()) continue;
        // Take the last comma-separated field so "timestamp,label" files also work.
        if (const auto pos = field.rfind(','); pos != std::string_view::npos) field = trim(field.substr(pos + 1));
        const auto v = parse_double(field);
        if (!v) {
            if (labels.empty() && line_no == 1) continue; // header
            throw ParseError("load_labels: " + path.string() + " row " + std::to_string(line_no) +
                             ": not a label: '" + std::string(field) + "'");
        }
        labels.push_back(*v != 0.0);
    }
    return labels;
}

std::vector<bool> take_label_column(SeriesFrame& frame, std::string_view column) {
    const auto it = std::find(frame.channel_names.begin(), frame.channel_names.end(), column);
    if (it == frame.channel_names.end())
        throw ParseError("take_label_column: no column named '" + std::string(column) + "'");
    const auto col = static_cast<std::size_t>(it - frame.channel_names.begin());
    if (frame.channels() < 2) throw ParseError("take_label_column: the label column is the only column");

    std::vector<bool> labels(frame.length());
    RealMatrix rest(frame.length(), frame.channels() - 1);
    for (std::size_t r = 0; r < frame.length(); ++r) {
        labels[r] = frame.values(r, col) != 0.0;
        for (std::size_t c = 0, k = 0; c < frame.channels(); ++c)
            if (c != col) rest(r, k++) = frame.values(r, c);
    }
    frame.values = std::move(rest);
    frame.channel_names.erase(it);
    return labels;
}

SplitRanges chrono_split(std::size_t length, const DatasetProfile& profile) {
    auto fixed = [&](std::size_t train, std::size_t val, std::size_t test) {
        if (length < train + val + test)
            throw InvalidArgument("chrono_split: " + profile.name + " needs " + std::to_string(train + val + test) +
                                  " rows, series has " + std::to_string(length));
        return SplitRanges{{0, train}, {train, train + val}, {train + val, train + val + test}};
    };
    switch (profile.split_rule) {
    case SplitRule::EttH:
        return fixed(12 * 30 * 24, 4 * 30 * 24, 4 * 30 * 24);
    case SplitRule::EttM:
        return fixed(12 * 30 * 24 * 4, 4 * 30 * 24 * 4, 4 * 30 * 24 * 4);
    case SplitRule::Ratio70_10_20: {
        const auto train = static_cast<std::size_t>(static_cast<double>(length) * 0.7);
        const auto test = static_cast<std::size_t>(static_cast<double>(length) * 0.2);
        if (train == 0 || test == 0 || train + test >= length)
            throw InvalidArgument("chrono_split: series of " + std::to_string(length) + " rows is too short");
        return SplitRanges{{0, train}, {train, length - test}, {length - test, length}};
    }
    }
    throw InvalidArgument("chrono_split: unknown split rule");
}

RowRange window_range(RowRange split, std::size_t lookback) {
    return {split.begin >= lookback ? split.begin - lookback : 0, split.end};
}

RealMatrix Standardizer::apply(const RealMatrix& values) const {
    if (values.cols() != mean.size()) throw ShapeError("standardize: channel count mismatch");
    RealMatrix out(values.rows(), values.cols());
    for (std::size_t r = 0; r < values.rows(); ++r)
        for (std::size_t c = 0; c < values.cols(); ++c) out(r, c) = (values(r, c) - mean[c]) / std[c];
    return out;
}

RealMatrix Standardizer::invert(const RealMatrix& values) const {
    if (values.cols() != mean.size()) throw ShapeError("destandardize: channel count mismatch");
    RealMatrix out(values.rows(), values.cols());
    for (std::size_t r = 0; r < values.rows(); ++r)
        for (std::size_t c = 0; c < values.cols(); ++c) out(r, c) = values(r, c) * std[c] + mean[c];
    return out;
}

std::pair<SeriesFrame, Standardizer> standardize(const SeriesFrame& frame, RowRange train) {
    if (train.size() == 0 || train.end > frame.length()) throw InvalidArgument("standardize: bad train range");
    const std::size_t channels = frame.channels();
    Standardizer st{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0)};
    const auto n = static_cast<double>(train.size());
    for (std::size_t r = train.begin; r < train.end; ++r)
        for (std::size_t c = 0; c < channels; ++c) st.mean[c] += frame.values(r, c);
    for (auto& m : st.mean) m /= n;
    for (std::size_t r = train.begin; r < train.end; ++r)
        for (std::size_t c = 0; c < channels; ++c) {
            const double d = frame.values(r, c) - st.mean[c];
            st.std[c] += d * d;
        }
    for (auto& s : st.std) {
        s = std::sqrt(s / n);
        if (s < kStandardizeEps) s = kStandardizeEps;
    }
    SeriesFrame out{st.apply(frame.values), frame.channel_names, frame.timestamps};
    return {std::move(out), std::move(st)};
}

SlidingWindows::SlidingWindows(std::shared_ptr<const RealMatrix> values, RowRange range, std::size_t lookback,
                               std::size_t horizon, model::Supervision supervision)
    : values_(std::move(values)), range_(range), lookback_(lookback), horizon_(horizon), supervision_(supervision) {
    if (!values_ || range_.end > values_->rows() || range_.begin > range_.end)
        throw InvalidArgument("make_windows: range outside the series");
    if (lookback_ == 0 || horizon_ == 0) throw InvalidArgument("make_windows: look-back and horizon must be >= 1");
    if (range_.size() < lookback_ + horizon_)
        throw InvalidArgument("make_windows: range of " + std::to_string(range_.size()) + " rows is shorter than " +
                              std::to_string(lookback_ + horizon_));
    count_ = range_.size() - lookback_ - horizon_ + 1;
}

Window SlidingWindows::at(std::size_t i) const {
    if (i >= count_) throw InvalidArgument("window index out of range");
    const std::size_t start = range_.begin + i;
    Window w;
    w.input = slice_rows(*values_, {start, start + lookback_});
    if (supervision_ == model::Supervision::BackcastAndForecast)
        w.target = slice_rows(*values_, {start, start + lookback_ + horizon_});
    else
        w.target = slice_rows(*values_, {start + lookback_, start + lookback_ + horizon_});
    return w;
}

SlidingWindows make_windows(const RealMatrix& values, RowRange range, std::size_t lookback, std::size_t horizon,
                            model::Supervision supervision) {
    return SlidingWindows(std::make_shared<const RealMatrix>(values), range, lookback, horizon, supervision);
}

RealMatrix slice_rows(const RealMatrix& values, RowRange range) {
    if (range.end > values.rows() || range.begin > range.end) throw ShapeError("slice_rows: range out of bounds");
    RealMatrix out(range.size(), values.cols());
    const auto src = values.data().subspan(range.begin * values.cols(), range.size() * values.cols());
    std::copy(src.begin(), src.end(), out.data().begin());
    return out;
}

std::string_view to_string(OutlierKind kind) {
    switch (kind) {
    case OutlierKind::GlobalPoint: return "global_point";
    case OutlierKind::ContextualPoint: return "contextual_point";
    case OutlierKind::Seasonal: return "seasonal";
    case OutlierKind::Trend: return "trend";
    case OutlierKind::Shapelet: return "shapelet";
    }
    return "unknown";
}

SynthDataset synth_anomaly(const SynthSpec& spec) {
    if (spec.length < 100) throw InvalidArgument("synth_anomaly: length must be >= 100");
    if (spec.channels == 0) throw InvalidArgument("synth_anomaly: channels must be >= 1");
    if (spec.train_len >= spec.length) throw InvalidArgument("synth_anomaly: train_len must be < length");
    if (spec.rate < 0.0 || spec.rate > 0.5) throw InvalidArgument("synth_anomaly: rate must be in [0, 0.5]");
    if (spec.period < 2 || spec.segment_len == 0) throw InvalidArgument("synth_anomaly: bad period or segment length");

    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const double signal_std = 1.0 / std::numbers::sqrt2; // std of a unit-amplitude sinusoid
    const std::size_t length = spec.length;
    const double omega = kTwoPi / static_cast<double>(spec.period);

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    std::bernoulli_distribution coin(0.5);

    SynthDataset out;
    out.train_len = spec.train_len;
    out.series.values = RealMatrix(length, spec.channels);
    out.series.labels.assign(length, false);

    std::vector<double> phases(spec.channels);
    for (std::size_t c = 0; c < spec.channels; ++c) {
        phases[c] = phase_dist(rng);
        for (std::size_t t = 0; t < length; ++t)
            out.series.values(t, c) = std::sin(omega * static_cast<double>(t) + phases[c]) + noise(rng);
    }

    const std::size_t test_len = length - spec.train_len;
    const auto budget = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(test_len)));
    constexpr std::size_t kGap = 5;

    for (std::size_t c = 0; c < spec.channels; ++c) {
        const double phase = phases[c];
        auto clean = [&](std::size_t t) { return std::sin(omega * static_cast<double>(t) + phase); };
        std::vector<RowRange> taken;
        std::size_t used = 0;
        std::size_t kind_index = c % 5;
        while (used < budget) {
            const auto kind = static_cast<OutlierKind>(kind_index % 5);
            ++kind_index;
            const bool point = kind == OutlierKind::GlobalPoint || kind == OutlierKind::ContextualPoint;
            const std::size_t len = point ? 1 : spec.segment_len;
            if (len > test_len) break;

            std::uniform_int_distribution<std::size_t> start_dist(spec.train_len, length - len);
            std::optional<RowRange> rows;
            for (int attempt = 0; attempt < 1000 && !rows; ++attempt) {
                const std::size_t s = start_dist(rng);
                const RowRange cand{s, s + len};
                const bool clash = std::any_of(taken.begin(), taken.end(), [&](const RowRange& r) {
                    return cand.begin < r.end + kGap && r.begin < cand.end + kGap;
                });
                if (!clash) rows = cand;
            }
            if (!rows) break;
            taken.push_back(*rows);
            used += len;

            auto& v = out.series.values;
            switch (kind) {
            case OutlierKind::GlobalPoint:
                v(rows->begin, c) += (coin(rng) ? 5.0 : -5.0) * signal_std;
                break;
            case OutlierKind::ContextualPoint: {
                // Stays inside the global range but sits far from the local cycle.
                const double s = clean(rows->begin);
                const double shifted = std::clamp(s - (s >= 0.0 ? 3.0 : -3.0) * signal_std, -1.0, 1.0);
                v(rows->begin, c) = shifted + noise(rng);
                break;
            }
            case OutlierKind::Seasonal:
                for (std::size_t t = rows->begin; t < rows->end; ++t)
                    v(t, c) = std::sin(2.0 * omega * static_cast<double>(t) + phase) + noise(rng);
                break;
            case OutlierKind::Trend:
                for (std::size_t t = rows->begin; t < rows->end; ++t)
                    v(t, c) += 2.0 * static_cast<double>(t - rows->begin + 1) / static_cast<double>(len);
                break;
            case OutlierKind::Shapelet:
                for (std::size_t t = rows->begin; t < rows->end; ++t)
                    v(t, c) = (clean(t) >= 0.0 ? 1.0 : -1.0) + noise(rng);
                break;
            }
            for (std::size_t t = rows->begin; t < rows->end; ++t) out.series.labels[t] = true;
            out.outliers.push_back({kind, c, *rows});
        }
    }
    return out;
}

} // namespace fits::data
