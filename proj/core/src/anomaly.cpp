#include "fits/anomaly.hpp"

#include "fits/error.hpp"

#include <algorithm>
#include <string>

namespace fits::anomaly {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) +
                         ")");
}

} // namespace

RealMatrix downsample(const RealMatrix& window, std::size_t factor) {
    if (factor == 0 || window.rows() % factor != 0)
        throw InvalidArgument("downsample: " + std::to_string(window.rows()) + " rows not divisible by factor " +
                              std::to_string(factor));
    RealMatrix out(window.rows() / factor, window.cols());
    for (std::size_t r = 0; r < out.rows(); ++r) {
        const auto src = window.row(r * factor);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

ReconstructionWindows::ReconstructionWindows(std::shared_ptr<const RealMatrix> values, data::RowRange range,
                                             std::size_t window, std::size_t factor)
    : values_(std::move(values)), range_(range), window_(window), factor_(factor) {
    if (!values_ || range_.end > values_->rows() || range_.begin > range_.end)
        throw InvalidArgument("reconstruction windows: range outside the series");
    if (factor_ == 0 || window_ % factor_ != 0)
        throw InvalidArgument("reconstruction windows: window not divisible by factor");
    if (range_.size() < window_) throw InvalidArgument("reconstruction windows: range shorter than one window");
    count_ = range_.size() - window_ + 1;
}

data::Window ReconstructionWindows::at(std::size_t i) const {
    if (i >= count_) throw InvalidArgument("window index out of range");
    auto target = data::slice_rows(*values_, {range_.begin + i, range_.begin + i + window_});
    auto input = downsample(target, factor_);
    return {std::move(input), std::move(target)};
}

std::vector<std::size_t> scoring_starts(std::size_t length, std::size_t window) {
    if (window == 0 || length < window)
        throw InvalidArgument("score_series: series of " + std::to_string(length) + " rows is shorter than window " +
                              std::to_string(window));
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + window <= length; s += window) starts.push_back(s);
    if (length % window != 0) starts.push_back(length - window);
    return starts;
}

AnomalyScores score_series(const model::FitsConfig& cfg, const model::ComplexLinear& layer, const RealMatrix& series,
                           std::size_t window, std::size_t factor) {
    if (factor == 0 || window % factor != 0)
        throw InvalidArgument("score_series: window " + std::to_string(window) + " not divisible by factor " +
                              std::to_string(factor));
    if (cfg.output_len != window || cfg.input_len * factor != window)
        throw ShapeError("score_series: model maps " + std::to_string(cfg.input_len) + " -> " +
                         std::to_string(cfg.output_len) + " steps, expected " + std::to_string(window / factor) +
                         " -> " + std::to_string(window));
    const std::size_t length = series.rows();
    const auto starts = scoring_starts(length, window);

    std::vector<double> sums(length, 0.0);
    std::vector<std::size_t> hits(length, 0);
    for (const auto start : starts) {
        const auto target = data::slice_rows(series, {start, start + window});
        const auto recon = model::fits_forward(downsample(target, factor), cfg, layer);
        for (std::size_t t = 0; t < window; ++t) {
            double err = 0.0;
            for (std::size_t c = 0; c < series.cols(); ++c) {
                const double d = recon(t, c) - target(t, c);
                err += d * d;
            }
            sums[start + t] += err / static_cast<double>(series.cols());
            ++hits[start + t];
        }
    }

    AnomalyScores out{std::vector<double>(length, 0.0), std::vector<bool>(length, false)};
    for (std::size_t t = 0; t < length; ++t)
        if (hits[t] > 0) {
            out.scores[t] = sums[t] / static_cast<double>(hits[t]);
            out.coverage[t] = true;
        }
    return out;
}

std::vector<bool> point_adjust(const std::vector<bool>& pred, const std::vector<bool>& labels) {
    check_lengths(pred.size(), labels.size(), "point_adjust");
    std::vector<bool> out = pred;
    std::size_t t = 0;
    while (t < labels.size()) {
        if (!labels[t]) {
            ++t;
            continue;
        }
        std::size_t end = t;
        bool hit = false;
        for (; end < labels.size() && labels[end]; ++end) hit = hit || pred[end];
        if (hit) std::fill(out.begin() + static_cast<std::ptrdiff_t>(t), out.begin() + static_cast<std::ptrdiff_t>(end), true);
        t = end;
    }
    return out;
}

DetectionReport prf1(const std::vector<bool>& pred, const std::vector<bool>& labels) {
    check_lengths(pred.size(), labels.size(), "prf1");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] && labels[i]) ++tp;
        else if (pred[i]) ++fp;
        else if (labels[i]) ++fn;
        else ++tn;
    }
    DetectionReport r;
    r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    r.accuracy = pred.empty() ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(pred.size());
    return r;
}

std::vector<bool> apply_threshold(std::span<const double> scores, double threshold) {
    std::vector<bool> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold;
    return out;
}

DetectionReport select_threshold(std::span<const double> scores, const std::vector<bool>& labels,
                                 std::size_t max_candidates) {
    check_lengths(scores.size(), labels.size(), "select_threshold");
    if (std::none_of(labels.begin(), labels.end(), [](bool b) { return b; }))
        throw InvalidArgument("select_threshold: labels contain no anomalies, recall is undefined");
    if (max_candidates == 0) throw InvalidArgument("select_threshold: need at least one candidate");

    // With point adjustment a segment counts as found once its highest score clears the
    // threshold, so each candidate only needs segment maxima and the negative scores.
    std::vector<std::pair<double, std::size_t>> segments; // (max score, length)
    std::vector<double> negatives;
    std::size_t positives = 0;
    for (std::size_t t = 0; t < labels.size();) {
        if (!labels[t]) {
            negatives.push_back(scores[t++]);
            continue;
        }
        double peak = scores[t];
        std::size_t end = t;
        while (end < labels.size() && labels[end]) peak = std::max(peak, scores[end++]);
        segments.emplace_back(peak, end - t);
        positives += end - t;
        t = end;
    }
    std::sort(segments.begin(), segments.end());
    std::sort(negatives.begin(), negatives.end());
    // suffix_len[i] = total length of segments i.. (those with peak >= segments[i].first)
    std::vector<std::size_t> suffix_len(segments.size() + 1, 0);
    for (std::size_t i = segments.size(); i-- > 0;) suffix_len[i] = suffix_len[i + 1] + segments[i].second;

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::size_t k = std::min(max_candidates, n);
    std::vector<double> candidates;
    candidates.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t idx = k == 1 ? n - 1 : i * (n - 1) / (k - 1);
        if (candidates.empty() || sorted[idx] != candidates.back()) candidates.push_back(sorted[idx]);
    }

    double best_f1 = -1.0;
    double best_threshold = candidates.front();
    for (const double thr : candidates) {
        const auto seg = std::lower_bound(segments.begin(), segments.end(), std::pair{thr, std::size_t{0}});
        const std::size_t tp = suffix_len[static_cast<std::size_t>(seg - segments.begin())];
        const auto fp = static_cast<std::size_t>(negatives.end() - std::lower_bound(negatives.begin(), negatives.end(), thr));
        const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        if (f1 >= best_f1) {
            best_f1 = f1;
            best_threshold = thr;
        }
    }

    auto report = prf1(point_adjust(apply_threshold(scores, best_threshold), labels), labels);
    report.threshold = best_threshold;
    report.adjusted = true;
    return report;
}

DetectorFit fit_detector(std::shared_ptr<const RealMatrix> values, std::size_t train_len, std::size_t window,
                         std::size_t factor, const training::TrainSpec& spec) {
    if (!values) throw InvalidArgument("fit_detector: no data");
    if (train_len > values->rows()) throw InvalidArgument("fit_detector: train_len exceeds series length");
    const std::size_t held_out = std::max(window, train_len / 5);
    if (train_len < held_out + window)
        throw InvalidArgument("fit_detector: need at least " + std::to_string(held_out + window) +
                              " training rows, got " + std::to_string(train_len));
    const std::size_t split = train_len - held_out;
    DetectorFit fit{model::FitsConfig::reconstruction(window, factor, values->cols()), {}};
    const ReconstructionWindows train_w(values, {0, split}, window, factor);
    const ReconstructionWindows val_w(values, {split, train_len}, window, factor);
    fit.result = training::train(model::init_params(fit.config, spec.seed), train_w, val_w, fit.config, spec);
    return fit;
}

Detection detect(const model::FitsConfig& cfg, const model::ComplexLinear& layer, const RealMatrix& series,
                 const std::vector<bool>& labels, std::size_t window, std::size_t factor) {
    Detection d;
    d.scores = score_series(cfg, layer, series, window, factor);
    d.report = select_threshold(d.scores.scores, labels);
    return d;
}

} // namespace fits::anomaly
