#pragma once

#include "fits/data.hpp"
#include "fits/model.hpp"
#include "fits/training.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fits::anomaly {

struct AnomalyScores {
    std::vector<double> scores; ///< per-timestep squared reconstruction error, channel-averaged
    std::vector<bool> coverage; ///< false where no window scored the timestep
};

struct DetectionReport {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    bool adjusted = false; ///< metrics computed after point adjustment
};

/// Keeps rows 0, factor, 2*factor, ...
RealMatrix downsample(const RealMatrix& window, std::size_t factor);

/// Stride-1 reconstruction windows over a row range: input is the downsampled window,
/// target the full window.
class ReconstructionWindows final : public data::WindowSource {
public:
    ReconstructionWindows(std::shared_ptr<const RealMatrix> values, data::RowRange range, std::size_t window,
                          std::size_t factor);
    std::size_t size() const override { return count_; }
    data::Window at(std::size_t i) const override;

private:
    std::shared_ptr<const RealMatrix> values_;
    data::RowRange range_;
    std::size_t window_;
    std::size_t factor_;
    std::size_t count_;
};

/// Window start rows used for scoring: every `window` rows, plus one window aligned to the
/// series end when the length is not a multiple of the window.
std::vector<std::size_t> scoring_starts(std::size_t length, std::size_t window);

/// Scores a T x C series with a reconstruction model (cfg.input_len * factor == window ==
/// cfg.output_len). Timesteps covered by two windows get the mean of both errors.
AnomalyScores score_series(const model::FitsConfig& cfg, const model::ComplexLinear& layer, const RealMatrix& series,
                           std::size_t window = 200, std::size_t factor = 4);

/// Marks a whole labeled segment as detected when any of its points is predicted.
std::vector<bool> point_adjust(const std::vector<bool>& pred, const std::vector<bool>& labels);

/// Pointwise precision/recall/F1/accuracy. Precision is 0 when nothing is predicted.
DetectionReport prf1(const std::vector<bool>& pred, const std::vector<bool>& labels);

/// score >= threshold
std::vector<bool> apply_threshold(std::span<const double> scores, double threshold);

inline constexpr std::size_t kMaxThresholdCandidates = 10000;

/// Sweeps up to `max_candidates` evenly spaced quantiles of the scores and returns the one
/// with the best point-adjusted F1 (ties go to the higher threshold).
DetectionReport select_threshold(std::span<const double> scores, const std::vector<bool>& labels,
                                 std::size_t max_candidates = kMaxThresholdCandidates);

struct DetectorFit {
    model::FitsConfig config;
    training::TrainResult result;
};

/// Trains a reconstruction model on the anomaly-free rows [0, train_len). The last fifth of
/// those rows (at least one window) is held out for early stopping.
DetectorFit fit_detector(std::shared_ptr<const RealMatrix> values, std::size_t train_len, std::size_t window,
                         std::size_t factor, const training::TrainSpec& spec);

struct Detection {
    AnomalyScores scores;
    DetectionReport report;
};

/// Scores `series` and picks the threshold against its own labels.
Detection detect(const model::FitsConfig& cfg, const model::ComplexLinear& layer, const RealMatrix& series,
                 const std::vector<bool>& labels, std::size_t window = 200, std::size_t factor = 4);

} // namespace fits::anomaly
