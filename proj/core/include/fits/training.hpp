#pragma once

#include "fits/data.hpp"
#include "fits/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace fits::training {

struct TrainSpec {
    double learning_rate = 5e-4;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds_for_reporting = {2021, 2022, 2023, 2024, 2025};

    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

/// One bias-corrected Adam update. Complex parameters are updated as their real scalars.
/// An empty state is sized on first use.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainSpec& spec);

struct EpochRecord {
    std::size_t epoch = 0; ///< 1-based
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    model::ComplexLinear layer; ///< parameters of the best validation epoch
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_mse = std::numeric_limits<double>::infinity();
};

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    std::size_t count = 0; ///< scored values
};

/// Error over the evaluation region: the forecast horizon for forecasting configs, the
/// whole output for reconstruction. Targets may be either L_out or H rows long.
Metrics evaluate(const model::ComplexLinear& layer, const data::WindowSource& windows, const model::FitsConfig& cfg);

/// Seeded mini-batch Adam with early stopping on validation MSE. The returned layer is the
/// best validation epoch's. Throws NumericError on a non-finite loss.
TrainResult train(model::ComplexLinear initial, const data::WindowSource& train_windows,
                  const data::WindowSource& val_windows, const model::FitsConfig& cfg, const TrainSpec& spec);

/// A standardized series with its chronological splits.
struct ForecastDataset {
    std::shared_ptr<const RealMatrix> values;
    data::SplitRanges splits;
    std::size_t period = 1;
};

struct SeedRun {
    std::uint64_t seed = 0;
    TrainResult result;
    Metrics val;
    Metrics test;
};

/// Trains one model per seed in spec.seeds_for_reporting and scores val/test horizons.
std::vector<SeedRun> run_forecast(const ForecastDataset& dataset, const model::FitsConfig& cfg, const TrainSpec& spec);

struct GridSpec {
    std::vector<std::size_t> look_backs = {90, 180, 360, 720};
    std::vector<std::size_t> harmonics;
    std::vector<model::Supervision> supervisions = {model::Supervision::BackcastAndForecast};
    std::size_t horizon = 96;
    std::size_t threads = 1;
};

struct GridRow {
    std::size_t look_back = 0;
    std::size_t harmonic = 0;
    model::Supervision supervision = model::Supervision::BackcastAndForecast;
    double val_mse = 0.0;  ///< mean over reporting seeds
    double test_mse = 0.0; ///< mean over reporting seeds
    std::size_t complex_entries = 0;
    std::size_t epochs_ran = 0; ///< largest epoch count over seeds

    bool same_combination(const GridRow& other) const noexcept {
        return look_back == other.look_back && harmonic == other.harmonic && supervision == other.supervision;
    }
};

struct GridResult {
    std::vector<GridRow> rows;
    std::size_t selected = 0;
};

/// argmin val_mse; ties go to fewer complex entries, then the shorter look-back.
std::size_t select_row(std::span<const GridRow> rows);

/// Trains every (look-back, harmonic, supervision) combination. Rows found in `completed`
/// are reused instead of retrained; `on_row` fires after each newly trained row.
GridResult grid_search(const ForecastDataset& dataset, const GridSpec& grid, const TrainSpec& spec,
                       std::span<const GridRow> completed = {},
                       const std::function<void(const GridRow&)>& on_row = {});

} // namespace fits::training
