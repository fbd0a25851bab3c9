#include "fits/training.hpp"

#include "fits/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace fits::training {

using model::ComplexLinear;
using model::FitsConfig;

void TrainSpec::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("train spec: learning_rate must be > 0");
    if (batch_size == 0) throw InvalidArgument("train spec: batch_size must be >= 1");
    if (patience == 0) throw InvalidArgument("train spec: patience must be >= 1");
    if (max_epochs == 0) throw InvalidArgument("train spec: max_epochs must be >= 1");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || !(eps_adam > 0.0))
        throw InvalidArgument("train spec: Adam constants out of range");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainSpec& spec) {
    if (params.size() != grads.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    if (state.m.empty() && state.v.empty() && state.t == 0) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw ShapeError("adam_step: optimizer state does not match the parameter vector");

    ++state.t;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(spec.beta1, t);
    const double correction2 = 1.0 - std::pow(spec.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = spec.beta1 * state.m[i] + (1.0 - spec.beta1) * g;
        state.v[i] = spec.beta2 * state.v[i] + (1.0 - spec.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= spec.learning_rate * m_hat / (std::sqrt(v_hat) + spec.eps_adam);
    }
}

Metrics evaluate(const ComplexLinear& layer, const data::WindowSource& windows, const FitsConfig& cfg) {
    const std::size_t region = cfg.task == model::Task::Forecast ? cfg.horizon() : cfg.output_len;
    const std::size_t out_offset = cfg.output_len - region;
    Metrics m;
    double sq = 0.0;
    double abs = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto w = windows.at(i);
        if (w.target.rows() < region) throw ShapeError("evaluate: target shorter than the evaluation region");
        const std::size_t target_offset = w.target.rows() - region;
        const auto pred = model::fits_forward(w.input, cfg, layer);
        for (std::size_t t = 0; t < region; ++t)
            for (std::size_t c = 0; c < pred.cols(); ++c) {
                const double e = pred(out_offset + t, c) - w.target(target_offset + t, c);
                sq += e * e;
                abs += std::abs(e);
            }
        m.count += region * pred.cols();
    }
    if (m.count > 0) {
        m.mse = sq / static_cast<double>(m.count);
        m.mae = abs / static_cast<double>(m.count);
    }
    return m;
}

TrainResult train(ComplexLinear initial, const data::WindowSource& train_windows,
                  const data::WindowSource& val_windows, const FitsConfig& cfg, const TrainSpec& spec) {
    spec.validate();
    if (train_windows.size() == 0) throw InvalidArgument("train: empty training split");
    if (val_windows.size() == 0) throw InvalidArgument("train: empty validation split");

    TrainResult result;
    result.layer = initial;
    ComplexLinear current = std::move(initial);
    AdamState adam;
    std::mt19937_64 rng(spec.seed);

    std::vector<std::size_t> order(train_windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<RealMatrix> inputs;
    std::vector<RealMatrix> targets;
    std::size_t stale_epochs = 0;

    for (std::size_t epoch = 1; epoch <= spec.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
            const std::size_t stop = std::min(order.size(), start + spec.batch_size);
            inputs.clear();
            targets.clear();
            for (std::size_t k = start; k < stop; ++k) {
                auto w = train_windows.at(order[k]);
                inputs.push_back(std::move(w.input));
                targets.push_back(std::move(w.target));
            }
            const auto g = model::fits_backward(inputs, targets, cfg, current);
            if (!std::isfinite(g.loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                                   std::to_string(start) + "; lower the learning rate or check the data");
            loss_sum += g.loss * static_cast<double>(stop - start);
            adam_step(current.reals(), g.grad.reals(), adam, spec);
        }

        const double val = evaluate(current, val_windows, cfg).mse;
        if (!std::isfinite(val))
            throw NumericError("train: non-finite validation loss at epoch " + std::to_string(epoch));
        result.history.push_back({epoch, loss_sum / static_cast<double>(order.size()), val});

        const bool first = result.best_epoch == 0;
        if (first || val < result.best_val_mse - 1e-6 * std::abs(result.best_val_mse)) {
            result.best_val_mse = val;
            result.best_epoch = epoch;
            result.layer = current;
            stale_epochs = 0;
        } else if (++stale_epochs >= spec.patience) {
            break;
        }
    }
    return result;
}

std::vector<SeedRun> run_forecast(const ForecastDataset& dataset, const FitsConfig& cfg, const TrainSpec& spec) {
    if (!dataset.values) throw InvalidArgument("run_forecast: dataset has no values");
    const std::size_t lookback = cfg.input_len;
    const std::size_t horizon = cfg.horizon();
    const data::SlidingWindows train_windows(dataset.values, dataset.splits.train, lookback, horizon, cfg.supervision);
    const data::SlidingWindows val_windows(dataset.values, data::window_range(dataset.splits.val, lookback), lookback,
                                           horizon, cfg.supervision);
    const data::SlidingWindows test_windows(dataset.values, data::window_range(dataset.splits.test, lookback),
                                            lookback, horizon, cfg.supervision);

    std::vector<SeedRun> runs;
    for (const auto seed : spec.seeds_for_reporting) {
        TrainSpec seeded = spec;
        seeded.seed = seed;
        SeedRun run;
        run.seed = seed;
        run.result = train(model::init_params(cfg, seed), train_windows, val_windows, cfg, seeded);
        run.val = evaluate(run.result.layer, val_windows, cfg);
        run.test = evaluate(run.result.layer, test_windows, cfg);
        runs.push_back(std::move(run));
    }
    return runs;
}

std::size_t select_row(std::span<const GridRow> rows) {
    if (rows.empty()) throw InvalidArgument("select_row: no rows");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = rows[best];
        if (a.val_mse < b.val_mse ||
            (a.val_mse == b.val_mse &&
             (a.complex_entries < b.complex_entries ||
              (a.complex_entries == b.complex_entries && a.look_back < b.look_back))))
            best = i;
    }
    return best;
}

GridResult grid_search(const ForecastDataset& dataset, const GridSpec& grid, const TrainSpec& spec,
                       std::span<const GridRow> completed, const std::function<void(const GridRow&)>& on_row) {
    if (grid.look_backs.empty() || grid.harmonics.empty() || grid.supervisions.empty())
        throw InvalidArgument("grid_search: every grid axis needs at least one value");
    if (spec.seeds_for_reporting.empty()) throw InvalidArgument("grid_search: no seeds");
    const std::size_t channels = dataset.values->cols();

    GridResult result;
    std::vector<std::size_t> pending;
    for (const auto look_back : grid.look_backs)
        for (const auto harmonic : grid.harmonics)
            for (const auto supervision : grid.supervisions) {
                GridRow row{look_back, harmonic, supervision};
                const auto cached = std::find_if(completed.begin(), completed.end(),
                                                 [&](const GridRow& r) { return r.same_combination(row); });
                if (cached != completed.end()) {
                    row = *cached;
                } else {
                    pending.push_back(result.rows.size());
                }
                result.rows.push_back(row);
            }

    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            GridRow& row = result.rows[pending[k]];
            try {
                const auto cfg = FitsConfig::forecasting(row.look_back, grid.horizon, dataset.period, row.harmonic,
                                                         row.supervision, channels);
                const auto runs = run_forecast(dataset, cfg, spec);
                row.complex_entries = model::param_count(cfg).complex_entries;
                double val = 0.0;
                double test = 0.0;
                for (const auto& run : runs) {
                    val += run.val.mse;
                    test += run.test.mse;
                    row.epochs_ran = std::max(row.epochs_ran, run.result.history.size());
                }
                row.val_mse = val / static_cast<double>(runs.size());
                row.test_mse = test / static_cast<double>(runs.size());
                std::lock_guard lock(mutex);
                if (on_row) on_row(row);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
                next = pending.size();
                return;
            }
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(grid.threads, pending.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    result.selected = select_row(result.rows);
    return result;
}

} // namespace fits::training
